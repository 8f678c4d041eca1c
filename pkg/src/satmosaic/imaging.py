"""PNG encoding/decoding for tiles, labels and masks."""

from __future__ import annotations

import hashlib
import io

import numpy as np
from PIL import Image


def rgb_to_bytes(tile: np.ndarray) -> np.ndarray:
    """[0, 1] float RGB to uint8 with round-half-away quantization."""
    return (np.clip(tile, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def rgb_png(tile: np.ndarray) -> bytes:
    img = Image.fromarray(rgb_to_bytes(tile), mode="RGB")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def labels_png(cls: np.ndarray, palette) -> bytes:
    """Paletted PNG: pixel index = class id, palette = class colors."""
    img = Image.fromarray(cls.astype(np.uint8), mode="P")
    flat = [channel for color in palette for channel in color]
    img.putpalette(flat)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def gray_png(mask: np.ndarray) -> bytes:
    img = Image.fromarray(rgb_to_bytes(mask), mode="L")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def png_to_array(data: bytes) -> np.ndarray:
    """Decode PNG bytes to float64 in [0, 1] (RGB or grayscale)."""
    img = Image.open(io.BytesIO(data))
    if img.mode == "P":
        img = img.convert("RGB")
    return np.asarray(img).astype(np.float64) / 255.0


def load_image(path: str) -> np.ndarray:
    img = Image.open(path)
    if img.mode not in ("RGB", "L"):
        img = img.convert("RGB")
    return np.asarray(img).astype(np.float64) / 255.0


def save_image(path: str, tile: np.ndarray) -> None:
    if tile.ndim == 2:
        Image.fromarray(rgb_to_bytes(tile), mode="L").save(path)
    else:
        Image.fromarray(rgb_to_bytes(tile), mode="RGB").save(path)


def content_etag(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
