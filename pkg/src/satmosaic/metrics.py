"""Periodic seam metric over stitched tile mosaics.

The metric averages pixel columns (rows) that share the same position
within a tile period and reports, per in-tile offset pair, how much the
averages jump between adjacent offsets:

    D(x, y) = |mean(C_x) - mean(C_{x+1})| + |mean(R_y) - mean(R_{y+1})|

where C_a collects the pixel columns {a, a + tile_width, ...} of the
center-cropped image (tile_width/2 removed from every edge) and R_a does
the same for rows. A mosaic with sharp tile-aligned seams concentrates
energy in one offset pair; the summary max(D) - mean(D) is then large.
Summaries above the verdict threshold (default 0.002) indicate visible
seams.

Numeric conventions, pinned so an independent reference implementation can
match bit for bit:

* RGB converts to gray as fl(fl(fl(r + g) + b) / 3) per pixel (or the luma
  weights when configured: fl(fl(fl(.299r) + fl(.587g)) + fl(.114b))).
* Per-column sums accumulate down ascending rows, per-row sums across
  ascending columns, all in double precision.
* A set mean adds its per-line sums in ascending line order, then divides
  by the pixel count once.
* Offsets pair cyclically: the last in-tile offset compares against offset
  0, pairing each period's final column with the next period's first. The
  modular set keeps every offset mean over the same number of columns;
  unequal sample counts at the final offset would otherwise register as a
  spurious response on images only a few periods wide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MotConfig:
    tile_width: int = 256
    grayscale: str = "mean"  # "mean" or "luma"

    def __post_init__(self) -> None:
        if self.tile_width < 2:
            raise ValueError("tile_width must be >= 2")
        if self.grayscale not in ("mean", "luma"):
            raise ValueError(f"unknown grayscale mode {self.grayscale!r}")

    @property
    def crop(self) -> int:
        return self.tile_width // 2


@dataclass(frozen=True)
class MotField:
    """d[x, y] = column-offset term at x plus row-offset term at y."""

    d: np.ndarray

    def __post_init__(self) -> None:
        if (self.d < 0).any():
            raise ValueError("difference field entries must be >= 0")

    def argmax(self) -> tuple[int, int]:
        x, y = np.unravel_index(int(np.argmax(self.d)), self.d.shape)
        return int(x), int(y)


def to_gray(image: np.ndarray, cfg: MotConfig) -> np.ndarray:
    if image.ndim == 2:
        return image.astype(np.float64)
    if image.ndim == 3 and image.shape[2] == 3:
        r = image[..., 0].astype(np.float64)
        g = image[..., 1].astype(np.float64)
        b = image[..., 2].astype(np.float64)
        if cfg.grayscale == "mean":
            return (r + g + b) / 3.0
        return 0.299 * r + 0.587 * g + 0.114 * b
    raise ValueError(f"expected (H, W) or (H, W, 3) image, got {image.shape}")


def _offset_means(line_sums: np.ndarray, lines: int, other_extent: int,
                  tile_width: int) -> np.ndarray:
    """Mean pixel value of every offset set a = 0..tile_width-1."""
    means = np.empty(tile_width)
    for a in range(tile_width):
        sel = range(a, lines, tile_width)
        total = 0.0
        for idx in sel:
            total += line_sums[idx]
        means[a] = total / (len(sel) * other_extent)
    return means


def mot_field(image: np.ndarray, cfg: MotConfig = MotConfig()) -> MotField:
    """Difference field over in-tile offsets; see the module docstring.

    The image must be at least 2*tile_width on both sides, with values
    normalized to [0, 1].
    """
    tw = cfg.tile_width
    gray = to_gray(image, cfg)
    h, w = gray.shape
    if h < 2 * tw or w < 2 * tw:
        raise ValueError(f"image {w}x{h} smaller than 2*tile_width = {2 * tw}")
    crop = cfg.crop
    gray = gray[crop:h - crop, crop:w - crop]
    ch, cw = gray.shape

    col_sums = np.zeros(cw)
    for r in range(ch):  # ascending rows: order is part of the definition
        col_sums += gray[r]
    row_sums = np.zeros(ch)
    for c in range(cw):
        row_sums += gray[:, c]

    cmeans = _offset_means(col_sums, cw, ch, tw)
    rmeans = _offset_means(row_sums, ch, cw, tw)
    col_term = np.abs(cmeans - np.roll(cmeans, -1))
    row_term = np.abs(rmeans - np.roll(rmeans, -1))
    return MotField(col_term[:, None] + row_term[None, :])


def mot_summary(field: MotField) -> float:
    """max over the difference field minus its mean."""
    return float(field.d.max() - field.d.mean())


def seam_verdict(summary: float, threshold: float = 0.002) -> str:
    """'seams' iff the summary strictly exceeds the threshold."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return "seams" if summary > threshold else "no_seams"
