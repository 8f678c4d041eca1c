"""Per-tile generator contract and backends.

A generator turns (label tile, optional color guidance, style latent) into
a tile_size RGB image in [0, 1]. Every backend must be a pure function of
the request. The mock backend reproduces the failure mode the blending
stage exists to fix: independent evaluations are smooth internally but
discontinuous against each other at shared borders, because its value
noise lives in evaluation-local coordinates.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
from scipy import ndimage

from .config import EngineConfig
from .errors import GenerationError, ModelError
from .scalespace import TileAddress
from .vectormap import LabelTile

_MASK64 = 0xFFFFFFFFFFFFFFFF
_LAYER_CODE = {"S": 1, "T": 2, "OUT": 3}


@dataclass(frozen=True)
class StyleLatent:
    """Style code for one session; the vector is derived from the seed."""

    seed: int
    vector: tuple[float, ...] | None = None

    def resolve_vector(self, dim: int = 256) -> np.ndarray:
        if self.vector is not None:
            return np.asarray(self.vector, dtype=np.float64)
        rng = np.random.default_rng(np.random.SeedSequence([self.seed & _MASK64, 0x6C61]))
        return rng.standard_normal(dim)


@dataclass(frozen=True)
class GuidanceImage:
    rgb: np.ndarray  # (N, N, 3) float64 in [0, 1]
    present: bool

    def __post_init__(self) -> None:
        if self.rgb.ndim != 3 or self.rgb.shape[2] != 3:
            raise ValueError(f"guidance must be (N, N, 3), got {self.rgb.shape}")
        if self.present and (self.rgb.min() < 0.0 or self.rgb.max() > 1.0):
            raise ValueError("guidance values must lie in [0, 1]")

    @classmethod
    def absent(cls, tile_size: int = 256) -> "GuidanceImage":
        return cls(np.zeros((tile_size, tile_size, 3)), present=False)


@dataclass(frozen=True)
class GeneratorRequest:
    labels: LabelTile
    guidance: GuidanceImage
    latent: StyleLatent
    eval_id: TileAddress

    def __post_init__(self) -> None:
        n = self.labels.cls.shape[0]
        if self.guidance.rgb.shape[:2] != (n, n):
            raise ValueError("labels and guidance dimensions differ")
        # Guidance exists exactly below the coarsest level.
        if self.eval_id.z == 1 and self.guidance.present:
            raise ValueError("guidance must be absent at z=1")
        if self.eval_id.z > 1 and not self.guidance.present:
            raise ValueError(f"guidance is required at z={self.eval_id.z}")


class Generator(Protocol):
    def generate(self, req: GeneratorRequest) -> np.ndarray:
        """Return a (N, N, 3) float64 RGB tile in [0, 1]; deterministic."""
        ...


def _value_noise(shape_n: int, cells: int, entropy: list[int]) -> np.ndarray:
    """Bilinear value noise in [0, 1], (N, N, 3), local to one evaluation."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    lattice = rng.random((cells + 1, cells + 1, 3))
    pos = (np.arange(shape_n) + 0.5) / shape_n * cells
    i0 = np.floor(pos).astype(np.intp)
    frac = pos - i0
    fy, fx = frac[:, None, None], frac[None, :, None]
    ry0, ry1 = i0, i0 + 1
    v00 = lattice[ry0[:, None], i0[None, :]]
    v01 = lattice[ry0[:, None], i0[None, :] + 1]
    v10 = lattice[ry1[:, None], i0[None, :]]
    v11 = lattice[ry1[:, None], i0[None, :] + 1]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy) + bot * fy


class MockGenerator:
    """Deterministic procedural backend used for tests and demos.

    pixel = base_color(class) + amplitude * (noise - 1/2) + tint + vignette,
    then mixed toward the blurred guidance with weight w_guidance when
    guidance is present. Three border failure modes are reproduced:

    * value noise in evaluation-local coordinates decorrelates at shared
      borders (high-frequency discontinuity);
    * a constant per-evaluation tint drifts the overall color between
      uncoordinated evaluations;
    * a darkening ramp at the evaluation perimeter stands in for the
      padding artifacts of convolutional backends.

    Base colors, amplitude, tint and vignette are sized so values never
    leave [0, 1]; clipping would break the monotonicity properties.
    """

    def __init__(self, cfg: EngineConfig):
        self.cfg = cfg
        self._colors = np.asarray(cfg.base_colors, dtype=np.float64)

    def generate(self, req: GeneratorRequest) -> np.ndarray:
        cfg = self.cfg
        n = req.labels.cls.shape[0]
        addr = req.eval_id
        entropy = [
            req.latent.seed & _MASK64,
            addr.z,
            addr.x & _MASK64,
            addr.y & _MASK64,
            _LAYER_CODE[addr.layer.value],
            0x6E6F,
        ]
        noise = _value_noise(n, cfg.noise_cells, entropy)
        rng = np.random.default_rng(np.random.SeedSequence(entropy + [0x74]))
        tint = cfg.tint_amplitude * (rng.random(3) - 0.5)
        base = self._colors[req.labels.cls]
        tile = base + cfg.noise_amplitude * (noise - 0.5) + tint
        if cfg.vignette_depth > 0.0 and cfg.vignette_width > 0:
            idx = np.arange(n)
            edge_dist = np.minimum(idx, n - 1 - idx)
            d = np.minimum(edge_dist[:, None], edge_dist[None, :])
            ramp = np.minimum(d / cfg.vignette_width, 1.0)
            tile = tile - (cfg.vignette_depth * (1.0 - ramp))[..., None]
        if req.guidance.present and cfg.w_guidance > 0.0:
            w = cfg.w_guidance
            tile = tile * (1.0 - w) + req.guidance.rgb * w
        return tile


def bilinear_upsample(img: np.ndarray, factor: int) -> np.ndarray:
    """Upsample (H, W[, C]) by an integer factor, pixel-center aligned."""
    h, w = img.shape[:2]
    out_y = (np.arange(h * factor) + 0.5) / factor - 0.5
    out_x = (np.arange(w * factor) + 0.5) / factor - 0.5
    grid_y, grid_x = np.meshgrid(out_y, out_x, indexing="ij")
    coords = np.stack([grid_y, grid_x])
    if img.ndim == 2:
        return ndimage.map_coordinates(img, coords, order=1, mode="nearest")
    channels = [ndimage.map_coordinates(img[..., c], coords, order=1, mode="nearest")
                for c in range(img.shape[2])]
    return np.stack(channels, axis=-1)


def blur_guidance(crop: np.ndarray, cfg: EngineConfig, sigma: float = 8.0) -> GuidanceImage:
    """Turn a parent-level crop into a color guidance image.

    The crop (tile_size/f square) is bilinearly upsampled to tile_size and
    blurred with a separable Gaussian (sigma in full-resolution pixels,
    kernel radius 3*sigma, edges clamped) so that only color survives.
    """
    expected = cfg.scale.guidance_crop_size
    if crop.shape[:2] != (expected, expected):
        raise ValueError(f"guidance crop must be {expected}x{expected}, got {crop.shape[:2]}")
    up = bilinear_upsample(np.asarray(crop, dtype=np.float64), cfg.scale.f)
    blurred = np.empty_like(up)
    for c in range(3):
        tmp = ndimage.gaussian_filter1d(up[..., c], sigma, axis=0, mode="nearest", truncate=3.0)
        blurred[..., c] = ndimage.gaussian_filter1d(tmp, sigma, axis=1, mode="nearest", truncate=3.0)
    return GuidanceImage(np.clip(blurred, 0.0, 1.0), present=True)


def load_torchscript(path: str | Path):
    """Load a TorchScript module for inference; torch is an optional extra."""
    try:
        import torch
    except ImportError as exc:
        raise ModelError("the model backend requires the 'model' extra (torch)") from exc
    path = Path(path)
    if not path.exists():
        raise ModelError(f"model file not found: {path}")
    try:
        module = torch.jit.load(str(path), map_location="cpu")
    except Exception as exc:
        raise ModelError(f"failed to load model {path}: {exc}") from exc
    module.eval()
    return module


class TorchScriptGenerator:
    """Inference adapter over a serialized network.

    Expected signature: module(features, latent) -> (1, 3, N, N), where
    features is (1, 14 + 3, N, N): one-hot class labels plus guidance RGB
    (zeros when absent).
    """

    def __init__(self, path: str | Path, cfg: EngineConfig):
        self.cfg = cfg
        self.module = load_torchscript(path)

    def generate(self, req: GeneratorRequest) -> np.ndarray:
        import torch

        n = req.labels.cls.shape[0]
        onehot = np.eye(14, dtype=np.float32)[req.labels.cls].transpose(2, 0, 1)
        guidance = req.guidance.rgb.astype(np.float32).transpose(2, 0, 1)
        features = np.concatenate([onehot, guidance])[None]
        latent = req.latent.resolve_vector(self.cfg.latent_dim).astype(np.float32)[None]
        try:
            with torch.no_grad():
                out = self.module(torch.from_numpy(features), torch.from_numpy(latent))
        except Exception as exc:
            raise GenerationError(f"model inference failed: {exc}", req.eval_id) from exc
        result = out.detach().cpu().numpy()
        if result.shape != (1, 3, n, n):
            raise ModelError(
                f"model output shape {result.shape} != (1, 3, {n}, {n})", req.eval_id)
        return np.clip(result[0].transpose(1, 2, 0).astype(np.float64), 0.0, 1.0)


@dataclass
class BackendPool:
    """Fixed pool of generator instances, each exclusively owned per call."""

    backends: list
    _lock: threading.Lock = field(default_factory=threading.Lock)
    _free: list = field(default_factory=list)
    _available: threading.Condition | None = None

    def __post_init__(self) -> None:
        if not self.backends:
            raise ValueError("pool needs at least one backend")
        self._free = list(self.backends)
        self._available = threading.Condition(self._lock)

    def generate(self, req: GeneratorRequest) -> np.ndarray:
        with self._available:
            while not self._free:
                self._available.wait()
            backend = self._free.pop()
        try:
            return backend.generate(req)
        finally:
            with self._available:
                self._free.append(backend)
                self._available.notify()
