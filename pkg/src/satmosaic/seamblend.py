"""Seam removal by mask-constrained blending of two tile layers.

For one output tile the engine holds two renderings: t, a single generator
evaluation aligned to the tile (seamless inside, seamed at its borders),
and s, a window of the shifted-lattice mosaic (seamed along its center
cross, continuous with neighbors at the borders). A mask m in [0, 1]
chooses s where 1 and t where 0:

    m' = m * (1 - c) + c          constraint: m' = 1 wherever c = 1
    y' = s * m' + t * (1 - m')    per-pixel convex blend

c is a constant binary mask, 0 inside a centered disc and 1 outside, so the
border ring of y' is copied from s bit-exactly; adjacent output tiles are
therefore continuations of one shifted-lattice evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import EngineConfig
from .errors import ConfigError, ModelError
from .scalespace import TileAddress
from .vectormap import LabelTile


@dataclass(frozen=True)
class ConstraintMask:
    """Binary mask, 0 exactly on the centered disc, 1 outside."""

    values: np.ndarray
    interior_radius: float

    def __post_init__(self) -> None:
        vals = np.unique(self.values)
        if not np.isin(vals, (0.0, 1.0)).all():
            raise ValueError("constraint mask must be binary")


def make_constraint_mask(tile_size: int, interior_radius: float) -> ConstraintMask:
    if not 0 < interior_radius < tile_size / 2:
        raise ConfigError(f"interior_radius {interior_radius} must leave a border ring")
    c = (np.arange(tile_size) - (tile_size - 1) / 2.0) ** 2
    dist2 = c[:, None] + c[None, :]
    values = np.where(dist2 <= interior_radius ** 2, 0.0, 1.0)
    return ConstraintMask(values, interior_radius)


@dataclass(frozen=True)
class BlendInputs:
    x: LabelTile
    s: np.ndarray
    t: np.ndarray

    def __post_init__(self) -> None:
        n = self.x.cls.shape[0]
        if self.s.shape != (n, n, 3) or self.t.shape != (n, n, 3):
            raise ValueError(
                f"blend inputs must be ({n}, {n}, 3), got s={self.s.shape} t={self.t.shape}")


def assemble_s(out_addr: TileAddress, s_outputs) -> np.ndarray:
    """Window of the stitched shifted-lattice mosaic over an OUT tile.

    s_outputs must be the generator results for s_cells_for_tile(out_addr)
    in (x,y), (x+1,y), (x,y+1), (x+1,y+1) order. Each quadrant of the result
    is the opposite quadrant of one evaluation, so internal discontinuities
    lie only on the center row/column while borders continue into the
    neighbors' windows.
    """
    s00, s10, s01, s11 = s_outputs
    n = s00.shape[0]
    for tile in (s10, s01, s11):
        if tile.shape != s00.shape:
            raise ValueError(f"S outputs disagree in shape for {out_addr}")
    h = n // 2
    out = np.empty_like(s00)
    out[:h, :h] = s00[h:, h:]
    out[:h, h:] = s10[h:, :h]
    out[h:, :h] = s01[:h, h:]
    out[h:, h:] = s11[:h, :h]
    return out


def constrain_mask(m: np.ndarray, c: ConstraintMask) -> np.ndarray:
    """m' = m * (1 - c) + c; identically 1 wherever c is 1."""
    if m.shape != c.values.shape:
        raise ValueError(f"mask shape {m.shape} != constraint shape {c.values.shape}")
    return m * (1.0 - c.values) + c.values


def blend(s: np.ndarray, t: np.ndarray, m_prime: np.ndarray) -> np.ndarray:
    """y' = s * m' + t * (1 - m'), applied per channel."""
    if s.shape != t.shape:
        raise ValueError(f"blend inputs disagree: {s.shape} vs {t.shape}")
    m = m_prime[..., None] if s.ndim == 3 else m_prime
    return s * m + t * (1.0 - m)


def soft_mask_provider(inputs: BlendInputs, cfg: EngineConfig) -> np.ndarray:
    """Fixed radial mask: 0 inside r0, 1 outside r1, smoothstep between."""
    n = inputs.x.cls.shape[0]
    r0, r1 = cfg.soft_mask_r0, cfg.soft_mask_r1
    c = (np.arange(n) - (n - 1) / 2.0) ** 2
    dist = np.sqrt(c[:, None] + c[None, :])
    t = np.clip((dist - r0) / (r1 - r0), 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _band_range(band_center: float, half: float, n: int) -> tuple[int, int]:
    lo = int(np.ceil(band_center - half))
    hi = int(np.floor(band_center + half))
    if lo < 0 or hi > n - 1 or lo >= hi:
        raise ConfigError(
            f"cut corridor [{lo}, {hi}] does not fit a {n}px tile; reduce buffer or radius")
    return lo, hi


def _min_cost_cut(cost_band: np.ndarray) -> np.ndarray:
    """Minimum-cost monotone path along axis 1 of a (band, length) cost grid.

    The path picks one band row per column and may move at most one row per
    column step. Ties prefer the row closest to the band centerline, then
    the lower row index, at both the terminal column and each predecessor
    choice; with an all-zero cost grid the cut is the centerline.
    """
    b, length = cost_band.shape
    center = (b - 1) / 2.0

    def pref_key(r: int) -> tuple[float, int]:
        return (abs(r - center), r)

    # Per-row predecessor candidates in preference order, padded to 3.
    cand = np.zeros((b, 3), dtype=np.intp)
    valid = np.zeros((b, 3), dtype=bool)
    for r in range(b):
        opts = sorted((c for c in (r - 1, r, r + 1) if 0 <= c < b), key=pref_key)
        for k, c in enumerate(opts):
            cand[r, k] = c
            valid[r, k] = True

    dist = np.empty_like(cost_band)
    choice = np.zeros((b, length), dtype=np.intp)
    dist[:, 0] = cost_band[:, 0]
    for x in range(1, length):
        prev = dist[:, x - 1]
        vals = np.where(valid, prev[cand], np.inf)
        pick = np.argmin(vals, axis=1)  # first minimum = highest preference
        choice[:, x] = pick
        dist[:, x] = cost_band[:, x] + vals[np.arange(b), pick]

    end = min(range(b), key=lambda r: (dist[r, length - 1],) + pref_key(r))
    path = np.empty(length, dtype=np.intp)
    path[length - 1] = end
    for x in range(length - 1, 0, -1):
        path[x - 1] = cand[path[x], choice[path[x], x]]
    return path


def boundary_cut_provider(inputs: BlendInputs, cfg: EngineConfig) -> np.ndarray:
    """Binary mask from four minimum-error cuts around the constraint disc.

    Within a square-annulus corridor of width cut_buffer_px centered on the
    constraint-disc boundary, four monotone minimum-cost paths (one row per
    column for top/bottom, one column per row for left/right) cut through
    the per-pixel cost sum_channels |s - t|. The mask is 1 outside the
    closed curve (including the cut pixels) and 0 strictly inside.
    """
    n = inputs.x.cls.shape[0]
    radius = cfg.constraint_radius
    half = cfg.cut_buffer_px / 2.0
    center = (n - 1) / 2.0
    lo_near, hi_near = _band_range(center - radius, half, n)
    lo_far, hi_far = _band_range(center + radius, half, n)
    if hi_near >= lo_far:
        raise ConfigError("cut corridors overlap; buffer too large for the tile")

    cost = np.abs(inputs.s - inputs.t).sum(axis=2)
    top = lo_near + _min_cost_cut(cost[lo_near:hi_near + 1, :])
    bottom = lo_far + _min_cost_cut(cost[lo_far:hi_far + 1, :])
    left = lo_near + _min_cost_cut(cost[:, lo_near:hi_near + 1].T)
    right = lo_far + _min_cost_cut(cost[:, lo_far:hi_far + 1].T)

    rows = np.arange(n)[:, None]
    cols = np.arange(n)[None, :]
    inside = ((rows > top[None, :]) & (rows < bottom[None, :])
              & (cols > left[:, None]) & (cols < right[:, None]))
    return np.where(inside, 0.0, 1.0)


class ModelMaskProvider:
    """Inference adapter for a learned mask network.

    Expected signature: module(features) -> (1, 1, N, N) with features
    (1, 14 + 3 + 3, N, N): one-hot labels, s, t. Outputs outside [0, 1] are
    clamped and counted in clamp_warnings.
    """

    def __init__(self, path, cfg: EngineConfig):
        from .generator import load_torchscript

        self.cfg = cfg
        self.module = load_torchscript(path)
        self.clamp_warnings = 0

    def __call__(self, inputs: BlendInputs, cfg: EngineConfig) -> np.ndarray:
        import torch

        n = inputs.x.cls.shape[0]
        onehot = np.eye(14, dtype=np.float32)[inputs.x.cls].transpose(2, 0, 1)
        features = np.concatenate([
            onehot,
            inputs.s.astype(np.float32).transpose(2, 0, 1),
            inputs.t.astype(np.float32).transpose(2, 0, 1),
        ])[None]
        with torch.no_grad():
            out = self.module(torch.from_numpy(features))
        mask = out.detach().cpu().numpy()
        if mask.shape != (1, 1, n, n):
            raise ModelError(f"mask model output shape {mask.shape} != (1, 1, {n}, {n})")
        mask = mask[0, 0].astype(np.float64)
        if mask.min() < 0.0 or mask.max() > 1.0:
            self.clamp_warnings += 1
            mask = np.clip(mask, 0.0, 1.0)
        return mask


def get_mask_provider(name: str, cfg: EngineConfig):
    if name == "soft":
        return soft_mask_provider
    if name == "cut":
        return boundary_cut_provider
    if name == "model":
        if cfg.mask_model_path is None:
            raise ConfigError("mask_provider 'model' requires mask_model_path")
        return ModelMaskProvider(cfg.mask_model_path, cfg)
    raise ConfigError(f"unknown mask provider {name!r}")


def seamless_tile(inputs: BlendInputs, provider, c: ConstraintMask,
                  cfg: EngineConfig, return_mask: bool = False):
    """blend(s, t, constrain_mask(provider(inputs), c)).

    The ring where c = 1 equals s exactly, independent of the provider.
    """
    m = provider(inputs, cfg)
    m_prime = constrain_mask(m, c)
    y = blend(inputs.s, inputs.t, m_prime)
    if return_mask:
        return y, m_prime
    return y
