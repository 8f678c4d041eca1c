"""Scale hierarchy, tile addressing and the evaluation-cost model.

The engine renders a pyramid of levels z = 1..z_max. Every level uses the
same pixel resolution (tile_size x tile_size) but each level covers 1/f of
the linear extent of its parent, so level z has f^2 times as many tiles per
unit area as level z-1.

Two generator lattices exist per level:

* T / OUT lattice: tile (z, x, y) covers [x*w, (x+1)*w) x [y*w, (y+1)*w)
  with w = z1_tile_meters / f**(z-1). OUT is the blended-result grid on the
  same lattice as T.
* S lattice: the same grid shifted by s_offset (default half a tile towards
  negative x/y), so that the corners of every OUT tile fall in the interior
  of S cells.

All grid indices are signed; the addressable plane is unbounded.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError
from .geometry import PixelRect, Rect


class Layer(enum.Enum):
    S = "S"
    T = "T"
    OUT = "OUT"


@dataclass(frozen=True)
class ScaleConfig:
    """Geometry constants shared by every module that touches tiles."""

    tile_size: int = 256
    f: int = 4
    z_max: int = 3
    z1_tile_meters: float = 1000.0
    s_offset: tuple[float, float] = (-0.5, -0.5)

    def __post_init__(self) -> None:
        if self.tile_size <= 0 or self.tile_size % 4 != 0:
            raise ConfigError(f"tile_size must be a positive multiple of 4, got {self.tile_size}")
        if self.f < 2:
            raise ConfigError(f"scale factor f must be >= 2, got {self.f}")
        if self.z_max < 1:
            raise ConfigError(f"z_max must be >= 1, got {self.z_max}")
        if self.tile_size % self.f != 0:
            raise ConfigError("tile_size must be divisible by f (guidance crop size)")
        # S-lattice pixel alignment against the parent level pixel grid.
        for off in self.s_offset:
            shift_px = off * self.tile_size / self.f
            if shift_px != int(shift_px):
                raise ConfigError(f"s_offset {off} does not align with the parent pixel grid")

    def tile_meters(self, z: int) -> float:
        """Width in meters of one tile at level z."""
        return self.z1_tile_meters / self.f ** (z - 1)

    def meters_per_pixel(self, z: int) -> float:
        return self.tile_meters(z) / self.tile_size

    @property
    def guidance_crop_size(self) -> int:
        return self.tile_size // self.f


@dataclass(frozen=True)
class TileAddress:
    """Key of all caching and serving: level, signed grid indices, layer."""

    z: int
    x: int
    y: int
    layer: Layer = Layer.OUT

    def with_layer(self, layer: Layer) -> "TileAddress":
        return TileAddress(self.z, self.x, self.y, layer)

    def __str__(self) -> str:
        return f"{self.layer.value}({self.z},{self.x},{self.y})"


@dataclass(frozen=True)
class CostReport:
    modeled_map2sat: float
    modeled_seam2cont: float
    actual_generator_evals: int
    actual_blend_evals: int

    def __post_init__(self) -> None:
        if self.actual_generator_evals < 0 or self.actual_blend_evals < 0:
            raise ValueError("actual evaluation counts must be non-negative")


def validate_address(addr: TileAddress, cfg: ScaleConfig) -> None:
    if not 1 <= addr.z <= cfg.z_max:
        raise ConfigError(f"level {addr.z} outside 1..{cfg.z_max}")


def tile_world_rect(addr: TileAddress, cfg: ScaleConfig) -> Rect:
    """World rectangle in meters covered by a tile.

    T/OUT tiles sit on the unshifted lattice; S tiles are the same rect
    translated by s_offset tile widths.
    """
    validate_address(addr, cfg)
    w = cfg.tile_meters(addr.z)
    rect = Rect(addr.x * w, addr.y * w, (addr.x + 1) * w, (addr.y + 1) * w)
    if addr.layer is Layer.S:
        rect = rect.translated(cfg.s_offset[0] * w, cfg.s_offset[1] * w)
    return rect


def s_cells_for_tile(addr: TileAddress) -> tuple[TileAddress, ...]:
    """The four S cells whose quarters tile an OUT tile's rect.

    Order is (x,y), (x+1,y), (x,y+1), (x+1,y+1): the cells contributing the
    top-left, top-right, bottom-left and bottom-right quadrant respectively
    (rows grow with y).
    """
    if addr.layer is not Layer.OUT:
        raise ValueError(f"expected an OUT address, got {addr}")
    z, x, y = addr.z, addr.x, addr.y
    return (
        TileAddress(z, x, y, Layer.S),
        TileAddress(z, x + 1, y, Layer.S),
        TileAddress(z, x, y + 1, Layer.S),
        TileAddress(z, x + 1, y + 1, Layer.S),
    )


def guidance_crop_rect(child: TileAddress, cfg: ScaleConfig) -> tuple[TileAddress, PixelRect] | None:
    """Parent OUT tile and the pixel window covering a child T/OUT tile.

    Returns None at z=1: the coarsest level has no guidance. Only defined
    for tiles on the unshifted lattice; S-cell guidance windows may straddle
    parent tiles and are resolved with parent_pixel_window instead.
    """
    validate_address(child, cfg)
    if child.layer is Layer.S:
        raise ValueError("guidance_crop_rect is defined on the T/OUT lattice")
    if child.z == 1:
        return None
    f, crop = cfg.f, cfg.guidance_crop_size
    parent = TileAddress(child.z - 1, child.x // f, child.y // f, Layer.OUT)
    px = (child.x % f) * crop
    py = (child.y % f) * crop
    return parent, PixelRect(px, py, px + crop, py + crop)


def parent_pixel_window(child: TileAddress, cfg: ScaleConfig) -> PixelRect | None:
    """Child's world rect as a window in the parent level's global pixel grid.

    Global pixel (px, py) at level z covers world
    [px*res, (px+1)*res) x [py*res, (py+1)*res) with res = meters_per_pixel(z).
    The window is guidance_crop_size wide and integer-aligned for both
    lattices (guaranteed by the ScaleConfig alignment check).
    """
    validate_address(child, cfg)
    if child.z == 1:
        return None
    rect = tile_world_rect(child, cfg)
    res = cfg.meters_per_pixel(child.z - 1)
    x0 = round(rect.x0 / res)
    y0 = round(rect.y0 / res)
    crop = cfg.guidance_crop_size
    return PixelRect(x0, y0, x0 + crop, y0 + crop)


def tiles_covering(rect: Rect, z: int, cfg: ScaleConfig, layer: Layer = Layer.OUT) -> list[TileAddress]:
    """Minimal set of lattice tiles at level z whose union covers rect."""
    if rect.width <= 0 or rect.height <= 0:
        raise ValueError(f"rect must have positive area, got {rect}")
    w = cfg.tile_meters(z)
    ox = cfg.s_offset[0] * w if layer is Layer.S else 0.0
    oy = cfg.s_offset[1] * w if layer is Layer.S else 0.0
    x0 = math.floor((rect.x0 - ox) / w)
    y0 = math.floor((rect.y0 - oy) / w)
    x1 = math.ceil((rect.x1 - ox) / w)
    y1 = math.ceil((rect.y1 - oy) / w)
    return [TileAddress(z, x, y, layer)
            for y in range(y0, y1)
            for x in range(x0, x1)]


def modeled_costs(k: int, f: int) -> tuple[float, float]:
    """Worst-case evaluation counts for generating 4 tiles at level k.

    Generator evaluations: sum over i=1..k of 4 / (f^2)^(i-1).
    Blend evaluations: sum over i=1..k of (sqrt(4 / (f^2)^(i-1)) - 1)^2.
    Both sums are reported verbatim; actual counters are tracked separately
    by the orchestrator.
    """
    if k < 1:
        raise ValueError(f"target level must be >= 1, got {k}")
    if f < 2:
        raise ValueError(f"scale factor must be >= 2, got {f}")
    gen = 0.0
    blend = 0.0
    for i in range(1, k + 1):
        n = 4.0 / (f * f) ** (i - 1)
        gen += n
        blend += (math.sqrt(n) - 1.0) ** 2
    return gen, blend
