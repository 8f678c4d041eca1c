"""Engine configuration: class tables, mask geometry, cache limits.

Class ids are data; paint priority is policy. The default priority table
orders classes so that smaller man-made features paint over larger natural
ones. Both the table and every other constant here can be overridden from a
JSON config file (see EngineConfig.from_json).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError
from .scalespace import ScaleConfig

NUM_CLASSES = 13  # semantic classes 1..13; 0 is background

CLASS_NAMES = {
    0: "background",
    1: "natural-environment",
    2: "water",
    3: "rail",
    4: "road-or-track",
    5: "path",
    6: "parking",
    7: "sports",
    8: "glasshouse",
    9: "structure",
    10: "building",
    11: "bridge",
    12: "misc-1",
    13: "misc-2",
}

# Paint priority, low to high: natural < water < rail < road-or-track < path
# < parking < sports < glasshouse < structure < building < bridge < misc.
DEFAULT_CLASS_PRIORITY = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13)

# Mean color per class for the mock generator, index 0..13. Kept inside
# [0.2, 0.85] so noise and guidance mixing never leave [0, 1].
DEFAULT_BASE_COLORS = (
    (0.36, 0.40, 0.30),  # background: bare ground
    (0.32, 0.46, 0.26),  # natural environment
    (0.22, 0.33, 0.45),  # water
    (0.38, 0.36, 0.35),  # rail
    (0.42, 0.42, 0.43),  # road or track
    (0.55, 0.50, 0.40),  # path
    (0.47, 0.46, 0.45),  # parking
    (0.35, 0.55, 0.35),  # sports
    (0.65, 0.70, 0.72),  # glasshouse
    (0.52, 0.48, 0.46),  # structure
    (0.58, 0.52, 0.48),  # building
    (0.50, 0.50, 0.52),  # bridge
    (0.60, 0.55, 0.45),  # misc-1
    (0.45, 0.40, 0.50),  # misc-2
)

# Categorical palette for label tiles (8-bit RGB), index = class id.
DEFAULT_LABEL_PALETTE = (
    (240, 240, 235),  # background
    (170, 210, 150),  # natural environment
    (110, 165, 220),  # water
    (90, 85, 90),     # rail
    (250, 170, 90),   # road or track
    (215, 190, 140),  # path
    (180, 180, 185),  # parking
    (120, 200, 120),  # sports
    (200, 230, 235),  # glasshouse
    (170, 150, 145),  # structure
    (205, 110, 95),   # building
    (140, 140, 170),  # bridge
    (235, 220, 130),  # misc-1
    (190, 140, 200),  # misc-2
)


@dataclass(frozen=True)
class EngineConfig:
    scale: ScaleConfig = field(default_factory=ScaleConfig)
    class_priority: tuple[int, ...] = DEFAULT_CLASS_PRIORITY
    base_colors: tuple[tuple[float, float, float], ...] = DEFAULT_BASE_COLORS
    label_palette: tuple[tuple[int, int, int], ...] = DEFAULT_LABEL_PALETTE

    # Mock generator
    w_guidance: float = 0.6
    noise_amplitude: float = 0.12
    tint_amplitude: float = 0.05   # per-evaluation constant color drift
    vignette_depth: float = 0.04   # border darkening at evaluation edges
    vignette_width: int = 8        # ramp width of the border artifact, px
    noise_cells: int = 8  # value-noise lattice cells per tile edge
    latent_dim: int = 256

    # Blend masks
    constraint_radius: float = 112.0
    soft_mask_r0: float = 96.0
    soft_mask_r1: float = 120.0
    cut_buffer_px: int = 10
    mask_provider: str = "soft"  # soft | cut | model

    # Orchestrator
    cache_capacity: int = 4096
    max_pixels: int = 4096 * 4096

    # Optional serialized-model adapters
    generator_model_path: str | None = None
    mask_model_path: str | None = None

    def __post_init__(self) -> None:
        if sorted(self.class_priority) != list(range(1, NUM_CLASSES + 1)):
            raise ConfigError("class_priority must be a permutation of 1..13")
        if len(self.base_colors) != NUM_CLASSES + 1:
            raise ConfigError("base_colors needs 14 entries (background + 13 classes)")
        if len(self.label_palette) != NUM_CLASSES + 1:
            raise ConfigError("label_palette needs 14 entries (background + 13 classes)")
        if not 0.0 <= self.w_guidance <= 1.0:
            raise ConfigError("w_guidance must lie in [0, 1]")
        if self.mask_provider not in ("soft", "cut", "model"):
            raise ConfigError(f"unknown mask provider {self.mask_provider!r}")
        if not 0 < self.soft_mask_r0 < self.soft_mask_r1:
            raise ConfigError("soft mask radii must satisfy 0 < r0 < r1")
        if self.constraint_radius <= 0 or self.constraint_radius >= self.scale.tile_size / 2:
            raise ConfigError("constraint_radius must leave a border ring inside the tile")
        if self.cache_capacity < 16:
            raise ConfigError("cache_capacity is too small to hold one tile's dependencies")

    def priority_rank(self) -> dict[int, int]:
        """class id -> paint rank (lower paints first)."""
        return {cid: rank for rank, cid in enumerate(self.class_priority)}

    @classmethod
    def from_json(cls, path: str | Path) -> "EngineConfig":
        """Load overrides from a flat JSON object; unknown keys are rejected."""
        raw = json.loads(Path(path).read_text())
        if not isinstance(raw, dict):
            raise ConfigError("config file must contain a JSON object")
        scale_keys = {"tile_size", "f", "z_max", "z1_tile_meters", "s_offset"}
        scale_kwargs = {}
        cfg_kwargs = {}
        for key, value in raw.items():
            if key in scale_keys:
                scale_kwargs[key] = tuple(value) if key == "s_offset" else value
            elif key in cls.__dataclass_fields__:
                if key in ("class_priority", "base_colors", "label_palette"):
                    value = tuple(tuple(v) if isinstance(v, list) else v for v in value)
                cfg_kwargs[key] = value
            else:
                raise ConfigError(f"unknown config key {key!r}")
        cfg = cls(scale=ScaleConfig(**scale_kwargs), **cfg_kwargs)
        return cfg

    def with_overrides(self, **kwargs) -> "EngineConfig":
        return replace(self, **kwargs)
