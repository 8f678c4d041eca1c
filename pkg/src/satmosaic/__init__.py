"""Seamless, scale-consistent satellite-style texture mosaics from vector maps."""

from .config import EngineConfig
from .errors import (ConfigError, EditError, GenerationError, MapParseError,
                     MapValidationError, ModelError, RegionTooLargeError,
                     SatmosaicError)
from .generator import (GeneratorRequest, GuidanceImage, MockGenerator,
                        StyleLatent, blur_guidance)
from .geometry import PixelRect, Rect
from .metrics import MotConfig, MotField, mot_field, mot_summary, seam_verdict
from .orchestrator import (MapView, Orchestrator, ReplaceTile, RotateTile,
                           SetPolygon, StyleSession)
from .scalespace import (CostReport, Layer, ScaleConfig, TileAddress,
                         guidance_crop_rect, modeled_costs, s_cells_for_tile,
                         tile_world_rect, tiles_covering)
from .seamblend import (BlendInputs, ConstraintMask, assemble_s, blend,
                        boundary_cut_provider, constrain_mask,
                        make_constraint_mask, seamless_tile, soft_mask_provider)
from .vectormap import (LabelTile, Polygon, VectorMap, canonical_order,
                        parse_map, rasterize, serialize_map,
                        synth_procedural_map)

__version__ = "0.1.0"

__all__ = [
    "EngineConfig", "Rect", "PixelRect",
    "ScaleConfig", "TileAddress", "Layer", "CostReport",
    "tile_world_rect", "s_cells_for_tile", "guidance_crop_rect",
    "tiles_covering", "modeled_costs",
    "VectorMap", "Polygon", "LabelTile", "parse_map", "serialize_map",
    "canonical_order", "rasterize", "synth_procedural_map",
    "StyleLatent", "GuidanceImage", "GeneratorRequest", "MockGenerator",
    "blur_guidance",
    "BlendInputs", "ConstraintMask", "make_constraint_mask", "assemble_s",
    "constrain_mask", "blend", "soft_mask_provider", "boundary_cut_provider",
    "seamless_tile",
    "MotConfig", "MotField", "mot_field", "mot_summary", "seam_verdict",
    "Orchestrator", "StyleSession", "MapView", "RotateTile", "ReplaceTile",
    "SetPolygon",
    "SatmosaicError", "ConfigError", "MapParseError", "MapValidationError",
    "GenerationError", "ModelError", "RegionTooLargeError", "EditError",
]
