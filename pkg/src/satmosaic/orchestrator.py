"""Lazy multi-scale pipeline: guidance, generation, blending, caching.

For any requested OUT tile the orchestrator recursively ensures the parent
OUT tile (levels above feed color guidance to levels below), rasterizes
labels, runs the generator for the aligned evaluation and the four
shifted-lattice cells, blends them through the configured mask provider
and caches every layer under (style, address). Edits invalidate exactly
the dependency closure of the touched world rect.
"""

from __future__ import annotations

import hashlib
import math
import threading
from dataclasses import dataclass

import numpy as np

from .config import EngineConfig
from .errors import EditError, RegionTooLargeError
from .generator import (BackendPool, GeneratorRequest, GuidanceImage, MockGenerator,
                        StyleLatent, TorchScriptGenerator, blur_guidance)
from .geometry import PixelRect, Rect
from .scalespace import (Layer, TileAddress, modeled_costs, parent_pixel_window,
                         s_cells_for_tile, tile_world_rect, tiles_covering, CostReport)
from .seamblend import (BlendInputs, assemble_s, get_mask_provider,
                        make_constraint_mask, seamless_tile)
from .tilecache import CacheEntry, TileCache
from .vectormap import (LabelTile, Polygon, VectorMap, canonical_order,
                        rasterize_grid, synth_procedural_map, validate_ring)

RENDER_MODES = ("full", "naive_t", "naive_s")


# -- map edits ---------------------------------------------------------------

@dataclass(frozen=True)
class RotateTile:
    """Rotate the map content of one tile rect by 90 degrees."""

    rect: Rect


@dataclass(frozen=True)
class ReplaceTile:
    """Replace the map content of one tile rect with a procedural patch."""

    rect: Rect
    patch: VectorMap


@dataclass(frozen=True)
class SetPolygon:
    """Insert or replace (by instance id) one polygon in the base map."""

    polygon: Polygon


class MapView:
    """Base vector map plus an ordered overlay of tile edits.

    Rect edits are applied during rasterization by sampling the pre-image
    of each query pixel block: rotating a square tile rect by 90 degrees
    maps the pixel lattice onto itself, so the composition stays exact at
    every scale level. Views are immutable; edits produce new views.
    """

    def __init__(self, base: VectorMap, edits: tuple = ()):
        self.base = base
        self.edits = edits

    def with_edit(self, edit) -> "MapView":
        if isinstance(edit, SetPolygon):
            polys = [p for p in self.base.polygons
                     if p.instance_id != edit.polygon.instance_id]
            polys.append(edit.polygon)
            return MapView(VectorMap(tuple(canonical_order(polys)), self.base.crs_extent),
                           self.edits)
        return MapView(self.base, self.edits + (edit,))

    def rasterize(self, rect: Rect, shape: tuple[int, int],
                  with_instances: bool = False) -> LabelTile:
        cls, inst = self._rasterize_upto(rect, shape, len(self.edits), with_instances)
        return LabelTile(cls, inst)

    def _rasterize_upto(self, rect: Rect, shape: tuple[int, int], n_edits: int,
                        with_instances: bool):
        cls, inst = rasterize_grid(self.base, rect, shape, with_instances)
        for i in range(n_edits):
            self._apply_edit_overlay(cls, inst, rect, i, with_instances)
        return cls, inst

    def _apply_edit_overlay(self, cls: np.ndarray, inst: np.ndarray | None,
                            rect: Rect, edit_index: int, with_instances: bool) -> None:
        edit = self.edits[edit_index]
        h, w = cls.shape
        res_x = rect.width / w
        res_y = rect.height / h
        er = edit.rect
        ix0, iy0 = max(rect.x0, er.x0), max(rect.y0, er.y0)
        ix1, iy1 = min(rect.x1, er.x1), min(rect.y1, er.y1)
        if ix0 >= ix1 or iy0 >= iy1:
            return
        # Pixels whose centers fall inside the intersection.
        c0 = max(0, math.ceil((ix0 - rect.x0) / res_x - 0.5 - 1e-9))
        c1 = min(w, math.ceil((ix1 - rect.x0) / res_x - 0.5 - 1e-9))
        r0 = max(0, math.ceil((iy0 - rect.y0) / res_y - 0.5 - 1e-9))
        r1 = min(h, math.ceil((iy1 - rect.y0) / res_y - 0.5 - 1e-9))
        if c0 >= c1 or r0 >= r1:
            return
        block = Rect(rect.x0 + c0 * res_x, rect.y0 + r0 * res_y,
                     rect.x0 + c1 * res_x, rect.y0 + r1 * res_y)
        bh, bw = r1 - r0, c1 - c0

        if isinstance(edit, ReplaceTile):
            pcls, pinst = rasterize_grid(edit.patch, block, (bh, bw), with_instances)
        else:  # RotateTile
            cx = (er.x0 + er.x1) / 2.0
            cy = (er.y0 + er.y1) / 2.0
            # Pre-image of the block under rotation by -90 about the center:
            # target (dx, dy) shows source (dy, -dx).
            pre = Rect(cx + (block.y0 - cy), cy - (block.x1 - cx),
                       cx + (block.y1 - cy), cy - (block.x0 - cx))
            acls, ainst = self._rasterize_upto(pre, (bw, bh), edit_index, with_instances)
            pcls = acls.T[:, ::-1]
            pinst = ainst.T[:, ::-1] if ainst is not None else None

        cls[r0:r1, c0:c1] = pcls
        if inst is not None and pinst is not None:
            inst[r0:r1, c0:c1] = pinst


# -- sessions ----------------------------------------------------------------

@dataclass
class StyleSession:
    style_id: str
    latent: StyleLatent
    map_version: int = 0
    generator_evals: int = 0
    blend_evals: int = 0


class _RWLock:
    """Writer-preferring readers/writer lock for edit serialization."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writer = False
        self._writers_waiting = 0

    def acquire_read(self) -> None:
        with self._cond:
            while self._writer or self._writers_waiting:
                self._cond.wait()
            self._readers += 1

    def release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def acquire_write(self) -> None:
        with self._cond:
            self._writers_waiting += 1
            while self._writer or self._readers:
                self._cond.wait()
            self._writers_waiting -= 1
            self._writer = True

    def release_write(self) -> None:
        with self._cond:
            self._writer = False
            self._cond.notify_all()

    class _ReadContext:
        def __init__(self, lock):
            self.lock = lock

        def __enter__(self):
            self.lock.acquire_read()

        def __exit__(self, *exc):
            self.lock.release_read()

    class _WriteContext:
        def __init__(self, lock):
            self.lock = lock

        def __enter__(self):
            self.lock.acquire_write()

        def __exit__(self, *exc):
            self.lock.release_write()

    def read(self):
        return self._ReadContext(self)

    def write(self):
        return self._WriteContext(self)


# -- orchestrator ------------------------------------------------------------

class Orchestrator:
    def __init__(self, vmap: VectorMap, cfg: EngineConfig | None = None,
                 generator=None, pool_size: int = 1):
        self.cfg = cfg or EngineConfig()
        self._view = MapView(vmap)
        self.cache = TileCache(self.cfg.cache_capacity)
        if generator is None:
            if self.cfg.generator_model_path:
                generator = TorchScriptGenerator(self.cfg.generator_model_path, self.cfg)
            else:
                generator = MockGenerator(self.cfg)
        backends = [generator] if pool_size == 1 else [generator] * pool_size
        self._pool = BackendPool(backends)
        self._provider = get_mask_provider(self.cfg.mask_provider, self.cfg)
        self._constraint = make_constraint_mask(self.cfg.scale.tile_size,
                                                self.cfg.constraint_radius)
        self._sessions: dict[str, StyleSession] = {}
        self._session_lock = threading.Lock()
        self._stats_lock = threading.Lock()
        self._edit_lock = _RWLock()
        self.map_version = 0

    @property
    def map_view(self) -> MapView:
        return self._view

    # -- sessions --

    def create_session(self, seed: int, style_id: str | None = None) -> StyleSession:
        with self._session_lock:
            if style_id is None:
                style_id = f"style-{len(self._sessions) + 1}"
            if style_id in self._sessions:
                raise ValueError(f"style id {style_id!r} already exists")
            session = StyleSession(style_id, StyleLatent(seed), self.map_version)
            self._sessions[style_id] = session
            return session

    def get_session(self, style_id: str) -> StyleSession | None:
        with self._session_lock:
            return self._sessions.get(style_id)

    def sessions(self) -> list[StyleSession]:
        with self._session_lock:
            return list(self._sessions.values())

    # -- tile computation --

    def _bump(self, session: StyleSession, generator: int = 0, blend: int = 0) -> None:
        with self._stats_lock:
            session.generator_evals += generator
            session.blend_evals += blend

    def _labels_for(self, addr: TileAddress, view: MapView) -> LabelTile:
        rect = tile_world_rect(addr, self.cfg.scale)
        n = self.cfg.scale.tile_size
        return view.rasterize(rect, (n, n), with_instances=True)

    def _guidance_for(self, session: StyleSession, addr: TileAddress,
                      view: MapView) -> GuidanceImage:
        if addr.z == 1:
            return GuidanceImage.absent(self.cfg.scale.tile_size)
        window = parent_pixel_window(addr, self.cfg.scale)
        crop = self._parent_window(session, addr.z - 1, window, view)
        return blur_guidance(crop, self.cfg)

    def _parent_window(self, session: StyleSession, pz: int, win: PixelRect,
                       view: MapView) -> np.ndarray:
        """Stitch the parent-level OUT mosaic over a global pixel window."""
        n = self.cfg.scale.tile_size
        out = np.empty((win.height, win.width, 3))
        ty0, ty1 = win.y0 // n, (win.y1 - 1) // n
        tx0, tx1 = win.x0 // n, (win.x1 - 1) // n
        for ty in range(ty0, ty1 + 1):
            for tx in range(tx0, tx1 + 1):
                tile = self._out_tile(session, TileAddress(pz, tx, ty, Layer.OUT), view)
                gx0, gx1 = max(win.x0, tx * n), min(win.x1, (tx + 1) * n)
                gy0, gy1 = max(win.y0, ty * n), min(win.y1, (ty + 1) * n)
                out[gy0 - win.y0:gy1 - win.y0, gx0 - win.x0:gx1 - win.x0] = \
                    tile[gy0 - ty * n:gy1 - ty * n, gx0 - tx * n:gx1 - tx * n]
        return out

    def _inputs_hash(self, labels: LabelTile, guidance: GuidanceImage,
                     session: StyleSession, addr: TileAddress) -> str:
        h = hashlib.sha256()
        h.update(labels.cls.tobytes())
        if labels.instance is not None:
            h.update(labels.instance.tobytes())
        if guidance.present:
            h.update(guidance.rgb.tobytes())
        h.update(str(session.latent.seed).encode())
        h.update(str(addr).encode())
        return h.hexdigest()

    def _eval_tile(self, session: StyleSession, addr: TileAddress,
                   view: MapView) -> np.ndarray:
        """One generator evaluation (S or T layer), cached and shared."""
        key = (session.style_id, addr)

        def compute() -> CacheEntry:
            labels = self._labels_for(addr, view)
            guidance = self._guidance_for(session, addr, view)
            req = GeneratorRequest(labels, guidance, session.latent, addr)
            tile = self._pool.generate(req)
            self._bump(session, generator=1)
            return CacheEntry(tile, self._inputs_hash(labels, guidance, session, addr))

        return self.cache.get_or_compute(key, compute).value

    def _out_tile(self, session: StyleSession, addr: TileAddress,
                  view: MapView) -> np.ndarray:
        if addr.layer is not Layer.OUT:
            raise ValueError(f"expected an OUT address, got {addr}")
        key = (session.style_id, addr)

        def compute() -> CacheEntry:
            t = self._eval_tile(session, addr.with_layer(Layer.T), view)
            s_tiles = [self._eval_tile(session, cell, view)
                       for cell in s_cells_for_tile(addr)]
            s = assemble_s(addr, s_tiles)
            labels = self._labels_for(addr, view)
            y = seamless_tile(BlendInputs(labels, s, t), self._provider,
                              self._constraint, self.cfg)
            self._bump(session, blend=1)
            h = hashlib.sha256()
            h.update(s.tobytes())
            h.update(t.tobytes())
            h.update(labels.cls.tobytes())
            return CacheEntry(y, h.hexdigest())

        return self.cache.get_or_compute(key, compute).value

    def get_out_tile(self, session: StyleSession, addr: TileAddress) -> np.ndarray:
        """Blended, border-continuous output tile (deterministic per style)."""
        with self._edit_lock.read():
            return self._out_tile(session, addr, self._view)

    def debug_mask(self, session: StyleSession, addr: TileAddress) -> np.ndarray:
        """Recompute the constrained blend mask for inspection (not cached)."""
        with self._edit_lock.read():
            view = self._view
            t = self._eval_tile(session, addr.with_layer(Layer.T), view)
            s = assemble_s(addr, [self._eval_tile(session, c, view)
                                  for c in s_cells_for_tile(addr)])
            labels = self._labels_for(addr, view)
            _, mask = seamless_tile(BlendInputs(labels, s, t), self._provider,
                                    self._constraint, self.cfg, return_mask=True)
            return mask

    def label_tile(self, addr: TileAddress) -> LabelTile:
        with self._edit_lock.read():
            return self._labels_for(addr, self._view)

    # -- regions --

    def render_region(self, session: StyleSession, z: int, rect: Rect,
                      mode: str = "full") -> np.ndarray:
        """Stitch all covering OUT tiles at level z and crop to rect.

        mode 'full' is the blended pipeline; 'naive_t' stitches raw aligned
        evaluations and 'naive_s' the raw shifted mosaic (both keep their
        seams and exist for measurement and comparison).
        """
        if mode not in RENDER_MODES:
            raise ValueError(f"unknown render mode {mode!r}")
        cfg = self.cfg
        res = cfg.scale.meters_per_pixel(z)
        px0 = math.floor(rect.x0 / res + 1e-9)
        py0 = math.floor(rect.y0 / res + 1e-9)
        px1 = math.ceil(rect.x1 / res - 1e-9)
        py1 = math.ceil(rect.y1 / res - 1e-9)
        pixels = (px1 - px0) * (py1 - py0)
        if pixels > cfg.max_pixels:
            raise RegionTooLargeError(
                f"region needs {pixels} pixels, max_pixels is {cfg.max_pixels}")
        if pixels <= 0:
            raise ValueError(f"rect must have positive area, got {rect}")

        with self._edit_lock.read():
            view = self._view
            n = cfg.scale.tile_size
            out = np.empty((py1 - py0, px1 - px0, 3))
            for addr in tiles_covering(Rect(px0 * res, py0 * res, px1 * res, py1 * res),
                                       z, cfg.scale, Layer.OUT):
                tile = self._region_tile(session, addr, mode, view)
                tx, ty = addr.x * n, addr.y * n
                gx0, gx1 = max(px0, tx), min(px1, tx + n)
                gy0, gy1 = max(py0, ty), min(py1, ty + n)
                out[gy0 - py0:gy1 - py0, gx0 - px0:gx1 - px0] = \
                    tile[gy0 - ty:gy1 - ty, gx0 - tx:gx1 - tx]
            return out

    def _region_tile(self, session: StyleSession, addr: TileAddress, mode: str,
                     view: MapView) -> np.ndarray:
        if mode == "full":
            return self._out_tile(session, addr, view)
        if mode == "naive_t":
            return self._eval_tile(session, addr.with_layer(Layer.T), view)
        s_tiles = [self._eval_tile(session, c, view) for c in s_cells_for_tile(addr)]
        return assemble_s(addr, s_tiles)

    # -- edits and invalidation --

    def edit_rotate_tile(self, z: int, x: int, y: int) -> RotateTile:
        rect = tile_world_rect(TileAddress(z, x, y, Layer.OUT), self.cfg.scale)
        return RotateTile(rect)

    def edit_replace_tile(self, z: int, x: int, y: int, seed: int) -> ReplaceTile:
        rect = tile_world_rect(TileAddress(z, x, y, Layer.OUT), self.cfg.scale)
        spacing = min(200.0, rect.width / 3.0)
        patch = synth_procedural_map(seed, rect, road_spacing=spacing)
        return ReplaceTile(rect, patch)

    def edit_set_polygon(self, polygon: Polygon) -> SetPolygon:
        validate_ring(polygon.vertices)
        return SetPolygon(polygon)

    def _edit_world_rect(self, edit) -> Rect:
        if isinstance(edit, SetPolygon):
            new_bbox = edit.polygon.bbox()
            old = [p for p in self._view.base.polygons
                   if p.instance_id == edit.polygon.instance_id]
            if old:
                ob = old[0].bbox()
                return Rect(min(new_bbox.x0, ob.x0), min(new_bbox.y0, ob.y0),
                            max(new_bbox.x1, ob.x1), max(new_bbox.y1, ob.y1))
            return new_bbox
        return edit.rect

    def apply_edit(self, session: StyleSession, edit) -> list[TileAddress]:
        """Apply a map edit; returns the invalidated cached addresses.

        A cached tile is invalidated iff the edited world rect intersects
        any label-input rect in its dependency tree (its own evaluations
        plus, transitively, the parent OUT tiles its guidance reads).
        """
        if not isinstance(edit, (RotateTile, ReplaceTile, SetPolygon)):
            raise EditError(f"unknown edit type {type(edit).__name__}")
        with self._edit_lock.write():
            target = self._edit_world_rect(edit)
            extent = self._view.base.crs_extent
            if not target.intersects(extent):
                raise EditError(f"edit target {target} lies outside the map extent")
            invalid = self._invalidation_closure(target)
            doomed_keys = [(style, addr) for (style, addr) in self.cache.keys()
                           if addr in invalid]
            self.cache.invalidate(doomed_keys)
            self._view = self._view.with_edit(edit)
            self.map_version += 1
            for s in self.sessions():
                s.map_version = self.map_version
            return sorted(invalid, key=lambda a: (a.z, a.layer.value, a.x, a.y))

    def _invalidation_closure(self, target: Rect) -> set[TileAddress]:
        """Invalidated addresses among the cached keys, via memoized recursion."""
        scale = self.cfg.scale
        eval_memo: dict[TileAddress, bool] = {}
        out_memo: dict[TileAddress, bool] = {}

        def eval_invalid(addr: TileAddress) -> bool:
            cached = eval_memo.get(addr)
            if cached is not None:
                return cached
            rect = tile_world_rect(addr, scale)
            result = rect.intersects(target)
            if not result and addr.z > 1:
                result = any(out_invalid(p) for p in
                             tiles_covering(rect, addr.z - 1, scale, Layer.OUT))
            eval_memo[addr] = result
            return result

        def out_invalid(addr: TileAddress) -> bool:
            cached = out_memo.get(addr)
            if cached is not None:
                return cached
            result = eval_invalid(addr.with_layer(Layer.T)) or \
                any(eval_invalid(c) for c in s_cells_for_tile(addr))
            out_memo[addr] = result
            return result

        invalid: set[TileAddress] = set()
        for _, addr in self.cache.keys():
            hit = out_invalid(addr) if addr.layer is Layer.OUT else eval_invalid(addr)
            if hit:
                invalid.add(addr)
        return invalid

    # -- costs --

    def cost_report(self, session: StyleSession,
                    since: CostReport | None = None) -> CostReport:
        modeled = modeled_costs(self.cfg.scale.z_max, self.cfg.scale.f)
        gen, blend = session.generator_evals, session.blend_evals
        if since is not None:
            gen -= since.actual_generator_evals
            blend -= since.actual_blend_evals
        return CostReport(modeled[0], modeled[1], gen, blend)
