"""Vector cartographic data: parsing, canonical ordering, rasterization.

A map is an ordered list of labeled polygons in a local planar CRS
(meters). Rasterization is scanline even-odd fill with pixel-center
sampling over half-open world rects: later polygons overwrite earlier
ones, so the canonical order doubles as paint order.

Map interchange format (JSON):

    {
      "extent": [x0, y0, x1, y1],
      "polygons": [
        {"class": 1..13, "instance": positive int, "ring": [[x, y], ...]},
        ...
      ]
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_CLASS_PRIORITY, NUM_CLASSES
from .errors import MapParseError, MapValidationError
from .geometry import Rect


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[float, float], ...]
    class_id: int
    instance_id: int

    @property
    def area(self) -> float:
        """Unsigned shoelace area."""
        acc = 0.0
        n = len(self.vertices)
        for i in range(n):
            x0, y0 = self.vertices[i]
            x1, y1 = self.vertices[(i + 1) % n]
            acc += x0 * y1 - x1 * y0
        return abs(acc) / 2.0

    def bbox(self) -> Rect:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return Rect(min(xs), min(ys), max(xs), max(ys))


class VectorMap:
    """Immutable after construction; safe to share between threads."""

    __slots__ = ("polygons", "crs_extent", "_rings", "_bboxes")

    def __init__(self, polygons: tuple[Polygon, ...], crs_extent: Rect):
        self.polygons = tuple(polygons)
        self.crs_extent = crs_extent
        self._rings: list[np.ndarray] | None = None
        self._bboxes: np.ndarray | None = None

    def __eq__(self, other) -> bool:
        return (isinstance(other, VectorMap)
                and self.polygons == other.polygons
                and self.crs_extent == other.crs_extent)

    def _ensure_arrays(self) -> tuple[list[np.ndarray], np.ndarray]:
        # Idempotent; a benign race rebuilds identical values.
        if self._rings is None:
            rings = [np.asarray(p.vertices, dtype=np.float64) for p in self.polygons]
            if rings:
                bboxes = np.array([[r[:, 0].min(), r[:, 1].min(), r[:, 0].max(), r[:, 1].max()]
                                   for r in rings])
            else:
                bboxes = np.zeros((0, 4))
            self._rings = rings
            self._bboxes = bboxes
        return self._rings, self._bboxes

    def query(self, rect: Rect) -> np.ndarray:
        """Indices of polygons whose bbox intersects rect, in list order."""
        _, bb = self._ensure_arrays()
        if len(bb) == 0:
            return np.zeros(0, dtype=np.intp)
        hit = (bb[:, 0] < rect.x1) & (bb[:, 2] > rect.x0) & \
              (bb[:, 1] < rect.y1) & (bb[:, 3] > rect.y0)
        return np.nonzero(hit)[0]


@dataclass
class LabelTile:
    """Per-pixel semantic class ids plus optional instance ids."""

    cls: np.ndarray  # (N, N) uint8, 0 = background
    instance: np.ndarray | None = None  # (N, N) uint16

    def __post_init__(self) -> None:
        if self.cls.ndim != 2 or self.cls.shape[0] != self.cls.shape[1]:
            raise MapValidationError(f"label grid must be square, got {self.cls.shape}")
        if self.cls.dtype != np.uint8:
            raise MapValidationError("label grid must be uint8")
        if self.cls.max(initial=0) > NUM_CLASSES:
            raise MapValidationError("class value outside 0..13")
        if self.instance is not None and self.instance.shape != self.cls.shape:
            raise MapValidationError("instance grid shape mismatch")


def _segments_intersect(p0, p1, q0, q1) -> bool:
    """True if closed segments intersect anywhere (touching counts)."""

    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return int(v > 0) - int(v < 0)

    def on_segment(a, b, c):
        return (min(a[0], b[0]) <= c[0] <= max(a[0], b[0])
                and min(a[1], b[1]) <= c[1] <= max(a[1], b[1]))

    o1, o2 = orient(p0, p1, q0), orient(p0, p1, q1)
    o3, o4 = orient(q0, q1, p0), orient(q0, q1, p1)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and on_segment(p0, p1, q0):
        return True
    if o2 == 0 and on_segment(p0, p1, q1):
        return True
    if o3 == 0 and on_segment(q0, q1, p0):
        return True
    if o4 == 0 and on_segment(q0, q1, p1):
        return True
    return False


def validate_ring(vertices: tuple[tuple[float, float], ...]) -> None:
    """Reject rings with <3 vertices, repeated points or self-intersections."""
    n = len(vertices)
    if n < 3:
        raise MapValidationError(f"polygon needs >= 3 vertices, got {n}")
    for i in range(n):
        if vertices[i] == vertices[(i + 1) % n]:
            raise MapValidationError("polygon has a zero-length edge")
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue  # adjacent edges share a vertex by construction
            if _segments_intersect(*edges[i], *edges[j]):
                raise MapValidationError(
                    f"polygon ring self-intersects (edges {i} and {j})")


def canonical_order(polygons, priority: tuple[int, ...] = DEFAULT_CLASS_PRIORITY) -> list[Polygon]:
    """Stable sort by (class paint priority asc, area desc, instance asc).

    Lower-priority classes come first and therefore paint first; ties cannot
    survive because instance ids are unique within a map.
    """
    rank = {cid: r for r, cid in enumerate(priority)}
    return sorted(polygons, key=lambda p: (rank[p.class_id], -p.area, p.instance_id))


def parse_map(data: bytes | str,
              priority: tuple[int, ...] = DEFAULT_CLASS_PRIORITY) -> VectorMap:
    """Parse and validate the JSON map format, returning a canonical map."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise MapParseError(f"invalid JSON: {exc.msg}", exc.lineno, exc.colno) from exc

    if not isinstance(doc, dict) or "extent" not in doc or "polygons" not in doc:
        raise MapParseError("map document must contain 'extent' and 'polygons'")
    extent = doc["extent"]
    if (not isinstance(extent, list) or len(extent) != 4
            or not all(isinstance(v, (int, float)) for v in extent)):
        raise MapParseError("'extent' must be [x0, y0, x1, y1]")
    x0, y0, x1, y1 = map(float, extent)
    if not (x0 < x1 and y0 < y1):
        raise MapValidationError("extent must have positive width and height")
    crs_extent = Rect(x0, y0, x1, y1)

    polygons = []
    seen_instances: set[int] = set()
    for idx, entry in enumerate(doc["polygons"]):
        if not isinstance(entry, dict):
            raise MapParseError(f"polygon #{idx} is not an object")
        try:
            class_id = int(entry["class"])
            instance_id = int(entry["instance"])
            ring = entry["ring"]
        except (KeyError, TypeError, ValueError) as exc:
            raise MapParseError(f"polygon #{idx}: missing or malformed field ({exc})") from exc
        if not 1 <= class_id <= NUM_CLASSES:
            raise MapValidationError(f"polygon #{idx}: class id {class_id} outside 1..13")
        if instance_id <= 0:
            raise MapValidationError(f"polygon #{idx}: instance id must be positive")
        if instance_id in seen_instances:
            raise MapValidationError(f"polygon #{idx}: duplicate instance id {instance_id}")
        seen_instances.add(instance_id)
        try:
            vertices = tuple((float(p[0]), float(p[1])) for p in ring)
        except (TypeError, IndexError, ValueError) as exc:
            raise MapParseError(f"polygon #{idx}: malformed ring") from exc
        validate_ring(vertices)
        for vx, vy in vertices:
            if not (x0 <= vx <= x1 and y0 <= vy <= y1):
                raise MapValidationError(f"polygon #{idx}: vertex ({vx}, {vy}) outside extent")
        polygons.append(Polygon(vertices, class_id, instance_id))

    return VectorMap(tuple(canonical_order(polygons, priority)), crs_extent)


def serialize_map(vmap: VectorMap) -> str:
    """Canonical JSON serialization; equal maps serialize identically."""
    doc = {
        "extent": [vmap.crs_extent.x0, vmap.crs_extent.y0,
                   vmap.crs_extent.x1, vmap.crs_extent.y1],
        "polygons": [
            {"class": p.class_id, "instance": p.instance_id,
             "ring": [[x, y] for x, y in p.vertices]}
            for p in vmap.polygons
        ],
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def _paint_polygon(mask_target_cls: np.ndarray, mask_target_inst: np.ndarray | None,
                   ring: np.ndarray, class_id: int, instance_id: int,
                   rect: Rect) -> None:
    """Scanline even-odd fill of one ring into the target grids."""
    h, w = mask_target_cls.shape
    res_x = rect.width / w
    res_y = rect.height / h
    ymin, ymax = ring[:, 1].min(), ring[:, 1].max()
    centers_y = rect.y0 + (np.arange(h) + 0.5) * res_y
    rows = np.nonzero((centers_y >= ymin) & (centers_y < ymax))[0]
    if rows.size == 0:
        return
    yc = centers_y[rows]

    x0s = ring[:, 0]
    y0s = ring[:, 1]
    x1s = np.roll(x0s, -1)
    y1s = np.roll(y0s, -1)
    # Edge crosses the scanline iff exactly one endpoint lies at or below it
    # (half-open rule: horizontal edges and shared vertices count once).
    below0 = y0s[:, None] <= yc[None, :]
    below1 = y1s[:, None] <= yc[None, :]
    crossing = below0 != below1
    if not crossing.any():
        return
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (yc[None, :] - y0s[:, None]) / (y1s - y0s)[:, None]
        xs = x0s[:, None] + t * (x1s - x0s)[:, None]

    edge_idx, row_idx = np.nonzero(crossing)
    cross_x = xs[edge_idx, row_idx]
    # First pixel whose center lies strictly right of the crossing.
    cols = np.floor((cross_x - rect.x0) / res_x - 0.5).astype(np.int64) + 1
    cols = np.clip(cols, 0, w)

    delta = np.zeros((rows.size, w + 1), dtype=np.int32)
    np.add.at(delta, (row_idx, cols), 1)
    inside = (np.cumsum(delta[:, :w], axis=1) % 2).astype(bool)

    target_rows = mask_target_cls[rows]
    target_rows[inside] = class_id
    mask_target_cls[rows] = target_rows
    if mask_target_inst is not None:
        inst_rows = mask_target_inst[rows]
        inst_rows[inside] = instance_id % 65536
        mask_target_inst[rows] = inst_rows


def rasterize_grid(vmap: VectorMap, world_rect: Rect, shape: tuple[int, int],
                   with_instances: bool = False) -> tuple[np.ndarray, np.ndarray | None]:
    """Rasterize into an arbitrary (rows, cols) grid; see rasterize."""
    if world_rect.width <= 0 or world_rect.height <= 0:
        raise ValueError(f"world_rect must have positive area, got {world_rect}")
    cls = np.zeros(shape, dtype=np.uint8)
    inst = np.zeros(shape, dtype=np.uint16) if with_instances else None
    rings, _ = vmap._ensure_arrays()
    for i in vmap.query(world_rect):
        p = vmap.polygons[i]
        _paint_polygon(cls, inst, rings[i], p.class_id, p.instance_id, world_rect)
    return cls, inst


def rasterize(vmap: VectorMap, world_rect: Rect, with_instances: bool = False,
              tile_size: int = 256) -> LabelTile:
    """Rasterize canonically ordered polygons into a label grid.

    Pixel (row, col) samples the world point at the pixel center; pixels
    covered by no polygon stay class 0. Paint order is list order, so later
    (higher-priority) polygons overwrite earlier ones.
    """
    cls, inst = rasterize_grid(vmap, world_rect, (tile_size, tile_size), with_instances)
    return LabelTile(cls, inst)


# -- procedural test maps ----------------------------------------------------

CLASS_NATURAL = 1
CLASS_WATER = 2
CLASS_ROAD = 4
CLASS_BUILDING = 10


def _rect_ring(x0: float, y0: float, x1: float, y1: float) -> tuple[tuple[float, float], ...]:
    return ((x0, y0), (x1, y0), (x1, y1), (x0, y1))


def synth_procedural_map(seed: int, extent: Rect, road_spacing: float = 200.0) -> VectorMap:
    """Deterministic grid-street layout with buildings, parks and ponds.

    Same seed and extent give a byte-identical serialized map. Streets form
    a jittered grid; each block is assigned buildings, a park, a pond, or
    left empty.
    """
    if extent.width < road_spacing or extent.height < road_spacing:
        raise ValueError("extent must cover at least one street block")
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, 0x6D61]))
    polygons: list[Polygon] = []
    next_instance = 1

    def add(ring, class_id):
        nonlocal next_instance
        ring = tuple((float(x), float(y)) for x, y in ring)
        polygons.append(Polygon(ring, class_id, next_instance))
        next_instance += 1

    # Street center lines with multiplicative jitter. Spacing is kept
    # aperiodic and roads stay off the extent edges so that map content
    # cannot alias into tile-period measurements.
    def grid_lines(lo: float, hi: float) -> np.ndarray:
        pos = []
        x = lo + road_spacing * rng.uniform(0.4, 1.0)
        while x < hi - 0.3 * road_spacing:
            pos.append(x)
            x += road_spacing * rng.uniform(0.85, 1.35)
        return np.array(pos)

    xs = grid_lines(extent.x0, extent.x1)
    ys = grid_lines(extent.y0, extent.y1)
    road_half = rng.uniform(5.0, 8.0)

    for x in xs:
        x0 = max(extent.x0, x - road_half)
        x1 = min(extent.x1, x + road_half)
        add(_rect_ring(x0, extent.y0, x1, extent.y1), CLASS_ROAD)
    for y in ys:
        y0 = max(extent.y0, y - road_half)
        y1 = min(extent.y1, y + road_half)
        add(_rect_ring(extent.x0, y0, extent.x1, y1), CLASS_ROAD)

    for bi in range(len(xs) - 1):
        for bj in range(len(ys) - 1):
            bx0, bx1 = xs[bi] + road_half, xs[bi + 1] - road_half
            by0, by1 = ys[bj] + road_half, ys[bj + 1] - road_half
            bw, bh = bx1 - bx0, by1 - by0
            if bw < 30 or bh < 30:
                continue
            kind = rng.random()
            if kind < 0.55:
                # Rows of rectangular building footprints with margins.
                margin = 8.0
                cell = rng.uniform(28.0, 44.0)
                nx = max(1, int((bw - margin) // cell))
                ny = max(1, int((bh - margin) // cell))
                for ix in range(nx):
                    for iy in range(ny):
                        if rng.random() < 0.25:
                            continue
                        cx0 = bx0 + margin + ix * cell
                        cy0 = by0 + margin + iy * cell
                        fw = rng.uniform(0.45, 0.8) * (cell - margin)
                        fh = rng.uniform(0.45, 0.8) * (cell - margin)
                        if cx0 + fw > bx1 - margin or cy0 + fh > by1 - margin:
                            continue
                        add(_rect_ring(cx0, cy0, cx0 + fw, cy0 + fh), CLASS_BUILDING)
            elif kind < 0.80:
                inset = rng.uniform(2.0, 6.0)
                add(_rect_ring(bx0 + inset, by0 + inset, bx1 - inset, by1 - inset),
                    CLASS_NATURAL)
            elif kind < 0.90:
                # Pond: a 12-gon inscribed in the block.
                cx, cy = (bx0 + bx1) / 2, (by0 + by1) / 2
                r = 0.35 * min(bw, bh)
                angles = np.linspace(0.0, 2.0 * np.pi, 13)[:-1]
                radii = r * rng.uniform(0.75, 1.0, size=12)
                ring = [(cx + rr * np.cos(a), cy + rr * np.sin(a))
                        for a, rr in zip(angles, radii)]
                add(ring, CLASS_WATER)
            # else: leave the block as background.

    return VectorMap(tuple(canonical_order(polygons)), extent)
