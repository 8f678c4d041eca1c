"""Independent reference implementations used as test oracles.

These deliberately take different algorithmic routes from the production
code: the rasterizer oracle tests each pixel center with the classic
crossing-count rule, the seam-metric oracle is a direct transcription of
the definition in pure Python, and the cut oracle is a plain dynamic
program with the documented tie-break.
"""

from __future__ import annotations

import numpy as np

from satmosaic.geometry import Rect
from satmosaic.vectormap import Polygon, VectorMap


# -- per-pixel point-in-polygon rasterizer ------------------------------------

def pnpoly_grid(vertices, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Even-odd point-in-polygon for a grid of points (crossings to the right)."""
    inside = np.zeros(px.shape, dtype=bool)
    n = len(vertices)
    j = n - 1
    for i in range(n):
        xi, yi = vertices[i]
        xj, yj = vertices[j]
        cond = (yi > py) != (yj > py)
        if cond.any():
            x_int = (xj - xi) * (py - yi) / (yj - yi) + xi
            inside ^= cond & (px < x_int)
        j = i
    return inside


def rasterize_oracle(vmap: VectorMap, rect: Rect, n: int = 256) -> np.ndarray:
    res_x = rect.width / n
    res_y = rect.height / n
    xs = rect.x0 + (np.arange(n) + 0.5) * res_x
    ys = rect.y0 + (np.arange(n) + 0.5) * res_y
    px, py = np.meshgrid(xs, ys)
    cls = np.zeros((n, n), dtype=np.uint8)
    for p in vmap.polygons:
        hit = pnpoly_grid(p.vertices, px, py)
        cls[hit] = p.class_id
    return cls


def label_edge_band(cls: np.ndarray) -> np.ndarray:
    """Pixels within 1 px of a label transition (where edge ties may differ)."""
    band = np.zeros(cls.shape, dtype=bool)
    band[:, :-1] |= cls[:, :-1] != cls[:, 1:]
    band[:, 1:] |= cls[:, :-1] != cls[:, 1:]
    band[:-1, :] |= cls[:-1, :] != cls[1:, :]
    band[1:, :] |= cls[:-1, :] != cls[1:, :]
    grown = band.copy()
    grown[:, :-1] |= band[:, 1:]
    grown[:, 1:] |= band[:, :-1]
    grown[:-1, :] |= band[1:, :]
    grown[1:, :] |= band[:-1, :]
    return grown


def zoned_map(extent: Rect, cell_meters: float,
              classes=(2, 1, 10, 8)) -> VectorMap:
    """Grid of solid class rects cycling through `classes` along x.

    Any shift that is not a multiple of len(classes) lands every cell on a
    different class, which makes parent-crop colors pairwise distinct.
    """
    polys = []
    instance = 1
    nx = int(round(extent.width / cell_meters))
    ny = int(round(extent.height / cell_meters))
    for j in range(ny):
        for i in range(nx):
            cid = classes[(j * nx + i) % len(classes)]
            x0 = extent.x0 + i * cell_meters
            y0 = extent.y0 + j * cell_meters
            ring = ((x0, y0), (x0 + cell_meters, y0),
                    (x0 + cell_meters, y0 + cell_meters), (x0, y0 + cell_meters))
            polys.append(Polygon(ring, cid, instance))
            instance += 1
    from satmosaic.vectormap import canonical_order
    return VectorMap(tuple(canonical_order(polys)), extent)


def random_star_polygon(rng: np.random.Generator, cx: float, cy: float,
                        rmax: float, class_id: int, instance_id: int) -> Polygon:
    """Star-shaped ring around (cx, cy): simple by construction."""
    k = int(rng.integers(3, 9))
    angles = np.sort(rng.uniform(0.0, 2.0 * np.pi, size=k))
    # Spread angles apart to avoid near-degenerate slivers.
    angles = angles + np.linspace(0.0, 0.1, k)
    radii = rng.uniform(0.25, 1.0, size=k) * rmax
    ring = tuple((cx + r * np.cos(a), cy + r * np.sin(a))
                 for a, r in zip(angles, radii))
    return Polygon(ring, class_id, instance_id)


# -- seam-metric reference -----------------------------------------------------

def naive_mot_field(image: np.ndarray, tile_width: int = 256,
                    grayscale: str = "mean") -> np.ndarray:
    """Direct transcription of the metric definition in pure Python.

    Follows the same pinned arithmetic as the production code (per-line
    double accumulation in ascending order, modular final pairing) but
    visits pixels explicitly, one by one.
    """
    data = np.asarray(image, dtype=np.float64).tolist()  # plain doubles
    if np.asarray(image).ndim == 3:
        if grayscale == "mean":
            gray_rows = [[((red + green) + blue) / 3.0
                          for red, green, blue in row] for row in data]
        else:
            gray_rows = [[(0.299 * red + 0.587 * green) + 0.114 * blue
                          for red, green, blue in row] for row in data]
    else:
        gray_rows = data
    h = len(gray_rows)
    w = len(gray_rows[0])

    crop = tile_width // 2
    gray_rows = [row[crop:w - crop] for row in gray_rows[crop:h - crop]]
    ch = len(gray_rows)
    cw = len(gray_rows[0])

    # Per-column sums accumulate down ascending rows; per-row sums across
    # ascending columns. Both orderings match the pinned definition.
    col_sums = [0.0] * cw
    for row in gray_rows:
        col_sums = [acc + v for acc, v in zip(col_sums, row)]
    row_sums = [sum(row) for row in gray_rows]  # sum() adds left to right

    def offset_means(line_sums, lines, other):
        means = []
        for a in range(tile_width):
            total = 0.0
            count = 0
            for idx in range(a, lines, tile_width):
                total += line_sums[idx]
                count += 1
            means.append(total / (count * other))
        return means

    cmeans = offset_means(col_sums, cw, ch)
    rmeans = offset_means(row_sums, ch, cw)
    d = np.empty((tile_width, tile_width))
    for x in range(tile_width):
        cterm = abs(cmeans[x] - cmeans[(x + 1) % tile_width])
        for y in range(tile_width):
            rterm = abs(rmeans[y] - rmeans[(y + 1) % tile_width])
            d[x, y] = cterm + rterm
    return d


# -- minimum-cost cut reference --------------------------------------------------

def min_cut_oracle(cost_band: np.ndarray) -> list[int]:
    """Plain DP over (band, length) with the documented tie-break:
    prefer lower cost, then the row closest to the band centerline, then
    the lower row index, at the terminal column and at each predecessor."""
    b, length = cost_band.shape
    center = (b - 1) / 2.0

    def pref(r):
        return (abs(r - center), r)

    dp = [float(cost_band[r, 0]) for r in range(b)]
    back: list[list[int]] = []
    for x in range(1, length):
        new_dp = []
        choices = []
        for r in range(b):
            cands = [c for c in (r - 1, r, r + 1) if 0 <= c < b]
            best = min(cands, key=lambda c: (dp[c],) + pref(c))
            choices.append(best)
            new_dp.append(float(cost_band[r, x]) + dp[best])
        dp = new_dp
        back.append(choices)
    end = min(range(b), key=lambda r: (dp[r],) + pref(r))
    path = [end]
    for x in range(length - 1, 0, -1):
        path.append(back[x - 1][path[-1]])
    path.reverse()
    return path
