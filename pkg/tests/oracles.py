"""Independent per-pixel oracles used to check the engine's operations.

Everything here works on plain Python lists of (r, g, b, a) tuples with
Fraction arithmetic, deliberately sharing no code path with the numpy
implementation under test.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from imgvc.image import RasterImage

Grid = list[list[tuple[int, int, int, int]]]


def to_grid(img: RasterImage) -> Grid:
    return [
        [tuple(int(c) for c in img.pixels[y, x]) for x in range(img.width)]
        for y in range(img.height)
    ]


def from_grid(grid: Grid) -> RasterImage:
    arr = np.array(grid, dtype=np.uint8)
    return RasterImage(arr)


def rhu(value: Fraction | int) -> int:
    """Round half-up on nonnegative rationals."""
    return math.floor(Fraction(value) + Fraction(1, 2))


def clamp(v: int) -> int:
    return max(0, min(255, v))


# -- geometry ---------------------------------------------------------------


def oracle_mirror(grid: Grid) -> Grid:
    return [list(reversed(row)) for row in grid]


def oracle_flip(grid: Grid) -> Grid:
    return list(reversed([list(row) for row in grid]))


def oracle_transpose(grid: Grid) -> Grid:
    h, w = len(grid), len(grid[0])
    return [[grid[x][y] for x in range(h)] for y in range(w)]


def oracle_scale(grid: Grid, new_w: int, new_h: int) -> Grid:
    h, w = len(grid), len(grid[0])
    return [
        [grid[(y * h) // new_h][(x * w) // new_w] for x in range(new_w)]
        for y in range(new_h)
    ]


def oracle_crop(grid: Grid, x0: int, y0: int, w: int, h: int) -> Grid:
    return [[grid[y0 + y][x0 + x] for x in range(w)] for y in range(h)]


# -- pointwise color --------------------------------------------------------


def _map_rgb(grid: Grid, fn) -> Grid:
    return [[(*fn(r, g, b), a) for (r, g, b, a) in row] for row in grid]


def oracle_invert(grid: Grid) -> Grid:
    return _map_rgb(grid, lambda r, g, b: (255 - r, 255 - g, 255 - b))


def oracle_brightness(grid: Grid, factor: Fraction) -> Grid:
    def fn(r, g, b):
        return tuple(clamp(rhu(c * factor)) for c in (r, g, b))

    return _map_rgb(grid, fn)


def oracle_grayscale(grid: Grid) -> Grid:
    def fn(r, g, b):
        luma = clamp(
            rhu(Fraction(299, 1000) * r + Fraction(587, 1000) * g + Fraction(114, 1000) * b)
        )
        return (luma, luma, luma)

    return _map_rgb(grid, fn)


_SEPIA = (
    (Fraction(393, 1000), Fraction(769, 1000), Fraction(189, 1000)),
    (Fraction(349, 1000), Fraction(686, 1000), Fraction(168, 1000)),
    (Fraction(272, 1000), Fraction(534, 1000), Fraction(131, 1000)),
)


def oracle_sepia(grid: Grid) -> Grid:
    def fn(r, g, b):
        return tuple(clamp(rhu(wr * r + wg * g + wb * b)) for wr, wg, wb in _SEPIA)

    return _map_rgb(grid, fn)


def oracle_solarize(grid: Grid, threshold: int) -> Grid:
    def fn(r, g, b):
        return tuple((255 - c) if c >= threshold else c for c in (r, g, b))

    return _map_rgb(grid, fn)


def oracle_posterize(grid: Grid, bits: int) -> Grid:
    mask = 256 - 2 ** (8 - bits)

    def fn(r, g, b):
        return (r & mask, g & mask, b & mask)

    return _map_rgb(grid, fn)


def oracle_equalize(grid: Grid) -> Grid:
    h, w = len(grid), len(grid[0])
    n = h * w
    out = [[list(px) for px in row] for row in grid]
    for channel in range(3):
        hist = [0] * 256
        for row in grid:
            for px in row:
                hist[px[channel]] += 1
        cdf = []
        total = 0
        for count in hist:
            total += count
            cdf.append(total)
        cdf_min = next(c for c in cdf if c > 0)
        if cdf_min == n:
            continue
        for y in range(h):
            for x in range(w):
                v = grid[y][x][channel]
                out[y][x][channel] = rhu(Fraction((cdf[v] - cdf_min) * 255, n - cdf_min))
    return [[tuple(px) for px in row] for row in out]


# -- local ops ---------------------------------------------------------------


def _segment_distance_sq(px, py, a, b) -> Fraction:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    if dx == 0 and dy == 0:
        return Fraction((px - ax) ** 2 + (py - ay) ** 2)
    t = Fraction((px - ax) * dx + (py - ay) * dy, dx * dx + dy * dy)
    t = max(Fraction(0), min(Fraction(1), t))
    cx = ax + t * dx
    cy = ay + t * dy
    return (px - cx) ** 2 + (py - cy) ** 2


def oracle_brush(grid: Grid, points, radius: int, color) -> Grid:
    h, w = len(grid), len(grid[0])
    segments = list(zip(points, points[1:])) if len(points) > 1 else [(points[0], points[0])]
    rr = radius * radius
    out = [list(row) for row in grid]
    for y in range(h):
        for x in range(w):
            if any(_segment_distance_sq(x, y, a, b) < rr for a, b in segments):
                out[y][x] = tuple(color)
    return out


def parse_font_asset(text: str) -> dict[int, list[str]]:
    """Read the packaged glyph file without going through the renderer."""
    glyphs: dict[int, list[str]] = {}
    code = None
    for line in text.splitlines():
        if line.startswith("glyph "):
            code = int(line.split()[1])
            glyphs[code] = []
        elif code is not None and line and set(line) <= {"#", "."}:
            glyphs[code].append(line)
    return glyphs


def oracle_text(grid: Grid, glyphs, origin, text: str, scale: int, color) -> Grid:
    h, w = len(grid), len(grid[0])
    out = [list(row) for row in grid]
    x0, y0 = origin
    for i, ch in enumerate(text):
        cell_x = x0 + i * 6 * scale
        for gy, row in enumerate(glyphs[ord(ch)]):
            for gx, cell in enumerate(row):
                if cell != "#":
                    continue
                for dy in range(scale):
                    for dx in range(scale):
                        px = cell_x + gx * scale + dx
                        py = y0 + gy * scale + dy
                        if 0 <= px < w and 0 <= py < h:
                            out[py][px] = tuple(color)
    return out


# -- footprints and merge -----------------------------------------------------


def oracle_region(op, width: int, height: int) -> tuple[int, int, int, int]:
    """(x0, y0, w, h) footprint of an op evaluated on a width x height parent."""
    p = op.params
    if op.kind == "Crop":
        return (p["x0"], p["y0"], p["w"], p["h"])
    if op.kind == "Brush":
        xs = [pt[0] for pt in p["points"]]
        ys = [pt[1] for pt in p["points"]]
        r = p["radius"]
        x0, y0 = max(min(xs) - r, 0), max(min(ys) - r, 0)
        x1, y1 = min(max(xs) + r + 1, width), min(max(ys) + r + 1, height)
        return (x0, y0, x1 - x0, y1 - y0)
    if op.kind == "Text":
        if p["text"]:
            x0, y0 = max(p["x0"], 0), max(p["y0"], 0)
            x1 = min(p["x0"] + len(p["text"]) * 6 * p["scale"], width)
            y1 = min(p["y0"] + 8 * p["scale"], height)
            if x0 < x1 and y0 < y1:
                return (x0, y0, x1 - x0, y1 - y0)
        cx = min(max(p["x0"], 0), width - 1)
        cy = min(max(p["y0"], 0), height - 1)
        return (cx, cy, 1, 1)
    return (0, 0, width, height)


def regions_intersect(a, b) -> bool:
    ax0, ay0, aw, ah = a
    bx0, by0, bw, bh = b
    return ax0 < bx0 + bw and bx0 < ax0 + aw and ay0 < by0 + bh and by0 < ay0 + ah


def oracle_ancestors(parents: dict[int, list[int]], node: int) -> set[int]:
    seen = {node}
    frontier = [node]
    while frontier:
        cur = frontier.pop()
        for p in parents[cur]:
            if p not in seen:
                seen.add(p)
                frontier.append(p)
    return seen


def oracle_lca(parents: dict[int, list[int]], a: int, b: int) -> int:
    common = oracle_ancestors(parents, a) & oracle_ancestors(parents, b)
    return max(common)


def oracle_merge(
    base: Grid,
    left: Grid,
    right: Grid,
    left_covers,
    right_covers,
):
    """Brute-force three-way resolver.

    covers: per side, a list of ((x0, y0, w, h), timestamp_us) footprints in
    branch order. Returns (merged grid, tag grid) with the engine's tag
    vocabulary: base/left/right/conflict-left/conflict-right.
    """
    h, w = len(left), len(left[0])
    base_ok = len(base) == h and len(base[0]) == w
    merged = [[None] * w for _ in range(h)]
    tags = [[None] * w for _ in range(h)]

    def latest(covers, x, y):
        best = -1
        for (rx, ry, rw, rh), ts in covers:
            if rx <= x < rx + rw and ry <= y < ry + rh:
                best = max(best, ts)
        return best

    for y in range(h):
        for x in range(w):
            b = base[y][x] if base_ok else None
            l, r = left[y][x], right[y][x]
            if l == r:
                merged[y][x] = l
                tags[y][x] = "base" if l == b else "left"
            elif l == b:
                merged[y][x] = r
                tags[y][x] = "right"
            elif r == b:
                merged[y][x] = l
                tags[y][x] = "left"
            else:
                if latest(right_covers, x, y) > latest(left_covers, x, y):
                    merged[y][x] = r
                    tags[y][x] = "conflict-right"
                else:
                    merged[y][x] = l
                    tags[y][x] = "conflict-left"
    return merged, tags
