"""Loader for the bundled 5x7 bitmap font asset.

Glyphs live in ``assets/font5x7.txt`` as literal row bitmaps so the renderer
never depends on a system rasterizer; the same pixels come out on every
platform.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

GLYPH_WIDTH = 5
GLYPH_HEIGHT = 7
# One blank gutter column / row per cell.
CELL_WIDTH = 6
CELL_HEIGHT = 8


def _parse(text: str) -> dict[int, tuple[str, ...]]:
    glyphs: dict[int, tuple[str, ...]] = {}
    code = None
    rows: list[str] = []
    for raw in text.splitlines():
        line = raw.rstrip()
        if line.startswith("glyph "):
            if code is not None:
                glyphs[code] = tuple(rows)
            code = int(line.split()[1])
            rows = []
        elif line and set(line) <= {"#", "."}:
            rows.append(line)
        # anything else is a comment
    if code is not None:
        glyphs[code] = tuple(rows)
    for cp, rws in glyphs.items():
        if len(rws) != GLYPH_HEIGHT or any(len(r) != GLYPH_WIDTH for r in rws):
            raise ValueError(f"malformed glyph block for codepoint {cp}")
    return glyphs


@lru_cache(maxsize=1)
def load_glyphs() -> dict[int, tuple[str, ...]]:
    """Codepoint -> 7 rows of 5 chars ('#' lit, '.' off)."""
    text = resources.files("imgvc.assets").joinpath("font5x7.txt").read_text("utf-8")
    return _parse(text)


def glyph_for(codepoint: int) -> tuple[str, ...] | None:
    return load_glyphs().get(codepoint)


def lit_cells(codepoint: int) -> list[tuple[int, int]]:
    """(x, y) offsets of lit pixels within the 5x7 glyph box."""
    rows = load_glyphs()[codepoint]
    return [(x, y) for y, row in enumerate(rows) for x, ch in enumerate(row) if ch == "#"]
