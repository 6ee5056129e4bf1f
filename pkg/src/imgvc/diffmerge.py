"""Semantic diffs between revisions and the two-way pixel merge.

A diff lists the operations along the history path between two revisions
and can replay every intermediate state for slider-style review. The merge
compares both sides against their lowest common ancestor pixel by pixel;
when both sides changed the same pixel differently, the side whose covering
operation carries the later timestamp wins (conflicts are resolved
automatically but recorded in the provenance grid).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np

from .dag import RevisionDag
from .errors import (
    DegenerateMergeError,
    FrameIndexError,
    MergeShapeError,
    ShapeError,
)
from .image import RasterImage
from .ops import EditOp

# provenance tags, one byte per pixel
TAG_BASE = 0
TAG_LEFT = 1
TAG_RIGHT = 2
TAG_CONFLICT_LEFT = 3
TAG_CONFLICT_RIGHT = 4

TAG_NAMES = {
    TAG_BASE: "base",
    TAG_LEFT: "left",
    TAG_RIGHT: "right",
    TAG_CONFLICT_LEFT: "conflict-left",
    TAG_CONFLICT_RIGHT: "conflict-right",
}


def pixel_diff(a: RasterImage, b: RasterImage) -> tuple[int, np.ndarray]:
    """Count and mask of pixels whose four channels are not all equal."""
    if (a.width, a.height) != (b.width, b.height):
        raise ShapeError(
            f"cannot diff {a.width}x{a.height} against {b.width}x{b.height}"
        )
    mask = (a.pixels != b.pixels).any(axis=2)
    return int(mask.sum()), mask


def rle_encode(mask: np.ndarray) -> list[int]:
    """Row-major run lengths, alternating and starting with a False run."""
    flat = np.asarray(mask, dtype=bool).ravel()
    if flat.size == 0:
        return [0]
    flips = np.nonzero(np.diff(flat))[0]
    bounds = np.concatenate(([0], flips + 1, [flat.size]))
    runs = np.diff(bounds).astype(int).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return runs


@dataclass
class DiffReport:
    """Operations between an ancestor and a descendant, with replayable states.

    state k is the image after the first k steps; state 0 is the source
    revision and the last state is the target revision. States are replayed
    on demand.
    """

    dag: RevisionDag
    src: int
    dst: int
    steps: list[tuple[int, EditOp]]

    @property
    def frame_count(self) -> int:
        return len(self.steps) + 1

    def state(self, k: int) -> RasterImage:
        if not 0 <= k <= len(self.steps):
            raise FrameIndexError(f"frame {k} outside [0, {len(self.steps)}]")
        if k == 0:
            return self.dag.replay(self.src)
        return self.dag.replay(self.steps[k - 1][0])

    def pixel_delta(self) -> tuple[int, np.ndarray]:
        """Pixels differing between the source and target states."""
        return pixel_diff(self.state(0), self.state(len(self.steps)))


def semantic_diff(dag: RevisionDag, src: int, dst: int) -> DiffReport:
    """Diff from an ancestor revision to a descendant one."""
    path = dag.path_between(src, dst)
    steps = [(node_id, dag.node(node_id).op) for node_id in path]
    return DiffReport(dag=dag, src=src, dst=dst, steps=steps)


def render_diff_frame(report: DiffReport, k: int) -> RasterImage:
    return report.state(k)


@dataclass
class MergeResult:
    image: RasterImage
    base: int
    left: int
    right: int
    provenance: np.ndarray  # (h, w) uint8 of TAG_* values
    conflict_count: int


def merge_revisions(
    dag: RevisionDag,
    left: int,
    right: int,
    author: str,
    timestamp: datetime | None = None,
    note: str = "",
) -> tuple[MergeResult, int]:
    """Merge two revisions into a new node whose parents are [left, right].

    Per pixel: identical values pass through; a change on exactly one side
    wins; changes on both sides resolve to the later covering operation's
    side. The merge node stores its full pixel grid, so it replays without
    consulting either branch.
    """
    if left == right:
        raise DegenerateMergeError(f"cannot merge node {left} with itself")
    left_img = dag.replay(left)
    right_img = dag.replay(right)
    if (left_img.width, left_img.height) != (right_img.width, right_img.height):
        raise MergeShapeError(
            f"merge inputs are {left_img.width}x{left_img.height} vs "
            f"{right_img.width}x{right_img.height}; reconcile geometry first"
        )
    base = dag.lowest_common_ancestor(left, right)
    base_img = dag.replay(base)

    la = left_img.pixels
    ra = right_img.pixels
    h, w = la.shape[:2]
    if (base_img.width, base_img.height) == (w, h):
        ba = base_img.pixels
        eq_lb = (la == ba).all(axis=2)
        eq_rb = (ra == ba).all(axis=2)
    else:
        # geometry moved since the base; no pixel can match it positionally
        eq_lb = np.zeros((h, w), dtype=bool)
        eq_rb = np.zeros((h, w), dtype=bool)
    eq_lr = (la == ra).all(axis=2)

    provenance = np.empty((h, w), dtype=np.uint8)
    merged = la.copy()

    # (1) both sides agree
    provenance[eq_lr] = TAG_LEFT
    provenance[eq_lr & eq_lb] = TAG_BASE
    # (2) exactly one side changed
    only_right = ~eq_lr & eq_lb
    only_left = ~eq_lr & eq_rb & ~eq_lb
    provenance[only_right] = TAG_RIGHT
    merged[only_right] = ra[only_right]
    provenance[only_left] = TAG_LEFT
    # (3) both changed, values disagree: latest covering op wins
    conflict = ~eq_lr & ~eq_lb & ~eq_rb
    conflict_count = int(conflict.sum())
    if conflict_count:
        ts_left = _latest_cover_timestamps(dag, base, left, h, w)
        ts_right = _latest_cover_timestamps(dag, base, right, h, w)
        right_wins = conflict & (ts_right > ts_left)
        left_wins = conflict & ~right_wins
        merged[right_wins] = ra[right_wins]
        provenance[left_wins] = TAG_CONFLICT_LEFT
        provenance[right_wins] = TAG_CONFLICT_RIGHT

    result_img = RasterImage(merged)
    node_id = dag.append_merge_node(
        left, right, EditOp.merge_state(result_img), author, timestamp, note
    )
    result = MergeResult(
        image=result_img,
        base=base,
        left=left,
        right=right,
        provenance=provenance,
        conflict_count=conflict_count,
    )
    return result, node_id


_EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)
_ONE_US = timedelta(microseconds=1)


def _timestamp_us(ts: datetime) -> int:
    return (ts - _EPOCH) // _ONE_US


def _latest_cover_timestamps(
    dag: RevisionDag, base: int, head: int, h: int, w: int
) -> np.ndarray:
    """Per-pixel timestamp (µs since epoch) of the branch's last operation
    whose footprint covers the pixel; -1 where nothing covers it."""
    grid = np.full((h, w), -1, dtype=np.int64)
    for node_id in dag.path_between(base, head):
        node = dag.node(node_id)
        region = dag.affected_region(node_id)
        x0, y0 = min(region.x0, w), min(region.y0, h)
        x1, y1 = min(region.x1, w), min(region.y1, h)
        # chain timestamps strictly increase, so plain overwrite keeps the max
        grid[y0:y1, x0:x1] = _timestamp_us(node.timestamp)
    return grid
