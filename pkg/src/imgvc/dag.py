"""The acyclic history graph and deterministic replay.

Nodes carry one editing operation each plus bookkeeping (author, timestamp,
note). Edges point from parent to child, so every edge goes from a smaller
id to a larger one and a topological order is simply the id order. Replay
reconstructs any revision by walking its parent chain from a self-contained
state (the root, or a merge node that stores its full pixel grid) and
applying the recorded operations in order.
"""

from __future__ import annotations

import heapq
import threading
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import (
    InvalidArgumentError,
    InvalidParameterError,
    InvalidRootError,
    MissingNodeError,
    NotAnAncestorError,
)
from .image import Pixel, RasterImage, Region
from .ops import MERGE_KIND, EditOp, apply_edit, op_region

TIMESTAMP_FORMAT = "%Y-%m-%dT%H:%M:%S.%fZ"

# Replay results are pure functions of the (append-only) graph, so a small
# LRU keyed by node id is always valid; it makes linear appends O(1).
_REPLAY_CACHE_SIZE = 16

_SEED_CANVAS_FILL = Pixel(255, 255, 255)
_ONE_MICROSECOND = timedelta(microseconds=1)


def format_timestamp(ts: datetime) -> str:
    """Fixed-width ISO-8601 UTC with microseconds; lexical order == temporal."""
    return ts.astimezone(timezone.utc).strftime(TIMESTAMP_FORMAT)


def parse_timestamp(text: str) -> datetime:
    return datetime.strptime(text, TIMESTAMP_FORMAT).replace(tzinfo=timezone.utc)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class DagNode:
    id: int
    op: EditOp
    parents: list[int]
    author: str
    timestamp: datetime
    note: str = ""
    thumbnail_path: str = ""

    @property
    def is_merge(self) -> bool:
        return self.op.kind == MERGE_KIND


class RevisionDag:
    """Id-indexed node collection plus the current set of childless heads."""

    def __init__(self):
        self.nodes: dict[int, DagNode] = {}
        self.heads: set[int] = set()
        self._replay_cache: OrderedDict[int, RasterImage] = OrderedDict()
        self._cache_lock = threading.Lock()  # replay may run from parallel readers

    # -- construction --------------------------------------------------------

    @classmethod
    def create_root(
        cls,
        op: EditOp,
        author: str,
        timestamp: datetime | None = None,
    ) -> "RevisionDag":
        if not op.is_initializer:
            raise InvalidRootError(
                f"root must be created by New or Import, not {op.kind}"
            )
        op.validate()
        dag = cls()
        node = DagNode(
            id=0,
            op=op,
            parents=[],
            author=author,
            timestamp=(timestamp or utc_now()).astimezone(timezone.utc),
            thumbnail_path="thumbs/0.png",
        )
        dag.nodes[0] = node
        dag.heads = {0}
        return dag

    def append_node(
        self,
        parent: int,
        op: EditOp,
        author: str,
        timestamp: datetime | None = None,
        note: str = "",
    ) -> int:
        """Append one operation after `parent`; appending to a non-head forks."""
        parent_node = self.node(parent)
        op.validate_against(self.replay(parent_node.id))
        return self._insert([parent], op, author, timestamp, note)

    def append_merge_node(
        self,
        left: int,
        right: int,
        op: EditOp,
        author: str,
        timestamp: datetime | None = None,
        note: str = "",
    ) -> int:
        self.node(left)
        self.node(right)
        if op.kind != MERGE_KIND:
            raise InvalidParameterError("merge nodes must carry a merge-state op")
        op.validate()
        return self._insert([left, right], op, author, timestamp, note)

    def _insert(self, parents, op, author, timestamp, note) -> int:
        node_id = max(self.nodes) + 1
        ts = self._next_timestamp(parents, timestamp)
        node = DagNode(
            id=node_id,
            op=op,
            parents=list(parents),
            author=author,
            timestamp=ts,
            note=note,
            thumbnail_path=f"thumbs/{node_id}.png",
        )
        self.nodes[node_id] = node
        self.heads -= set(parents)
        self.heads.add(node_id)
        return node_id

    def _next_timestamp(self, parents, candidate: datetime | None) -> datetime:
        """Timestamps are unique and never precede a parent's; ties are bumped
        forward by one microsecond."""
        floor = max(self.nodes[p].timestamp for p in parents)
        last = max(n.timestamp for n in self.nodes.values())
        ts = candidate.astimezone(timezone.utc) if candidate else utc_now()
        lowest = max(floor, last)
        if ts <= lowest:
            ts = lowest + _ONE_MICROSECOND
        return ts

    @classmethod
    def from_nodes(cls, nodes: list[DagNode]) -> "RevisionDag":
        """Rebuild from stored nodes, recomputing heads from scratch."""
        dag = cls()
        for node in sorted(nodes, key=lambda n: n.id):
            for p in node.parents:
                if p not in dag.nodes:
                    raise MissingNodeError(f"node {node.id} references missing parent {p}")
                if p >= node.id:
                    raise InvalidParameterError(
                        f"node {node.id} lists parent {p} that is not older"
                    )
            if not node.parents and node.id != 0:
                raise InvalidRootError(f"node {node.id} has no parents but is not the root")
            dag.nodes[node.id] = node
        if 0 not in dag.nodes or dag.nodes[0].parents:
            raise InvalidRootError("graph has no root node")
        dag.recompute_heads()
        return dag

    def recompute_heads(self) -> None:
        referenced = {p for n in self.nodes.values() for p in n.parents}
        self.heads = set(self.nodes) - referenced

    # -- queries --------------------------------------------------------------

    def node(self, node_id: int) -> DagNode:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise MissingNodeError(f"node {node_id} does not exist") from None

    def __contains__(self, node_id: int) -> bool:
        return node_id in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    def sorted_nodes(self) -> list[DagNode]:
        return [self.nodes[i] for i in sorted(self.nodes)]

    def children(self, node_id: int) -> list[int]:
        self.node(node_id)
        return [n.id for n in self.sorted_nodes() if node_id in n.parents]

    def ancestors(self, node_id: int) -> set[int]:
        """All ancestors of a node, the node itself included."""
        seen: set[int] = set()
        stack = [self.node(node_id).id]
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.nodes[cur].parents)
        return seen

    def replay_chain(self, head: int) -> list[DagNode]:
        """Nodes applied by replay, oldest first. The chain starts at the
        nearest self-contained state: the root or a merge node."""
        chain = [self.node(head)]
        while chain[-1].parents and not chain[-1].is_merge:
            # non-merge nodes have exactly one parent
            chain.append(self.nodes[chain[-1].parents[0]])
        chain.reverse()
        return chain

    def replay(self, head: int) -> RasterImage:
        """Deterministically reconstruct the image at `head`."""
        with self._cache_lock:
            cached = self._replay_cache.get(self.node(head).id)
            if cached is not None:
                self._replay_cache.move_to_end(head)
                return cached
            # walk back to the nearest cached or self-contained node
            pending: list[DagNode] = []
            node = self.nodes[head]
            image: RasterImage | None = None
            while True:
                hit = self._replay_cache.get(node.id)
                if hit is not None:
                    image = hit
                    break
                pending.append(node)
                if not node.parents or node.is_merge:
                    break
                node = self.nodes[node.parents[0]]

        root_image = self._root_image()
        for n in reversed(pending):
            image, _ = apply_edit(
                image if image is not None else root_image, n.op, root_image
            )
        assert image is not None
        with self._cache_lock:
            self._replay_cache[head] = image
            self._replay_cache.move_to_end(head)
            while len(self._replay_cache) > _REPLAY_CACHE_SIZE:
                self._replay_cache.popitem(last=False)
        return image

    def _root_image(self) -> RasterImage:
        root = self.node(0)
        seed = RasterImage.filled(1, 1, _SEED_CANVAS_FILL)
        image, _ = apply_edit(seed, root.op, None)
        return image

    def lowest_common_ancestor(self, a: int, b: int) -> int:
        """The shared ancestor with the greatest id. Always exists: the root
        is an ancestor of everything."""
        self.node(a)
        self.node(b)
        reachable_from_a = self.ancestors(a)
        heap = [-b]
        seen = {b}
        while heap:
            cur = -heapq.heappop(heap)
            if cur in reachable_from_a:
                return cur
            for p in self.nodes[cur].parents:
                if p not in seen:
                    seen.add(p)
                    heapq.heappush(heap, -p)
        raise MissingNodeError("graph has no common ancestor; missing root?")

    def path_between(self, src: int, dst: int) -> list[int]:
        """Node ids strictly after `src` up to and including `dst`, following
        parent edges. At merge nodes the first recorded parent is preferred."""
        self.node(src)
        self.node(dst)
        if src == dst:
            return []
        path = self._find_path(src, dst)
        if path is None:
            raise NotAnAncestorError(f"node {src} is not an ancestor of node {dst}")
        return path

    def _find_path(self, src: int, dst: int) -> list[int] | None:
        # iterative DFS from dst upward, preferring parents in recorded order
        stack: list[tuple[int, int]] = [(dst, 0)]
        while stack:
            cur, branch = stack[-1]
            parents = self.nodes[cur].parents
            if branch >= len(parents):
                stack.pop()
                continue
            stack[-1] = (cur, branch + 1)
            parent = parents[branch]
            if parent == src:
                return [node for node, _ in stack][::-1]
            if parent > src:
                stack.append((parent, 0))
        return None

    def is_ancestor(self, anc: int, node_id: int) -> bool:
        return anc == node_id or self._find_path(anc, node_id) is not None

    def affected_region(self, node_id: int) -> Region:
        """A node's footprint, evaluated in its parent's replayed state."""
        node = self.node(node_id)
        if not node.parents:
            raise InvalidArgumentError("the root has no footprint")
        parent_image = self.replay(node.parents[0])
        return op_region(parent_image, node.op)

    def spatially_independent(self, a: int, b: int) -> bool:
        """True iff the two operations touch non-overlapping rectangles."""
        return not self.affected_region(a).intersects(self.affected_region(b))
