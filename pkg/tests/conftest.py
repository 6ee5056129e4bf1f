"""Shared fixtures: deterministic images, canned projects, and the
acceptance-criteria summary printed at the end of a run."""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from imgvc.image import Pixel, RasterImage
from imgvc.ops import EditOp
from imgvc.store import ProjectStore

T0 = datetime(2026, 1, 2, 12, 0, 0, tzinfo=timezone.utc)


def at(seconds: float) -> datetime:
    return T0 + timedelta(seconds=seconds)


def random_image(seed: int, w: int = 8, h: int = 8) -> RasterImage:
    rng = random.Random(seed)
    arr = np.array(
        [[[rng.randrange(256) for _ in range(4)] for _ in range(w)] for _ in range(h)],
        dtype=np.uint8,
    )
    return RasterImage(arr)


def random_pixel(rng: random.Random) -> Pixel:
    return Pixel(rng.randrange(256), rng.randrange(256), rng.randrange(256), rng.randrange(256))


@pytest.fixture
def project(tmp_path):
    """Fresh 8x8 white project with a fixed creation time."""
    return ProjectStore.init_project(
        tmp_path / "proj", "demo", "ada", "png", width=8, height=8, timestamp=T0
    )


def build_linear_chain(root_dir, n_edits: int = 4, size: int = 16) -> ProjectStore:
    """Nodes 0..n_edits on one lineage (node 0 is the root)."""
    store = ProjectStore.init_project(
        root_dir, "chain", "ada", "png", width=size, height=size, timestamp=T0
    )
    ops = [
        EditOp.invert(),
        EditOp.brightness("0.700"),
        EditOp.brush([(2, 2), (size - 3, size - 3)], 2, Pixel(200, 30, 30)),
        EditOp.sepia(),
        EditOp.posterize(5),
        EditOp.flip(),
    ]
    parent = 0
    for k in range(n_edits):
        parent = store.apply(parent, ops[k % len(ops)], timestamp=at(10 * (k + 1)))
    return store


def build_fork_merge_project(root_dir, size: int = 16) -> ProjectStore:
    """The canonical two-branch fixture: 0 -> 1 -> 2, branches 3 and 4 off
    node 2. Node 3 and node 4 both paint (8, 8) (node 4 later), and each
    paints a disjoint corner of its own."""
    store = ProjectStore.init_project(
        root_dir, "forkdemo", "ada", "png", width=size, height=size, timestamp=T0
    )
    store.apply(0, EditOp.brightness("0.900"), timestamp=at(10))
    store.apply(1, EditOp.sepia(), timestamp=at(20))
    store.apply(
        2,
        EditOp.brush([(2, 2), (8, 8)], 1, Pixel(255, 0, 0)),
        author="alice",
        timestamp=at(30),
    )
    store.apply(
        2,
        EditOp.brush([(13, 13), (8, 8)], 1, Pixel(0, 0, 255)),
        author="bob",
        timestamp=at(40),
    )
    return store


# -- acceptance summary --------------------------------------------------------

_ACCEPTANCE_RESULTS: dict[str, str] = {}

_CRITERION_LABELS = {
    "test_operation_correctness": "operation correctness vs per-pixel oracles",
    "test_replay_determinism": "replay determinism (1000 ops, two processes, store round-trip)",
    "test_fork_merge_scenario": "two-branch merge scenario (nodes 0-5)",
    "test_merge_oracle_equivalence": "merge equals brute-force three-way resolver",
    "test_diff_path": "diff path on the linear 5-node fixture",
    "test_store_integrity": "store round-trip, corruption detection, byte-stable dag.json",
    "test_backend_integration": "Git backend integration and LFS pointer grammar",
    "test_cli_api_parity": "CLI/API mutation parity",
}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if "test_acceptance" in report.nodeid and name in _CRITERION_LABELS:
        outcome = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE_RESULTS[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in _CRITERION_LABELS.items():
        outcome = _ACCEPTANCE_RESULTS.get(name)
        if outcome is not None:
            terminalreporter.write_line(f"[{outcome}] {label}")
