"""Acceptance suite: one test per criterion, at the stated tolerances.

Every criterion asserts bitwise equality (the system's whole contract is
bit-exact replay); the two runtime-bounded criteria also assert their
wall-clock targets. A summary line per criterion is printed at the end of
the pytest run (see conftest).
"""

import hashlib
import itertools
import json
import shutil
import subprocess
import sys
import threading
import time
from fractions import Fraction
from pathlib import Path

import pytest
import requests

from imgvc import ops
from imgvc.api import make_server
from imgvc.dag import RevisionDag
from imgvc.cli import run_cli
from imgvc.diffmerge import TAG_NAMES, merge_revisions, render_diff_frame, semantic_diff
from imgvc.errors import CorruptStoreError
from imgvc.image import Pixel
from imgvc.imageio import decode_image
from imgvc.lfs import make_lfs_pointer
from imgvc.ops import EditOp, apply_edit
from imgvc.store import ProjectStore

import oracles
from conftest import T0, at, build_linear_chain, random_image, random_pixel
from fakes import FakeGitBackend
from history_gen import generate_ops

TESTS_DIR = Path(__file__).parent
WHITE = Pixel(255, 255, 255)
requires_git = pytest.mark.skipif(shutil.which("git") is None, reason="git not installed")


# ---------------------------------------------------------------------------
# criterion 1: operation correctness


def _oracle_pairs(rng):
    """(engine op, oracle fn) pairs with seed-dependent parameters."""
    millis = rng.randrange(0, 2500)
    threshold = rng.randrange(0, 257)
    bits = rng.randrange(1, 9)
    cx, cy = rng.randrange(0, 5), rng.randrange(0, 5)
    cw, ch = rng.randrange(1, 8 - cx + 1), rng.randrange(1, 8 - cy + 1)
    points = [(rng.randrange(8), rng.randrange(8)) for _ in range(rng.randrange(1, 4))]
    radius = rng.randrange(1, 4)
    color = random_pixel(rng)
    sw, sh = rng.randrange(1, 17), rng.randrange(1, 17)
    glyphs = oracles.parse_font_asset(
        (Path(__file__).parents[1] / "src" / "imgvc" / "assets" / "font5x7.txt").read_text()
    )
    text = "".join(rng.choice("Ag5#? ") for _ in range(3))
    tx, ty = rng.randrange(-3, 8), rng.randrange(-3, 8)
    return [
        (EditOp.mirror(), oracles.oracle_mirror),
        (EditOp.flip(), oracles.oracle_flip),
        (EditOp.transpose(), oracles.oracle_transpose),
        (EditOp.scale(sw, sh), lambda g: oracles.oracle_scale(g, sw, sh)),
        (EditOp.histogram(), oracles.oracle_equalize),
        (
            EditOp.brightness(f"{millis // 1000}.{millis % 1000:03d}"),
            lambda g: oracles.oracle_brightness(g, Fraction(millis, 1000)),
        ),
        (EditOp.black_white(), oracles.oracle_grayscale),
        (EditOp.sepia(), oracles.oracle_sepia),
        (EditOp.invert(), oracles.oracle_invert),
        (EditOp.solarize(threshold), lambda g: oracles.oracle_solarize(g, threshold)),
        (EditOp.posterize(bits), lambda g: oracles.oracle_posterize(g, bits)),
        (EditOp.crop(cx, cy, cw, ch), lambda g: oracles.oracle_crop(g, cx, cy, cw, ch)),
        (
            EditOp.brush(points, radius, color),
            lambda g: oracles.oracle_brush(g, points, radius, color.as_tuple()),
        ),
        (
            EditOp.text(tx, ty, text, 1, color),
            lambda g: oracles.oracle_text(g, glyphs, (tx, ty), text, 1, color.as_tuple()),
        ),
    ]


def test_operation_correctness():
    """Every recordable operation matches its independent per-pixel oracle on
    100 random 8x8 fixtures; involutions and idempotents hold exhaustively."""
    import random as _random

    started = time.monotonic()
    for seed in range(100):
        img = random_image(seed, 8, 8)
        grid = oracles.to_grid(img)
        rng = _random.Random(10_000 + seed)
        for op, oracle_fn in _oracle_pairs(rng):
            out, _ = apply_edit(img, op)
            assert oracles.to_grid(out) == oracle_fn(grid), f"seed {seed}, {op.kind}"

        # New / Import rebuild their recorded state exactly
        fill = random_pixel(rng)
        new_out, _ = apply_edit(img, EditOp.new(3, 5, fill))
        assert oracles.to_grid(new_out) == [[fill.as_tuple()] * 3 for _ in range(5)]
        source = random_image(seed + 900, 4, 4)
        import_out, _ = apply_edit(img, EditOp.import_pixels(source, "png"))
        assert import_out == source

        # involutions and idempotents, exhaustively over the same fixtures
        assert ops.reorient(ops.reorient(img, "Mirror"), "Mirror") == img
        assert ops.reorient(ops.reorient(img, "Flip"), "Flip") == img
        assert ops.reorient(ops.reorient(img, "Transpose"), "Transpose") == img
        assert ops.invert(ops.invert(img)) == img
        gray = ops.grayscale(img)
        assert ops.grayscale(gray) == gray
        for bits in (1, 4, 7):
            poster = ops.posterize(img, bits)
            assert ops.posterize(poster, bits) == poster
        assert ops.solarize(img, 256) == img

    # Reset is replay plumbing: after any chain it restores the root state
    dag = RevisionDag.create_root(EditOp.new(8, 8, WHITE), "ada", T0)
    n1 = dag.append_node(0, EditOp.invert(), "ada", at(1))
    n2 = dag.append_node(n1, EditOp.crop(1, 1, 4, 4), "ada", at(2))
    n3 = dag.append_node(n2, EditOp.reset(), "ada", at(3))
    assert dag.replay(n3) == dag.replay(0)

    elapsed = time.monotonic() - started
    assert elapsed < 10.0, f"operation correctness took {elapsed:.1f}s (target < 10s)"


# ---------------------------------------------------------------------------
# criterion 2: replay determinism


def test_replay_determinism(tmp_path):
    """A 1000-op history on a 64x64 canvas replays bitwise-identically in two
    separate processes and across a store round-trip."""
    started = time.monotonic()
    seed, count = 424242, 1000

    digests = []
    for _ in range(2):
        proc = subprocess.run(
            [sys.executable, str(TESTS_DIR / "replay_worker.py"), str(seed), str(count)],
            capture_output=True,
            text=True,
            check=True,
        )
        digests.append(proc.stdout.strip())
    assert digests[0] == digests[1], "two process runs disagree"

    # the same history persisted through the store and reloaded
    store = ProjectStore.init_project(
        tmp_path / "p", "det", "worker", "png", width=64, height=64, timestamp=T0
    )
    head = 0
    for k, op in enumerate(generate_ops(seed, count)):
        head = store.apply(head, op, timestamp=at(k + 1))
    loaded = ProjectStore.load_project(store.root)
    image = loaded.dag.replay(head)
    digest = hashlib.sha256(
        f"{image.width}x{image.height}:".encode() + image.to_bytes()
    ).hexdigest()
    assert digest == digests[0], "store round-trip replay disagrees"

    elapsed = time.monotonic() - started
    assert elapsed < 30.0, f"determinism run took {elapsed:.1f}s (target < 30s)"


# ---------------------------------------------------------------------------
# criterion 3: the canonical two-branch merge scenario (nodes 0..5)


def test_fork_merge_scenario(tmp_path):
    store = ProjectStore.init_project(
        tmp_path / "forkdemo", "forkdemo", "ada", "png", width=16, height=16, timestamp=T0
    )
    store.apply(0, EditOp.brightness("0.900"), timestamp=at(10))
    store.apply(1, EditOp.sepia(), timestamp=at(20))
    # two branches off node 2; both paint (8,8), node 4 later
    store.apply(2, EditOp.brush([(2, 2), (8, 8)], 1, Pixel(255, 0, 0)), author="alice", timestamp=at(30))
    store.apply(2, EditOp.brush([(13, 13), (8, 8)], 1, Pixel(0, 0, 255)), author="bob", timestamp=at(40))
    assert store.dag.heads == {3, 4}

    result, node_id = store.merge(3, 4, timestamp=at(50))
    assert node_id == 5
    assert store.dag.node(5).parents == [3, 4]
    assert result.base == 2

    merged = result.image
    base_img = store.dag.replay(2)
    left_img = store.dag.replay(3)
    right_img = store.dag.replay(4)

    # disjoint edits both present
    assert merged.pixel(2, 2) == Pixel(255, 0, 0, 255)
    assert merged.pixel(13, 13) == Pixel(0, 0, 255, 255)
    # the contested pixel goes to the later branch (node 4)
    assert merged.pixel(8, 8) == Pixel(0, 0, 255, 255)
    assert TAG_NAMES[int(result.provenance[8, 8])] == "conflict-right"
    assert result.conflict_count >= 1
    # conservation: every merged pixel comes from base, left, or right
    for y in range(16):
        for x in range(16):
            assert merged.pixel(x, y) in (
                base_img.pixel(x, y),
                left_img.pixel(x, y),
                right_img.pixel(x, y),
            )
    # the merge node replays to its stored state after a reload
    reloaded = ProjectStore.load_project(store.root)
    assert reloaded.dag.replay(5) == merged


# ---------------------------------------------------------------------------
# criterion 4: merge equals the brute-force resolver, exhaustively


def _branch_cover(dag, base, head):
    covers = []
    for node_id in dag.path_between(base, head):
        node = dag.node(node_id)
        parent_img = dag.replay(node.parents[0])
        region = oracles.oracle_region(node.op, parent_img.width, parent_img.height)
        covers.append((region, int((node.timestamp - T0).total_seconds() * 1e6)))
    return covers


def test_merge_oracle_equivalence():
    """All branch-op sequences of length <= 3 drawn from {brush, invert,
    brightness}, on every canvas up to 4x4, resolve exactly like the
    brute-force three-way oracle."""
    checked = 0
    for w, h in ((1, 1), (2, 2), (3, 3), (4, 4)):
        left_pool = [
            ("brushL", lambda: EditOp.brush([(0, 0)], 1, Pixel(220, 10, 10))),
            ("invert", EditOp.invert),
            ("bright", lambda: EditOp.brightness("0.500")),
        ]
        right_pool = [
            ("brushR", lambda: EditOp.brush([(w - 1, h - 1)], 1, Pixel(10, 10, 220))),
            ("invert", EditOp.invert),
            ("bright", lambda: EditOp.brightness("0.500")),
        ]
        seqs_left = [
            seq for n in range(4) for seq in itertools.product(left_pool, repeat=n)
        ]
        seqs_right = [
            seq for n in range(4) for seq in itertools.product(right_pool, repeat=n)
        ]
        for li, left_seq in enumerate(seqs_left):
            for ri, right_seq in enumerate(seqs_right):
                dag = RevisionDag.create_root(EditOp.new(w, h, WHITE), "ada", T0)
                fork = dag.append_node(0, EditOp.brightness("0.800"), "ada", at(1))
                # alternate which side carries the later timestamps
                left_first = (li + ri) % 2 == 0
                t_left = 100.0 if left_first else 200.0
                t_right = 200.0 if left_first else 100.0
                left = fork
                for _, make_op in left_seq:
                    left = dag.append_node(left, make_op(), "alice", at(t_left))
                    t_left += 1.0
                right = fork
                for _, make_op in right_seq:
                    right = dag.append_node(right, make_op(), "bob", at(t_right))
                    t_right += 1.0
                if left == right:
                    continue
                base = dag.lowest_common_ancestor(left, right)
                expected_grid, expected_tags = oracles.oracle_merge(
                    oracles.to_grid(dag.replay(base)),
                    oracles.to_grid(dag.replay(left)),
                    oracles.to_grid(dag.replay(right)),
                    _branch_cover(dag, base, left),
                    _branch_cover(dag, base, right),
                )
                result, _ = merge_revisions(dag, left, right, "ada", at(500))
                assert oracles.to_grid(result.image) == expected_grid, (
                    w,
                    h,
                    [n for n, _ in left_seq],
                    [n for n, _ in right_seq],
                )
                got_tags = [
                    [TAG_NAMES[int(result.provenance[y, x])] for x in range(w)]
                    for y in range(h)
                ]
                assert got_tags == expected_tags
                checked += 1
    assert checked == 4 * (40 * 40 - 1)  # every pair except the twice-empty one


# ---------------------------------------------------------------------------
# criterion 5: diff path on the linear five-node fixture


def test_diff_path(tmp_path):
    store = build_linear_chain(tmp_path / "chain", n_edits=4)
    report = semantic_diff(store.dag, 0, 4)
    assert [step_id for step_id, _ in report.steps] == [1, 2, 3, 4]
    assert report.frame_count == 5
    assert render_diff_frame(report, 0) == store.dag.replay(0)
    assert render_diff_frame(report, 4) == store.dag.replay(4)
    for k in (1, 2, 3):
        assert render_diff_frame(report, k) == store.dag.replay(k)


# ---------------------------------------------------------------------------
# criterion 6: store integrity


def test_store_integrity(tmp_path):
    import random as _random

    rng = _random.Random(31337)
    for trial in range(200):
        root = tmp_path / f"g{trial}"
        store = ProjectStore.init_project(
            root,
            f"g{trial}",
            "ada",
            "png",
            width=rng.randrange(2, 7),
            height=rng.randrange(2, 7),
            timestamp=T0,
        )
        w = store.dag.replay(0).width
        h = store.dag.replay(0).height
        t = 1.0
        for _ in range(rng.randrange(1, 5)):
            parent = rng.choice(sorted(store.dag.nodes))
            op = rng.choice(
                [
                    EditOp.invert(),
                    EditOp.sepia(),
                    EditOp.posterize(rng.randrange(1, 9)),
                    EditOp.brush([(rng.randrange(w), rng.randrange(h))], 1, random_pixel(rng)),
                ]
            )
            store.apply(parent, op, timestamp=at(t), note=rng.choice(["", "wip", 'a,"b"']))
            t += 1.0
        if len(store.dag.heads) >= 2 and rng.random() < 0.5:
            heads = sorted(store.dag.heads)
            store.merge(heads[0], heads[1], timestamp=at(t))

        loaded = ProjectStore.load_project(root)
        assert sorted(loaded.dag.nodes) == sorted(store.dag.nodes), f"graph {trial}"
        assert loaded.dag.heads == store.dag.heads
        for node_id in store.dag.nodes:
            a, b = store.dag.node(node_id), loaded.dag.node(node_id)
            assert a.op.to_record() == b.op.to_record(), f"graph {trial} node {node_id}"
            assert a.parents == b.parents
            assert a.author == b.author
            assert a.timestamp == b.timestamp
            assert a.note == b.note
            assert a.thumbnail_path == b.thumbnail_path

    # induced corruption is detected and named
    victim = tmp_path / "victim"
    store = ProjectStore.init_project(victim, "v", "ada", "png", width=4, height=4, timestamp=T0)
    store.apply(0, EditOp.invert(), timestamp=at(1))
    store.apply(1, EditOp.sepia(), timestamp=at(2))
    (victim / "deltas" / "2.csv").unlink()
    with pytest.raises(CorruptStoreError) as err:
        ProjectStore.load_project(victim)
    assert err.value.node_id == 2

    # dag.json rewrites are byte-stable when nothing changed
    stable = tmp_path / "stable"
    store = ProjectStore.init_project(stable, "s", "ada", "png", width=4, height=4, timestamp=T0)
    store.apply(0, EditOp.invert(), timestamp=at(1))
    before = (stable / "dag.json").read_bytes()
    store._write_dag_json()
    store._write_dag_json()
    assert (stable / "dag.json").read_bytes() == before


# ---------------------------------------------------------------------------
# criterion 7: backend integration


@requires_git
def test_backend_integration(tmp_path):
    from imgvc.gitbackend import GitBackend

    # real git: init -> apply x3 -> commit (revision 0) -> clone -> replay
    store = ProjectStore.init_project(
        tmp_path / "p", "p", "ada", "png", width=8, height=8, timestamp=T0
    )
    head = 0
    for k, op in enumerate(
        (EditOp.invert(), EditOp.brush([(2, 2)], 2, Pixel(9, 200, 30)), EditOp.sepia())
    ):
        head = store.apply(head, op, timestamp=at(k + 1))
    assert store.commit_milestone(head, "first milestone") == 0

    GitBackend.clone(str(store.root), str(tmp_path / "clone"))
    cloned = ProjectStore.load_project(tmp_path / "clone")
    milestone_pixels = decode_image(
        (tmp_path / "clone" / "milestones" / "rev0.png").read_bytes()
    )
    assert cloned.dag.replay(head) == milestone_pixels

    # scripted fake backend: divergent histories produce the merge-needed report
    local = ProjectStore.init_project(
        tmp_path / "local", "shared", "ada", "png", width=8, height=8,
        remote_url="fake://remote", timestamp=T0,
    )
    local.apply(0, EditOp.invert(), timestamp=at(1))
    other = ProjectStore.init_project(
        tmp_path / "other", "shared", "ada", "png", width=8, height=8,
        remote_url="fake://remote", timestamp=T0,
    )
    other.apply(0, EditOp.sepia(), author="bob", timestamp=at(2))
    local.backend = FakeGitBackend(
        fetched_files={"dag.json": (other.root / "dag.json").read_text()}
    )
    report = local.pull()
    assert report.merge_needed
    assert report.local_heads == [1]
    assert report.remote_heads == [1]

    # LFS pointer grammar with the standard SHA-256 vectors
    assert make_lfs_pointer(b"") == (
        "version https://git-lfs.github.com/spec/v1\n"
        "oid sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855\n"
        "size 0\n"
    )
    assert make_lfs_pointer(b"abc") == (
        "version https://git-lfs.github.com/spec/v1\n"
        "oid sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad\n"
        "size 3\n"
    )


# ---------------------------------------------------------------------------
# criterion 8: CLI/API parity


def _tree_snapshot(root: Path) -> dict[str, bytes]:
    skip_parts = {".git", ".imgvc.lock"}
    out = {}
    for path in sorted(root.rglob("*")):
        rel = path.relative_to(root)
        if skip_parts & set(rel.parts):
            continue
        if path.is_file():
            out[str(rel)] = path.read_bytes()
    return out


@requires_git
def test_cli_api_parity(tmp_path):
    t = ["2026-01-02T13:00:00Z", "2026-01-02T13:10:00Z", "2026-01-02T13:20:00Z"]

    def make_side(name):
        side = tmp_path / name
        side.mkdir()
        subprocess.run(
            ["git", "init", "--bare", "-b", "main", str(side / "remote.git")],
            check=True,
            capture_output=True,
        )
        store = ProjectStore.init_project(
            side / "project",
            "parity",
            "ada",
            "png",
            width=8,
            height=8,
            remote_url="../remote.git",
            timestamp=T0,
        )
        return side / "project", store

    cli_dir, _ = make_side("cli")
    api_dir, api_store = make_side("api")

    server = make_server(api_store, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"

    def post(endpoint, payload):
        reply = requests.post(f"{base}{endpoint}", json=payload)
        assert reply.status_code == 200, reply.text
        return reply.json()

    def check(step):
        a, b = _tree_snapshot(cli_dir), _tree_snapshot(api_dir)
        assert sorted(a) == sorted(b), f"{step}: different file sets"
        for rel in a:
            assert a[rel] == b[rel], f"{step}: {rel} differs"

    try:
        # apply
        assert run_cli(["--dir", str(cli_dir), "apply", "invert", "--at", t[0]]) == 0
        post("/api/apply", {"parent": 0, "op": "Invert", "params": {}, "timestamp": t[0]})
        check("apply")

        # branch
        assert run_cli(
            ["--dir", str(cli_dir), "branch", "brush", "--from", "0",
             "--points", "1,1;3,3", "--radius", "1", "--color", "#FF0000FF", "--at", t[1]]
        ) == 0
        post(
            "/api/branch",
            {
                "from": 0,
                "op": "Brush",
                "params": {"points": "1,1;3,3", "radius": "1", "color": "#FF0000FF"},
                "timestamp": t[1],
            },
        )
        check("branch")

        # annotate
        assert run_cli(["--dir", str(cli_dir), "annotate", "1", "--note", "first edit"]) == 0
        post("/api/annotate", {"id": 1, "note": "first edit"})
        check("annotate")

        # merge
        assert run_cli(["--dir", str(cli_dir), "merge", "1", "2", "--at", t[2]]) == 0
        post("/api/merge", {"left": 1, "right": 2, "timestamp": t[2]})
        check("merge")

        # commit
        assert run_cli(["--dir", str(cli_dir), "commit", "-m", "milestone zero"]) == 0
        post("/api/commit", {"message": "milestone zero"})
        check("commit")

        # push
        assert run_cli(["--dir", str(cli_dir), "push"]) == 0
        post("/api/push", {})
        check("push")

        # pull (no remote changes: a clean no-op on both surfaces)
        assert run_cli(["--dir", str(cli_dir), "pull"]) == 0
        pull_payload = post("/api/pull", {})
        assert pull_payload["status"] == "up-to-date"
        check("pull")
    finally:
        server.shutdown()
        server.server_close()
