"""Command-line entry point for every engine capability.

Exit codes: 0 success, 1 engine error (the error class is printed), 2 usage
error. `--json` switches listing verbs to machine output. The project
directory defaults to $IMGVC_DIR, then the working directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import api as api_mod
from .dag import format_timestamp
from .errors import ImgvcError, InvalidArgumentError
from .image import Pixel
from .ops import EditOp
from .store import ProjectStore

_OP_ALIASES = {
    "mirror": "Mirror",
    "flip": "Flip",
    "transpose": "Transpose",
    "scale": "Scale",
    "histogram": "Histogram",
    "brightness": "Brightness",
    "bw": "BlackWhite",
    "blackwhite": "BlackWhite",
    "sepia": "Sepia",
    "invert": "Invert",
    "solarize": "Solarize",
    "posterize": "Posterize",
    "crop": "Crop",
    "text": "Text",
    "reset": "Reset",
    "brush": "Brush",
}

# CLI flag name -> record key for operation parameters
_OP_PARAM_FLAGS = (
    ("factor", "factor"),
    ("threshold", "threshold"),
    ("bits", "bits"),
    ("x0", "x0"),
    ("y0", "y0"),
    ("w", "w"),
    ("h", "h"),
    ("points", "points"),
    ("radius", "radius"),
    ("color", "color"),
    ("text", "text"),
    ("text_scale", "scale"),
    ("scale_w", "scale_w"),
    ("scale_h", "scale_h"),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="imgvc", description="Operation-based revision control for raster images."
    )
    parser.add_argument(
        "--dir",
        default=None,
        help="project directory (default: $IMGVC_DIR or the working directory)",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("init", help="create a new project")
    p.add_argument("--name", required=True)
    p.add_argument("--author", required=True)
    p.add_argument("--format", default="png", help="jpeg, png, tiff or bmp")
    p.add_argument("--source", help="source image file to import as the root")
    p.add_argument("--remote", help="URL of the shared Git repository")
    p.add_argument("--width", type=int, help="blank canvas width (no --source)")
    p.add_argument("--height", type=int, help="blank canvas height (no --source)")
    p.add_argument("--fill", default="#FFFFFFFF", help="blank canvas fill color")

    for verb, help_text in (
        ("apply", "append an edit to a head"),
        ("branch", "append an edit to any node, starting a branch"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("op", help="operation name, e.g. invert, brightness, brush")
        if verb == "apply":
            p.add_argument("--parent", type=int, help="parent node (default: the sole head)")
        else:
            p.add_argument("--from", dest="parent", type=int, required=True)
        p.add_argument("--note", default="")
        p.add_argument("--author")
        p.add_argument("--at", help="timestamp override (ISO-8601)")
        p.add_argument("--factor")
        p.add_argument("--threshold")
        p.add_argument("--bits")
        p.add_argument("--x0")
        p.add_argument("--y0")
        p.add_argument("--w")
        p.add_argument("--h")
        p.add_argument("--points", help="stroke points as x,y;x,y;...")
        p.add_argument("--radius")
        p.add_argument("--color", help="#RRGGBBAA")
        p.add_argument("--text")
        p.add_argument("--text-scale", dest="text_scale")
        p.add_argument("--scale-w", dest="scale_w")
        p.add_argument("--scale-h", dest="scale_h")

    p = sub.add_parser("history", help="list all nodes")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("info", help="show one node's details")
    p.add_argument("id", type=int)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("annotate", help="set a node's note")
    p.add_argument("id", type=int)
    p.add_argument("--note", required=True)

    p = sub.add_parser("diff", help="list the steps between two revisions")
    p.add_argument("src", type=int)
    p.add_argument("dst", type=int)
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("merge", help="merge two revisions into a new node")
    p.add_argument("left", type=int)
    p.add_argument("right", type=int)
    p.add_argument("--note", default="")
    p.add_argument("--author")
    p.add_argument("--at")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("commit", help="export a milestone and commit via the backend")
    p.add_argument("-m", "--message", required=True)
    p.add_argument("--head", type=int, help="node to commit (default: the sole head)")

    sub.add_parser("push", help="push pending commits to the remote")

    p = sub.add_parser("pull", help="fetch remote history; fast-forward or report")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("export", help="encode a revision to an image file")
    p.add_argument("id", type=int)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", help="jpeg, png, tiff or bmp (default: from suffix)")

    p = sub.add_parser("serve", help="run the local HTTP API for the browser UI")
    p.add_argument("--port", type=int, default=api_mod.DEFAULT_PORT)
    p.add_argument("--ui-dir", help="directory of built UI assets to serve at /")

    return parser


def project_dir(args) -> Path:
    return Path(args.dir or os.environ.get("IMGVC_DIR") or os.getcwd())


def op_from_args(args) -> EditOp:
    name = args.op.lower()
    if name not in _OP_ALIASES:
        raise InvalidArgumentError(
            f"unknown operation {args.op!r}; one of {', '.join(sorted(_OP_ALIASES))}"
        )
    record = {"kind": _OP_ALIASES[name]}
    for attr, key in _OP_PARAM_FLAGS:
        value = getattr(args, attr, None)
        if value is not None:
            record[key] = value
    return EditOp.from_record(record)


def default_parent(store: ProjectStore) -> int:
    heads = sorted(store.dag.heads)
    if len(heads) != 1:
        raise InvalidArgumentError(
            f"project has several heads {heads}; pass --parent to pick one"
        )
    return heads[0]


def _node_line(store: ProjectStore, node_id: int) -> str:
    n = store.dag.node(node_id)
    parents = ",".join(str(p) for p in n.parents) or "-"
    note = f"  # {n.note}" if n.note else ""
    return (
        f"{n.id:>4}  {n.op.summary():<40} {n.author:<12} "
        f"{format_timestamp(n.timestamp)}  parents={parents}{note}"
    )


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ImgvcError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    root = project_dir(args)

    if args.verb == "init":
        source = Path(args.source).read_bytes() if args.source else None
        store = ProjectStore.init_project(
            root,
            name=args.name,
            author=args.author,
            image_format=args.format,
            source_image=source,
            remote_url=args.remote,
            width=args.width,
            height=args.height,
            fill=Pixel.from_hex(args.fill),
        )
        image = store.dag.replay(0)
        print(f"initialized {args.name} in {root} ({image.width}x{image.height})")
        return 0

    if args.verb == "serve":
        store = ProjectStore.load_project(root)
        api_mod.serve(store, port=args.port, ui_dir=args.ui_dir)
        return 0

    store = ProjectStore.load_project(root)

    if args.verb in ("apply", "branch"):
        op = op_from_args(args)
        parent = args.parent if args.parent is not None else default_parent(store)
        when = api_mod.parse_client_timestamp(args.at) if args.at else None
        node_id = store.apply(parent, op, author=args.author, timestamp=when, note=args.note)
        print(f"node {node_id} <- {parent}: {op.summary()}")
        return 0

    if args.verb == "history":
        if args.json:
            print(json.dumps(api_mod.dag_payload(store)))
        else:
            for node in store.dag.sorted_nodes():
                print(_node_line(store, node.id))
        return 0

    if args.verb == "info":
        payload = api_mod.node_payload(store, args.id, with_size=True)
        if args.json:
            print(json.dumps(payload))
        else:
            for key in ("id", "kind", "summary", "author", "timestamp", "note", "parents"):
                print(f"{key:>10}: {payload[key]}")
            print(f"{'size':>10}: {payload['width']}x{payload['height']}")
        return 0

    if args.verb == "annotate":
        store.annotate(args.id, args.note)
        print(f"node {args.id} note set")
        return 0

    if args.verb == "diff":
        payload = api_mod.diff_payload(store, args.src, args.dst)
        if args.json:
            print(json.dumps(payload))
        else:
            print(f"{len(payload['steps'])} step(s) from {args.src} to {args.dst}")
            for step in payload["steps"]:
                print(f"  {step['id']:>4}  {step['summary']}")
            delta = payload["pixel_delta"]
            if delta is not None:
                print(f"pixels changed: {delta['count']}")
        return 0

    if args.verb == "merge":
        when = api_mod.parse_client_timestamp(args.at) if args.at else None
        result, node_id = store.merge(
            args.left, args.right, author=args.author, timestamp=when, note=args.note
        )
        if args.json:
            print(
                json.dumps(
                    {
                        "node": node_id,
                        "base": result.base,
                        "left": result.left,
                        "right": result.right,
                        "conflict_count": result.conflict_count,
                    }
                )
            )
        else:
            print(
                f"node {node_id} merges {args.left}+{args.right} "
                f"(base {result.base}, {result.conflict_count} conflict pixel(s))"
            )
        return 0

    if args.verb == "commit":
        head = args.head if args.head is not None else default_parent(store)
        rev = store.commit_milestone(head, args.message)
        print(f"revision {rev}")
        return 0

    if args.verb == "push":
        store.push()
        print("pushed")
        return 0

    if args.verb == "pull":
        report = store.pull()
        payload = {
            "status": report.status,
            "local_heads": report.local_heads,
            "remote_heads": report.remote_heads,
            "new_nodes": report.new_nodes,
        }
        if args.json:
            print(json.dumps(payload))
        elif report.merge_needed:
            print(
                f"merge needed: local heads {report.local_heads}, "
                f"remote heads {report.remote_heads}"
            )
        else:
            print(report.status)
        return 0

    if args.verb == "export":
        store.export_image(args.id, args.output, args.format)
        print(f"wrote {args.output}")
        return 0

    raise InvalidArgumentError(f"unhandled verb {args.verb}")  # pragma: no cover


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
