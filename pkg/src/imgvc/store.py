"""On-disk project store: three logs, milestones, thumbnails, Git bridge.

Layout (relative to the project root):

    Project.properties   key=value project metadata
    dag.json             graph structure (byte-stable JSON)
    nodes.csv            one row of node bookkeeping per node
    deltas/<id>.csv      flat key,value serialization of the node's operation
    milestones/rev<k>.<fmt>  full image binaries committed to the backend
    thumbs/<id>.png      node thumbnails (<= 96 px longest side)
    .imgvc.lock          writer lock (never committed)

nodes.csv, dag.json and deltas/ must always describe the same node set;
load cross-checks them and refuses the first divergent node.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

from .dag import DagNode, RevisionDag, format_timestamp, parse_timestamp, utc_now
from .diffmerge import MergeResult, merge_revisions
from .errors import (
    AlreadyInitializedError,
    BackendCommandError,
    CorruptStoreError,
    EmptyCommitError,
    ImgvcError,
    InvalidParameterError,
    NoRemoteError,
)
from .gitbackend import GitBackend
from .image import Pixel
from .imageio import decode_image, encode_image, encode_png, normalize_format
from .lfs import is_lfs_pointer
from .lock import WriterLock
from .ops import EditOp, scale

PROPERTIES_FILE = "Project.properties"
DAG_FILE = "dag.json"
NODES_FILE = "nodes.csv"
DELTAS_DIR = "deltas"
MILESTONES_DIR = "milestones"
THUMBS_DIR = "thumbs"

_PROPERTY_KEYS = ("name", "author", "created", "format", "remote")
_CSV_COLUMNS = ("id", "kind", "author", "timestamp", "parents", "note", "thumbnail")
_THUMB_MAX = 96
_LOSSLESS = {"png", "bmp", "tiff"}

DEFAULT_CANVAS = (512, 512)
_WHITE = Pixel(255, 255, 255)


@dataclass
class PullReport:
    """Outcome of a pull: either nothing to do, a fast-forward, or the two
    head sets the user must merge by hand."""

    status: str  # up-to-date | fast-forwarded | local-ahead | merge-needed
    local_heads: list[int] = field(default_factory=list)
    remote_heads: list[int] = field(default_factory=list)
    new_nodes: list[int] = field(default_factory=list)

    @property
    def merge_needed(self) -> bool:
        return self.status == "merge-needed"


class ProjectStore:
    """A project directory plus its in-memory history graph."""

    def __init__(self, root_dir: str | Path, properties: dict, dag: RevisionDag):
        self.root = Path(root_dir)
        self.properties = properties
        self.dag = dag
        self.backend = GitBackend(str(self.root))

    # -- creation and loading -------------------------------------------------

    @classmethod
    def init_project(
        cls,
        root_dir: str | Path,
        name: str,
        author: str,
        image_format: str,
        source_image: bytes | None = None,
        remote_url: str | None = None,
        width: int | None = None,
        height: int | None = None,
        fill: Pixel = _WHITE,
        timestamp: datetime | None = None,
    ) -> "ProjectStore":
        root = Path(root_dir)
        if root.exists() and any(root.iterdir()):
            raise AlreadyInitializedError(f"{root} already contains files")
        image_format = normalize_format(image_format)
        for label, value in (("name", name), ("author", author), ("remote", remote_url or "")):
            if "\n" in value or "\r" in value:
                # Project.properties is line-based
                raise InvalidParameterError(f"project {label} must not contain newlines")
        created = timestamp or utc_now()

        if source_image is not None:
            decoded = decode_image(source_image)
            root_op = EditOp.import_pixels(decoded, image_format)
        else:
            w, h = width or DEFAULT_CANVAS[0], height or DEFAULT_CANVAS[1]
            root_op = EditOp.new(w, h, fill)

        dag = RevisionDag.create_root(root_op, author, created)
        properties = {
            "name": name,
            "author": author,
            "created": format_timestamp(created),
            "format": image_format,
            "remote": remote_url or "",
        }
        root.mkdir(parents=True, exist_ok=True)
        (root / DELTAS_DIR).mkdir()
        (root / MILESTONES_DIR).mkdir()
        (root / THUMBS_DIR).mkdir()
        store = cls(root, properties, dag)
        store._write_properties()
        (root / ".gitignore").write_bytes(b".imgvc.lock\n")
        store._write_nodes_csv()
        store._write_delta(dag.node(0))
        store._write_thumbnail(0)
        store._write_dag_json()
        return store

    @classmethod
    def load_project(cls, root_dir: str | Path) -> "ProjectStore":
        root = Path(root_dir)
        props_path = root / PROPERTIES_FILE
        if not props_path.exists():
            raise CorruptStoreError(f"{root} has no {PROPERTIES_FILE}; not a project")
        properties = _read_properties(props_path)

        doc = _read_dag_json(root / DAG_FILE)
        csv_rows = _read_nodes_csv(root / NODES_FILE)
        delta_ids = _list_delta_ids(root / DELTAS_DIR)
        nodes = _cross_check(root, doc, csv_rows, delta_ids)
        dag = RevisionDag.from_nodes(nodes)

        store = cls(root, properties, dag)
        store._verify_milestones(doc.get("milestones", []))
        for head in sorted(dag.heads):
            dag.replay(head)  # any failure here means the logs are unusable
        store._milestones = doc.get("milestones", [])
        return store

    # -- mutations -------------------------------------------------------------

    def apply(
        self,
        parent: int,
        op: EditOp,
        author: str | None = None,
        timestamp: datetime | None = None,
        note: str = "",
    ) -> int:
        """Append one edit after `parent` and persist it."""
        with WriterLock(self.root):
            node_id = self.dag.append_node(
                parent, op, author or self.properties["author"], timestamp, note
            )
            self.persist_node(self.dag.node(node_id))
            return node_id

    def merge(
        self,
        left: int,
        right: int,
        author: str | None = None,
        timestamp: datetime | None = None,
        note: str = "",
    ) -> tuple[MergeResult, int]:
        with WriterLock(self.root):
            result, node_id = merge_revisions(
                self.dag, left, right, author or self.properties["author"], timestamp, note
            )
            self.persist_node(self.dag.node(node_id))
            return result, node_id

    def annotate(self, node_id: int, note: str) -> None:
        with WriterLock(self.root):
            self.dag.node(node_id).note = note
            self._write_nodes_csv()
            self._write_dag_json()

    def persist_node(self, node: DagNode) -> None:
        """Write everything one appended node needs: a nodes.csv row, its
        delta file, its thumbnail, and a fresh dag.json."""
        self._append_nodes_csv_row(node)
        self._write_delta(node)
        self._write_thumbnail(node.id)
        self._write_dag_json()

    # -- milestones and the external backend -----------------------------------

    def commit_milestone(self, head: int, message: str, when: datetime | None = None) -> int:
        """Export the head image, stage everything and commit; returns the
        0-based revision number."""
        self.dag.node(head)
        with WriterLock(self.root):
            self.backend.ensure_available()
            fmt = self.properties["format"]
            rev = len(self.milestones)
            if (
                self.milestones
                and self.milestones[-1]["node"] == head
                and self.backend.is_repo()
                and self.backend.status_clean()
            ):
                raise EmptyCommitError(
                    f"node {head} is already committed as revision {rev - 1}"
                )
            filename = f"rev{rev}.{fmt}"
            data = encode_image(self.dag.replay(head), fmt)
            (self.root / MILESTONES_DIR / filename).write_bytes(data)
            self.milestones.append({"file": filename, "node": head, "rev": rev})
            self._write_dag_json()
            self._ensure_repo()
            self.backend.add_all()
            self.backend.commit(message, when)
            return rev

    def push(self) -> None:
        self._require_remote()
        self._ensure_repo()
        self.backend.push()

    def pull(self) -> PullReport:
        """Fetch the remote logs; fast-forward when the remote strictly
        extends local history, otherwise report both head sets."""
        self._require_remote()
        with WriterLock(self.root):
            self._ensure_repo()
            try:
                self.backend.fetch()
            except BackendCommandError as exc:
                if "couldn't find remote ref" in exc.output.lower():
                    return PullReport("up-to-date", local_heads=sorted(self.dag.heads))
                raise
            remote_text = self.backend.show_fetched_file(DAG_FILE)
            if remote_text is None:
                return PullReport("up-to-date", local_heads=sorted(self.dag.heads))
            try:
                remote_doc = json.loads(remote_text)
                remote_nodes = {n["id"]: n for n in remote_doc["nodes"]}
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise BackendCommandError(
                    "fetched dag.json is unreadable", output=str(exc)
                ) from None
            local_nodes = {n["id"]: n for n in self._dag_json_doc()["nodes"]}

            local_heads = sorted(self.dag.heads)
            remote_heads = _heads_of(remote_nodes)
            if remote_nodes == local_nodes:
                return PullReport("up-to-date", local_heads, remote_heads)
            local_subset = all(
                remote_nodes.get(i) == n for i, n in local_nodes.items()
            )
            remote_subset = all(
                local_nodes.get(i) == n for i, n in remote_nodes.items()
            )
            if local_subset:
                self.backend.merge_ff_only()
                reloaded = ProjectStore.load_project(self.root)
                self.dag = reloaded.dag
                self.properties = reloaded.properties
                self._milestones = reloaded.milestones
                return PullReport(
                    "fast-forwarded",
                    local_heads=sorted(self.dag.heads),
                    remote_heads=remote_heads,
                    new_nodes=sorted(set(remote_nodes) - set(local_nodes)),
                )
            if remote_subset:
                return PullReport("local-ahead", local_heads, remote_heads)
            return PullReport("merge-needed", local_heads, remote_heads)

    def export_image(self, head: int, path: str | Path, image_format: str | None = None) -> None:
        fmt = normalize_format(image_format or Path(path).suffix.lstrip(".") or "png")
        data = encode_image(self.dag.replay(head), fmt)
        Path(path).write_bytes(data)

    # -- paths and properties ---------------------------------------------------

    @property
    def milestones(self) -> list[dict]:
        if not hasattr(self, "_milestones"):
            self._milestones: list[dict] = []
        return self._milestones

    def thumbnail_path(self, node_id: int) -> Path:
        return self.root / THUMBS_DIR / f"{node_id}.png"

    def _require_remote(self) -> None:
        if not self.properties.get("remote"):
            raise NoRemoteError("no remote URL configured for this project")

    def _ensure_repo(self) -> None:
        if not self.backend.is_repo():
            self.backend.init()
        else:
            self.backend.ensure_identity()
        remote = self.properties.get("remote")
        if remote and not self.backend.has_remote():
            self.backend.remote_add(remote)

    # -- writers -----------------------------------------------------------------

    def _write_properties(self) -> None:
        lines = [f"{k}={self.properties.get(k, '')}" for k in _PROPERTY_KEYS]
        _atomic_write(self.root / PROPERTIES_FILE, ("\n".join(lines) + "\n").encode("utf-8"))

    def _dag_json_doc(self) -> dict:
        nodes = []
        for node in self.dag.sorted_nodes():
            record = node.op.to_record()
            record.pop("kind")
            record.pop("data", None)  # bulky payloads live in the delta files
            nodes.append(
                {
                    "id": node.id,
                    "kind": node.op.kind,
                    "author": node.author,
                    "timestamp": format_timestamp(node.timestamp),
                    "parents": node.parents,
                    "note": node.note,
                    "thumbnail": node.thumbnail_path,
                    "params": record,
                }
            )
        return {
            "version": 1,
            "project": self.properties["name"],
            "nodes": nodes,
            "milestones": self.milestones,
        }

    def _write_dag_json(self) -> None:
        payload = json.dumps(
            self._dag_json_doc(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
        ).encode("utf-8")
        _atomic_write(self.root / DAG_FILE, payload)

    def _csv_row(self, node: DagNode) -> list[str]:
        return [
            str(node.id),
            node.op.kind,
            node.author,
            format_timestamp(node.timestamp),
            "|".join(str(p) for p in node.parents),
            node.note,
            node.thumbnail_path,
        ]

    def _write_nodes_csv(self) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_CSV_COLUMNS)
        for node in self.dag.sorted_nodes():
            writer.writerow(self._csv_row(node))
        _atomic_write(self.root / NODES_FILE, buf.getvalue().encode("utf-8"))

    def _append_nodes_csv_row(self, node: DagNode) -> None:
        with open(self.root / NODES_FILE, "a", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(self._csv_row(node))

    def _write_delta(self, node: DagNode) -> None:
        record = node.op.to_record()
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kind", record.pop("kind")])
        for key in sorted(record):
            writer.writerow([key, record[key]])
        _atomic_write(
            self.root / DELTAS_DIR / f"{node.id}.csv", buf.getvalue().encode("utf-8")
        )

    def _write_thumbnail(self, node_id: int) -> None:
        image = self.dag.replay(node_id)
        longest = max(image.width, image.height)
        if longest > _THUMB_MAX:
            tw = max(1, (image.width * _THUMB_MAX) // longest)
            th = max(1, (image.height * _THUMB_MAX) // longest)
            image = scale(image, tw, th)
        _atomic_write(self.thumbnail_path(node_id), encode_png(image))

    def _verify_milestones(self, milestones: list[dict]) -> None:
        for entry in milestones:
            node_id = entry["node"]
            if node_id not in self.dag:
                raise CorruptStoreError(
                    f"milestone {entry['file']} references missing node {node_id}",
                    node_id=node_id,
                )
            path = self.root / MILESTONES_DIR / entry["file"]
            if not path.exists():
                raise CorruptStoreError(
                    f"milestone file {entry['file']} is missing", node_id=node_id
                )
            data = path.read_bytes()
            fmt = Path(entry["file"]).suffix.lstrip(".")
            if is_lfs_pointer(data) or fmt not in _LOSSLESS:
                continue  # pointer stand-ins and lossy formats skip pixel checks
            if decode_image(data) != self.dag.replay(node_id):
                raise CorruptStoreError(
                    f"milestone {entry['file']} does not match the replay of node {node_id}",
                    node_id=node_id,
                )


# -- loading helpers -------------------------------------------------------------


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp.{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _read_properties(path: Path) -> dict:
    properties = {k: "" for k in _PROPERTY_KEYS}
    for line in path.read_text("utf-8").splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            properties[key] = value
    return properties


def _read_dag_json(path: Path) -> dict:
    if not path.exists():
        raise CorruptStoreError(f"{path.name} is missing")
    try:
        doc = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptStoreError(f"{path.name} is not valid JSON: {exc}") from None
    if doc.get("version") != 1:
        raise CorruptStoreError(f"{path.name} has unsupported version {doc.get('version')!r}")
    return doc


def _read_nodes_csv(path: Path) -> dict[int, dict]:
    if not path.exists():
        raise CorruptStoreError(f"{path.name} is missing")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != list(_CSV_COLUMNS):
            raise CorruptStoreError(f"{path.name} has unexpected columns {header}")
        rows = {}
        for row in reader:
            rows[int(row[0])] = dict(zip(_CSV_COLUMNS, row))
    return rows


def _list_delta_ids(deltas_dir: Path) -> set[int]:
    if not deltas_dir.is_dir():
        raise CorruptStoreError("deltas directory is missing")
    ids = set()
    for entry in deltas_dir.glob("*.csv"):
        try:
            ids.add(int(entry.stem))
        except ValueError:
            raise CorruptStoreError(f"unexpected delta file {entry.name}") from None
    return ids


def _read_delta(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8", newline="") as fh:
        return {row[0]: row[1] for row in csv.reader(fh) if row}


def _cross_check(
    root: Path, doc: dict, csv_rows: dict[int, dict], delta_ids: set[int]
) -> list[DagNode]:
    """Check the three logs describe the same nodes; name the first mismatch."""
    json_nodes = {n["id"]: n for n in doc.get("nodes", [])}
    all_ids = sorted(set(json_nodes) | set(csv_rows) | delta_ids)
    for node_id in all_ids:
        for present, source in (
            (node_id in json_nodes, DAG_FILE),
            (node_id in csv_rows, NODES_FILE),
            (node_id in delta_ids, f"{DELTAS_DIR}/"),
        ):
            if not present:
                raise CorruptStoreError(
                    f"node {node_id} is missing from {source}", node_id=node_id
                )

    nodes = []
    for node_id in all_ids:
        jn = json_nodes[node_id]
        row = csv_rows[node_id]
        delta = _read_delta(root / DELTAS_DIR / f"{node_id}.csv")

        try:
            op = EditOp.from_record(delta)
        except ImgvcError as exc:
            raise CorruptStoreError(
                f"node {node_id} has an unreadable delta: {exc}", node_id=node_id
            ) from None
        expected_params = op.to_record()
        expected_params.pop("kind")
        expected_params.pop("data", None)
        row_parents = [int(p) for p in row["parents"].split("|") if p]
        mismatches = (
            jn["kind"] != op.kind
            or row["kind"] != op.kind
            or jn["params"] != expected_params
            or jn["author"] != row["author"]
            or jn["timestamp"] != row["timestamp"]
            or jn["parents"] != row_parents
            or jn["note"] != row["note"]
            or jn["thumbnail"] != row["thumbnail"]
        )
        if mismatches:
            raise CorruptStoreError(
                f"node {node_id} differs between the logs", node_id=node_id
            )
        nodes.append(
            DagNode(
                id=node_id,
                op=op,
                parents=list(jn["parents"]),
                author=jn["author"],
                timestamp=parse_timestamp(jn["timestamp"]),
                note=jn["note"],
                thumbnail_path=jn["thumbnail"],
            )
        )
    return nodes


def _heads_of(nodes_by_id: dict[int, dict]) -> list[int]:
    referenced = {p for n in nodes_by_id.values() for p in n["parents"]}
    return sorted(set(nodes_by_id) - referenced)
