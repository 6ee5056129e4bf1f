"""Local HTTP service exposing the project to the companion browser UI.

Binds loopback only. GET endpoints never mutate; mutation endpoints are
serialized through one in-process lock plus the project writer lock, so a
concurrent CLI mutation surfaces as 409. Image bodies are always PNG.
"""

from __future__ import annotations

import json
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .dag import format_timestamp, parse_timestamp
from .diffmerge import render_diff_frame, rle_encode, semantic_diff
from .errors import (
    ImgvcError,
    InvalidParameterError,
    LockHeldError,
    MissingNodeError,
)
from .imageio import encode_png
from .ops import EditOp
from .store import ProjectStore

DEFAULT_PORT = 8431

_STATUS_BY_ERROR = {
    MissingNodeError: 404,
    LockHeldError: 409,
}


def parse_client_timestamp(text: str) -> datetime:
    """Accept the store's own format or any ISO-8601 instant."""
    try:
        return parse_timestamp(text)
    except ValueError:
        pass
    iso = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        ts = datetime.fromisoformat(iso)
    except ValueError:
        raise InvalidParameterError(f"bad timestamp {text!r}") from None
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts


# ---------------------------------------------------------------------------
# JSON projections (node ids and URLs only; pixels travel as PNG bodies)


def node_payload(store: ProjectStore, node_id: int, with_size: bool = False) -> dict:
    node = store.dag.node(node_id)
    payload = {
        "id": node.id,
        "kind": node.op.kind,
        "summary": node.op.summary(),
        "author": node.author,
        "timestamp": format_timestamp(node.timestamp),
        "note": node.note,
        "parents": list(node.parents),
        "thumbnail": f"/api/node/{node.id}/thumb.png",
        "image": f"/api/node/{node.id}/image.png",
    }
    if with_size:
        image = store.dag.replay(node.id)
        payload["width"] = image.width
        payload["height"] = image.height
        payload["children"] = store.dag.children(node.id)
        record = node.op.to_record()
        record.pop("kind")
        record.pop("data", None)
        payload["params"] = record
    return payload


def dag_payload(store: ProjectStore) -> dict:
    return {
        "project": store.properties["name"],
        "nodes": [node_payload(store, n.id) for n in store.dag.sorted_nodes()],
        "heads": sorted(store.dag.heads),
    }


def diff_payload(store: ProjectStore, src: int, dst: int) -> dict:
    report = semantic_diff(store.dag, src, dst)
    payload = {
        "src": src,
        "dst": dst,
        "steps": [
            {"id": node_id, "kind": op.kind, "summary": op.summary()}
            for node_id, op in report.steps
        ],
        "frames": report.frame_count,
    }
    try:
        count, mask = report.pixel_delta()
        payload["pixel_delta"] = {
            "count": count,
            "width": int(mask.shape[1]),
            "height": int(mask.shape[0]),
            "rle": rle_encode(mask),
        }
    except ImgvcError:
        payload["pixel_delta"] = None  # endpoint states changed geometry
    return payload


# ---------------------------------------------------------------------------
# server


class ProjectApi:
    """Routing and state shared by all request handler instances."""

    def __init__(self, store: ProjectStore, ui_dir: str | None = None):
        self.store = store
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.state_lock = threading.RLock()
        self._png_cache: dict[tuple[int, int], bytes] = {}
        self._generation = 0

    # -- images ----------------------------------------------------------------

    def node_png(self, node_id: int) -> bytes:
        key = (self._generation, node_id)
        cached = self._png_cache.get(key)
        if cached is None:
            cached = encode_png(self.store.dag.replay(node_id))
            if len(self._png_cache) > 256:
                self._png_cache.clear()
            self._png_cache[key] = cached
        return cached

    def bump_generation(self) -> None:
        self._generation += 1

    # -- GET -------------------------------------------------------------------

    def handle_get(self, path: str, query: dict) -> tuple[int, str, bytes]:
        with self.state_lock:
            if path == "/api/dag":
                return _json_response(dag_payload(self.store))
            if path.startswith("/api/node/"):
                return self._get_node(path)
            if path == "/api/diff":
                src, dst = _int_param(query, "src"), _int_param(query, "dst")
                return _json_response(diff_payload(self.store, src, dst))
            if path == "/api/diff/frame":
                src, dst = _int_param(query, "src"), _int_param(query, "dst")
                k = _int_param(query, "k")
                report = semantic_diff(self.store.dag, src, dst)
                frame = render_diff_frame(report, k)
                return 200, "image/png", encode_png(frame)
        return self._static(path)

    def _get_node(self, path: str) -> tuple[int, str, bytes]:
        parts = path.split("/")[3:]  # ['', 'api', 'node', id, ...]
        if not parts or not parts[0].lstrip("-").isdigit():
            raise MissingNodeError(f"bad node path {path}")
        node_id = int(parts[0])
        rest = parts[1:]
        if not rest:
            return _json_response(node_payload(self.store, node_id, with_size=True))
        if rest == ["image.png"]:
            self.store.dag.node(node_id)
            return 200, "image/png", self.node_png(node_id)
        if rest == ["thumb.png"]:
            self.store.dag.node(node_id)
            thumb = self.store.thumbnail_path(node_id)
            if thumb.exists():
                return 200, "image/png", thumb.read_bytes()
            return 200, "image/png", self.node_png(node_id)
        raise MissingNodeError(f"unknown node resource {path}")

    # -- POST --------------------------------------------------------------------

    def handle_post(self, path: str, body: dict) -> tuple[int, str, bytes]:
        with self.state_lock:
            out = self._dispatch_post(path, body)
            self.bump_generation()
            return out

    def _dispatch_post(self, path: str, body: dict) -> tuple[int, str, bytes]:
        store = self.store
        if path in ("/api/apply", "/api/branch"):
            parent_key = "parent" if path == "/api/apply" else "from"
            parent = _int_field(body, parent_key)
            op = EditOp.from_record({"kind": body.get("op", ""), **body.get("params", {})})
            node_id = store.apply(
                parent,
                op,
                author=body.get("author"),
                timestamp=_optional_timestamp(body),
                note=body.get("note", ""),
            )
            return _json_response({"node": node_id})
        if path == "/api/annotate":
            node_id = _int_field(body, "id")
            note = body.get("note", "")
            store.annotate(node_id, note)
            return _json_response({"node": node_id, "note": note})
        if path == "/api/merge":
            result, node_id = store.merge(
                _int_field(body, "left"),
                _int_field(body, "right"),
                author=body.get("author"),
                timestamp=_optional_timestamp(body),
                note=body.get("note", ""),
            )
            return _json_response(
                {
                    "node": node_id,
                    "base": result.base,
                    "left": result.left,
                    "right": result.right,
                    "conflict_count": result.conflict_count,
                }
            )
        if path == "/api/commit":
            if "head" in body:
                head = _int_field(body, "head")
            else:
                heads = sorted(store.dag.heads)
                if len(heads) != 1:
                    raise InvalidParameterError(
                        f"project has several heads {heads}; pass 'head' to pick one"
                    )
                head = heads[0]
            rev = store.commit_milestone(head, body.get("message", ""))
            return _json_response({"revision": rev})
        if path == "/api/push":
            store.push()
            return _json_response({"ok": True})
        if path == "/api/pull":
            report = store.pull()
            return _json_response(
                {
                    "status": report.status,
                    "local_heads": report.local_heads,
                    "remote_heads": report.remote_heads,
                    "new_nodes": report.new_nodes,
                }
            )
        return 404, "application/json", _error_body("NotFound", f"no endpoint {path}")

    # -- static UI -----------------------------------------------------------------

    def _static(self, path: str) -> tuple[int, str, bytes]:
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                return 200, "text/html; charset=utf-8", _FALLBACK_PAGE
            return 404, "application/json", _error_body("NotFound", f"no route {path}")
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / rel).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            return 404, "application/json", _error_body("NotFound", f"no route {path}")
        return 200, _content_type(target.name), target.read_bytes()


class _Handler(BaseHTTPRequestHandler):
    api: ProjectApi  # set on the subclass by make_server

    def log_message(self, *args):  # quiet by default
        pass

    def _respond(self, status: int, ctype: str, body: bytes) -> None:
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _guarded(self, fn) -> None:
        try:
            status, ctype, body = fn()
        except ImgvcError as exc:
            status = _STATUS_BY_ERROR.get(type(exc), 400)
            self._respond(status, "application/json", _error_body(exc.code, str(exc)))
            return
        except Exception as exc:  # pragma: no cover - defensive
            self._respond(500, "application/json", _error_body("InternalError", str(exc)))
            return
        self._respond(status, ctype, body)

    def do_GET(self):
        url = urlparse(self.path)
        query = {k: v[-1] for k, v in parse_qs(url.query).items()}
        self._guarded(lambda: self.api.handle_get(url.path, query))

    def do_POST(self):
        url = urlparse(self.path)
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"

        def run():
            try:
                body = json.loads(raw.decode("utf-8") or "{}")
            except json.JSONDecodeError as exc:
                raise InvalidParameterError(f"request body is not JSON: {exc}") from None
            if not isinstance(body, dict):
                raise InvalidParameterError("request body must be a JSON object")
            return self.api.handle_post(url.path, body)

        self._guarded(run)


def make_server(
    store: ProjectStore, port: int = DEFAULT_PORT, ui_dir: str | None = None
) -> ThreadingHTTPServer:
    api = ProjectApi(store, ui_dir)
    handler = type("Handler", (_Handler,), {"api": api})
    server = ThreadingHTTPServer(("127.0.0.1", port), handler)
    server.api = api  # type: ignore[attr-defined]
    return server


def serve(store: ProjectStore, port: int = DEFAULT_PORT, ui_dir: str | None = None) -> None:
    server = make_server(store, port, ui_dir)
    host, actual_port = server.server_address[:2]
    print(f"imgvc serving {store.properties['name']} on http://{host}:{actual_port}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


# ---------------------------------------------------------------------------
# small helpers


def _json_response(payload: dict) -> tuple[int, str, bytes]:
    return 200, "application/json", json.dumps(payload).encode("utf-8")


def _error_body(code: str, message: str) -> bytes:
    return json.dumps({"error": code, "message": message}).encode("utf-8")


def _int_param(query: dict, key: str) -> int:
    try:
        return int(query[key])
    except (KeyError, ValueError):
        raise InvalidParameterError(f"query parameter {key!r} must be an integer") from None


def _int_field(body: dict, key: str) -> int:
    try:
        return int(body[key])
    except (KeyError, TypeError, ValueError):
        raise InvalidParameterError(f"body field {key!r} must be an integer") from None


def _optional_timestamp(body: dict) -> datetime | None:
    text = body.get("timestamp")
    return parse_client_timestamp(text) if text else None


def _content_type(name: str) -> str:
    for suffix, ctype in (
        (".html", "text/html; charset=utf-8"),
        (".js", "text/javascript; charset=utf-8"),
        (".mjs", "text/javascript; charset=utf-8"),
        (".css", "text/css; charset=utf-8"),
        (".png", "image/png"),
        (".svg", "image/svg+xml"),
        (".json", "application/json"),
        (".map", "application/json"),
    ):
        if name.endswith(suffix):
            return ctype
    return "application/octet-stream"


_FALLBACK_PAGE = b"""<!doctype html>
<html><head><title>imgvc</title></head>
<body><h1>imgvc API</h1>
<p>No UI bundle is configured (pass --ui-dir to serve one).</p>
<p>Endpoints: /api/dag, /api/node/{id}, /api/node/{id}/image.png,
/api/node/{id}/thumb.png, /api/diff?src&amp;dst, /api/diff/frame?src&amp;dst&amp;k,
POST /api/apply, /api/annotate, /api/branch, /api/merge, /api/commit,
/api/push, /api/pull.</p></body></html>
"""
