"""Git-LFS pointer files: small three-line stand-ins for large binaries."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .errors import InvalidParameterError

SPEC_URL = "https://git-lfs.github.com/spec/v1"


@dataclass(frozen=True)
class LfsPointer:
    oid: str  # SHA-256 hex digest of the target file
    size: int  # bytes


def make_lfs_pointer(data: bytes) -> str:
    """Exactly three newline-terminated lines: version, oid, size."""
    digest = hashlib.sha256(data).hexdigest()
    return f"version {SPEC_URL}\noid sha256:{digest}\nsize {len(data)}\n"


def parse_lfs_pointer(text: str) -> LfsPointer:
    lines = text.split("\n")
    if len(lines) != 4 or lines[3] != "":
        raise InvalidParameterError("pointer must be exactly three newline-terminated lines")
    version, oid, size = lines[:3]
    if version != f"version {SPEC_URL}":
        raise InvalidParameterError(f"bad pointer version line {version!r}")
    if not oid.startswith("oid sha256:"):
        raise InvalidParameterError(f"bad pointer oid line {oid!r}")
    if not size.startswith("size "):
        raise InvalidParameterError(f"bad pointer size line {size!r}")
    return LfsPointer(oid=oid[len("oid sha256:"):], size=int(size[len("size "):]))


def is_lfs_pointer(data: bytes) -> bool:
    return data.startswith(b"version " + SPEC_URL.encode("ascii"))
