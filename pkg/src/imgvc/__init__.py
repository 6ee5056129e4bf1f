"""imgvc: revision control for raster images.

Editing operations are recorded as nodes of an acyclic history graph and
any revision is reconstructed by deterministic replay. Projects persist as
plain CSV/JSON logs bridged to an external Git backend, and a local HTTP
service exposes the graph to the companion browser UI.
"""

from .dag import DagNode, RevisionDag
from .diffmerge import (
    DiffReport,
    MergeResult,
    merge_revisions,
    pixel_diff,
    render_diff_frame,
    semantic_diff,
)
from .errors import ImgvcError
from .image import Pixel, RasterImage, Region
from .lfs import LfsPointer, make_lfs_pointer, parse_lfs_pointer
from .ops import EditOp, apply_edit
from .store import ProjectStore, PullReport

__all__ = [
    "DagNode",
    "DiffReport",
    "EditOp",
    "ImgvcError",
    "LfsPointer",
    "MergeResult",
    "Pixel",
    "ProjectStore",
    "PullReport",
    "RasterImage",
    "Region",
    "RevisionDag",
    "apply_edit",
    "make_lfs_pointer",
    "merge_revisions",
    "parse_lfs_pointer",
    "pixel_diff",
    "render_diff_frame",
    "semantic_diff",
]

__version__ = "0.1.0"
