"""Error classes shared by the engine, the store, the CLI and the HTTP API.

Every error carries a stable ``code`` (the class name) so the CLI and the
API can surface the same vocabulary to callers.
"""


class ImgvcError(Exception):
    """Base class for all engine errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class InvalidParameterError(ImgvcError):
    """An operation parameter is malformed or out of range."""


class InvalidRootError(ImgvcError):
    """A project root was created with a non-initializing operation."""


class InvalidArgumentError(ImgvcError):
    """An engine query was called with an argument it cannot accept."""


class MissingNodeError(ImgvcError):
    """A node id does not exist in the history graph."""


class NotAnAncestorError(ImgvcError):
    """The requested diff source is not an ancestor of the target."""


class ShapeError(ImgvcError):
    """Two images that must share dimensions do not."""


class MergeShapeError(ImgvcError):
    """Merge inputs have different dimensions; geometry must be reconciled first."""


class DegenerateMergeError(ImgvcError):
    """Merge was asked to combine a node with itself."""


class FrameIndexError(ImgvcError):
    """A diff frame index is outside [0, steps]."""


class ImageImportError(ImgvcError):
    """Bytes could not be decoded as an image in a supported format."""


class UnsupportedFormatError(ImgvcError):
    """The requested image format is not one of jpeg/png/tiff/bmp."""


class AlreadyInitializedError(ImgvcError):
    """init was pointed at a directory that already holds files."""


class CorruptStoreError(ImgvcError):
    """The on-disk logs disagree with each other."""

    def __init__(self, message: str, node_id: int | None = None):
        super().__init__(message)
        self.node_id = node_id


class BackendUnavailableError(ImgvcError):
    """The external version-control tool could not be run."""


class BackendCommandError(ImgvcError):
    """The external version-control tool ran and failed."""

    def __init__(self, message: str, output: str = ""):
        super().__init__(message)
        self.output = output


class EmptyCommitError(ImgvcError):
    """Nothing changed since the previous commit."""


class NoRemoteError(ImgvcError):
    """push/pull was requested but no remote is configured."""


class LockHeldError(ImgvcError):
    """Another process holds the project's writer lock."""
