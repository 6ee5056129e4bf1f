"""In-memory raster types: RGBA images, pixels, and rectangular regions.

The canonical pixel layout is an ``(height, width, 4)`` uint8 numpy array in
RGBA order. All editing operations treat images as immutable values and
return fresh arrays, so any number of readers can share one instance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True)
class Pixel:
    """One RGBA sample; every channel is an integer in [0, 255]."""

    r: int
    g: int
    b: int
    a: int = 255

    def __post_init__(self):
        for name in ("r", "g", "b", "a"):
            v = getattr(self, name)
            if not isinstance(v, int) or not 0 <= v <= 255:
                raise InvalidParameterError(f"channel {name}={v!r} outside [0, 255]")

    @classmethod
    def from_hex(cls, text: str) -> "Pixel":
        """Parse ``#RRGGBBAA`` (or ``#RRGGBB``, alpha defaults to FF)."""
        s = text.strip()
        if not s.startswith("#") or len(s) not in (7, 9):
            raise InvalidParameterError(f"bad color literal {text!r}, expected #RRGGBBAA")
        try:
            vals = [int(s[i : i + 2], 16) for i in range(1, len(s), 2)]
        except ValueError:
            raise InvalidParameterError(f"bad color literal {text!r}") from None
        if len(vals) == 3:
            vals.append(255)
        return cls(*vals)

    def to_hex(self) -> str:
        return f"#{self.r:02X}{self.g:02X}{self.b:02X}{self.a:02X}"

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.r, self.g, self.b, self.a)


@dataclass(frozen=True)
class Region:
    """Axis-aligned pixel rectangle: top-left corner plus extent."""

    x0: int
    y0: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise InvalidParameterError(f"region extent {self.w}x{self.h} must be >= 1x1")

    @property
    def x1(self) -> int:
        """One past the right edge."""
        return self.x0 + self.w

    @property
    def y1(self) -> int:
        """One past the bottom edge."""
        return self.y0 + self.h

    def contains_point(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def intersects(self, other: "Region") -> bool:
        return (
            self.x0 < other.x1
            and other.x0 < self.x1
            and self.y0 < other.y1
            and other.y0 < self.y1
        )

    def within(self, width: int, height: int) -> bool:
        return self.x0 >= 0 and self.y0 >= 0 and self.x1 <= width and self.y1 <= height


class RasterImage:
    """A width x height grid of RGBA pixels backed by a uint8 array."""

    __slots__ = ("_pixels",)

    def __init__(self, pixels: np.ndarray):
        arr = np.asarray(pixels)
        if arr.ndim != 3 or arr.shape[2] != 4 or arr.dtype != np.uint8:
            raise InvalidParameterError(
                f"pixel array must be (h, w, 4) uint8, got shape {arr.shape} dtype {arr.dtype}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidParameterError("images must be at least 1x1")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self._pixels = arr

    @classmethod
    def filled(cls, width: int, height: int, fill: Pixel) -> "RasterImage":
        if width < 1 or height < 1:
            raise InvalidParameterError(f"canvas {width}x{height} must be at least 1x1")
        arr = np.empty((height, width, 4), dtype=np.uint8)
        arr[:, :] = fill.as_tuple()
        return cls(arr)

    @property
    def width(self) -> int:
        return self._pixels.shape[1]

    @property
    def height(self) -> int:
        return self._pixels.shape[0]

    @property
    def pixels(self) -> np.ndarray:
        """Read-only (h, w, 4) uint8 view of the pixel grid."""
        return self._pixels

    def full_region(self) -> Region:
        return Region(0, 0, self.width, self.height)

    def pixel(self, x: int, y: int) -> Pixel:
        if not (0 <= x < self.width and 0 <= y < self.height):
            raise InvalidParameterError(f"pixel ({x}, {y}) outside {self.width}x{self.height}")
        r, g, b, a = (int(v) for v in self._pixels[y, x])
        return Pixel(r, g, b, a)

    def writable_copy(self) -> np.ndarray:
        return self._pixels.copy()

    def to_bytes(self) -> bytes:
        """Raw row-major RGBA bytes, the grid's canonical serialization."""
        return self._pixels.tobytes()

    @classmethod
    def from_bytes(cls, width: int, height: int, data: bytes) -> "RasterImage":
        expected = width * height * 4
        if len(data) != expected:
            raise InvalidParameterError(
                f"pixel payload is {len(data)} bytes, expected {expected} for {width}x{height}"
            )
        arr = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 4)
        return cls(arr.copy())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self._pixels.shape == other._pixels.shape and bool(
            (self._pixels == other._pixels).all()
        )

    def __hash__(self):
        return hash((self._pixels.shape, self._pixels.tobytes()))

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height})"
