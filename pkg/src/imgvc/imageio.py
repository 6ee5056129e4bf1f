"""Encoding and decoding between RasterImage and the supported file formats.

Supported formats: jpeg, png, tiff, bmp. Everything decodes to canonical
RGBA8 (missing alpha becomes 255). png/tiff/bmp encode losslessly; jpeg is
lossy and excluded from round-trip guarantees. BMP is written by hand as a
32-bit BITMAPV4 file because stock encoders drop the alpha channel.
"""

from __future__ import annotations

import io
import struct

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import ImageImportError, UnsupportedFormatError
from .image import RasterImage

SUPPORTED_FORMATS = ("jpeg", "png", "tiff", "bmp")

_ALIASES = {"jpg": "jpeg", "tif": "tiff"}
_PIL_NAMES = {"jpeg": "JPEG", "png": "PNG", "tiff": "TIFF", "bmp": "BMP"}


def normalize_format(name: str) -> str:
    fmt = _ALIASES.get(name.lower().lstrip("."), name.lower().lstrip("."))
    if fmt not in SUPPORTED_FORMATS:
        raise UnsupportedFormatError(
            f"format {name!r} not supported; expected one of {', '.join(SUPPORTED_FORMATS)}"
        )
    return fmt


def decode_image(data: bytes, format_hint: str | None = None) -> RasterImage:
    """Decode file bytes to RGBA8, rejecting formats outside the supported set."""
    if format_hint is not None:
        normalize_format(format_hint)
    try:
        img = Image.open(io.BytesIO(data))
        img.load()
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise ImageImportError(f"could not decode image bytes: {exc}") from exc
    actual = (img.format or "").upper()
    if actual not in _PIL_NAMES.values():
        raise ImageImportError(f"decoded format {actual or 'unknown'} is not supported")
    if img.mode != "RGBA":
        img = img.convert("RGBA")
    return RasterImage(np.asarray(img, dtype=np.uint8))


def encode_image(img: RasterImage, fmt: str) -> bytes:
    fmt = normalize_format(fmt)
    if fmt == "bmp":
        return _encode_bmp_rgba(img.pixels)
    buf = io.BytesIO()
    if fmt == "jpeg":
        # JPEG carries no alpha; flatten to RGB.
        Image.fromarray(img.pixels[:, :, :3], "RGB").save(buf, "JPEG", quality=95)
    else:
        Image.fromarray(img.pixels, "RGBA").save(buf, _PIL_NAMES[fmt])
    return buf.getvalue()


def encode_png(img: RasterImage) -> bytes:
    return encode_image(img, "png")


def _encode_bmp_rgba(arr: np.ndarray) -> bytes:
    """32bpp BMP with BITMAPV4 header and explicit BGRA channel masks."""
    h, w, _ = arr.shape
    bgra = arr[::-1, :, [2, 1, 0, 3]].tobytes()
    dib = struct.pack("<IiiHHIIiiII", 108, w, h, 1, 32, 3, len(bgra), 2835, 2835, 0, 0)
    dib += struct.pack("<IIII", 0x00FF0000, 0x0000FF00, 0x000000FF, 0xFF000000)
    dib += b"BGRs" + b"\x00" * 48
    offset = 14 + len(dib)
    header = b"BM" + struct.pack("<IHHI", offset + len(bgra), 0, 0, offset)
    return header + dib + bgra
