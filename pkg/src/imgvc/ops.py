"""The editing operations recorded as history nodes, and their pixel math.

Every operation is a pure function of (image, parameters) using integer-only
arithmetic, so replay is bit-exact on any platform. Rounding is half-up on
nonnegative values throughout; fractional parameters are carried as integer
thousandths.
"""

from __future__ import annotations

import base64
from dataclasses import dataclass, field

import numpy as np

from . import font
from .errors import InvalidArgumentError, InvalidParameterError
from .image import Pixel, RasterImage, Region

# Table of user-issuable operation kinds. MERGE_KIND marks the synthetic
# node a merge appends; it is never issued as an edit.
OP_KINDS = (
    "Mirror",
    "Flip",
    "Transpose",
    "Scale",
    "Histogram",
    "Brightness",
    "BlackWhite",
    "Sepia",
    "Invert",
    "Solarize",
    "Posterize",
    "Crop",
    "Text",
    "Reset",
    "Brush",
    "New",
    "Import",
)
MERGE_KIND = "MergeState"
INIT_KINDS = ("New", "Import")


# ---------------------------------------------------------------------------
# pixel transforms


def reorient(img: RasterImage, mode: str) -> RasterImage:
    """Mirror (left/right), Flip (top/bottom) or Transpose ((x,y)->(y,x))."""
    arr = img.pixels
    if mode == "Mirror":
        return RasterImage(arr[:, ::-1].copy())
    if mode == "Flip":
        return RasterImage(arr[::-1].copy())
    if mode == "Transpose":
        return RasterImage(arr.transpose(1, 0, 2).copy())
    raise InvalidParameterError(f"unknown reorientation {mode!r}")


def scale(img: RasterImage, new_w: int, new_h: int) -> RasterImage:
    """Nearest-neighbor resample: output (x,y) copies input (x*W//newW, y*H//newH)."""
    if new_w < 1 or new_h < 1:
        raise InvalidParameterError(f"scale target {new_w}x{new_h} must be >= 1x1")
    xs = (np.arange(new_w, dtype=np.int64) * img.width) // new_w
    ys = (np.arange(new_h, dtype=np.int64) * img.height) // new_h
    return RasterImage(img.pixels[np.ix_(ys, xs)].copy())


def invert(img: RasterImage) -> RasterImage:
    arr = img.writable_copy()
    arr[:, :, :3] = 255 - arr[:, :, :3]
    return RasterImage(arr)


def brightness(img: RasterImage, factor_millis: int) -> RasterImage:
    """Multiply color channels by factor_millis/1000, round half-up, clamp."""
    if factor_millis < 0:
        raise InvalidParameterError("brightness factor must be >= 0")
    arr = img.writable_copy()
    rgb = arr[:, :, :3].astype(np.int64)
    arr[:, :, :3] = np.minimum((rgb * factor_millis + 500) // 1000, 255).astype(np.uint8)
    return RasterImage(arr)


def grayscale(img: RasterImage) -> RasterImage:
    """Rec. 601 luma: L = round(0.299 r + 0.587 g + 0.114 b), replicated per channel."""
    arr = img.writable_copy()
    rgb = arr[:, :, :3].astype(np.int64)
    luma = (299 * rgb[:, :, 0] + 587 * rgb[:, :, 1] + 114 * rgb[:, :, 2] + 500) // 1000
    arr[:, :, 0] = arr[:, :, 1] = arr[:, :, 2] = luma.astype(np.uint8)
    return RasterImage(arr)


_SEPIA_ROWS = ((393, 769, 189), (349, 686, 168), (272, 534, 131))


def sepia(img: RasterImage) -> RasterImage:
    arr = img.writable_copy()
    rgb = arr[:, :, :3].astype(np.int64)
    for c, (wr, wg, wb) in enumerate(_SEPIA_ROWS):
        mixed = (wr * rgb[:, :, 0] + wg * rgb[:, :, 1] + wb * rgb[:, :, 2] + 500) // 1000
        arr[:, :, c] = np.minimum(mixed, 255).astype(np.uint8)
    return RasterImage(arr)


def solarize(img: RasterImage, threshold: int) -> RasterImage:
    """Invert each color channel value that is >= threshold (256 leaves all alone)."""
    if not 0 <= threshold <= 256:
        raise InvalidParameterError(f"solarize threshold {threshold} outside [0, 256]")
    arr = img.writable_copy()
    rgb = arr[:, :, :3]
    arr[:, :, :3] = np.where(rgb >= threshold, 255 - rgb, rgb)
    return RasterImage(arr)


def posterize(img: RasterImage, bits: int) -> RasterImage:
    """Keep the top `bits` bits of each color channel."""
    if not 1 <= bits <= 8:
        raise InvalidParameterError(f"posterize bits {bits} outside [1, 8]")
    mask = np.uint8(256 - (1 << (8 - bits)))
    arr = img.writable_copy()
    arr[:, :, :3] &= mask
    return RasterImage(arr)


def equalize_histogram(img: RasterImage) -> RasterImage:
    """Standard CDF equalization, independently per color channel.

    A constant channel (cdf_min == pixel count) is left unchanged.
    """
    arr = img.writable_copy()
    n = img.width * img.height
    for c in range(3):
        channel = arr[:, :, c]
        hist = np.bincount(channel.ravel(), minlength=256)
        cdf = np.cumsum(hist)
        cdf_min = int(cdf[np.nonzero(hist)[0][0]])
        if cdf_min == n:
            continue
        den = n - cdf_min
        # bins below the first occupied one go negative; they are never read
        lut = np.array(
            [max(0, (2 * (int(cdf[v]) - cdf_min) * 255 + den) // (2 * den)) for v in range(256)],
            dtype=np.uint8,
        )
        arr[:, :, c] = lut[channel]
    return RasterImage(arr)


def crop(img: RasterImage, region: Region) -> RasterImage:
    if not region.within(img.width, img.height):
        raise InvalidParameterError(
            f"crop {region} escapes {img.width}x{img.height} bounds"
        )
    return RasterImage(img.pixels[region.y0 : region.y1, region.x0 : region.x1].copy())


def brush(
    img: RasterImage,
    points: list[tuple[int, int]],
    radius: int,
    color: Pixel,
) -> RasterImage:
    """Paint a hard-edged stroke: every pixel strictly closer than `radius`
    to any segment of the polyline takes `color` (alpha included)."""
    _check_brush(points, radius, img.width, img.height)
    arr = img.writable_copy()
    region = _brush_region(points, radius, img.width, img.height)
    ys = np.arange(region.y0, region.y1, dtype=np.int64)
    xs = np.arange(region.x0, region.x1, dtype=np.int64)
    py, px = np.meshgrid(ys, xs, indexing="ij")
    painted = np.zeros(px.shape, dtype=bool)
    segments = list(zip(points, points[1:])) if len(points) > 1 else [(points[0], points[0])]
    rr = radius * radius
    for (ax, ay), (bx, by) in segments:
        dx, dy = bx - ax, by - ay
        wx, wy = px - ax, py - ay
        t_den = dx * dx + dy * dy
        if t_den == 0:
            painted |= wx * wx + wy * wy < rr
            continue
        t_num = wx * dx + wy * dy
        d_a = wx * wx + wy * wy
        d_b = (px - bx) ** 2 + (py - by) ** 2
        # interior case compares exact integers: |w|^2*den - (w.d)^2 < r^2*den
        interior = d_a * t_den - t_num * t_num < rr * t_den
        painted |= np.where(t_num <= 0, d_a < rr, np.where(t_num >= t_den, d_b < rr, interior))
    block = arr[region.y0 : region.y1, region.x0 : region.x1]
    block[painted] = color.as_tuple()
    return RasterImage(arr)


def draw_text(
    img: RasterImage,
    origin: tuple[int, int],
    text: str,
    text_scale: int,
    color: Pixel,
) -> RasterImage:
    """Render 5x7 bitmap glyphs in 6x8 cells, integer-scaled, clipped at borders."""
    _check_text(text, text_scale)
    arr = img.writable_copy()
    x0, y0 = origin
    for i, ch in enumerate(text):
        cx = x0 + i * font.CELL_WIDTH * text_scale
        for gx, gy in font.lit_cells(ord(ch)):
            bx0 = cx + gx * text_scale
            by0 = y0 + gy * text_scale
            sx0, sx1 = max(bx0, 0), min(bx0 + text_scale, img.width)
            sy0, sy1 = max(by0, 0), min(by0 + text_scale, img.height)
            if sx0 < sx1 and sy0 < sy1:
                arr[sy0:sy1, sx0:sx1] = color.as_tuple()
    return RasterImage(arr)


def new_canvas(w: int, h: int, fill: Pixel) -> RasterImage:
    return RasterImage.filled(w, h, fill)


# ---------------------------------------------------------------------------
# parameter validation helpers


def _check_brush(points, radius, width=None, height=None):
    if not points:
        raise InvalidParameterError("brush needs at least one point")
    if radius < 1:
        raise InvalidParameterError(f"brush radius {radius} must be >= 1")
    if width is not None:
        for x, y in points:
            if not (0 <= x < width and 0 <= y < height):
                raise InvalidParameterError(
                    f"brush point ({x}, {y}) outside {width}x{height} bounds"
                )


def _check_text(text, text_scale):
    if text_scale < 1:
        raise InvalidParameterError(f"text scale {text_scale} must be >= 1")
    for ch in text:
        if not 32 <= ord(ch) <= 126:
            raise InvalidParameterError(
                f"unsupported codepoint U+{ord(ch):04X} in text; printable ASCII only"
            )


def _brush_region(points, radius, width, height) -> Region:
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x0 = max(min(xs) - radius, 0)
    y0 = max(min(ys) - radius, 0)
    x1 = min(max(xs) + radius + 1, width)
    y1 = min(max(ys) + radius + 1, height)
    return Region(x0, y0, x1 - x0, y1 - y0)


def _text_region(x0, y0, text, text_scale, width, height) -> Region:
    if text:
        cx1 = x0 + len(text) * font.CELL_WIDTH * text_scale
        cy1 = y0 + font.CELL_HEIGHT * text_scale
        rx0, ry0 = max(x0, 0), max(y0, 0)
        rx1, ry1 = min(cx1, width), min(cy1, height)
        if rx0 < rx1 and ry0 < ry1:
            return Region(rx0, ry0, rx1 - rx0, ry1 - ry0)
    # nothing rendered; pin a 1x1 footprint at the clamped origin
    cx = min(max(x0, 0), width - 1)
    cy = min(max(y0, 0), height - 1)
    return Region(cx, cy, 1, 1)


def parse_factor_millis(value) -> int:
    """Parse a nonnegative decimal with <= 3 fraction digits into thousandths."""
    if isinstance(value, bool):
        raise InvalidParameterError(f"bad factor {value!r}")
    if isinstance(value, int):
        millis = value * 1000
    elif isinstance(value, str):
        try:
            millis = _parse_decimal_string(value)
        except ValueError as exc:
            raise InvalidParameterError(f"bad factor {value!r}: {exc}") from None
    elif isinstance(value, float):
        millis = round(value * 1000)
        if abs(value * 1000 - millis) > 1e-6:
            raise InvalidParameterError(
                f"factor {value!r} needs more than 3 fraction digits"
            )
    else:
        raise InvalidParameterError(f"bad factor {value!r}")
    if millis < 0:
        raise InvalidParameterError("factor must be >= 0")
    return millis


def _parse_decimal_string(text: str) -> int:
    sign = -1 if text.startswith("-") else 1
    body = text.lstrip("+-")
    whole, _, frac = body.partition(".")
    if not whole and not frac:
        raise ValueError("empty number")
    if len(frac) > 3:
        raise ValueError("more than 3 fraction digits")
    whole_v = int(whole) if whole else 0
    frac_v = int(frac.ljust(3, "0")) if frac else 0
    return sign * (whole_v * 1000 + frac_v)


def format_factor(millis: int) -> str:
    return f"{millis // 1000}.{millis % 1000:03d}"


# ---------------------------------------------------------------------------
# EditOp: the serializable unit stored per history node


@dataclass
class EditOp:
    """One editing operation: a kind plus its validated parameter record."""

    kind: str
    params: dict = field(default_factory=dict)

    # -- constructors -------------------------------------------------------

    @classmethod
    def mirror(cls):
        return cls("Mirror")

    @classmethod
    def flip(cls):
        return cls("Flip")

    @classmethod
    def transpose(cls):
        return cls("Transpose")

    @classmethod
    def scale(cls, w: int, h: int):
        op = cls("Scale", {"scale_w": int(w), "scale_h": int(h)})
        op.validate()
        return op

    @classmethod
    def histogram(cls):
        return cls("Histogram")

    @classmethod
    def brightness(cls, factor):
        return cls("Brightness", {"factor_millis": parse_factor_millis(factor)})

    @classmethod
    def black_white(cls):
        return cls("BlackWhite")

    @classmethod
    def sepia(cls):
        return cls("Sepia")

    @classmethod
    def invert(cls):
        return cls("Invert")

    @classmethod
    def solarize(cls, threshold: int):
        op = cls("Solarize", {"threshold": int(threshold)})
        op.validate()
        return op

    @classmethod
    def posterize(cls, bits: int):
        op = cls("Posterize", {"bits": int(bits)})
        op.validate()
        return op

    @classmethod
    def crop(cls, x0: int, y0: int, w: int, h: int):
        op = cls("Crop", {"x0": int(x0), "y0": int(y0), "w": int(w), "h": int(h)})
        op.validate()
        return op

    @classmethod
    def text(cls, x0: int, y0: int, text: str, text_scale: int = 1, color: Pixel = Pixel(0, 0, 0)):
        op = cls(
            "Text",
            {"x0": int(x0), "y0": int(y0), "text": text, "scale": int(text_scale), "color": color},
        )
        op.validate()
        return op

    @classmethod
    def reset(cls):
        return cls("Reset")

    @classmethod
    def brush(cls, points, radius: int, color: Pixel):
        op = cls(
            "Brush",
            {"points": [(int(x), int(y)) for x, y in points], "radius": int(radius), "color": color},
        )
        op.validate()
        return op

    @classmethod
    def new(cls, w: int, h: int, fill: Pixel = Pixel(255, 255, 255)):
        op = cls("New", {"w": int(w), "h": int(h), "color": fill})
        op.validate()
        return op

    @classmethod
    def import_pixels(cls, image: RasterImage, source_format: str):
        return cls(
            "Import",
            {
                "format": source_format,
                "w": image.width,
                "h": image.height,
                "data": image.to_bytes(),
            },
        )

    @classmethod
    def merge_state(cls, image: RasterImage):
        return cls(MERGE_KIND, {"w": image.width, "h": image.height, "data": image.to_bytes()})

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        """Static parameter checks; raises InvalidParameterError."""
        if self.kind not in OP_KINDS and self.kind != MERGE_KIND:
            raise InvalidParameterError(f"unknown operation kind {self.kind!r}")
        p = self.params
        if self.kind == "Scale":
            if p["scale_w"] < 1 or p["scale_h"] < 1:
                raise InvalidParameterError(
                    f"scale target {p['scale_w']}x{p['scale_h']} must be >= 1x1"
                )
        elif self.kind == "Brightness":
            if p["factor_millis"] < 0:
                raise InvalidParameterError("brightness factor must be >= 0")
        elif self.kind == "Solarize":
            if not 0 <= p["threshold"] <= 256:
                raise InvalidParameterError(
                    f"solarize threshold {p['threshold']} outside [0, 256]"
                )
        elif self.kind == "Posterize":
            if not 1 <= p["bits"] <= 8:
                raise InvalidParameterError(f"posterize bits {p['bits']} outside [1, 8]")
        elif self.kind == "Crop":
            if p["w"] < 1 or p["h"] < 1 or p["x0"] < 0 or p["y0"] < 0:
                raise InvalidParameterError(f"bad crop rectangle {p}")
        elif self.kind == "Text":
            _check_text(p["text"], p["scale"])
        elif self.kind == "Brush":
            _check_brush(p["points"], p["radius"])
        elif self.kind in ("New",):
            if p["w"] < 1 or p["h"] < 1:
                raise InvalidParameterError(f"canvas {p['w']}x{p['h']} must be >= 1x1")
        elif self.kind in ("Import", MERGE_KIND):
            if len(p["data"]) != p["w"] * p["h"] * 4:
                raise InvalidParameterError("pixel payload does not match dimensions")

    def validate_against(self, img: RasterImage) -> None:
        """Dynamic checks against the image the op will be applied to."""
        self.validate()
        p = self.params
        if self.kind == "Crop":
            region = Region(p["x0"], p["y0"], p["w"], p["h"])
            if not region.within(img.width, img.height):
                raise InvalidParameterError(
                    f"crop {region} escapes {img.width}x{img.height} bounds"
                )
        elif self.kind == "Brush":
            _check_brush(p["points"], p["radius"], img.width, img.height)

    @property
    def is_initializer(self) -> bool:
        return self.kind in INIT_KINDS

    # -- flat key/value serialization ---------------------------------------

    def to_record(self) -> dict[str, str]:
        """Flat string record: key `kind` plus kind-specific params."""
        rec = {"kind": self.kind}
        p = self.params
        if self.kind == "Scale":
            rec["scale_w"] = str(p["scale_w"])
            rec["scale_h"] = str(p["scale_h"])
        elif self.kind == "Brightness":
            rec["factor"] = format_factor(p["factor_millis"])
        elif self.kind == "Solarize":
            rec["threshold"] = str(p["threshold"])
        elif self.kind == "Posterize":
            rec["bits"] = str(p["bits"])
        elif self.kind == "Crop":
            for k in ("x0", "y0", "w", "h"):
                rec[k] = str(p[k])
        elif self.kind == "Text":
            rec["x0"] = str(p["x0"])
            rec["y0"] = str(p["y0"])
            rec["text"] = p["text"]
            rec["scale"] = str(p["scale"])
            rec["color"] = p["color"].to_hex()
        elif self.kind == "Brush":
            rec["points"] = ";".join(f"{x},{y}" for x, y in p["points"])
            rec["radius"] = str(p["radius"])
            rec["color"] = p["color"].to_hex()
        elif self.kind == "New":
            rec["w"] = str(p["w"])
            rec["h"] = str(p["h"])
            rec["color"] = p["color"].to_hex()
        elif self.kind == "Import":
            rec["format"] = p["format"]
            rec["w"] = str(p["w"])
            rec["h"] = str(p["h"])
            rec["data"] = base64.b64encode(p["data"]).decode("ascii")
        elif self.kind == MERGE_KIND:
            rec["w"] = str(p["w"])
            rec["h"] = str(p["h"])
            rec["data"] = base64.b64encode(p["data"]).decode("ascii")
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, str]) -> "EditOp":
        kind = rec.get("kind", "")
        try:
            if kind == "Scale":
                op = cls.scale(int(rec["scale_w"]), int(rec["scale_h"]))
            elif kind == "Brightness":
                op = cls.brightness(rec["factor"])
            elif kind == "Solarize":
                op = cls.solarize(int(rec["threshold"]))
            elif kind == "Posterize":
                op = cls.posterize(int(rec["bits"]))
            elif kind == "Crop":
                op = cls.crop(int(rec["x0"]), int(rec["y0"]), int(rec["w"]), int(rec["h"]))
            elif kind == "Text":
                op = cls.text(
                    int(rec["x0"]),
                    int(rec["y0"]),
                    rec["text"],
                    int(rec["scale"]),
                    Pixel.from_hex(rec["color"]),
                )
            elif kind == "Brush":
                points = [
                    tuple(int(v) for v in pair.split(","))
                    for pair in rec["points"].split(";")
                ]
                op = cls.brush(points, int(rec["radius"]), Pixel.from_hex(rec["color"]))
            elif kind == "New":
                op = cls.new(int(rec["w"]), int(rec["h"]), Pixel.from_hex(rec["color"]))
            elif kind == "Import":
                data = base64.b64decode(rec["data"])
                op = cls(
                    "Import",
                    {"format": rec["format"], "w": int(rec["w"]), "h": int(rec["h"]), "data": data},
                )
            elif kind == MERGE_KIND:
                data = base64.b64decode(rec["data"])
                op = cls(MERGE_KIND, {"w": int(rec["w"]), "h": int(rec["h"]), "data": data})
            elif kind in OP_KINDS:
                op = cls(kind)
            else:
                raise InvalidParameterError(f"unknown operation kind {kind!r}")
        except (KeyError, ValueError) as exc:
            raise InvalidParameterError(f"malformed {kind} record: {exc}") from None
        op.validate()
        return op

    def summary(self) -> str:
        """One-line human description for history listings and diff steps."""
        p = self.params
        if self.kind == "Scale":
            return f"Scale to {p['scale_w']}x{p['scale_h']}"
        if self.kind == "Brightness":
            return f"Brightness x{format_factor(p['factor_millis'])}"
        if self.kind == "Solarize":
            return f"Solarize >= {p['threshold']}"
        if self.kind == "Posterize":
            return f"Posterize to {p['bits']} bit(s)"
        if self.kind == "Crop":
            return f"Crop {p['w']}x{p['h']} at ({p['x0']}, {p['y0']})"
        if self.kind == "Text":
            return f"Text {p['text']!r} at ({p['x0']}, {p['y0']})"
        if self.kind == "Brush":
            return f"Brush {len(p['points'])} point(s), radius {p['radius']}, {p['color'].to_hex()}"
        if self.kind == "New":
            return f"New {p['w']}x{p['h']} canvas"
        if self.kind == "Import":
            return f"Import {p['w']}x{p['h']} {p['format']}"
        if self.kind == MERGE_KIND:
            return f"Merge result {p['w']}x{p['h']}"
        return self.kind


# ---------------------------------------------------------------------------
# dispatcher


def apply_edit(
    img: RasterImage,
    op: EditOp,
    root_image: RasterImage | None = None,
) -> tuple[RasterImage, Region]:
    """Apply one operation and report its affected region in parent coordinates.

    Global operations claim the whole parent image; brush/text/crop claim
    their stroke/glyph/crop bounding box. Reset needs the project's root
    image (replay supplies it).
    """
    op.validate_against(img)
    p = op.params
    kind = op.kind

    if kind in ("Mirror", "Flip", "Transpose"):
        out = reorient(img, kind)
    elif kind == "Scale":
        out = scale(img, p["scale_w"], p["scale_h"])
    elif kind == "Histogram":
        out = equalize_histogram(img)
    elif kind == "Brightness":
        out = brightness(img, p["factor_millis"])
    elif kind == "BlackWhite":
        out = grayscale(img)
    elif kind == "Sepia":
        out = sepia(img)
    elif kind == "Invert":
        out = invert(img)
    elif kind == "Solarize":
        out = solarize(img, p["threshold"])
    elif kind == "Posterize":
        out = posterize(img, p["bits"])
    elif kind == "Reset":
        if root_image is None:
            raise InvalidArgumentError("Reset needs the root image from replay")
        out = root_image
    elif kind == "New":
        out = new_canvas(p["w"], p["h"], p["color"])
    elif kind in ("Import", MERGE_KIND):
        out = RasterImage.from_bytes(p["w"], p["h"], p["data"])
    elif kind == "Crop":
        region = Region(p["x0"], p["y0"], p["w"], p["h"])
        return crop(img, region), region
    elif kind == "Brush":
        out = brush(img, p["points"], p["radius"], p["color"])
        return out, _brush_region(p["points"], p["radius"], img.width, img.height)
    elif kind == "Text":
        out = draw_text(img, (p["x0"], p["y0"]), p["text"], p["scale"], p["color"])
        return out, _text_region(p["x0"], p["y0"], p["text"], p["scale"], img.width, img.height)
    else:
        raise InvalidParameterError(f"unknown operation kind {kind!r}")

    return out, img.full_region()


def op_region(img: RasterImage, op: EditOp) -> Region:
    """The footprint apply_edit would report, without computing pixels."""
    if op.kind == "Crop":
        return Region(op.params["x0"], op.params["y0"], op.params["w"], op.params["h"])
    if op.kind == "Brush":
        return _brush_region(op.params["points"], op.params["radius"], img.width, img.height)
    if op.kind == "Text":
        p = op.params
        return _text_region(p["x0"], p["y0"], p["text"], p["scale"], img.width, img.height)
    return img.full_region()
