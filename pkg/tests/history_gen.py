"""Deterministic random edit histories, a pure function of the seed.

Canvas dimensions are tracked analytically so the generator never needs to
replay; dimension-changing ops keep the canvas within sane bounds.
"""

from __future__ import annotations

import random

from imgvc.image import Pixel
from imgvc.ops import EditOp


def generate_ops(seed: int, count: int, width: int = 64, height: int = 64):
    """Yield `count` EditOps applicable in sequence to a width x height root."""
    rng = random.Random(seed)
    w, h = width, height
    ops = []
    for _ in range(count):
        choice = rng.randrange(100)
        if choice < 10:
            op = EditOp.invert()
        elif choice < 20:
            op = EditOp.brightness(f"{rng.randrange(0, 2500) / 1000:.3f}")
        elif choice < 28:
            op = EditOp.sepia()
        elif choice < 36:
            op = EditOp.black_white()
        elif choice < 44:
            op = EditOp.solarize(rng.randrange(0, 257))
        elif choice < 52:
            op = EditOp.posterize(rng.randrange(1, 9))
        elif choice < 58:
            op = EditOp.histogram()
        elif choice < 64:
            op = EditOp.mirror()
        elif choice < 70:
            op = EditOp.flip()
        elif choice < 74:
            op = EditOp.transpose()
            w, h = h, w
        elif choice < 80 and w >= 8 and h >= 8:
            nw = rng.randrange(max(8, w // 2), min(96, w * 2) + 1)
            nh = rng.randrange(max(8, h // 2), min(96, h * 2) + 1)
            op = EditOp.scale(nw, nh)
            w, h = nw, nh
        elif choice < 86 and w >= 8 and h >= 8:
            cw = rng.randrange(max(4, w // 2), w + 1)
            ch = rng.randrange(max(4, h // 2), h + 1)
            x0 = rng.randrange(0, w - cw + 1)
            y0 = rng.randrange(0, h - ch + 1)
            op = EditOp.crop(x0, y0, cw, ch)
            w, h = cw, ch
        elif choice < 94:
            points = [
                (rng.randrange(w), rng.randrange(h))
                for _ in range(rng.randrange(1, 4))
            ]
            op = EditOp.brush(
                points,
                rng.randrange(1, 4),
                Pixel(rng.randrange(256), rng.randrange(256), rng.randrange(256), rng.randrange(256)),
            )
        elif choice < 98:
            text = "".join(rng.choice("ERaster 0-9!xyz") for _ in range(rng.randrange(1, 6)))
            op = EditOp.text(
                rng.randrange(-4, max(1, w - 4)),
                rng.randrange(-4, max(1, h - 4)),
                text,
                rng.choice((1, 1, 2)),
                Pixel(rng.randrange(256), rng.randrange(256), rng.randrange(256)),
            )
        else:
            op = EditOp.reset()
            w, h = width, height
        ops.append(op)
    return ops
