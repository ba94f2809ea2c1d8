"""Synthetic rasters for tests: thick strokes and ideal one-pixel skeletons."""

from __future__ import annotations

import numpy as np


def segment_mask(shape, p0, p1, width):
    """Pixels whose centre lies within ``width / 2`` of segment p0-p1 (row, col floats)."""
    rr, cc = np.indices(shape, dtype=float)
    (r0, c0), (r1, c1) = p0, p1
    dr, dc = r1 - r0, c1 - c0
    length2 = dr * dr + dc * dc
    t = np.clip(((rr - r0) * dr + (cc - c0) * dc) / length2, 0, 1) if length2 else 0.0
    d2 = (rr - (r0 + t * dr)) ** 2 + (cc - (c0 + t * dc)) ** 2
    return d2 < (width / 2.0) ** 2


def polyline(shape, points, width):
    img = np.zeros(shape, dtype=bool)
    for a, b in zip(points, points[1:]):
        img |= segment_mask(shape, a, b, width)
    return img


def ring(shape, center, radius, width):
    rr, cc = np.indices(shape, dtype=float)
    d = np.hypot(rr - center[0], cc - center[1])
    return (d >= radius - width / 2.0) & (d < radius + width / 2.0)


def thick_corpus():
    """Fifty glyphs: bars, rings, figure-eights, Y and X junctions at widths 2-7."""
    shape = (48, 48)
    glyphs = []
    for w in range(2, 8):
        off = 0.5 if w % 2 == 0 else 0.0
        glyphs.append(("vbar", w, polyline(shape, [(6, 20 + off), (40, 20 + off)], w)))
        glyphs.append(("hbar", w, polyline(shape, [(24 + off, 6), (24 + off, 40)], w)))
        glyphs.append(("dbar", w, polyline(shape, [(6, 6), (40, 38)], w)))
        glyphs.append(("ring", w, ring(shape, (24, 24), 12, w)))
        glyphs.append(("eight", w, ring(shape, (14, 24), 9, w) | ring(shape, (33, 24), 9.5, w)))
        glyphs.append(("Y", w, polyline(shape, [(6, 8), (24, 24), (6, 40)], w)
                       | polyline(shape, [(24, 24), (42, 24)], w)))
        glyphs.append(("X", w, polyline(shape, [(6, 6), (42, 42)], w)
                       | polyline(shape, [(6, 42), (42, 6)], w)))
        glyphs.append(("six", w, ring(shape, (30, 24), 10, w)
                       | polyline(shape, [(4, 30), (22, 17)], w)))
    square = np.zeros((15, 15), dtype=bool)
    square[2:13, 2:13] = True
    square[5:10, 5:10] = False
    glyphs.append(("annulus", 0, square))
    dot = np.zeros((5, 5), dtype=bool)
    dot[2, 2] = True
    glyphs.append(("dot", 0, dot))
    return glyphs


# --------------------------------------------------------------------------
# ideal one-pixel skeletons built from 8-connected diagonal and straight runs


def draw_path(img, points):
    """Draw straight or 45-degree runs between successive (row, col) vertices."""
    for (r0, c0), (r1, c1) in zip(points, points[1:]):
        n = max(abs(r1 - r0), abs(c1 - c0))
        sr = (r1 > r0) - (r1 < r0)
        sc = (c1 > c0) - (c1 < c0)
        assert n == 0 or abs(r1 - r0) in (0, n) and abs(c1 - c0) in (0, n)
        for k in range(n + 1):
            img[r0 + sr * k, c0 + sc * k] = True
    return img


def diamond(img, top, k):
    r, c = top
    return draw_path(img, [(r, c), (r + k, c + k), (r + 2 * k, c), (r + k, c - k), (r, c)])


def ideal_zero(shape=(24, 24)):
    return diamond(np.zeros(shape, dtype=bool), (2, 11), 9)


def ideal_one(shape=(24, 24)):
    return draw_path(np.zeros(shape, dtype=bool), [(2, 11), (21, 11)])


def ideal_six(shape=(28, 24)):
    img = diamond(np.zeros(shape, dtype=bool), (10, 11), 7)
    return draw_path(img, [(2, 11), (10, 11)])


def ideal_eight(shape=(34, 24)):
    img = diamond(np.zeros(shape, dtype=bool), (2, 11), 7)
    return diamond(img, (16, 11), 7)


def ideal_x(shape=(21, 21)):
    return draw_path(draw_path(np.zeros(shape, dtype=bool), [(2, 2), (18, 18)]), [(2, 18), (18, 2)])
