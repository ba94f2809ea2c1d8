"""Glyph preprocessing: binarization, denoising, size normalization, thinning.

Images are plain numpy arrays indexed ``[row, col]``. Gray images are
``uint8`` with dark ink on light paper; binary images and skeletons are
``bool`` with ``True`` marking ink. Pixels outside the array read as
background everywhere.

Thinning follows the two-subiteration Zhang-Suen scheme. Each subiteration
first collects the classical deletion candidates in parallel; candidates whose
simultaneous removal could split or merge components (non-simple 4-adjacent
pairs, or a whole component fitting in a 2x2 window) are then re-checked one
at a time in raster order against the partially thinned image. After both
subiterations, the inner corners of staircases are removed so thick diagonal
strokes end up 8-connected instead of being worn down from their ends.
"""

from __future__ import annotations

from typing import Union

import numpy as np
from scipy import ndimage

from .errors import EmptyImage

ThresholdMode = Union[str, int]

# Neighbour offsets traced clockwise from north: N, NE, E, SE, S, SW, W, NW.
# Bit i of a neighbourhood code is set when neighbour i is foreground.
CLOCKWISE = ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1))
_N, _NE, _E, _SE, _S, _SW, _W, _NW = range(8)

_EIGHT = np.ones((3, 3), dtype=bool)
_FOUR = ndimage.generate_binary_structure(2, 1)


def _bits(code: int) -> list[int]:
    return [(code >> i) & 1 for i in range(8)]


def _transitions(bits: list[int]) -> int:
    return sum(1 for i in range(8) if bits[i] == 0 and bits[(i + 1) % 8] == 1)


def _is_simple(bits: list[int]) -> bool:
    """8-foreground / 4-background simple point test on a 3x3 neighbourhood."""
    grid = np.zeros((3, 3), dtype=bool)
    for b, (dr, dc) in zip(bits, CLOCKWISE):
        grid[1 + dr, 1 + dc] = bool(b)
    fg_labels, n_fg = ndimage.label(grid, structure=_EIGHT)
    if n_fg != 1:
        return False
    bg = ~grid
    bg[1, 1] = False
    bg_labels, _ = ndimage.label(bg, structure=_FOUR)
    touching = {bg_labels[1 + dr, 1 + dc] for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1))}
    touching.discard(0)
    return len(touching) == 1


def _is_stair_corner(b: list[int]) -> bool:
    # two perpendicular edge neighbours joined only through p: the inner
    # corner of a 4-connected staircase
    for a, diag, c, opp1, opp2 in (
        (_N, _NE, _E, _S, _W),
        (_E, _SE, _S, _W, _N),
        (_S, _SW, _W, _N, _E),
        (_W, _NW, _N, _E, _S),
    ):
        if b[a] and b[c] and not b[diag] and not b[opp1] and not b[opp2]:
            return True
    return False


def _build_tables():
    count = np.zeros(256, dtype=np.uint8)
    trans = np.zeros(256, dtype=np.uint8)
    simple = np.zeros(256, dtype=bool)
    first = np.zeros(256, dtype=bool)
    second = np.zeros(256, dtype=bool)
    stair = np.zeros(256, dtype=bool)
    for code in range(256):
        b = _bits(code)
        n = sum(b)
        t = _transitions(b)
        count[code] = n
        trans[code] = t
        simple[code] = _is_simple(b)
        base = 2 <= n <= 6 and t == 1
        first[code] = base and b[_N] * b[_E] * b[_S] == 0 and b[_E] * b[_S] * b[_W] == 0
        second[code] = base and b[_N] * b[_E] * b[_W] == 0 and b[_N] * b[_S] * b[_W] == 0
        stair[code] = simple[code] and _is_stair_corner(b)
    return count, trans, simple, (first, second), stair


NEIGHBOR_COUNT, TRANSITIONS, SIMPLE, _DELETABLE, _STAIR = _build_tables()


def neighbor_codes(img: np.ndarray) -> np.ndarray:
    """Return the 8-bit clockwise neighbourhood code of every pixel."""
    img = np.asarray(img, dtype=bool)
    h, w = img.shape
    pad = np.pad(img, 1)
    code = np.zeros((h, w), dtype=np.uint8)
    for bit, (dr, dc) in enumerate(CLOCKWISE):
        code |= pad[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w].astype(np.uint8) << bit
    return code


def _code_at(pad: np.ndarray, r: int, c: int) -> int:
    # r, c index the padded array
    code = 0
    for bit, (dr, dc) in enumerate(CLOCKWISE):
        if pad[r + dr, c + dc]:
            code |= 1 << bit
    return code


# --------------------------------------------------------------------------
# binarization and cleanup


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold ``t`` maximizing between-class variance of ``{v < t}`` vs ``{v >= t}``.

    When several thresholds reach the maximum, the middle of that run is
    returned. A constant image returns 0 (nothing is foreground).
    """
    hist = np.bincount(np.asarray(gray, dtype=np.uint8).ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    levels = np.arange(256, dtype=np.float64)
    # class 0 = values below t, for t = 1..255
    w0 = np.cumsum(hist)[:-1]
    s0 = np.cumsum(hist * levels)[:-1]
    w1 = total - w0
    s1 = (hist * levels).sum() - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        between = w0 * w1 * (s0 / w0 - s1 / w1) ** 2
    between = np.where((w0 > 0) & (w1 > 0), between, 0.0)
    best = between.max()
    if best <= 0:
        return 0
    winners = np.flatnonzero(between >= best * (1 - 1e-12)) + 1
    return int((winners[0] + winners[-1]) // 2)


def binarize(gray: np.ndarray, threshold_mode: ThresholdMode = "otsu") -> np.ndarray:
    """Foreground where intensity is strictly below the threshold.

    ``threshold_mode`` is ``"otsu"`` or an integer fixed threshold.
    """
    gray = np.asarray(gray)
    if isinstance(threshold_mode, str):
        if threshold_mode != "otsu":
            raise ValueError(f"unknown threshold mode {threshold_mode!r}")
        t = otsu_threshold(gray)
    else:
        t = int(threshold_mode)
    return gray < t


def remove_isolated_pixels(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, dtype=bool)
    return img & (NEIGHBOR_COUNT[neighbor_codes(img)] > 0)


def fill_holes(img: np.ndarray) -> np.ndarray:
    """Set every background pixel whose eight neighbours are all ink. Single pass."""
    img = np.asarray(img, dtype=bool)
    return img | (neighbor_codes(img) == 255)


def normalize_size(img: np.ndarray, side: int = 64) -> np.ndarray:
    """Crop to the ink bounding box and scale it into a ``side`` x ``side`` window.

    The larger box dimension becomes ``side - 4`` (a two pixel margin), the
    aspect ratio is kept, sampling is nearest-neighbour and the result is
    centred.
    """
    img = np.asarray(img, dtype=bool)
    rows = np.flatnonzero(img.any(axis=1))
    cols = np.flatnonzero(img.any(axis=0))
    if rows.size == 0:
        raise EmptyImage("image has no foreground pixel")
    box = img[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]
    bh, bw = box.shape
    scale = (side - 4) / max(bh, bw)
    nh = max(1, int(round(bh * scale)))
    nw = max(1, int(round(bw * scale)))
    src_r = np.minimum(((np.arange(nh) + 0.5) / scale).astype(np.intp), bh - 1)
    src_c = np.minimum(((np.arange(nw) + 0.5) / scale).astype(np.intp), bw - 1)
    scaled = box[np.ix_(src_r, src_c)]
    out = np.zeros((side, side), dtype=bool)
    r0 = (side - nh) // 2
    c0 = (side - nw) // 2
    out[r0 : r0 + nh, c0 : c0 + nw] = scaled
    return out


# --------------------------------------------------------------------------
# thinning


def _shift_into(mask: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """out[r + dr, c + dc] = mask[r, c], clipped at the border."""
    h, w = mask.shape
    pad = np.zeros((h + 2, w + 2), dtype=bool)
    pad[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w] = mask
    return pad[1:-1, 1:-1]


def _subiteration(pad: np.ndarray, step: int) -> bool:
    inner = pad[1:-1, 1:-1]
    code = neighbor_codes(inner)
    cand = inner & _DELETABLE[step][code]
    if not cand.any():
        return False

    unsafe = np.zeros_like(cand)
    for bit in (_N, _E, _S, _W):
        dr, dc = CLOCKWISE[bit]
        partner = _shift_into(cand, -dr, -dc)  # partner[r, c] = cand[r + dr, c + dc]
        bad = cand & partner & ~SIMPLE[code & np.uint8(0xFF ^ (1 << bit))]
        unsafe |= bad | _shift_into(bad, dr, dc)
    # components small enough to vanish in one parallel step
    cand_code = neighbor_codes(cand)
    unsafe |= cand & (NEIGHBOR_COUNT[code] <= 3) & (cand_code == code)
    unsafe &= cand

    inner[cand & ~unsafe] = False
    table = _DELETABLE[step]
    for r, c in zip(*np.nonzero(unsafe)):
        if table[_code_at(pad, r + 1, c + 1)]:
            pad[r + 1, c + 1] = False
    return True


def _remove_stair_corners(pad: np.ndarray) -> None:
    inner = pad[1:-1, 1:-1]
    cand = inner & _STAIR[neighbor_codes(inner)]
    for r, c in zip(*np.nonzero(cand)):
        if _STAIR[_code_at(pad, r + 1, c + 1)]:
            pad[r + 1, c + 1] = False


def thin(img: np.ndarray) -> np.ndarray:
    """Zhang-Suen thinning iterated to a fixpoint; returns a new skeleton array.

    Every iteration runs both subiterations and then deletes staircase inner
    corners one by one, which keeps diagonal strokes 8-connected and stops the
    subiterations from eating them from their free ends.
    """
    pad = np.pad(np.asarray(img, dtype=bool), 1)
    while True:
        before = int(pad.sum())
        _subiteration(pad, 0)
        _subiteration(pad, 1)
        _remove_stair_corners(pad)
        if int(pad.sum()) == before:
            return pad[1:-1, 1:-1].copy()


def prune_spurs(skel: np.ndarray, length: int) -> np.ndarray:
    """Remove branches shorter than ``length`` pixels that hang off a junction.

    A branch is walked from an endpoint until it meets a pixel with three or
    more ink neighbours. Whole short strokes (endpoint to endpoint) are kept.
    The pruned raster is re-thinned so the result is again a fixpoint.
    """
    skel = np.asarray(skel, dtype=bool)
    if length <= 0:
        return skel.copy()
    out = skel.copy()
    pad = np.pad(skel, 1)
    counts = NEIGHBOR_COUNT[neighbor_codes(skel)]
    ends = np.argwhere(skel & (TRANSITIONS[neighbor_codes(skel)] == 1) & (counts == 1))
    for r, c in ends:
        path = [(int(r), int(c))]
        seen = {path[0]}
        hit_junction = False
        while len(path) <= length:
            pr, pc = path[-1]
            nxt = [
                (pr + dr, pc + dc)
                for dr, dc in CLOCKWISE
                if pad[pr + dr + 1, pc + dc + 1] and (pr + dr, pc + dc) not in seen
            ]
            if not nxt:
                break
            if len(nxt) > 1 or counts[nxt[0]] >= 3:
                hit_junction = True
                break
            path.append(nxt[0])
            seen.add(nxt[0])
        if hit_junction and len(path) < length:
            for p in path:
                out[p] = False
    return thin(out)


# --------------------------------------------------------------------------
# topology helpers


def component_count(img: np.ndarray) -> int:
    """Number of 8-connected ink components."""
    _, n = ndimage.label(np.asarray(img, dtype=bool), structure=_EIGHT)
    return int(n)


def hole_count(img: np.ndarray) -> int:
    """Number of 4-connected background components that do not touch the border."""
    bg = ~np.pad(np.asarray(img, dtype=bool), 1)
    _, n = ndimage.label(bg, structure=_FOUR)
    # the padding ring joins every border-touching background region into one
    return int(n) - 1


def preprocess(
    gray: np.ndarray,
    threshold_mode: ThresholdMode = "otsu",
    side: int = 64,
    prune_length: int = 0,
) -> np.ndarray:
    """Full chain: binarize, denoise, fill, normalize, thin (and optionally prune).

    Raises :class:`EmptyImage` when no ink survives denoising.
    """
    img = binarize(gray, threshold_mode)
    img = remove_isolated_pixels(img)
    img = fill_holes(img)
    img = normalize_size(img, side)
    skel = thin(img)
    if prune_length > 0:
        skel = prune_spurs(skel, prune_length)
    return skel
