"""Labeled digit images: IDX and PGM readers/writers and per-class splits."""

from __future__ import annotations

import gzip
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadHeader,
    BadLabel,
    BadMagic,
    CountMismatch,
    InsufficientSamples,
    MaxvalUnsupported,
    Truncated,
)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


@dataclass(frozen=True, eq=False)
class LabeledSample:
    image: np.ndarray  # uint8, [row, col]
    label: int

    def __post_init__(self):
        if not 0 <= self.label <= 9:
            raise BadLabel(f"label {self.label} outside 0-9")


@dataclass(frozen=True)
class SplitSpec:
    train_per_class: int = 40
    test_per_class: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.train_per_class < 1 or self.test_per_class < 1:
            raise ValueError("per-class counts must be >= 1")


def _read_bytes(path: str | os.PathLike) -> bytes:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    return data


def _header(data: bytes, n_words: int, path) -> tuple[int, ...]:
    size = 4 * n_words
    if len(data) < size:
        raise Truncated(f"{path}: header needs {size} bytes, file has {len(data)}")
    return struct.unpack(f">{n_words}I", data[:size])


def read_idx(images_path: str | os.PathLike, labels_path: str | os.PathLike) -> list[LabeledSample]:
    """Read an MNIST-style IDX image/label pair (gzip-compressed files are accepted)."""
    img_data = _read_bytes(images_path)
    lbl_data = _read_bytes(labels_path)

    (magic,) = _header(img_data, 1, images_path)
    if magic != IMAGES_MAGIC:
        raise BadMagic(f"{images_path}: magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}")
    (magic,) = _header(lbl_data, 1, labels_path)
    if magic != LABELS_MAGIC:
        raise BadMagic(f"{labels_path}: magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}")

    _, count, rows, cols = _header(img_data, 4, images_path)
    _, n_labels = _header(lbl_data, 2, labels_path)
    if count != n_labels:
        raise CountMismatch(f"{count} images but {n_labels} labels")

    need = 16 + count * rows * cols
    if len(img_data) < need:
        raise Truncated(f"{images_path}: expected {need} bytes, found {len(img_data)}")
    if len(lbl_data) < 8 + count:
        raise Truncated(f"{labels_path}: expected {8 + count} bytes, found {len(lbl_data)}")

    pixels = np.frombuffer(img_data, dtype=np.uint8, count=count * rows * cols, offset=16)
    pixels = pixels.reshape(count, rows, cols)
    labels = np.frombuffer(lbl_data, dtype=np.uint8, count=count, offset=8)
    if count and labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise BadLabel(f"{labels_path}: label {labels[bad]} at index {bad}")
    return [LabeledSample(pixels[i].copy(), int(labels[i])) for i in range(count)]


def write_idx(samples: Sequence[LabeledSample], images_path, labels_path) -> None:
    """Write samples (all of one size) as an uncompressed IDX pair."""
    if samples:
        rows, cols = samples[0].image.shape
    else:
        rows = cols = 0
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">4I", IMAGES_MAGIC, len(samples), rows, cols))
        for s in samples:
            if s.image.shape != (rows, cols):
                raise ValueError("IDX images must share one size")
            fh.write(np.ascontiguousarray(s.image, dtype=np.uint8).tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">2I", LABELS_MAGIC, len(samples)))
        fh.write(bytes(s.label for s in samples))


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a P2 (ASCII) or P5 (binary) graymap with maxval <= 255."""
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise BadHeader(f"{path}: incomplete PGM header")
        fields.append(m.group(1))
        pos = m.end()
    magic = fields[0]
    if magic not in (b"P2", b"P5"):
        raise BadHeader(f"{path}: unsupported magic {magic!r}")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise BadHeader(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1 or maxval < 1:
        raise BadHeader(f"{path}: bad dimensions or maxval")
    if maxval > 255:
        raise MaxvalUnsupported(f"{path}: maxval {maxval} > 255")

    n = width * height
    if magic == b"P5":
        pos += 1  # the single whitespace byte ending the header
        raw = data[pos : pos + n]
        if len(raw) < n:
            raise Truncated(f"{path}: {n} pixels declared, {len(raw)} present")
        pixels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    else:
        body = re.sub(rb"#[^\n]*", b"", data[pos:]).split()
        if len(body) < n:
            raise Truncated(f"{path}: {n} pixels declared, {len(body)} present")
        try:
            pixels = np.array([int(v) for v in body[:n]], dtype=np.int64)
        except ValueError:
            raise BadHeader(f"{path}: non-numeric pixel value") from None
        if pixels.min() < 0 or pixels.max() > maxval:
            raise BadHeader(f"{path}: pixel value outside 0..{maxval}")
    if maxval != 255:
        pixels = (pixels * 255 + maxval // 2) // maxval
    return pixels.astype(np.uint8).reshape(height, width)


def write_pgm(path: str | os.PathLike, image: np.ndarray, binary: bool = True) -> None:
    image = np.asarray(image, dtype=np.uint8)
    h, w = image.shape
    with open(path, "wb") as fh:
        if binary:
            fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
            fh.write(image.tobytes())
        else:
            fh.write(f"P2\n{w} {h}\n255\n".encode("ascii"))
            for row in image:
                fh.write((" ".join(str(int(v)) for v in row) + "\n").encode("ascii"))


def read_pgm_dir(root: str | os.PathLike) -> list[LabeledSample]:
    """Load ``<root>/<digit>/<name>.pgm``, ordered by digit then file name."""
    root = Path(root)
    samples = []
    for digit in range(10):
        folder = root / str(digit)
        if not folder.is_dir():
            continue
        for path in sorted(folder.glob("*.pgm")):
            samples.append(LabeledSample(read_pgm(path), digit))
    return samples


def split(samples: Sequence[LabeledSample], spec: SplitSpec) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Seeded per-class shuffle; the first ``train_per_class`` go to training,
    the next ``test_per_class`` to testing. Both lists are ordered by digit."""
    by_class: dict[int, list[int]] = {d: [] for d in range(10)}
    for i, s in enumerate(samples):
        by_class[s.label].append(i)
    need = spec.train_per_class + spec.test_per_class
    for digit in range(10):
        if len(by_class[digit]) < need:
            raise InsufficientSamples(digit, len(by_class[digit]), need)
    train, test = [], []
    for digit in range(10):
        rng = np.random.default_rng([spec.seed, digit])
        order = rng.permutation(len(by_class[digit]))
        picked = [by_class[digit][k] for k in order[:need]]
        train += [samples[k] for k in picked[: spec.train_per_class]]
        test += [samples[k] for k in picked[spec.train_per_class :]]
    return train, test
