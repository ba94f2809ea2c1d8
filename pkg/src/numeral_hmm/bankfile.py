"""Plain-text model bank format.

::

    format_version: 1

    digit: 0
    n_states: 2
    n_symbols: 3
    topology: left_to_right 1
    init: 1 0
    trans: 0.5 0.5
    trans: 0 1
    emit: 0.2 0.3 0.5
    emit: 0.1 0.1 0.8

One block per digit 0-9, in order. Numbers carry 17 significant digits so a
bank survives a write/read cycle bit for bit.
"""

from __future__ import annotations

import os
from typing import Iterator

import numpy as np

from .errors import BankFormatError, InvalidModel
from .hmm import N_CLASSES, DiscreteHmm, ModelBank, Topology

FORMAT_VERSION = 1


def _fmt(values) -> str:
    return " ".join("%.17g" % v for v in values)


def dumps(bank: ModelBank) -> str:
    lines = [f"format_version: {FORMAT_VERSION}"]
    for digit, model in enumerate(bank.models):
        lines += [
            "",
            f"digit: {digit}",
            f"n_states: {model.n_states}",
            f"n_symbols: {model.n_symbols}",
            f"topology: {model.topology}",
            f"init: {_fmt(model.init)}",
        ]
        lines += [f"trans: {_fmt(row)}" for row in model.trans]
        lines += [f"emit: {_fmt(row)}" for row in model.emit]
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self._items = [
            (n, line.strip()) for n, line in enumerate(text.splitlines(), start=1) if line.strip()
        ]
        self._pos = 0
        self._eof = len(text.splitlines()) + 1

    def field(self, key: str) -> tuple[int, str]:
        if self._pos >= len(self._items):
            raise BankFormatError(f"unexpected end of file, expected '{key}:'", self._eof)
        lineno, line = self._items[self._pos]
        name, sep, value = line.partition(":")
        if not sep or name.strip() != key:
            raise BankFormatError(f"expected '{key}:', found {line!r}", lineno)
        self._pos += 1
        return lineno, value.strip()

    def done(self) -> bool:
        return self._pos >= len(self._items)

    def __iter__(self) -> Iterator[tuple[int, str]]:
        return iter(self._items[self._pos :])


def _int(lines: _Lines, key: str) -> int:
    lineno, value = lines.field(key)
    try:
        return int(value)
    except ValueError:
        raise BankFormatError(f"'{key}' must be an integer, got {value!r}", lineno) from None


def _row(lines: _Lines, key: str, width: int) -> list[float]:
    lineno, value = lines.field(key)
    try:
        row = [float(v) for v in value.split()]
    except ValueError:
        raise BankFormatError(f"'{key}' holds a non-numeric value", lineno) from None
    if len(row) != width:
        raise BankFormatError(f"'{key}' needs {width} values, got {len(row)}", lineno)
    return row


def loads(text: str) -> ModelBank:
    """Parse a bank; schema violations raise :class:`BankFormatError` with a line number."""
    lines = _Lines(text)
    version = _int(lines, "format_version")
    if version != FORMAT_VERSION:
        raise BankFormatError(f"unsupported format_version {version}", 1)
    models = []
    for expected in range(N_CLASSES):
        lineno, value = lines.field("digit")
        if value != str(expected):
            raise BankFormatError(f"expected digit {expected}, found {value!r}", lineno)
        n = _int(lines, "n_states")
        m = _int(lines, "n_symbols")
        if n < 1 or m < 1:
            raise BankFormatError("n_states and n_symbols must be positive", lineno)
        topo_line, topo = lines.field("topology")
        try:
            topology = Topology.parse(topo)
        except ValueError as exc:
            raise BankFormatError(str(exc), topo_line) from None
        init = _row(lines, "init", n)
        trans = [_row(lines, "trans", n) for _ in range(n)]
        emit = [_row(lines, "emit", m) for _ in range(n)]
        try:
            models.append(DiscreteHmm(np.array(init), np.array(trans), np.array(emit), topology))
        except InvalidModel as exc:
            raise BankFormatError(f"digit {expected}: {exc}", lineno) from None
    if not lines.done():
        lineno, line = next(iter(lines))
        raise BankFormatError(f"trailing content {line!r}", lineno)
    try:
        return ModelBank(tuple(models))
    except InvalidModel as exc:
        raise BankFormatError(str(exc)) from None


def save(bank: ModelBank, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps(bank))


def load(path: str | os.PathLike) -> ModelBank:
    with open(path, encoding="ascii") as fh:
        return loads(fh.read())
