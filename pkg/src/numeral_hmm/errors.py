"""Exception types raised across the recognition pipeline."""

from __future__ import annotations


class NumeralHmmError(Exception):
    """Base class for all package errors."""


# imageproc / features


class EmptyImage(NumeralHmmError):
    pass


class NotForeground(NumeralHmmError):
    pass


class NotAdjacent(NumeralHmmError):
    pass


class EmptySkeleton(NumeralHmmError):
    pass


# hmm


class EmptySequence(NumeralHmmError):
    pass


class SymbolOutOfRange(NumeralHmmError):
    pass


class NoTrainingData(NumeralHmmError):
    pass


class MissingClass(NumeralHmmError):
    def __init__(self, digit: int):
        super().__init__(f"no training sequences for digit {digit}")
        self.digit = digit


class InvalidModel(NumeralHmmError):
    """A model violates a stochastic or topology constraint."""


class BankFormatError(NumeralHmmError):
    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line


# dataset


class DatasetError(NumeralHmmError):
    pass


class BadMagic(DatasetError):
    pass


class CountMismatch(DatasetError):
    pass


class Truncated(DatasetError):
    pass


class BadLabel(DatasetError):
    pass


class BadHeader(DatasetError):
    pass


class MaxvalUnsupported(DatasetError):
    pass


class InsufficientSamples(DatasetError):
    def __init__(self, digit: int, have: int, need: int):
        super().__init__(f"digit {digit}: have {have} samples, need {need}")
        self.digit = digit
        self.have = have
        self.need = need
