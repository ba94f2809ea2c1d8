import os
from pathlib import Path

import numpy as np
import pytest

from numeral_hmm.dataset import LabeledSample, write_idx

_CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def criterion():
    """Record ``(name, passed, detail)`` for the end-of-run criterion table."""

    def record(name: str, passed: bool, detail: str = "") -> None:
        _CRITERIA[name] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA, key=lambda n: int(n.split()[0]) if n.split()[0].isdigit() else 99):
        passed, detail = _CRITERIA[name]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip())


def _find_idx(root: Path, stem: str):
    for name in (stem, stem + ".gz"):
        if (root / name).exists():
            return root / name
    return None


@pytest.fixture(scope="session")
def mnist_idx(tmp_path_factory):
    """(images, labels) IDX paths holding MNIST digits.

    ``NUMERAL_HMM_MNIST_DIR`` may point at the official training files;
    otherwise the 5,000-digit subset bundled with mlxtend is exported.
    """
    root = os.environ.get("NUMERAL_HMM_MNIST_DIR")
    if root:
        images = _find_idx(Path(root), "train-images-idx3-ubyte")
        labels = _find_idx(Path(root), "train-labels-idx1-ubyte")
        if images and labels:
            return images, labels
    data = pytest.importorskip("mlxtend.data")
    x, y = data.mnist_data()
    samples = [LabeledSample(x[i].reshape(28, 28).astype(np.uint8), int(y[i])) for i in range(len(y))]
    out = tmp_path_factory.mktemp("mnist")
    write_idx(samples, out / "images.idx", out / "labels.idx")
    return out / "images.idx", out / "labels.idx"
