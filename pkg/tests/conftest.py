import numpy as np
import pytest
from scipy import ndimage

from pedscan.imaging import BinaryMask
from pedscan.synth import generate_corpus

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    """Record one pass/fail line per acceptance criterion for the summary."""
    lines = request.config.stash[ACCEPTANCE]

    def record(number, title, passed, detail):
        line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        print(line)
        lines.append(line)

    return record


@pytest.fixture(scope="session")
def corpus():
    return generate_corpus(seed=0, noise=1)


def random_blob(rng, max_side=12):
    """One hole-free 8-connected blob inside a mask of at most max_side x max_side."""
    while True:
        h, w = rng.integers(1, max_side + 1, size=2)
        bits = rng.random((h, w)) < rng.uniform(0.3, 0.9)
        labels, n = ndimage.label(bits, structure=np.ones((3, 3)))
        if n == 0:
            continue
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        blob = ndimage.binary_fill_holes(labels == sizes.argmax())
        return BinaryMask(blob)
