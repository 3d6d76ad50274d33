import sys

import numpy as np
import pytest

from dyadicops import DyadicInterval, KernelCoeffs, Weight


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def dense_T(K: KernelCoeffs) -> np.ndarray:
    """Cell matrix of T assembled entry by entry from the block description of the kernel."""
    depth = K.depth
    n = 2**depth
    M = np.zeros((n, n))
    for j in range(depth):
        for k in range(2**j):
            I = DyadicInterval(j, k)
            kp, km = K.entry(I)
            left = I.left.cell_slice(depth)
            right = I.right.cell_slice(depth)
            # (Tf)(x) = integral of kernel(x, y) f(y) dy; a cell has length 1/n
            M[left, right] += kp / n
            M[right, left] += km / n
    return M


def root_kernel(depth: int, kp: float, km: float) -> KernelCoeffs:
    return KernelCoeffs.from_entries(depth, {DyadicInterval(0, 0): (kp, km)})


def two_cell(a: float, b: float) -> Weight:
    return Weight.from_values([a, b])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
