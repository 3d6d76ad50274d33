"""Dense matrices of tree operators and their L2 operator norms.

All L2 norms use Lebesgue measure on [0, 1).  A cell vector ``f`` has
``||f||^2 = 2**-L * sum f_i^2``; the factor is common to both sides of every
norm ratio, so the operator norm equals the spectral norm of the cell matrix.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

logger = logging.getLogger(__name__)

MAX_DEPTH = 12
EIG_CROSS_CHECK_DEPTH = 8
POWER_TOL = 1e-10
POWER_MAX_ITER = 100_000


class ResourceError(RuntimeError):
    """Requested matrix exceeds the configured size guard."""


class ConvergenceError(RuntimeError):
    def __init__(self, iterations: int, estimate: float):
        super().__init__(f"power iteration did not converge after {iterations} iterations (estimate {estimate!r})")
        self.iterations = iterations
        self.estimate = estimate


@dataclass(frozen=True)
class DenseOperator:
    """``matrix @ cell_values`` reproduces the operator on cell values."""

    depth: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = 2**self.depth
        if np.shape(self.matrix) != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got {np.shape(self.matrix)}")

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.matrix @ values

    @property
    def T(self) -> "DenseOperator":
        return DenseOperator(self.depth, self.matrix.T)

    def to_csv(self, path: Union[str, Path]) -> None:
        np.savetxt(path, self.matrix, delimiter=",", fmt="%.17g")


def materialize(source, which: str = "T", depth: int | None = None, max_depth: int = MAX_DEPTH) -> DenseOperator:
    """Matrix of a tree operator, built by applying it to all cell indicators at once.

    ``source`` is a :class:`~dyadicops.kernel.KernelCoeffs` (``which`` one of
    ``T``, ``Tstar``, ``T1`` .. ``T4``), a :class:`~dyadicops.weights.WeightPair`
    (its ``T0`` operator) or a callable acting on stacked cell arrays, in which
    case ``depth`` is required.
    """
    from .kernel import KernelCoeffs, apply_T, apply_Tstar, apply_component
    from .weights import WeightPair

    if isinstance(source, KernelCoeffs):
        depth = source.depth
        if which == "T":
            op = lambda x: apply_T(source, x)
        elif which == "Tstar":
            op = lambda x: apply_Tstar(source, x)
        else:
            op = lambda x: apply_component(source, which, x)
    elif isinstance(source, WeightPair):
        from .conditions import apply_T0

        depth = source.depth
        op = lambda x: apply_T0(source, x)
    elif callable(source):
        if depth is None:
            raise ValueError("depth is required when materializing a callable")
        op = source
    else:
        raise TypeError(f"cannot materialize {type(source).__name__}")
    if depth > max_depth:
        raise ResourceError(f"depth {depth} exceeds the dense-matrix guard {max_depth}")
    eye = np.eye(2**depth)
    # row j of op(eye) is the image of the j-th cell indicator
    return DenseOperator(depth, np.ascontiguousarray(np.asarray(op(eye)).T))


def start_vector(n: int) -> np.ndarray:
    """Fixed start for power iteration.

    The all-ones vector is orthogonal to every mean-zero operator's range, so
    it is tilted by a deterministic golden-angle cosine.
    """
    x = 1.0 + 0.5 * np.cos(np.arange(n) * 2.399963229728653)
    return x / np.linalg.norm(x)


@dataclass(frozen=True)
class PowerResult:
    value: float
    iterations: int
    converged: bool


def power_iteration(matrix: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> PowerResult:
    """Largest singular value by power iteration on ``A^T A``.

    Stops once the Aitken estimate of the remaining error in the Rayleigh
    quotient falls below ``tol`` relative, or the increments reach round-off.
    """
    A = np.asarray(matrix, dtype=float)
    x = start_vector(A.shape[1])
    lam_prev = None
    step_prev = None
    lam = 0.0
    for it in range(1, max_iter + 1):
        y = A @ x
        lam = float(y @ y)
        z = A.T @ y
        nz = float(np.linalg.norm(z))
        if nz == 0.0 or lam == 0.0:
            return PowerResult(0.0, it, True)
        x = z / nz
        if lam_prev is not None:
            step = abs(lam - lam_prev)
            if step <= 64 * np.finfo(float).eps * lam:
                return PowerResult(math.sqrt(lam), it, True)
            if step <= tol * lam and step_prev is not None and step < step_prev:
                rate = step / step_prev
                if step * rate / (1.0 - rate) <= tol * lam:
                    return PowerResult(math.sqrt(lam), it, True)
            step_prev = step
        lam_prev = lam
    return PowerResult(math.sqrt(lam), max_iter, False)


def eig_norm(matrix: np.ndarray) -> float:
    """Largest singular value from the full symmetric eigendecomposition of ``A^T A``."""
    A = np.asarray(matrix, dtype=float)
    top = float(np.linalg.eigvalsh(A.T @ A)[-1])
    return math.sqrt(max(top, 0.0))


def l2_norm(A: Union[DenseOperator, np.ndarray], tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> float:
    """Operator norm on L2([0,1)).

    Non-convergence falls back to the eigendecomposition at small depth and
    raises :class:`ConvergenceError` otherwise.
    """
    matrix = A.matrix if isinstance(A, DenseOperator) else np.asarray(A, dtype=float)
    res = power_iteration(matrix, tol, max_iter)
    if res.converged:
        return res.value
    n = matrix.shape[0]
    if n <= 2**EIG_CROSS_CHECK_DEPTH:
        logger.warning("power iteration stalled after %d iterations; using eigendecomposition", res.iterations)
        return eig_norm(matrix)
    raise ConvergenceError(res.iterations, res.value)


def weighted_matrix(A: Union[DenseOperator, np.ndarray], v_inv, u) -> np.ndarray:
    """``D_{u^1/2} A D_{(v^-1)^1/2}``: its spectral norm is the ``L2(v) -> L2(u)`` norm."""
    matrix = A.matrix if isinstance(A, DenseOperator) else np.asarray(A, dtype=float)
    return np.sqrt(u.values)[:, None] * matrix * np.sqrt(v_inv.values)[None, :]


def weighted_norm(source, v_inv, u, which: str = "T", tol: float = POWER_TOL) -> float:
    """``sup ||T f||_{L2(u)} / ||f||_{L2(v)}`` with ``v`` supplied through ``v^-1``.

    For the one-weight norm on ``L2(w)`` pass ``v_inv = w^-1`` and ``u = w``.
    ``source`` may be a kernel (with ``which``) or an already built operator.
    """
    op = source if isinstance(source, DenseOperator) else materialize(source, which)
    if v_inv.depth != op.depth or u.depth != op.depth:
        raise ValueError("weights and operator live on different trees")
    return l2_norm(weighted_matrix(op, v_inv, u), tol)
