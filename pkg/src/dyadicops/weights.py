"""Weights, their dyadic characteristics and weight generators."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .dyadic import (
    CellVector,
    DomainError,
    argmax_interval,
    level_averages,
    subtree_sums,
)

CLAMP = (1e-8, 1e8)


@dataclass(frozen=True)
class Weight:
    """Strictly positive piecewise-constant weight with cached dyadic averages.

    The reciprocal weight is the pointwise reciprocal of the cell values, so
    ``m_I(w^-1)`` is exact in this model.
    """

    cells: CellVector = field(repr=False)

    def __post_init__(self):
        v = self.cells.values
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise DomainError("weight values must be finite and strictly positive")
        # Jensen: m_I w * m_I(1/w) >= 1 on every interval
        prod = min(float(np.min(a * b)) for a, b in zip(self.avg, self.avg_inv))
        if prod < 1.0 - 1e-12:
            raise AssertionError(f"Jensen check failed: min m_I w * m_I(1/w) = {prod}")

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Weight":
        return cls(CellVector.from_values(values))

    @classmethod
    def constant(cls, depth: int, c: float = 1.0) -> "Weight":
        return cls(CellVector.constant(depth, c))

    @property
    def depth(self) -> int:
        return self.cells.depth

    @property
    def values(self) -> np.ndarray:
        return self.cells.values

    @cached_property
    def avg(self) -> list[np.ndarray]:
        """``m_I w`` for levels ``0 .. depth``."""
        return level_averages(self.values)

    @cached_property
    def avg_inv(self) -> list[np.ndarray]:
        """``m_I (w^-1)``."""
        return level_averages(1.0 / self.values)

    @cached_property
    def avg_log(self) -> list[np.ndarray]:
        """``m_I (log w)``."""
        return level_averages(np.log(self.values))

    @cached_property
    def avg_wlogw(self) -> list[np.ndarray]:
        """``m_I (w log w)``."""
        return level_averages(self.values * np.log(self.values))

    @cached_property
    def delta(self) -> list[np.ndarray]:
        """``m_left w - m_right w`` on internal levels."""
        return [a[0::2] - a[1::2] for a in self.avg[1:]]

    def reciprocal(self) -> "Weight":
        return Weight(CellVector(self.depth, 1.0 / self.values))

    def scaled(self, c: float) -> "Weight":
        return Weight(CellVector(self.depth, c * self.values))

    def to_dict(self) -> dict:
        return self.cells.to_dict()

    @classmethod
    def from_dict(cls, data) -> "Weight":
        return cls(CellVector.from_dict(data))

    def save(self, path: Union[str, Path]) -> None:
        self.cells.save(path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Weight":
        return cls(CellVector.load(path))


@dataclass(frozen=True)
class WeightPair:
    """The pair ``(v, u)``; ``v`` is only ever used through ``v^-1``, which is stored."""

    v_inv: Weight
    u: Weight

    def __post_init__(self):
        if self.v_inv.depth != self.u.depth:
            raise DomainError(f"depth mismatch: {self.v_inv.depth} != {self.u.depth}")

    @classmethod
    def one_weight(cls, w: Weight) -> "WeightPair":
        """The pair ``v = u = w``."""
        return cls(w.reciprocal(), w)

    @property
    def depth(self) -> int:
        return self.u.depth


# ---------------------------------------------------------------------------
# characteristics


def a2_profile(w: Weight) -> list[np.ndarray]:
    return [a * b for a, b in zip(w.avg, w.avg_inv)]


def a2_constant(w: Weight) -> float:
    """``sup_I m_I w * m_I(w^-1)`` over all tree intervals, cells included."""
    return argmax_interval(a2_profile(w))[0]


def joint_a2_profile(p: WeightPair) -> list[np.ndarray]:
    return [a * b for a, b in zip(p.v_inv.avg, p.u.avg)]


def joint_a2_constant(p: WeightPair) -> float:
    """``sup_I m_I(v^-1) * m_I u``."""
    return argmax_interval(joint_a2_profile(p))[0]


def ainfty_profile(w: Weight) -> list[np.ndarray]:
    return [a * np.exp(-g) for a, g in zip(w.avg, w.avg_log)]


def ainfty_constant(w: Weight) -> float:
    """``sup_I m_I w * exp(-m_I log w)``."""
    return argmax_interval(ainfty_profile(w))[0]


def rh1_profile(w: Weight) -> list[np.ndarray]:
    """``m_I((w/m_I w) log(w/m_I w))`` per interval."""
    return [(e - a * np.log(a)) / a for a, e in zip(w.avg, w.avg_wlogw)]


def rh1_constant(w: Weight) -> float:
    return max(0.0, argmax_interval(rh1_profile(w))[0])


def carleson_profile(lam: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``(1/|J|) sum_{I in D(J)} lam_I`` for every internal ``J``."""
    lam = [np.asarray(x, dtype=float) for x in lam]
    if any(np.any(x < 0) for x in lam):
        raise DomainError("Carleson sequences must be nonnegative")
    return [S * 2.0**j for j, S in enumerate(subtree_sums(lam))]


def carleson_constant(lam: Sequence[np.ndarray]) -> float:
    """Carleson constant of a nonnegative family on internal intervals (level arrays)."""
    return argmax_interval(carleson_profile(lam))[0]


# ---------------------------------------------------------------------------
# generators


def _clamp(values: np.ndarray) -> np.ndarray:
    return np.clip(values, *CLAMP)


def power_weight(depth: int, alpha: float) -> Weight:
    """Exact cell averages of ``x**alpha`` on ``[0, 1)``."""
    if not -1.0 < alpha < 1.0:
        raise DomainError(f"power exponent must lie in (-1, 1), got {alpha}")
    edges = np.arange(2**depth + 1) / 2**depth
    a, b = edges[:-1], edges[1:]
    vals = (b ** (alpha + 1) - a ** (alpha + 1)) / ((alpha + 1) * (b - a))
    return Weight(CellVector(depth, _clamp(vals)))


def cascade_weight(depth: int, delta: float, rng: np.random.Generator, mean: float = 1.0) -> Weight:
    """Multiplicative martingale: ``m_left = m_I (1 + e_I)``, ``m_right = m_I (1 - e_I)``, ``|e_I| <= delta``."""
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"cascade bound must lie in [0, 1), got {delta}")
    vals = np.array([float(mean)])
    for j in range(depth):
        eps = rng.uniform(-delta, delta, 2**j)
        nxt = np.empty(2 ** (j + 1))
        nxt[0::2] = vals * (1.0 + eps)
        nxt[1::2] = vals * (1.0 - eps)
        vals = nxt
    return Weight(CellVector(depth, _clamp(vals)))


def lognormal_weight(depth: int, sigma: float, rng: np.random.Generator) -> Weight:
    """Independent log-normal cell values; an unstructured stress family."""
    return Weight(CellVector(depth, _clamp(np.exp(sigma * rng.standard_normal(2**depth)))))


def generate_weight(kind: str, depth: int, params: dict | None = None, seed=None) -> Weight:
    """Build a weight of the given kind: ``constant``, ``cascade``, ``power``, ``lognormal`` or ``file``."""
    params = params or {}
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if kind == "constant":
        c = float(params.get("c", 1.0))
        if not c > 0:
            raise DomainError(f"constant weight must be positive, got {c}")
        return Weight.constant(depth, c)
    if kind == "cascade":
        return cascade_weight(depth, float(params.get("delta", 0.3)), rng)
    if kind == "power":
        return power_weight(depth, float(params.get("alpha", 0.5)))
    if kind == "lognormal":
        return lognormal_weight(depth, float(params.get("sigma", 1.0)), rng)
    if kind == "file":
        w = Weight.load(params["path"])
        if w.depth != depth:
            raise DomainError(f"weight file has depth {w.depth}, expected {depth}")
        return w
    raise DomainError(f"unknown weight kind {kind!r}")
