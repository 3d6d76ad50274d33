"""Finite dyadic tree over [0, 1), piecewise-constant functions and Haar analysis.

Interval-indexed families are stored as *level arrays*: a list whose entry
``j`` is a float array of length ``2**j`` holding the value for the interval
``(j, k)`` at position ``k``.  Children of ``(j, k)`` are ``(j+1, 2k)`` (left,
``I+``) and ``(j+1, 2k+1)`` (right, ``I-``).

The Haar function of ``I`` is ``|I|**-0.5 * (chi_left - chi_right)``; it is
positive on the left half.  Every sign convention in the package derives from
this one.

All array kernels operate on the last axis, so a stack of functions with
shape ``(m, 2**L)`` is processed in one pass.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterator, Mapping, Sequence, Union

import numpy as np


class DomainError(ValueError):
    """Raised for arguments outside an operation's domain."""


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """The interval ``[index * 2**-level, (index + 1) * 2**-level)``."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise DomainError(f"negative level {self.level}")
        if not 0 <= self.index < 2**self.level:
            raise DomainError(f"index {self.index} out of range at level {self.level}")

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    @property
    def left(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.index)

    @property
    def right(self) -> "DyadicInterval":
        return DyadicInterval(self.level + 1, 2 * self.index + 1)

    @property
    def parent(self) -> "DyadicInterval":
        if self.level == 0:
            raise DomainError("the root has no parent")
        return DyadicInterval(self.level - 1, self.index // 2)

    @property
    def endpoints(self) -> tuple[float, float]:
        return self.index * self.length, (self.index + 1) * self.length

    def contains(self, other: "DyadicInterval") -> bool:
        """True when ``other`` is a (not necessarily strict) subinterval."""
        if other.level < self.level:
            return False
        return other.index >> (other.level - self.level) == self.index

    def cell_slice(self, depth: int) -> slice:
        """Slice of the cell array (finest level ``depth``) covered by this interval."""
        if self.level > depth:
            raise DomainError(f"interval level {self.level} exceeds depth {depth}")
        width = 2 ** (depth - self.level)
        return slice(self.index * width, (self.index + 1) * width)

    def to_dict(self) -> dict:
        return {"level": self.level, "index": self.index}

    def __str__(self) -> str:
        a, b = self.endpoints
        return f"[{a:g},{b:g})"


ROOT = DyadicInterval(0, 0)


@dataclass(frozen=True)
class DyadicTree:
    """Dyadic intervals of ``[0, 1)`` down to level ``depth``.

    Internal intervals are the levels ``0 .. depth-1``; cells are level ``depth``.
    """

    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError(f"depth must be >= 1, got {self.depth}")

    @property
    def n_cells(self) -> int:
        return 2**self.depth

    @property
    def n_internal(self) -> int:
        return 2**self.depth - 1

    def internal(self) -> Iterator[DyadicInterval]:
        for j in range(self.depth):
            for k in range(2**j):
                yield DyadicInterval(j, k)

    def cells(self) -> Iterator[DyadicInterval]:
        for k in range(2**self.depth):
            yield DyadicInterval(self.depth, k)

    def intervals(self) -> Iterator[DyadicInterval]:
        yield from self.internal()
        yield from self.cells()

    def subintervals(self, J: DyadicInterval, internal_only: bool = True) -> Iterator[DyadicInterval]:
        """All ``I`` in ``D(J)`` (``J`` included) that belong to the tree."""
        last = self.depth - 1 if internal_only else self.depth
        for j in range(J.level, last + 1):
            shift = j - J.level
            for k in range(J.index << shift, (J.index + 1) << shift):
                yield DyadicInterval(j, k)


@dataclass(frozen=True)
class CellVector:
    """A function on [0, 1) that is constant on each of the ``2**depth`` cells."""

    depth: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError(f"depth must be >= 1, got {self.depth}")
        values = np.array(self.values, dtype=float)
        if values.shape != (2**self.depth,):
            raise DomainError(
                f"expected {2**self.depth} cell values for depth {self.depth}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("cell values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, depth: int, c: float = 1.0) -> "CellVector":
        return cls(depth, np.full(2**depth, float(c)))

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "CellVector":
        values = np.asarray(values, dtype=float)
        n = values.shape[0]
        depth = n.bit_length() - 1
        if n < 2 or 2**depth != n:
            raise DomainError(f"cell count {n} is not a power of two >= 2")
        return cls(depth, values)

    @classmethod
    def indicator(cls, depth: int, I: DyadicInterval) -> "CellVector":
        values = np.zeros(2**depth)
        values[I.cell_slice(depth)] = 1.0
        return cls(depth, values)

    @property
    def cell_length(self) -> float:
        return 2.0 ** -self.depth

    def integral(self) -> float:
        return float(self.values.sum()) * self.cell_length

    def inner(self, other: "CellVector") -> float:
        """L2([0,1)) inner product."""
        _check_depth(self.depth, other.depth)
        return float(np.dot(self.values, other.values)) * self.cell_length

    @cached_property
    def averages(self) -> list[np.ndarray]:
        """Level arrays of ``m_I f`` for levels ``0 .. depth``."""
        return level_averages(self.values)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "values": [float(x) for x in self.values]}

    @classmethod
    def from_dict(cls, data: Mapping) -> "CellVector":
        try:
            depth = int(data["depth"])
            values = data["values"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed cell vector: {exc}") from None
        return cls(depth, np.asarray(values, dtype=float))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "CellVector":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _check_depth(a: int, b: int) -> None:
    if a != b:
        raise DomainError(f"depth mismatch: {a} != {b}")


def depth_of(n_cells: int) -> int:
    depth = n_cells.bit_length() - 1
    if n_cells < 2 or 2**depth != n_cells:
        raise DomainError(f"cell count {n_cells} is not a power of two >= 2")
    return depth


def values_of(f: Union[CellVector, np.ndarray], depth: int | None = None) -> np.ndarray:
    """Cell values of ``f`` as an array; checks the depth when given."""
    if isinstance(f, CellVector):
        if depth is not None:
            _check_depth(depth, f.depth)
        return f.values
    arr = np.asarray(f, dtype=float)
    if depth is not None and arr.shape[-1] != 2**depth:
        raise DomainError(f"depth mismatch: expected {2**depth} cells, got {arr.shape[-1]}")
    return arr


def wrap_like(f, values: np.ndarray):
    """Return ``values`` as a CellVector when ``f`` was one."""
    if isinstance(f, CellVector):
        return CellVector(f.depth, values)
    return values


# ---------------------------------------------------------------------------
# level-array kernels


def pair_sum(x: np.ndarray) -> np.ndarray:
    """Sum adjacent siblings along the last axis."""
    return x[..., 0::2] + x[..., 1::2]


def level_averages(values: np.ndarray) -> list[np.ndarray]:
    """Averages ``m_I f`` for every level ``0 .. L``, by bottom-up pairwise summation."""
    values = np.asarray(values, dtype=float)
    depth = depth_of(values.shape[-1])
    out = [values]
    cur = values
    for _ in range(depth):
        cur = 0.5 * pair_sum(cur)
        out.append(cur)
    out.reverse()
    return out


def subtree_sums(levels: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``S_J = sum_{I in D(J)} x_I`` for a level-array family ``x`` (``D(J)`` includes ``J``)."""
    out = [None] * len(levels)
    acc = np.asarray(levels[-1], dtype=float)
    out[-1] = acc
    for j in range(len(levels) - 2, -1, -1):
        acc = np.asarray(levels[j], dtype=float) + pair_sum(acc)
        out[j] = acc
    return out


def accumulate_down(levels: Sequence[np.ndarray]) -> np.ndarray:
    """Cell values of ``sum_I x_I chi_I`` for a family on levels ``0 .. len-1``.

    The result lives on level ``len(levels)``.
    """
    acc = np.zeros(np.shape(levels[0])[:-1] + (1,))
    for x in levels:
        acc = np.repeat(acc + x, 2, axis=-1)
    return acc


def synthesize_levels(mean, coeffs: Sequence[np.ndarray]) -> np.ndarray:
    """Cell values of ``mean + sum_I c_I h_I`` from level-array coefficients."""
    acc = np.asarray(mean, dtype=float)[..., None]
    if len(coeffs):
        lead = np.broadcast_shapes(acc.shape[:-1], np.shape(coeffs[0])[:-1])
        acc = np.broadcast_to(acc, lead + (1,))
    acc = acc.copy()
    for j, c in enumerate(coeffs):
        scaled = np.asarray(c, dtype=float) * 2.0 ** (j / 2)
        nxt = np.repeat(acc, 2, axis=-1)
        nxt[..., 0::2] += scaled
        nxt[..., 1::2] -= scaled
        acc = nxt
    return acc


def haar_levels(averages: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Haar coefficients ``<f, h_I>`` on internal levels from a full averages list."""
    out = []
    for j in range(len(averages) - 1):
        child = averages[j + 1]
        out.append(2.0 ** (-j / 2) / 2.0 * (child[..., 0::2] - child[..., 1::2]))
    return out


def delta_levels(averages: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``m_left - m_right`` on internal levels."""
    return [a[..., 0::2] - a[..., 1::2] for a in averages[1:]]


def interval_lengths(depth: int) -> list[float]:
    return [2.0**-j for j in range(depth)]


def argmax_interval(levels: Sequence[np.ndarray], start: int = 0) -> tuple[float, DyadicInterval]:
    """Maximum over a level-array family with the interval attaining it.

    Ties resolve to the coarsest level, then the smallest index.
    """
    best, where = -math.inf, None
    for j, arr in enumerate(levels):
        if j < start:
            continue
        k = int(np.argmax(arr))
        if arr[k] > best:
            best, where = float(arr[k]), DyadicInterval(j, k)
    if where is None:
        raise DomainError("empty family")
    return best, where


def level_arrays_from_mapping(mapping: Mapping[DyadicInterval, float], depth: int) -> list[np.ndarray]:
    """Level arrays over internal intervals of a depth-``depth`` tree; absent entries are 0."""
    out = [np.zeros(2**j) for j in range(depth)]
    for I, value in mapping.items():
        if I.level >= depth:
            raise DomainError(f"{I!r} is not internal at depth {depth}")
        out[I.level][I.index] = float(value)
    return out


def mapping_from_level_arrays(levels: Sequence[np.ndarray]) -> dict[DyadicInterval, float]:
    return {DyadicInterval(j, k): float(x) for j, arr in enumerate(levels) for k, x in enumerate(arr)}


# ---------------------------------------------------------------------------
# public operations


def interval_average(f: CellVector, I: DyadicInterval) -> float:
    """``m_I f``."""
    if I.level > f.depth:
        raise DomainError(f"interval level {I.level} exceeds depth {f.depth}")
    return float(f.averages[I.level][I.index])


def _require_internal(depth: int, I: DyadicInterval) -> None:
    if I.level >= depth:
        raise DomainError(f"{I!r} is a cell at depth {depth}; an internal interval is required")


def haar_coefficient(f: CellVector, I: DyadicInterval) -> float:
    """``<f, h_I> = sqrt(|I|)/2 * (m_left f - m_right f)``."""
    _require_internal(f.depth, I)
    child = f.averages[I.level + 1]
    return math.sqrt(I.length) / 2.0 * float(child[2 * I.index] - child[2 * I.index + 1])


def delta(w: CellVector, I: DyadicInterval) -> float:
    """``m_left w - m_right w``."""
    _require_internal(w.depth, I)
    child = w.averages[I.level + 1]
    return float(child[2 * I.index] - child[2 * I.index + 1])


@dataclass(frozen=True)
class HaarExpansion:
    depth: int
    mean: float
    levels: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.levels) != self.depth:
            raise DomainError(f"expected {self.depth} coefficient levels, got {len(self.levels)}")
        for j, arr in enumerate(self.levels):
            if np.shape(arr) != (2**j,):
                raise DomainError(f"level {j} has shape {np.shape(arr)}")

    @property
    def coeffs(self) -> dict[DyadicInterval, float]:
        return mapping_from_level_arrays(self.levels)

    def coefficient(self, I: DyadicInterval) -> float:
        _require_internal(self.depth, I)
        return float(self.levels[I.level][I.index])

    @classmethod
    def from_coeffs(cls, depth: int, mean: float, coeffs: Mapping[DyadicInterval, float]) -> "HaarExpansion":
        return cls(depth, float(mean), tuple(level_arrays_from_mapping(coeffs, depth)))

    def energy(self) -> float:
        return self.mean**2 + sum(float(np.dot(c, c)) for c in self.levels)


def haar_transform(f: CellVector) -> HaarExpansion:
    return HaarExpansion(f.depth, float(f.averages[0][0]), tuple(haar_levels(f.averages)))


def haar_synthesize(e: HaarExpansion, depth: int | None = None) -> CellVector:
    if depth is not None:
        _check_depth(depth, e.depth)
    return CellVector(e.depth, synthesize_levels(e.mean, e.levels))


def haar_function(depth: int, I: DyadicInterval) -> CellVector:
    """Cell values of ``h_I``."""
    _require_internal(depth, I)
    return haar_synthesize(HaarExpansion.from_coeffs(depth, 0.0, {I: 1.0}))
