"""Perfect dyadic operators given by their block values ``K_I^+`` and ``K_I^-``.

``K_I^+`` is the kernel value on ``left(I) x right(I)`` and ``K_I^-`` the value
on ``right(I) x left(I)``.  The operator is

    T f = sum_I  K_I^+ (int_{right} f) chi_left  +  K_I^- (int_{left} f) chi_right

summed over the internal intervals of the tree.  Intervals strictly larger
than the root are not modelled; every identity below is exact for this
truncated operator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Union

import numpy as np

from .dyadic import (
    CellVector,
    DomainError,
    DyadicInterval,
    accumulate_down,
    haar_function,
    haar_levels,
    level_averages,
    subtree_sums,
    synthesize_levels,
    values_of,
    wrap_like,
)

COMPONENTS = ("T1", "T2", "T3", "T4")


@dataclass(frozen=True)
class KernelCoeffs:
    """Block values of a perfect dyadic kernel, stored as level arrays."""

    depth: int
    kplus: tuple = field(repr=False)
    kminus: tuple = field(repr=False)

    def __post_init__(self):
        if self.depth < 1:
            raise DomainError(f"depth must be >= 1, got {self.depth}")
        for name in ("kplus", "kminus"):
            levels = getattr(self, name)
            if len(levels) != self.depth:
                raise DomainError(f"{name}: expected {self.depth} levels, got {len(levels)}")
            frozen = []
            for j, arr in enumerate(levels):
                arr = np.array(arr, dtype=float)
                if arr.shape != (2**j,):
                    raise DomainError(f"{name} level {j} has shape {arr.shape}")
                if not np.all(np.isfinite(arr)):
                    raise DomainError(f"{name} level {j} has non-finite entries")
                arr.setflags(write=False)
                frozen.append(arr)
            object.__setattr__(self, name, tuple(frozen))

    @classmethod
    def zeros(cls, depth: int) -> "KernelCoeffs":
        z = tuple(np.zeros(2**j) for j in range(depth))
        return cls(depth, z, z)

    @classmethod
    def from_entries(
        cls, depth: int, entries: Mapping[DyadicInterval, tuple[float, float]]
    ) -> "KernelCoeffs":
        kp = [np.zeros(2**j) for j in range(depth)]
        km = [np.zeros(2**j) for j in range(depth)]
        for I, (a, b) in entries.items():
            if I.level >= depth:
                raise DomainError(f"{I!r} is not internal at depth {depth}")
            kp[I.level][I.index] = a
            km[I.level][I.index] = b
        return cls(depth, tuple(kp), tuple(km))

    def entry(self, I: DyadicInterval) -> tuple[float, float]:
        return float(self.kplus[I.level][I.index]), float(self.kminus[I.level][I.index])

    @cached_property
    def lengths(self) -> list[float]:
        return [2.0**-j for j in range(self.depth)]

    @cached_property
    def ksum(self) -> list[np.ndarray]:
        """``K_I^+ + K_I^-`` per level."""
        return [p + m for p, m in zip(self.kplus, self.kminus)]

    @cached_property
    def kdiff(self) -> list[np.ndarray]:
        """``K_I^+ - K_I^-`` per level."""
        return [p - m for p, m in zip(self.kplus, self.kminus)]

    def scaled(self, c: float) -> "KernelCoeffs":
        return KernelCoeffs(self.depth, tuple(c * a for a in self.kplus), tuple(c * a for a in self.kminus))

    def adjoint(self) -> "KernelCoeffs":
        """Kernel of ``T*``: the two block values trade places."""
        return KernelCoeffs(self.depth, self.kminus, self.kplus)

    def size_profile(self) -> tuple[float, float]:
        """``(sup |K_I^+| |I|, sup |K_I^-| |I|)``."""
        sp = max(float(np.max(np.abs(a))) * l for a, l in zip(self.kplus, self.lengths))
        sm = max(float(np.max(np.abs(a))) * l for a, l in zip(self.kminus, self.lengths))
        return sp, sm

    def size_violations(self, tol: float = 1e-12) -> list[DyadicInterval]:
        """Intervals where ``|K_I^+| |I|`` or ``|K_I^-| |I|`` exceeds 1."""
        bad = []
        for j, l in enumerate(self.lengths):
            over = (np.abs(self.kplus[j]) * l > 1 + tol) | (np.abs(self.kminus[j]) * l > 1 + tol)
            bad.extend(DyadicInterval(j, int(k)) for k in np.flatnonzero(over))
        return bad

    def validate(self, allow_unnormalized: bool = False) -> "KernelCoeffs":
        if not allow_unnormalized:
            bad = self.size_violations()
            if bad:
                raise DomainError(
                    f"kernel violates the size condition |K_I| |I| <= 1 at {len(bad)} intervals, e.g. {bad[0]!r}"
                )
        return self

    # -- file format ------------------------------------------------------

    def to_dict(self) -> dict:
        entries = []
        for j in range(self.depth):
            for k in range(2**j):
                a, b = float(self.kplus[j][k]), float(self.kminus[j][k])
                if a != 0.0 or b != 0.0:
                    entries.append({"level": j, "index": k, "kplus": a, "kminus": b})
        return {"depth": self.depth, "entries": entries}

    @classmethod
    def from_dict(cls, data: Mapping, allow_unnormalized: bool = False) -> "KernelCoeffs":
        try:
            depth = int(data["depth"])
            raw = data.get("entries", [])
            entries = {
                DyadicInterval(int(e["level"]), int(e["index"])): (float(e.get("kplus", 0.0)), float(e.get("kminus", 0.0)))
                for e in raw
            }
        except (KeyError, TypeError, AttributeError) as exc:
            raise DomainError(f"malformed kernel file: {exc}") from None
        return cls.from_entries(depth, entries).validate(allow_unnormalized)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path: Union[str, Path], allow_unnormalized: bool = False) -> "KernelCoeffs":
        return cls.from_dict(json.loads(Path(path).read_text()), allow_unnormalized)


# ---------------------------------------------------------------------------
# generators


def uniform_kernel(depth: int, rng: np.random.Generator) -> KernelCoeffs:
    """``K_I^+-`` drawn independently from ``[-1/|I|, 1/|I|]``."""
    kp = tuple(rng.uniform(-1.0, 1.0, 2**j) * 2.0**j for j in range(depth))
    km = tuple(rng.uniform(-1.0, 1.0, 2**j) * 2.0**j for j in range(depth))
    return KernelCoeffs(depth, kp, km)


def decay_kernel(depth: int, rng: np.random.Generator, c: float = 1.0) -> KernelCoeffs:
    """``K_I^+- = sign * c / |I|`` with an independent random sign for each block."""
    if not abs(c) <= 1.0:
        raise DomainError(f"decay constant must satisfy |c| <= 1, got {c}")
    kp = tuple(rng.choice([-1.0, 1.0], 2**j) * c * 2.0**j for j in range(depth))
    km = tuple(rng.choice([-1.0, 1.0], 2**j) * c * 2.0**j for j in range(depth))
    return KernelCoeffs(depth, kp, km)


# ---------------------------------------------------------------------------
# application


def _block_apply(kernel: KernelCoeffs, x: np.ndarray, transpose: bool) -> np.ndarray:
    avgs = level_averages(x)
    acc = np.zeros(x.shape[:-1] + (1,))
    for j in range(kernel.depth):
        integ = avgs[j + 1] * 2.0 ** -(j + 1)
        left, right = integ[..., 0::2], integ[..., 1::2]
        nxt = np.repeat(acc, 2, axis=-1)
        if transpose:
            nxt[..., 0::2] += kernel.kminus[j] * right
            nxt[..., 1::2] += kernel.kplus[j] * left
        else:
            nxt[..., 0::2] += kernel.kplus[j] * right
            nxt[..., 1::2] += kernel.kminus[j] * left
        acc = nxt
    return acc


def apply_T(kernel: KernelCoeffs, f: Union[CellVector, np.ndarray]):
    """Evaluate ``T f`` by one top-down sweep (arrays may be stacked on leading axes)."""
    x = values_of(f, kernel.depth)
    return wrap_like(f, _block_apply(kernel, x, transpose=False))


def apply_Tstar(kernel: KernelCoeffs, f: Union[CellVector, np.ndarray]):
    """Evaluate ``T* f``."""
    x = values_of(f, kernel.depth)
    return wrap_like(f, _block_apply(kernel, x, transpose=True))


def apply_component(kernel: KernelCoeffs, which: str, f: Union[CellVector, np.ndarray]):
    """Apply one of the four canonical pieces of ``T``.

    ``T1`` averaging operator with symbol ``(K+ + K-)|I|``, ``T2`` adjoint
    paraproduct, ``T3`` paraproduct with ``b_I = (K+ - K-)|I|^{3/2}``, ``T4``
    martingale transform with symbol ``(K+ + K-)|I|``.
    """
    x = values_of(f, kernel.depth)
    avgs = level_averages(x)
    lengths = kernel.lengths
    if which == "T1":
        out = accumulate_down([s * l * a for s, l, a in zip(kernel.ksum, lengths, avgs)])
    elif which == "T2":
        haar = haar_levels(avgs)
        out = accumulate_down([d * math.sqrt(l) * h for d, l, h in zip(kernel.kdiff, lengths, haar)])
    elif which == "T3":
        coeffs = [d * l**1.5 * a for d, l, a in zip(kernel.kdiff, lengths, avgs)]
        out = synthesize_levels(np.zeros(x.shape[:-1]), coeffs)
    elif which == "T4":
        haar = haar_levels(avgs)
        coeffs = [s * l * h for s, l, h in zip(kernel.ksum, lengths, haar)]
        out = synthesize_levels(np.zeros(x.shape[:-1]), coeffs)
    else:
        raise DomainError(f"unknown component {which!r}; expected one of {COMPONENTS}")
    return wrap_like(f, out)


def decomposition_residual(kernel: KernelCoeffs, f: Union[CellVector, np.ndarray]) -> float:
    """``max |T f - (T1 f - T2 f + T3 f - T4 f)/4|``."""
    x = values_of(f, kernel.depth)
    direct = _block_apply(kernel, x, transpose=False)
    t1, t2, t3, t4 = (values_of(apply_component(kernel, c, x)) for c in COMPONENTS)
    return float(np.max(np.abs(direct - 0.25 * (t1 - t2 + t3 - t4))))


# ---------------------------------------------------------------------------
# T(1) and testing


@dataclass(frozen=True)
class T1Coefficients:
    depth: int
    alpha: tuple = field(repr=False)
    beta: tuple = field(repr=False)

    @property
    def t1_coeff(self) -> list[np.ndarray]:
        """``<T(1), h_J>`` per level."""
        return [(a + b) / 4.0 for a, b in zip(self.alpha, self.beta)]

    @property
    def t1star_coeff(self) -> list[np.ndarray]:
        """``<T*(1), h_J>`` per level."""
        return [(a - b) / 4.0 for a, b in zip(self.alpha, self.beta)]

    def at(self, J: DyadicInterval) -> dict:
        a, b = float(self.alpha[J.level][J.index]), float(self.beta[J.level][J.index])
        return {"alpha": a, "beta": b, "t1": (a + b) / 4.0, "t1star": (a - b) / 4.0}


def _testing_sums(kernel: KernelCoeffs) -> list[np.ndarray]:
    """``sum_{I in D(J)} (K_I^+ + K_I^-) |I|^2`` per internal ``J``."""
    return subtree_sums([s * l * l for s, l in zip(kernel.ksum, kernel.lengths)])


def t1_coefficients(kernel: KernelCoeffs) -> T1Coefficients:
    sums = _testing_sums(kernel)
    alpha = []
    for j in range(kernel.depth):
        if j + 1 < kernel.depth:
            child = sums[j + 1]
            alpha.append((child[0::2] - child[1::2]) / math.sqrt(kernel.lengths[j]))
        else:
            alpha.append(np.zeros(2**j))
    beta = [d * l**1.5 for d, l in zip(kernel.kdiff, kernel.lengths)]
    return T1Coefficients(kernel.depth, tuple(alpha), tuple(beta))


def direct_t1_coefficients(kernel: KernelCoeffs) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Haar coefficients of ``T(1)`` and ``T*(1)`` by direct application."""
    one = np.ones(2**kernel.depth)
    t1 = haar_levels(level_averages(_block_apply(kernel, one, False)))
    t1s = haar_levels(level_averages(_block_apply(kernel, one, True)))
    return t1, t1s


def testing_values(kernel: KernelCoeffs) -> list[np.ndarray]:
    """``<T h_J, h_J>`` for every internal ``J`` by the closed form."""
    sums = _testing_sums(kernel)
    return [S / (4.0 * l) - 0.5 * s * l for S, s, l in zip(sums, kernel.ksum, kernel.lengths)]


def testing_value(kernel: KernelCoeffs, J: DyadicInterval, verify: bool = False) -> float:
    """``<T h_J, h_J>``; ``verify=True`` computes it by applying ``T`` to ``h_J`` instead."""
    if J.level >= kernel.depth:
        raise DomainError(f"{J!r} is not internal at depth {kernel.depth}")
    if verify:
        h = haar_function(kernel.depth, J)
        return apply_T(kernel, h).inner(h)
    return float(testing_values(kernel)[J.level][J.index])


def direct_testing_values(kernel: KernelCoeffs) -> list[np.ndarray]:
    """All ``<T h_J, h_J>`` by materialising every ``h_J`` (independent of the closed form)."""
    depth = kernel.depth
    n = 2**depth
    out = []
    for j in range(depth):
        basis = np.zeros((2**j, n))
        width = n >> j
        amp = 2.0 ** (j / 2)
        for k in range(2**j):
            basis[k, k * width : k * width + width // 2] = amp
            basis[k, k * width + width // 2 : (k + 1) * width] = -amp
        images = _block_apply(kernel, basis, transpose=False)
        out.append(np.einsum("kn,kn->k", images, basis) / n)
    return out


def iter_kernel_entries(kernel: KernelCoeffs) -> Iterable[tuple[DyadicInterval, float, float]]:
    for j in range(kernel.depth):
        for k in range(2**j):
            yield DyadicInterval(j, k), float(kernel.kplus[j][k]), float(kernel.kminus[j][k])
