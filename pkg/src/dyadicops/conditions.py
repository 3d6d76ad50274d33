"""Kernel and weight conditions for perfect dyadic operators.

Every supremum is taken over the finite tree and reported together with the
interval that attains it.  Checks whose constant is explicit (the lemma
factors, ``16 Q``, ``4 testing + 2 size``) carry a bound and a pass flag;
conditions with an unspecified constant ``C`` are reported as the smallest
``C`` that makes them hold ("empirical").

Conditions that read ``... <= C m_I u`` with ``I`` the summation variable are
evaluated as ``<= C m_J u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dyadic import (
    CellVector,
    DomainError,
    DyadicInterval,
    DyadicTree,
    accumulate_down,
    argmax_interval,
    level_averages,
    subtree_sums,
    values_of,
    wrap_like,
)
from .kernel import KernelCoeffs, t1_coefficients, testing_values
from .spectral import DenseOperator, l2_norm
from .weights import (
    Weight,
    WeightPair,
    a2_constant,
    ainfty_constant,
    carleson_constant,
    carleson_profile,
    joint_a2_profile,
    rh1_constant,
)

DEFAULT_RTOL = 1e-9
INDEX_TYPO = "index-typo normalization: right side uses m_J"
LOG16 = math.log(16.0)


@dataclass
class ConditionReport:
    name: str
    constant: float
    bound: Optional[float] = None
    witness: Optional[DyadicInterval] = None
    note: str = ""
    extra: dict = field(default_factory=dict)
    tol: float = DEFAULT_RTOL
    passed: bool = field(init=False)

    def __post_init__(self):
        self.constant = float(self.constant)
        if self.bound is None:
            self.passed = True
        else:
            self.bound = float(self.bound)
            self.passed = bool(self.constant <= self.bound + self.tol * abs(self.bound) + 1e-15)

    @property
    def empirical(self) -> bool:
        return self.bound is None

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "constant": self.constant,
            "bound": self.bound,
            "pass": self.passed,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }
        if self.empirical:
            out["empirical"] = True
        if self.note:
            out["note"] = self.note
        if self.extra:
            out["extra"] = dict(self.extra)
        return out


@dataclass
class Battery:
    """A named group of reports; ``H`` is the largest hypothesis constant."""

    name: str
    checks: list
    H: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> list:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> ConditionReport:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self) -> list[str]:
        return [c.name for c in self.checks]

    def to_dict(self) -> dict:
        return {"name": self.name, "checks": [c.to_dict() for c in self.checks], "H": self.H}


def _report(name, profile, start=0, **kw) -> ConditionReport:
    value, where = argmax_interval(profile, start)
    return ConditionReport(name, value, witness=where, **kw)


def _avg_subtree(levels: Sequence[np.ndarray]) -> list[np.ndarray]:
    """``(1/|J|) sum_{I in D(J)} x_I``."""
    return [S * 2.0**j for j, S in enumerate(subtree_sums(levels))]


def _safe_div(num: np.ndarray, den) -> np.ndarray:
    den = np.broadcast_to(np.asarray(den, dtype=float), np.shape(num))
    out = np.zeros(np.shape(num))
    np.divide(num, den, out=out, where=den != 0)
    return out


# ---------------------------------------------------------------------------
# one-weight kernel constants


@dataclass(frozen=True)
class OperatorConstants:
    size: float
    size_plus: float
    size_minus: float
    bmo_T1: float
    bmo_T1star: float
    testing: float

    @property
    def Q(self) -> float:
        return max(self.size / 2.0, self.testing, self.bmo_T1, self.bmo_T1star)

    def to_dict(self) -> dict:
        return {
            "size": self.size,
            "size_plus": self.size_plus,
            "size_minus": self.size_minus,
            "bmo_T1": self.bmo_T1,
            "bmo_T1star": self.bmo_T1star,
            "testing": self.testing,
            "Q": self.Q,
        }


def size_sum_constant(kernel: KernelCoeffs) -> float:
    """``sup_I |K_I^+ + K_I^-| |I|``."""
    return max(float(np.max(np.abs(s))) * l for s, l in zip(kernel.ksum, kernel.lengths))


def operator_constants(kernel: KernelCoeffs) -> OperatorConstants:
    """Size, BMO (squared Carleson reading) and testing constants of ``T``."""
    coeffs = t1_coefficients(kernel)
    sp, sm = kernel.size_profile()
    return OperatorConstants(
        size=size_sum_constant(kernel),
        size_plus=sp,
        size_minus=sm,
        bmo_T1=carleson_constant([c * c for c in coeffs.t1_coeff]),
        bmo_T1star=carleson_constant([c * c for c in coeffs.t1star_coeff]),
        testing=max(float(np.max(np.abs(t))) for t in testing_values(kernel)),
    )


def check_t1_implication(kernel: KernelCoeffs, tol: float = DEFAULT_RTOL) -> ConditionReport:
    """``sup_J (1/|J|) sum_{D(J)} (K+ - K-)^2 |I|^3 <= 16 max(bmo_T1, bmo_T1star)``."""
    coeffs = t1_coefficients(kernel)
    consts = operator_constants(kernel)
    profile = carleson_profile([b * b for b in coeffs.beta])
    return _report(
        "t1_implication",
        profile,
        bound=16.0 * max(consts.bmo_T1, consts.bmo_T1star),
        tol=tol,
        extra={"bmo_T1": consts.bmo_T1, "bmo_T1star": consts.bmo_T1star},
    )


def testing_sum_profile(kernel: KernelCoeffs) -> list[np.ndarray]:
    """``|(1/|J|) sum_{D(J)} (K+ + K-) |I|^2|`` per internal ``J``."""
    return [np.abs(x) for x in _avg_subtree([s * l * l for s, l in zip(kernel.ksum, kernel.lengths)])]


def check_testing_implication(kernel: KernelCoeffs, tol: float = DEFAULT_RTOL) -> ConditionReport:
    """Partial-sum average bounded by ``4 testing + 2 size`` (and hence ``8 Q``)."""
    consts = operator_constants(kernel)
    bound = 4.0 * consts.testing + 2.0 * consts.size
    report = _report("testing_implication", testing_sum_profile(kernel), bound=bound, tol=tol)
    report.extra = {
        "testing": consts.testing,
        "size": consts.size,
        "bound_8Q": 8.0 * consts.Q,
        "pass_8Q": bool(report.constant <= 8.0 * consts.Q * (1 + tol) + 1e-15),
    }
    return report


# ---------------------------------------------------------------------------
# bilinear embedding


def embedding_matrix(a: Sequence[np.ndarray], w: Weight, v: Weight) -> np.ndarray:
    """Matrix of ``(f, g) -> sum_I a_I m_I(f v^1/2) m_I(g w^1/2)`` in L2-orthonormal cell coordinates."""
    depth = w.depth
    n = 2**depth
    common = np.zeros((n, n))
    cells = np.arange(n)
    for j, aj in enumerate(a):
        block = cells >> (depth - j)
        same = block[:, None] == block[None, :]
        common += np.where(same, (np.asarray(aj) * 4.0**j)[block][:, None], 0.0)
    return (np.sqrt(v.values)[:, None] * common * np.sqrt(w.values)[None, :]) / n


def check_bilinear_embedding(a: Sequence[np.ndarray], w: Weight, v: Weight) -> Battery:
    """Measure the three embedding hypotheses and the true bilinear norm ``B``.

    Reports ``B / max(Q27, Q28, Q29)`` as the empirical embedding constant.
    """
    if w.depth != v.depth or len(a) != w.depth:
        raise DomainError("sequence and weights must live on the same tree")
    a = [np.asarray(x, dtype=float) for x in a]
    if any(np.any(x < 0) for x in a):
        raise DomainError("embedding sequence must be nonnegative")
    depth = w.depth
    q27 = _report("embedding_joint", _avg_subtree([x * mw * mv for x, mw, mv in zip(a, w.avg, v.avg)]))
    q28 = _report("embedding_w", _safe_div_levels(_avg_subtree([x * mw for x, mw in zip(a, w.avg)]), w.avg[:depth]), note=INDEX_TYPO)
    q29 = _report("embedding_v", _safe_div_levels(_avg_subtree([x * mv for x, mv in zip(a, v.avg)]), v.avg[:depth]), note=INDEX_TYPO)
    q = max(q27.constant, q28.constant, q29.constant)
    B = l2_norm(DenseOperator(depth, embedding_matrix(a, w, v)))
    checks = [
        q27,
        q28,
        q29,
        ConditionReport("bilinear_norm", B),
        ConditionReport("embedding_ratio", B / q if q > 0 else 0.0),
    ]
    return Battery("bilinear_embedding", checks, H=q)


def _safe_div_levels(num: Sequence[np.ndarray], den: Sequence[np.ndarray]) -> list[np.ndarray]:
    return [_safe_div(n, d) for n, d in zip(num, den)]


# ---------------------------------------------------------------------------
# Carleson lemmas


def check_lemma_be(v: Weight, lam: Sequence[np.ndarray], tol: float = DEFAULT_RTOL) -> Battery:
    """``(1/|J|) sum lam_I / m_I(v^-1) <= 4 Q m_J v`` and its ``A_2`` consequence."""
    lam = [np.asarray(x, dtype=float) for x in lam]
    Q = carleson_constant(lam)
    depth = v.depth
    a2 = a2_constant(v)
    lhs = _avg_subtree([x / mi for x, mi in zip(lam, v.avg_inv)])
    lhs2 = _avg_subtree([x * mv for x, mv in zip(lam, v.avg)])
    main = _report("lemma_be", _safe_div_levels(lhs, [Q * m for m in v.avg[:depth]]), bound=4.0, tol=tol,
                   extra={"carleson": Q})
    cons = _report("lemma_be_a2", _safe_div_levels(lhs2, [Q * a2 * m for m in v.avg[:depth]]), bound=4.0, tol=tol,
                   extra={"carleson": Q, "a2": a2})
    return Battery("lemma_be", [main, cons], H=Q)


def check_littleoo(w: Weight, lam: Sequence[np.ndarray], tol: float = DEFAULT_RTOL) -> Battery:
    """``(1/|J|) sum exp(m_I log w) lam_I <= 4 Q m_J w`` and its ``A_inf`` consequence."""
    lam = [np.asarray(x, dtype=float) for x in lam]
    Q = carleson_constant(lam)
    depth = w.depth
    ainf = ainfty_constant(w)
    lhs = _avg_subtree([x * np.exp(g) for x, g in zip(lam, w.avg_log)])
    lhs2 = _avg_subtree([x * mw for x, mw in zip(lam, w.avg)])
    main = _report("littleoo", _safe_div_levels(lhs, [Q * m for m in w.avg[:depth]]), bound=4.0, tol=tol,
                   extra={"carleson": Q})
    cons = _report("littleoo_ainfty", _safe_div_levels(lhs2, [Q * ainf * m for m in w.avg[:depth]]), bound=4.0,
                   tol=tol, extra={"carleson": Q, "ainfty": ainf}, note=INDEX_TYPO)
    return Battery("littleoo", [main, cons], H=Q)


# ---------------------------------------------------------------------------
# Buckley comparison


def buckley_profiles(w: Weight) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per internal ``J``: entropy side ``m_J(w log w) - m_J w log m_J w`` and square-function side."""
    depth = w.depth
    lhs = [e - a * np.log(a) for e, a in zip(w.avg_wlogw[:depth], w.avg[:depth])]
    terms = [(d / m) ** 2 * m * 2.0**-j for j, (d, m) in enumerate(zip(w.delta, w.avg[:depth]))]
    return [np.maximum(x, 0.0) for x in lhs], _avg_subtree(terms)


def buckley_sides(w: Weight, J: DyadicInterval) -> tuple[float, float]:
    if J.level >= w.depth:
        raise DomainError(f"{J!r} is not internal at depth {w.depth}")
    lhs, rhs = buckley_profiles(w)
    return float(lhs[J.level][J.index]), float(rhs[J.level][J.index])


def buckley_ratios(w: Weight) -> np.ndarray:
    """``lhs / rhs`` over internal intervals where ``rhs > 0``."""
    lhs, rhs = buckley_profiles(w)
    lhs, rhs = np.concatenate(lhs), np.concatenate(rhs)
    keep = rhs > 0
    return lhs[keep] / rhs[keep]


def buckley_constant(w: Weight) -> ConditionReport:
    """``sup_J rhs_J / m_J w``: the normalised square-function side."""
    _, rhs = buckley_profiles(w)
    return _report("buckley_rhs", [r / m for r, m in zip(rhs, w.avg)])


# ---------------------------------------------------------------------------
# two-weight conditions


def _squared_sum_integrals(coeff: Sequence[np.ndarray], weight: np.ndarray) -> list[np.ndarray]:
    """``(1/|J|) int_J (sum_{I in D(J)} c_I chi_I)^2 weight`` for every internal ``J``.

    The inner sum is built bottom-up (finest levels first), so no cancellation occurs.
    """
    depth = len(coeff)
    n = weight.shape[-1]
    partial = np.zeros(n)
    out = [None] * depth
    for j in range(depth - 1, -1, -1):
        partial = partial + np.repeat(coeff[j], n >> j)
        out[j] = (partial * partial * weight).reshape(2**j, -1).mean(axis=1)
    return out


T0_NAMES = ("uv-4", "uv-5")
FULL_NAMES = ("uv-1", "uv-2", "uv-3", "uv-4", "uv-5", "Tuv-1", "Tuv-2", "Tuv-3", "Tuv-4")
REDUCED_NAMES = ("uv-1", "uv-4", "uv-5", "Tuv-3", "Tuv-4")


def condition_profiles(p: WeightPair, kernel: KernelCoeffs) -> dict[str, list[np.ndarray]]:
    """LHS/RHS ratio per interval for all nine two-weight conditions."""
    if p.depth != kernel.depth:
        raise DomainError(f"depth mismatch: {p.depth} != {kernel.depth}")
    depth = p.depth
    u, vi = p.u, p.v_inv
    mu, mv = u.avg[:depth], vi.avg[:depth]
    lengths = kernel.lengths
    du, dv = u.delta, vi.delta
    cross = [np.abs(a * b) for a, b in zip(du, dv)]
    ksum_sq = [np.abs(s) * l * l for s, l in zip(kernel.ksum, lengths)]
    kdiff_cube = [d * d * l**3 for d, l in zip(kernel.kdiff, lengths)]
    return {
        "uv-1": joint_a2_profile(p),
        "uv-2": [x / m for x, m in zip(_avg_subtree([d * d * b * l for d, b, l in zip(du, mv, lengths)]), mu)],
        "uv-3": [x / m for x, m in zip(_avg_subtree([d * d * a * l for d, a, l in zip(dv, mu, lengths)]), mv)],
        "uv-4": [x / m for x, m in zip(_squared_sum_integrals([c / a for c, a in zip(cross, mu)], u.values), mv)],
        "uv-5": [x / m for x, m in zip(_squared_sum_integrals([c / b for c, b in zip(cross, mv)], vi.values), mu)],
        "Tuv-1": [x / m for x, m in zip(_avg_subtree([s * a for s, a in zip(ksum_sq, mu)]), mu)],
        "Tuv-2": [x / m for x, m in zip(_avg_subtree([s * b for s, b in zip(ksum_sq, mv)]), mv)],
        "Tuv-3": [x / m for x, m in zip(_avg_subtree([k / a for k, a in zip(kdiff_cube, mu)]), mv)],
        "Tuv-4": [x / m for x, m in zip(_avg_subtree([k / b for k, b in zip(kdiff_cube, mv)]), mu)],
    }


def condition_value_at(name: str, p: WeightPair, kernel: KernelCoeffs, J: DyadicInterval) -> float:
    """Evaluate one two-weight condition's LHS/RHS at a single ``J`` by explicit summation.

    Independent of :func:`condition_profiles`; used to re-check witnesses.
    """
    tree = DyadicTree(p.depth)
    u, vi = p.u.cells, p.v_inv.cells

    def m(f: CellVector, I: DyadicInterval) -> float:
        return float(f.values[I.cell_slice(f.depth)].mean())

    def d(f: CellVector, I: DyadicInterval) -> float:
        return m(f, I.left) - m(f, I.right)

    if name == "uv-1":
        return m(vi, J) * m(u, J)
    sub = list(tree.subintervals(J))
    if name in ("uv-4", "uv-5"):
        num_w, den_w, out_w = (u, u, vi) if name == "uv-4" else (vi, vi, u)
        s = J.cell_slice(p.depth)
        acc = np.zeros(s.stop - s.start)
        for I in sub:
            c = abs(d(u, I) * d(vi, I) / m(den_w, I))
            t = I.cell_slice(p.depth)
            acc[t.start - s.start : t.stop - s.start] += c
        return float(np.mean(acc * acc * num_w.values[s])) / m(out_w, J)
    total = 0.0
    for I in sub:
        kp, km = kernel.entry(I)
        L = I.length
        if name == "uv-2":
            total += d(u, I) ** 2 * m(vi, I) * L
        elif name == "uv-3":
            total += d(vi, I) ** 2 * m(u, I) * L
        elif name == "Tuv-1":
            total += abs(kp + km) * L * L * m(u, I)
        elif name == "Tuv-2":
            total += abs(kp + km) * L * L * m(vi, I)
        elif name == "Tuv-3":
            total += (kp - km) ** 2 * L**3 / m(u, I)
        elif name == "Tuv-4":
            total += (kp - km) ** 2 * L**3 / m(vi, I)
        else:
            raise DomainError(f"unknown condition {name!r}")
    rhs = {"uv-2": u, "uv-3": vi, "Tuv-1": u, "Tuv-2": vi, "Tuv-3": vi, "Tuv-4": u}[name]
    return total / J.length / m(rhs, J)


def _condition_report(name: str, profile) -> ConditionReport:
    note = INDEX_TYPO if name in ("uv-2", "uv-3") else ""
    return _report(name, profile, note=note)


def two_weight_battery(p: WeightPair, kernel: KernelCoeffs) -> Battery:
    """Smallest constants for all nine sufficient two-weight conditions; ``H`` is their max."""
    profiles = condition_profiles(p, kernel)
    checks = [_condition_report(name, profiles[name]) for name in FULL_NAMES]
    return Battery("two_weight", checks, H=max(c.constant for c in checks))


def two_weight_battery_ainfty(p: WeightPair, kernel: KernelCoeffs, tol: float = DEFAULT_RTOL) -> Battery:
    """Reduced battery for ``A_inf`` weights plus explicit checks of the reduction steps.

    ``H`` is the max over the five reduced conditions.  Hard checks:

    * ``uv-2 <= [v,u]_A2 * sup_J Buckley_u(J)/m_J u`` (and symmetrically ``uv-3``),
    * ``Tuv-1 <= 4 Q_test [u]_Ainf`` and ``Tuv-2 <= 4 Q_test [v^-1]_Ainf``, where
      ``Q_test`` is the Carleson constant of ``|K+ + K-| |I|^2``,
    * the factor-4 lemma bounds for ``u`` and ``v^-1`` with that sequence,
    * ``[w]_RH1 <= log 16 [w]_Ainf`` for both weights.
    """
    profiles = condition_profiles(p, kernel)
    full = {name: _condition_report(name, profiles[name]) for name in FULL_NAMES}
    u, vi = p.u, p.v_inv
    ainf_u, ainf_v = ainfty_constant(u), ainfty_constant(vi)
    rh1_u, rh1_v = rh1_constant(u), rh1_constant(vi)
    joint = full["uv-1"].constant
    buck_u, buck_v = buckley_constant(u), buckley_constant(vi)
    lam = [np.abs(s) * l * l for s, l in zip(kernel.ksum, kernel.lengths)]
    q_test = carleson_constant(lam)

    checks = [full[name] for name in REDUCED_NAMES]
    checks += [
        ConditionReport("ainfty_u", ainf_u),
        ConditionReport("ainfty_v_inv", ainf_v),
        ConditionReport("rh1_u", rh1_u),
        ConditionReport("rh1_v_inv", rh1_v),
        ConditionReport("uv-2_buckley_reduction", full["uv-2"].constant, bound=joint * buck_u.constant,
                        witness=full["uv-2"].witness, tol=tol),
        ConditionReport("uv-3_buckley_reduction", full["uv-3"].constant, bound=joint * buck_v.constant,
                        witness=full["uv-3"].witness, tol=tol),
        ConditionReport("Tuv-1_littleoo_reduction", full["Tuv-1"].constant, bound=4.0 * q_test * ainf_u,
                        witness=full["Tuv-1"].witness, tol=tol, extra={"carleson": q_test}),
        ConditionReport("Tuv-2_littleoo_reduction", full["Tuv-2"].constant, bound=4.0 * q_test * ainf_v,
                        witness=full["Tuv-2"].witness, tol=tol, extra={"carleson": q_test}),
    ]
    for label, w in (("u", u), ("v_inv", vi)):
        for c in check_littleoo(w, lam, tol).checks:
            c.name = f"{c.name}_{label}"
            checks.append(c)
    checks += [
        ConditionReport("rh1_ainfty_u", rh1_u, bound=LOG16 * ainf_u, tol=tol),
        ConditionReport("rh1_ainfty_v_inv", rh1_v, bound=LOG16 * ainf_v, tol=tol),
        ConditionReport("buckley_rh1_ratio_u", buck_u.constant / rh1_u if rh1_u > 0 else 0.0),
        ConditionReport("buckley_rh1_ratio_v_inv", buck_v.constant / rh1_v if rh1_v > 0 else 0.0),
    ]
    H = max(full[name].constant for name in REDUCED_NAMES)
    return Battery("two_weight_ainfty", checks, H=H)


# ---------------------------------------------------------------------------
# T0


def t0_coefficients(p: WeightPair) -> list[np.ndarray]:
    """``|Delta_I(v^-1) Delta_I u / (m_I(v^-1) m_I u)|`` per internal level."""
    depth = p.depth
    return [
        np.abs(dv * du / (mv * mu))
        for dv, du, mv, mu in zip(p.v_inv.delta, p.u.delta, p.v_inv.avg[:depth], p.u.avg[:depth])
    ]


def apply_T0(p: WeightPair, f):
    """``T0 f = sum_I c_I m_I f chi_I`` with the coefficients of :func:`t0_coefficients`."""
    x = values_of(f, p.depth)
    avgs = level_averages(x)
    out = accumulate_down([c * a for c, a in zip(t0_coefficients(p), avgs)])
    return wrap_like(f, out)
