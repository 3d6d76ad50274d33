"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or directly as ``python tests/test_acceptance.py``.
"""
import json
import math
import sys
import time

import numpy as np

from dyadicops import (
    ROOT,
    DyadicTree,
    KernelCoeffs,
    Weight,
    WeightPair,
    check_t1_implication,
    decomposition_residual,
    materialize,
    t1_coefficients,
    testing_value,
    uniform_kernel,
)
from dyadicops.campaigns import (
    ExperimentConfig,
    evaluate_instance,
    load_instance,
    random_carleson_sequence,
    run_experiment,
    trial_rng,
)
from dyadicops.conditions import embedding_matrix
from dyadicops.kernel import direct_t1_coefficients, direct_testing_values, testing_values
from dyadicops.spectral import eig_norm, l2_norm, weighted_matrix
from dyadicops.weights import cascade_weight, lognormal_weight, power_weight

SEED = 20250101
RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
    RESULTS.append(line)
    if __name__ == "__main__":
        print(line, flush=True)


def max_level_error(a, b) -> float:
    return max(float(np.max(np.abs(x - y))) for x, y in zip(a, b))


# ---------------------------------------------------------------------------


def test_criterion_01_decomposition_identity():
    start = time.perf_counter()
    worst = 0.0
    for depth in range(1, 11):
        for trial in range(200):
            rng = trial_rng(SEED, trial, depth, 1)
            K = uniform_kernel(depth, rng)
            f = rng.standard_normal(2**depth)
            worst = max(worst, decomposition_residual(K, f))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and elapsed < 30
    record(1, ok, f"max residual {worst:.2e} <= 1e-10 over 2000 instances, {elapsed:.1f}s < 30s")
    assert ok


def test_criterion_02_adjoint_identity():
    worst = 0.0
    for depth in range(1, 9):
        for trial in range(20):
            K = uniform_kernel(depth, trial_rng(SEED, trial, depth, 2))
            worst = max(worst, float(np.max(np.abs(materialize(K, "Tstar").matrix - materialize(K).matrix.T))))
    ok = worst <= 1e-12
    record(2, ok, f"max |mat(T*) - mat(T)^T| {worst:.2e} <= 1e-12, depths 1-8")
    assert ok


def test_criterion_03_t1_closed_forms():
    worst = 0.0
    for trial in range(100):
        depth = 1 + trial % 10
        K = uniform_kernel(depth, trial_rng(SEED, trial, depth, 3))
        closed = t1_coefficients(K)
        d1, d1s = direct_t1_coefficients(K)
        worst = max(worst, max_level_error(closed.t1_coeff, d1), max_level_error(closed.t1star_coeff, d1s))
    root = t1_coefficients(KernelCoeffs.from_entries(1, {ROOT: (1.0, -1.0)})).at(ROOT)
    ok = worst <= 1e-10 and root["t1"] == 0.5
    record(3, ok, f"closed-form <T(1),h_J>, <T*(1),h_J> error {worst:.2e} <= 1e-10 on 100 kernels")
    assert ok


def test_criterion_04_testing_closed_form():
    worst = 0.0
    for depth in range(1, 11):
        for trial in range(10):
            K = uniform_kernel(depth, trial_rng(SEED, trial, depth, 4))
            worst = max(worst, max_level_error(testing_values(K), direct_testing_values(K)))
    # single-interval route on a mid-sized tree
    K = uniform_kernel(6, trial_rng(SEED, 0, 6, 40))
    for J in DyadicTree(6).internal():
        worst = max(worst, abs(testing_value(K, J) - testing_value(K, J, verify=True)))
    ok = worst <= 1e-10
    record(4, ok, f"testing closed form vs <T h_J, h_J> error {worst:.2e} <= 1e-10, all internal J")
    assert ok


def test_criterion_05_explicit_constant_implications():
    rep = run_experiment(ExperimentConfig(experiment="constants", depths=tuple(range(3, 10)), trials=500, seed=SEED))
    eq = check_t1_implication(KernelCoeffs.from_entries(1, {ROOT: (1.0, -1.0)}))
    gap = abs(eq.constant - eq.bound)
    ok = rep.passed and not rep.violations and gap <= 1e-12
    record(5, ok, f"{len(rep.violations)} violations over 3500 kernels (16Q and 4 testing + 2 size); "
                  f"root equality gap {gap:.1e}")
    assert ok


def test_criterion_06_factor_four_lemmas():
    rep = run_experiment(ExperimentConfig(experiment="lemmas", depths=tuple(range(3, 10)), trials=500, seed=SEED))
    lemma = [v for v in rep.violations if str(v["check"]).startswith(("lemma_be", "littleoo"))]
    util = rep.aggregates["max_bound_utilisation"]
    ok = not lemma and rep.passed
    record(6, ok, f"{len(lemma)} violations over 3500 (weight, sequence) instances; "
                  f"peak lhs/bound lemma_be {util['lemma_be']:.3f}, littleoo {util['littleoo']:.3f}")
    assert ok


def _buckley_raw(w: Weight):
    """Both sides from cell values directly (no clamping), per internal interval."""
    depth, x = w.depth, w.values
    lhs, rhs = [], []
    tree = DyadicTree(depth)
    for J in tree.internal():
        c = x[J.cell_slice(depth)]
        m = c.mean()
        lhs.append(np.mean(c * np.log(c)) - m * math.log(m))
        total = 0.0
        for I in tree.subintervals(J):
            a = x[I.left.cell_slice(depth)].mean()
            b = x[I.right.cell_slice(depth)].mean()
            mi = x[I.cell_slice(depth)].mean()
            total += ((a - b) / mi) ** 2 * mi * I.length
        rhs.append(total / J.length)
    return np.array(lhs), np.array(rhs)


def test_criterion_07_buckley_comparability():
    ends = {}
    for depth in (6, 10):
        rep = run_experiment(ExperimentConfig(experiment="lemmas", depth=depth, trials=200, seed=SEED))
        b = rep.aggregates["buckley"]
        ends[depth] = (b["min"], b["max"])
    # sign check from raw cell sums, independent of the library profiles
    worst_neg = 0.0
    for trial in range(40):
        rng = trial_rng(SEED, trial, 6, 7)
        w = [cascade_weight(6, 0.9, rng), lognormal_weight(6, 2.0, rng), power_weight(6, -0.9)][trial % 3]
        lhs, rhs = _buckley_raw(w)
        scale = float(np.max(w.values))
        worst_neg = min(worst_neg, float(np.min(lhs)) / scale, float(np.min(rhs)))
    finite = all(math.isfinite(v) and v > 0 for e in ends.values() for v in e)
    stable = all(max(a / b, b / a) <= 2.0 for a, b in zip(ends[10], ends[6]))
    ok = finite and stable and worst_neg >= -1e-14
    record(7, ok, f"ratio interval depth 6 [{ends[6][0]:.4f}, {ends[6][1]:.4f}], depth 10 "
                  f"[{ends[10][0]:.4f}, {ends[10][1]:.4f}] within 2x; min side {worst_neg:.1e}")
    assert ok


def test_criterion_08_a2_linearity():
    start = time.perf_counter()
    parts, ok = [], True
    # both generators saturate the size bound: uniform in the range, decay:1 at its edge
    for gen in ("uniform", "decay:1"):
        rep = run_experiment(ExperimentConfig(experiment="a2-linearity", depth=10, trials=5, kernel_gen=gen,
                                              baseline_depth=6, seed=SEED))
        a = rep.aggregates
        ok = ok and math.isfinite(a["empirical_C"]) and a["stability"] <= 1.5 and rep.passed
        parts.append(f"{gen} C {a['baseline']['empirical_C']:.3f} -> {a['empirical_C']:.3f} (x{a['stability']:.2f})")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 180
    record(8, ok, f"empirical C depth 6 -> 10: {'; '.join(parts)}, growth <= 1.5, {elapsed:.1f}s < 180s")
    assert ok


def test_criterion_09_two_weight_stress():
    rep = run_experiment(ExperimentConfig(experiment="counterexample-search", depth=8, trials=1000, seed=SEED))
    max_ratio = rep.aggregates["max_ratio"]
    worst_reload = 0.0
    for entry in rep.aggregates["top"]:
        K, p = load_instance(json.loads(json.dumps(entry["instance"])))
        ev = evaluate_instance(K, p)
        worst_reload = max(worst_reload, abs(ev["ratio"] - entry["ratio"]) / entry["ratio"])
    ainf = run_experiment(ExperimentConfig(experiment="two-weight-ainfty", depth=8, trials=200, seed=SEED))
    ok = (math.isfinite(max_ratio) and len(rep.aggregates["top"]) == 10 and worst_reload <= 1e-12
          and ainf.passed and not ainf.violations)
    record(9, ok, f"max norm/H {max_ratio:.4f} over 1000 trials; top-10 reload error {worst_reload:.1e}; "
                  f"A-infinity reduction violations {len(ainf.violations)}")
    assert ok


def _matrices(depth: int, trial: int):
    rng = trial_rng(SEED, trial, depth, 10)
    K = uniform_kernel(depth, rng)
    u, vi = lognormal_weight(depth, 1.0, rng), cascade_weight(depth, 0.6, rng)
    yield materialize(K).matrix
    yield materialize(K, "Tstar").matrix
    for c in ("T1", "T2", "T3", "T4"):
        yield materialize(K, c).matrix
    yield weighted_matrix(materialize(K), vi, u)
    yield weighted_matrix(materialize(K), u.reciprocal(), u)
    yield materialize(WeightPair(vi, u)).matrix
    lam = random_carleson_sequence(depth, rng)
    yield embedding_matrix(lam, u, vi)


def test_criterion_10_spectral_cross_validation():
    worst, count = 0.0, 0
    for depth in range(1, 9):
        for trial in range(3):
            for A in _matrices(depth, trial):
                p, e = l2_norm(A), eig_norm(A)
                worst = max(worst, abs(p - e) / max(e, 1e-300) if e > 0 else abs(p))
                count += 1
    ok = worst <= 1e-9
    record(10, ok, f"power iteration vs eigendecomposition relative gap {worst:.1e} <= 1e-9 on {count} matrices")
    assert ok


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
