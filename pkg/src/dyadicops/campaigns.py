"""Seeded experiment campaigns and their reports.

Every trial draws from its own counter-based stream keyed on
``(seed, trial, depth, stream)``, so a campaign gives the same bytes whatever
the order or parallelism of evaluation.
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .conditions import (
    DEFAULT_RTOL,
    buckley_ratios,
    check_bilinear_embedding,
    check_lemma_be,
    check_littleoo,
    check_t1_implication,
    check_testing_implication,
    operator_constants,
    two_weight_battery,
    two_weight_battery_ainfty,
)
from .dyadic import DomainError, haar_levels, level_averages
from .kernel import (
    KernelCoeffs,
    apply_T,
    apply_Tstar,
    decay_kernel,
    decomposition_residual,
    direct_t1_coefficients,
    direct_testing_values,
    t1_coefficients,
    testing_values,
    uniform_kernel,
)
from .spectral import materialize, weighted_norm
from .weights import (
    Weight,
    WeightPair,
    a2_constant,
    cascade_weight,
    generate_weight,
    lognormal_weight,
    power_weight,
)

EXPERIMENTS = (
    "decompose-check",
    "constants",
    "a2-linearity",
    "two-weight",
    "two-weight-ainfty",
    "embedding",
    "lemmas",
    "counterexample-search",
)

DEFAULT_ALPHAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)

# pinned thresholds for the identity checks
DECOMPOSITION_TOL = 1e-10
ADJOINT_TOL = 1e-11
TRANSPOSE_TOL = 1e-12
CLOSED_FORM_TOL = 1e-10
TRANSPOSE_MAX_DEPTH = 8


class ConfigError(ValueError):
    """Invalid campaign configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    depth: Optional[int] = None
    trials: int = 10
    seed: int = 0
    kernel_gen: str = "uniform"
    weight_gen: Optional[str] = None
    tol: float = DEFAULT_RTOL
    out: Optional[str] = None
    format: str = "json"
    allow_unnormalized: bool = False
    depths: Optional[tuple] = None
    alphas: tuple = DEFAULT_ALPHAS
    baseline_depth: Optional[int] = None
    growth_factor: float = 1.5
    top: int = 10
    dump_dir: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        for d in self.depth_list + ([self.baseline_depth] if self.baseline_depth else []):
            if not 1 <= d <= 14:
                raise ConfigError(f"depth {d} outside 1..14")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")
        # fail early on malformed generator specs
        parse_kernel_gen(self.kernel_gen, self.allow_unnormalized)
        parse_weight_gen(self.resolved_weight_gen)

    @property
    def resolved_depth(self) -> int:
        if self.depth is not None:
            return self.depth
        return 10 if self.experiment == "a2-linearity" else 8

    @property
    def depth_list(self) -> list[int]:
        return list(self.depths) if self.depths else [self.resolved_depth]

    @property
    def resolved_weight_gen(self) -> str:
        if self.weight_gen is not None:
            return self.weight_gen
        return "mixed" if self.experiment == "lemmas" else "cascade:0.3"

    def echo(self) -> dict:
        out = asdict(self)
        out["depths"] = self.depth_list
        out["depth"] = self.resolved_depth
        out["weight_gen"] = self.resolved_weight_gen
        out["alphas"] = list(self.alphas)
        for key in ("out", "jobs", "format", "dump_dir"):
            out.pop(key)
        return out


@dataclass
class CampaignReport:
    config: dict
    trials: list
    aggregates: dict
    passed: bool
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "trials": self.trials,
            "aggregates": self.aggregates,
            "pass": self.passed,
            "violations": self.violations,
        }

    def to_json(self) -> str:
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=1)

    def to_csv(self) -> str:
        rows = [_flatten(r) for r in self.trials]
        keys = sorted({k for r in rows for k in r})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
        return buf.getvalue()

    def render(self, fmt: str = "json") -> str:
        return self.to_json() if fmt == "json" else self.to_csv()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _flatten(record: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in record.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            if all(not isinstance(x, (dict, list)) for x in v):
                out[key] = json.dumps(_plain(v))
        else:
            out[key] = _plain(v)
    return out


# ---------------------------------------------------------------------------
# randomness and generators


def trial_rng(seed: int, *counter: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, *counter)``."""
    key = [int(seed) & (2**64 - 1)] + [int(c) for c in counter]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _split(text: str) -> tuple[str, Optional[str]]:
    kind, _, arg = text.partition(":")
    return kind, (arg if arg else None)


def parse_kernel_gen(text: str, allow_unnormalized: bool = False) -> Callable[[int, np.random.Generator], KernelCoeffs]:
    kind, arg = _split(text)
    if kind == "uniform" and arg is None:
        return uniform_kernel
    if kind == "decay":
        try:
            c = 1.0 if arg is None else float(arg)
        except ValueError:
            raise ConfigError(f"bad decay constant in {text!r}") from None
        if not abs(c) <= 1.0:
            raise ConfigError(f"decay constant must satisfy |c| <= 1, got {c}")
        return partial(_decay, c=c)
    if kind == "file" and arg:
        return partial(_kernel_file, path=arg, allow_unnormalized=allow_unnormalized)
    raise ConfigError(f"unknown kernel generator {text!r}; use uniform, decay[:C] or file:PATH")


def _decay(depth, rng, c):
    return decay_kernel(depth, rng, c)


def _kernel_file(depth, rng, path, allow_unnormalized):
    K = KernelCoeffs.load(path, allow_unnormalized)
    if K.depth != depth:
        raise DomainError(f"kernel file has depth {K.depth}, expected {depth}")
    return K


def parse_weight_gen(text: str) -> Callable[[int, np.random.Generator], Weight]:
    kind, arg = _split(text)
    try:
        if kind == "constant":
            c = 1.0 if arg is None else float(arg)
            if not c > 0:
                raise ConfigError(f"constant weight must be positive, got {c}")
            return partial(_weight, kind="constant", params={"c": c})
        if kind == "cascade":
            delta = 0.3 if arg is None else float(arg)
            if not 0.0 <= delta < 1.0:
                raise ConfigError(f"cascade bound must lie in [0, 1), got {delta}")
            return partial(_weight, kind="cascade", params={"delta": delta})
        if kind == "power":
            alpha = 0.5 if arg is None else float(arg)
            if not -1.0 < alpha < 1.0:
                raise ConfigError(f"power exponent must lie in (-1, 1), got {alpha}")
            return partial(_weight, kind="power", params={"alpha": alpha})
        if kind == "lognormal":
            sigma = 1.0 if arg is None else float(arg)
            return partial(_weight, kind="lognormal", params={"sigma": sigma})
        if kind == "mixed" and arg is None:
            return mixed_weight
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad weight parameter in {text!r}") from None
    if kind == "file" and arg:
        return partial(_weight, kind="file", params={"path": arg})
    raise ConfigError(
        f"unknown weight generator {text!r}; use constant[:C], cascade:DELTA, power:ALPHA, lognormal:SIGMA, mixed or file:PATH"
    )


def _weight(depth, rng, kind, params):
    return generate_weight(kind, depth, params, rng)


def mixed_weight(depth: int, rng: np.random.Generator) -> Weight:
    """A cascade, power or log-normal weight with randomly drawn parameter."""
    pick = int(rng.integers(3))
    if pick == 0:
        return cascade_weight(depth, float(rng.uniform(0.0, 0.95)), rng)
    if pick == 1:
        return power_weight(depth, float(rng.uniform(-0.95, 0.95)))
    return lognormal_weight(depth, float(rng.uniform(0.1, 3.0)), rng)


def random_carleson_sequence(depth: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Nonnegative sequence on internal intervals drawn from one of several shapes."""
    pick = int(rng.integers(5))
    lengths = [2.0**-j for j in range(depth)]
    if pick == 0:
        # random scale times |I|, sparsified
        return [rng.exponential(size=2**j) * l * (rng.random(2**j) < 0.5) for j, l in enumerate(lengths)]
    if pick == 1:
        # squared Haar coefficients of a random function
        b = rng.standard_normal(2**depth) * np.exp(rng.uniform(-2, 2))
        return [h * h for h in haar_levels(level_averages(b))]
    if pick == 2:
        return [np.full(2**j, l) for j, l in enumerate(lengths)]
    if pick == 3:
        lam = [np.zeros(2**j) for j in range(depth)]
        j = int(rng.integers(depth))
        lam[j][int(rng.integers(2**j))] = float(rng.exponential())
        return lam
    # level-concentrated: all mass on a random band of levels
    lo = int(rng.integers(depth))
    return [np.full(2**j, l) * rng.uniform(0.0, 2.0) if j >= lo else np.zeros(2**j) for j, l in enumerate(lengths)]


# ---------------------------------------------------------------------------
# helpers


def _map(fn, items, jobs: int) -> list:
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _kernel(config: ExperimentConfig, depth: int, rng) -> KernelCoeffs:
    K = parse_kernel_gen(config.kernel_gen, config.allow_unnormalized)(depth, rng)
    return K.validate(config.allow_unnormalized)


def _weight_from(config: ExperimentConfig, depth: int, rng) -> Weight:
    return parse_weight_gen(config.resolved_weight_gen)(depth, rng)


def _collect(records: list[dict]) -> list[dict]:
    out = []
    for r in records:
        for v in r.get("violations", []):
            out.append({"trial": r.get("trial"), "depth": r.get("depth"), "check": v})
    return out


def _max(records, key):
    vals = [r[key] for r in records if r.get(key) is not None]
    return max(vals) if vals else None


# ---------------------------------------------------------------------------
# decompose-check


def _decompose_trial(config: ExperimentConfig, job: tuple[int, int]) -> dict:
    depth, t = job
    rng = trial_rng(config.seed, t, depth, 0)
    K = _kernel(config, depth, rng)
    n = 2**depth
    f = rng.standard_normal(n)
    g = rng.standard_normal(n)
    residual = decomposition_residual(K, f)
    adjoint = abs(np.dot(apply_T(K, f), g) - np.dot(f, apply_Tstar(K, g))) / n
    coeffs = t1_coefficients(K)
    d1, d1s = direct_t1_coefficients(K)
    t1_err = max(
        max(float(np.max(np.abs(a - b))) for a, b in zip(coeffs.t1_coeff, d1)),
        max(float(np.max(np.abs(a - b))) for a, b in zip(coeffs.t1star_coeff, d1s)),
    )
    test_err = max(float(np.max(np.abs(a - b))) for a, b in zip(testing_values(K), direct_testing_values(K)))
    rec = {
        "trial": t,
        "depth": depth,
        "residual": residual,
        "adjoint_error": adjoint,
        "t1_error": t1_err,
        "testing_error": test_err,
    }
    limits = {
        "residual": DECOMPOSITION_TOL,
        "adjoint_error": ADJOINT_TOL,
        "t1_error": CLOSED_FORM_TOL,
        "testing_error": CLOSED_FORM_TOL,
    }
    if depth <= TRANSPOSE_MAX_DEPTH:
        rec["transpose_error"] = float(np.max(np.abs(materialize(K, "Tstar").matrix - materialize(K).matrix.T)))
        limits["transpose_error"] = TRANSPOSE_TOL
    rec["violations"] = [k for k, lim in limits.items() if not rec[k] <= lim]
    return rec


def run_decompose_check(config: ExperimentConfig) -> CampaignReport:
    jobs = [(d, t) for d in config.depth_list for t in range(config.trials)]
    records = _map(partial(_decompose_trial, config), jobs, config.jobs)
    keys = ("residual", "adjoint_error", "t1_error", "testing_error", "transpose_error")
    aggregates = {f"max_{k}": _max(records, k) for k in keys}
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


# ---------------------------------------------------------------------------
# constants


def _constants_trial(config: ExperimentConfig, job: tuple[int, int]) -> dict:
    depth, t = job
    K = _kernel(config, depth, trial_rng(config.seed, t, depth, 0))
    consts = operator_constants(K)
    t1 = check_t1_implication(K, config.tol)
    test = check_testing_implication(K, config.tol)
    return {
        "trial": t,
        "depth": depth,
        "constants": consts.to_dict(),
        "t1_implication": t1.to_dict(),
        "testing_implication": test.to_dict(),
        "t1_ratio": t1.constant / t1.bound if t1.bound else 0.0,
        "testing_ratio": test.constant / test.bound if test.bound else 0.0,
        "violations": [c.name for c in (t1, test) if not c.passed],
    }


def run_constants(config: ExperimentConfig) -> CampaignReport:
    jobs = [(d, t) for d in config.depth_list for t in range(config.trials)]
    records = _map(partial(_constants_trial, config), jobs, config.jobs)
    aggregates = {
        "max_t1_ratio": _max(records, "t1_ratio"),
        "max_testing_ratio": _max(records, "testing_ratio"),
        "max_Q": max(r["constants"]["Q"] for r in records),
    }
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


# ---------------------------------------------------------------------------
# A2 linearity


def _linearity_trial(config: ExperimentConfig, depth: int, t: int) -> list[dict]:
    K = _kernel(config, depth, trial_rng(config.seed, t, depth, 0))
    Q = operator_constants(K).Q
    M = materialize(K)
    rows = []
    for alpha in config.alphas:
        w = power_weight(depth, alpha)
        a2 = a2_constant(w)
        norm = weighted_norm(M, w.reciprocal(), w)
        rows.append({
            "trial": t,
            "depth": depth,
            "alpha": alpha,
            "a2": a2,
            "Q": Q,
            "norm": norm,
            "ratio": norm / (Q * a2) if Q > 0 else 0.0,
        })
    return rows


def _linearity_table(config: ExperimentConfig, depth: int) -> tuple[list[dict], dict]:
    per_trial = _map(partial(_linearity_trial, config, depth), range(config.trials), config.jobs)
    rows = [r for rs in per_trial for r in rs]
    x = np.array([r["Q"] * r["a2"] for r in rows])
    y = np.array([r["norm"] for r in rows])
    slope = float(np.polyfit(x, y, 1)[0]) if len(rows) > 1 and np.ptp(x) > 0 else None
    growth = []
    for rs in per_trial:
        ordered = sorted(rs, key=lambda r: r["a2"])
        if ordered[0]["ratio"] > 0:
            growth.append(ordered[-1]["ratio"] / ordered[0]["ratio"])
    agg = {
        "empirical_C": max(r["ratio"] for r in rows),
        "slope": slope,
        "max_family_growth": max(growth) if growth else None,
        "superlinear": bool(growth and max(growth) > config.growth_factor),
    }
    return rows, agg


def run_a2_linearity(config: ExperimentConfig) -> CampaignReport:
    depth = config.resolved_depth
    rows, agg = _linearity_table(config, depth)
    aggregates = {"depth": depth, **agg}
    passed = math.isfinite(agg["empirical_C"])
    if config.baseline_depth:
        _, base = _linearity_table(config, config.baseline_depth)
        stability = agg["empirical_C"] / base["empirical_C"] if base["empirical_C"] > 0 else None
        aggregates["baseline"] = {"depth": config.baseline_depth, **base}
        aggregates["stability"] = stability
        aggregates["stable"] = stability is not None and stability <= config.growth_factor
        passed = passed and aggregates["stable"]
    return CampaignReport(config.echo(), rows, aggregates, passed)


# ---------------------------------------------------------------------------
# two-weight experiments


def make_instance(config: ExperimentConfig, depth: int, t: int) -> tuple[KernelCoeffs, WeightPair]:
    K = _kernel(config, depth, trial_rng(config.seed, t, depth, 0))
    u = _weight_from(config, depth, trial_rng(config.seed, t, depth, 1))
    v_inv = _weight_from(config, depth, trial_rng(config.seed, t, depth, 2))
    return K, WeightPair(v_inv, u)


def instance_dump(K: KernelCoeffs, p: WeightPair) -> dict:
    return {"kernel": K.to_dict(), "u": p.u.to_dict(), "v_inv": p.v_inv.to_dict()}


def load_instance(dump: dict, allow_unnormalized: bool = True) -> tuple[KernelCoeffs, WeightPair]:
    K = KernelCoeffs.from_dict(dump["kernel"], allow_unnormalized)
    return K, WeightPair(Weight.from_dict(dump["v_inv"]), Weight.from_dict(dump["u"]))


def evaluate_instance(K: KernelCoeffs, p: WeightPair) -> dict:
    """Full battery constant ``H``, the ``L2(v) -> L2(u)`` norm and their ratio."""
    battery = two_weight_battery(p, K)
    norm = weighted_norm(K, p.v_inv, p.u)
    return {"H": battery.H, "norm": norm, "ratio": norm / battery.H if battery.H > 0 else 0.0, "battery": battery}


def _two_weight_trial(config: ExperimentConfig, depth: int, t: int) -> dict:
    K, p = make_instance(config, depth, t)
    ev = evaluate_instance(K, p)
    return {
        "trial": t,
        "depth": depth,
        "H": ev["H"],
        "norm": ev["norm"],
        "ratio": ev["ratio"],
        "battery": ev["battery"].to_dict(),
        "violations": [] if math.isfinite(ev["ratio"]) else ["non-finite ratio"],
    }


def run_two_weight(config: ExperimentConfig) -> CampaignReport:
    depth = config.resolved_depth
    records = _map(partial(_two_weight_trial, config, depth), range(config.trials), config.jobs)
    aggregates = {"max_ratio": _max(records, "ratio"), "max_H": _max(records, "H"), "max_norm": _max(records, "norm")}
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


def _ainfty_trial(config: ExperimentConfig, depth: int, t: int) -> dict:
    K, p = make_instance(config, depth, t)
    reduced = two_weight_battery_ainfty(p, K, config.tol)
    full = two_weight_battery(p, K)
    norm = weighted_norm(K, p.v_inv, p.u)
    return {
        "trial": t,
        "depth": depth,
        "H_reduced": reduced.H,
        "H_full": full.H,
        "norm": norm,
        "ratio_reduced": norm / reduced.H if reduced.H > 0 else 0.0,
        "battery": reduced.to_dict(),
        "violations": [c.name for c in reduced.violations],
    }


def run_two_weight_ainfty(config: ExperimentConfig) -> CampaignReport:
    depth = config.resolved_depth
    records = _map(partial(_ainfty_trial, config, depth), range(config.trials), config.jobs)
    worst = {}
    for r in records:
        for c in r["battery"]["checks"]:
            if c["bound"]:
                worst[c["name"]] = max(worst.get(c["name"], 0.0), c["constant"] / c["bound"])
    aggregates = {
        "max_ratio_reduced": _max(records, "ratio_reduced"),
        "max_H_reduced": _max(records, "H_reduced"),
        "max_bound_utilisation": worst,
    }
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


# ---------------------------------------------------------------------------
# embedding


def _embedding_trial(config: ExperimentConfig, depth: int, t: int) -> dict:
    K = _kernel(config, depth, trial_rng(config.seed, t, depth, 0))
    a = [np.abs(s) * l * l for s, l in zip(K.ksum, K.lengths)]
    w = _weight_from(config, depth, trial_rng(config.seed, t, depth, 1))
    v = w.reciprocal() if t % 2 == 0 else _weight_from(config, depth, trial_rng(config.seed, t, depth, 2))
    battery = check_bilinear_embedding(a, w, v)
    return {
        "trial": t,
        "depth": depth,
        "v_is_w_inverse": t % 2 == 0,
        "H": battery.H,
        "B": battery["bilinear_norm"].constant,
        "C": battery["embedding_ratio"].constant,
        "battery": battery.to_dict(),
        "violations": [] if math.isfinite(battery["embedding_ratio"].constant) else ["non-finite ratio"],
    }


def run_embedding(config: ExperimentConfig) -> CampaignReport:
    depth = config.resolved_depth
    records = _map(partial(_embedding_trial, config, depth), range(config.trials), config.jobs)
    aggregates = {"empirical_C": _max(records, "C"), "max_H": _max(records, "H")}
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


# ---------------------------------------------------------------------------
# lemma suite


def _lemma_trial(config: ExperimentConfig, job: tuple[int, int]) -> tuple[dict, np.ndarray]:
    depth, t = job
    w = _weight_from(config, depth, trial_rng(config.seed, t, depth, 1))
    lam = random_carleson_sequence(depth, trial_rng(config.seed, t, depth, 3))
    K = _kernel(config, depth, trial_rng(config.seed, t, depth, 0))
    reports = check_lemma_be(w, lam, config.tol).checks + check_littleoo(w, lam, config.tol).checks
    reports += [check_t1_implication(K, config.tol), check_testing_implication(K, config.tol)]
    ratios = buckley_ratios(w)
    rec = {
        "trial": t,
        "depth": depth,
        "checks": {c.name: c.constant / c.bound if c.bound else 0.0 for c in reports},
        "buckley_min": float(ratios.min()) if ratios.size else None,
        "buckley_max": float(ratios.max()) if ratios.size else None,
        "violations": [c.name for c in reports if not c.passed],
    }
    if rec["violations"]:
        rec["dump"] = {
            "weight": w.to_dict(),
            "lambda": [x.tolist() for x in lam],
            "kernel": K.to_dict(),
        }
    return rec, ratios


def run_lemma_suite(config: ExperimentConfig) -> CampaignReport:
    jobs = [(d, t) for d in config.depth_list for t in range(config.trials)]
    out = _map(partial(_lemma_trial, config), jobs, config.jobs)
    records = [r for r, _ in out]
    ratios = np.concatenate([x for _, x in out]) if out else np.zeros(0)
    worst = {}
    for r in records:
        for k, v in r["checks"].items():
            worst[k] = max(worst.get(k, 0.0), v)
    per_depth = {}
    for d in config.depth_list:
        sel = [x for (r, x) in out if r["depth"] == d and x.size]
        if sel:
            cat = np.concatenate(sel)
            per_depth[str(d)] = {"min": float(cat.min()), "max": float(cat.max()), "median": float(np.median(cat))}
    buckley = {}
    if ratios.size:
        counts, edges = np.histogram(ratios, bins=20)
        buckley = {
            "min": float(ratios.min()),
            "max": float(ratios.max()),
            "median": float(np.median(ratios)),
            "histogram": {"counts": counts.tolist(), "edges": edges.tolist()},
            "per_depth": per_depth,
        }
    nonneg = all(r["buckley_min"] is None or r["buckley_min"] >= 0 for r in records)
    violations = _collect(records)
    if not nonneg:
        violations.append({"trial": None, "depth": None, "check": "buckley_negative_side"})
    aggregates = {"max_bound_utilisation": worst, "buckley": buckley}
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


# ---------------------------------------------------------------------------
# counterexample search


def _search_trial(config: ExperimentConfig, depth: int, t: int) -> dict:
    K, p = make_instance(config, depth, t)
    ev = evaluate_instance(K, p)
    worst = max(ev["battery"].checks, key=lambda c: c.constant)
    return {
        "trial": t,
        "depth": depth,
        "H": ev["H"],
        "norm": ev["norm"],
        "ratio": ev["ratio"],
        "dominant_condition": worst.name,
        "violations": [] if math.isfinite(ev["ratio"]) else ["non-finite ratio"],
    }


def _search(config: ExperimentConfig, depth: int) -> tuple[list[dict], list[dict]]:
    records = _map(partial(_search_trial, config, depth), range(config.trials), config.jobs)
    ranked = sorted(records, key=lambda r: (-r["ratio"], r["trial"]))[: config.top]
    top = []
    for r in ranked:
        K, p = make_instance(config, depth, r["trial"])
        top.append({"trial": r["trial"], "ratio": r["ratio"], "H": r["H"], "norm": r["norm"],
                    "instance": instance_dump(K, p)})
    return records, top


def run_counterexample_search(config: ExperimentConfig) -> CampaignReport:
    depth = config.resolved_depth
    records, top = _search(config, depth)
    aggregates = {"max_ratio": max(r["ratio"] for r in records), "top": top}
    if config.baseline_depth:
        base_records, _ = _search(config, config.baseline_depth)
        base_max = max(r["ratio"] for r in base_records)
        aggregates["baseline"] = {"depth": config.baseline_depth, "max_ratio": base_max}
        aggregates["growth"] = aggregates["max_ratio"] / base_max if base_max > 0 else None
    if config.dump_dir:
        dump_dir = Path(config.dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        for entry in top:
            stem = dump_dir / f"trial{entry['trial']:05d}"
            inst = entry["instance"]
            for part in ("kernel", "u", "v_inv"):
                Path(f"{stem}_{part}.json").write_text(json.dumps(inst[part]))
    violations = _collect(records)
    return CampaignReport(config.echo(), records, aggregates, not violations, violations)


RUNNERS = {
    "decompose-check": run_decompose_check,
    "constants": run_constants,
    "a2-linearity": run_a2_linearity,
    "two-weight": run_two_weight,
    "two-weight-ainfty": run_two_weight_ainfty,
    "embedding": run_embedding,
    "lemmas": run_lemma_suite,
    "counterexample-search": run_counterexample_search,
}


def run_experiment(config: ExperimentConfig) -> CampaignReport:
    return RUNNERS[config.experiment](config)
