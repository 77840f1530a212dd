"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (see ``conftest.py``) that pytest prints in
its terminal summary, then asserts.  Tolerances are the stated targets;
nothing here is tuned to make a check pass.

Run just this module with ``pytest tests/test_acceptance.py -v``.
"""

import itertools
import time
from math import factorial
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from tsboot.bootstrap import ar1_weighted_bootstrap
from tsboot.estimators import ar1_lad, arch_objective, lad_objective, weighted_median
from tsboot.harness import ExperimentConfig, emit_report, run_experiment
from tsboot.processes import AR1Spec, HeteroAR1Spec, TauSchedule, simulate_ar1, simulate_hetero_ar1
from tsboot.rand_weights import RngStream, WeightScheme, generate_weights, weight_moments
from tsboot.stats import kolmogorov_q, ks_two_sample

CONFIGS = Path(__file__).parents[1] / "experiments"


def load(name, **overrides):
    cfg = ExperimentConfig.from_json(CONFIGS / f"{name}.json").to_dict()
    return ExperimentConfig.from_dict({**cfg, **overrides})


# ---------------------------------------------------------------------------
# 1. weight moments
# ---------------------------------------------------------------------------


def _enumerated_moments(n):
    var = cov = fourth = 0.0
    for bars in itertools.combinations(range(2 * n - 1), n - 1):
        edges = (-1,) + bars + (2 * n - 1,)
        counts = [b - a - 1 for a, b in zip(edges, edges[1:])]
        prob = factorial(n) / np.prod([factorial(c) for c in counts]) / n**n
        d1, d2 = counts[0] - 1.0, counts[1] - 1.0
        var += prob * d1 * d1
        cov += prob * d1 * d2
        fourth += prob * d1**4
    return var, cov, fourth


def test_criterion_01_weight_moments(criterion):
    start = time.perf_counter()
    worst = 0.0
    for n in range(2, 9):
        m = weight_moments(WeightScheme.multinomial(n))
        exact = _enumerated_moments(n)
        worst = max(worst, *(abs(a - b) for a, b in zip((m.var, m.cov, m.fourth_central), exact)))
    rows = generate_weights(RngStream(1), WeightScheme.multinomial(100), rows=10_000)
    m = weight_moments(WeightScheme.multinomial(100))
    d1, d2 = rows[:, 0] - 1, rows[:, 1] - 1
    r = rows.shape[0]
    z = (
        abs(d1.mean()) / np.sqrt(m.var / r),
        abs(np.mean(d1**2) - m.var) / np.sqrt((m.fourth_central - m.var**2) / r),
        abs(np.mean(d1 * d2) - m.cov) / (np.std(d1 * d2) / np.sqrt(r)),
    )
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and max(z) < 4 and elapsed < 10
    criterion(1, "weight-moment exactness", ok, f"max enum err {worst:.1e}, max z {max(z):.2f}, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 2-3. limit laws
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def limit_law():
    start = time.perf_counter()
    report = run_experiment(load("limit_law_check"))
    return report, time.perf_counter() - start


def test_criterion_02_lse_limit_law(criterion, limit_law):
    report, elapsed = limit_law
    var = float(np.var(report.samples["mc_lse"].column(0), ddof=1))
    ok = 0.60 <= var <= 0.90 and elapsed < 30
    criterion(2, "LSE limit law", ok, f"var {var:.4f} in [0.60, 0.90] (target 0.75), {elapsed:.1f}s for lse+lad")


def test_criterion_03_lad_limit_law(criterion, limit_law):
    report, elapsed = limit_law
    var = float(np.var(report.samples["mc_lad"].column(0), ddof=1))
    ok = 0.93 <= var <= 1.45 and elapsed < 60
    criterion(3, "LAD limit law", ok, f"var {var:.4f} in [0.93, 1.45] (target {np.pi * 0.375:.4f}), {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 4-5. weighted bootstrap
# ---------------------------------------------------------------------------


def test_criterion_04_weighted_bootstrap_consistency(criterion):
    start = time.perf_counter()
    passes, pvals = 0, []
    for seed in range(10):
        root = RngStream(seed, (4,))
        x = simulate_ar1(AR1Spec(0.5), 2000, root.child(0))
        s = ar1_weighted_bootstrap(x, WeightScheme.multinomial(1999), 2000, root.child(1))
        ref = np.sqrt(0.75) * root.child(2).generator().standard_normal(2000)
        p = ks_two_sample(s.column(0), ref).p_value
        pvals.append(p)
        passes += p >= 0.01
    elapsed = time.perf_counter() - start
    ok = passes >= 9 and elapsed < 120
    criterion(4, "weighted-bootstrap consistency", ok, f"{passes}/10 seeds pass KS at 1%, min p {min(pvals):.3g}, {elapsed:.1f}s")


def test_criterion_05_two_period_bootstrap_variance(criterion):
    start = time.perf_counter()
    root = RngStream(5, (5,))
    spec = HeteroAR1Spec(0.5, TauSchedule.two_period_variances(1.0, 2.0))
    x = simulate_hetero_ar1(spec, 2000, root.child(0))
    s = ar1_weighted_bootstrap(x, WeightScheme.multinomial(1999), 2000, root.child(1))
    var = float(np.var(s.column(0), ddof=1))
    elapsed = time.perf_counter() - start
    ok = 0.56 <= var <= 0.84 and elapsed < 120
    criterion(5, "two-period bootstrap variance", ok, f"var {var:.4f} in [0.56, 0.84] (target 0.7), {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# 6. heteroscedastic RB vs WB at desk scale
# ---------------------------------------------------------------------------


def _ks_p(report, boot):
    return next(r[4] for r in report.table("ks").rows if r[0] == boot)


def test_criterion_06_hetero_direction(criterion):
    start = time.perf_counter()
    low = [run_experiment(load("hetero_sigma2_2", master_seed=1000 + k)) for k in range(10)]
    high = [run_experiment(load("hetero_sigma2_10", master_seed=2000 + k)) for k in range(10)]
    rb_pass = sum(_ks_p(r, "rb_lse") >= 0.05 for r in low)
    wb_pass = sum(_ks_p(r, "wb_lse") >= 0.05 for r in low)
    rb_med = float(np.median([_ks_p(r, "rb_lse") for r in high]))
    wb_med = float(np.median([_ks_p(r, "wb_lse") for r in high]))
    elapsed = time.perf_counter() - start
    ok = rb_pass >= 6 and wb_pass >= 6 and wb_med > rb_med and elapsed < 300
    detail = (
        f"sigma2^2=2: RB {rb_pass}/10, WB {wb_pass}/10 pass at 5%; "
        f"sigma2^2=10: median p WB {wb_med:.3g} vs RB {rb_med:.3g}; {elapsed:.1f}s"
    )
    criterion(6, "heteroscedastic RB/WB direction", ok, detail)


# ---------------------------------------------------------------------------
# 7. ARCH estimator ordering
# ---------------------------------------------------------------------------


def test_criterion_07_arch_estimator_ordering(criterion):
    start = time.perf_counter()
    report = run_experiment(load("arch_estimator_comparison"))
    elapsed = time.perf_counter() - start
    err = {(r[0], r[1]): r[2] for r in report.table("average_error").rows}
    dists = sorted({d for d, _ in err}, key=["normal", "t3", "t4"].index)
    checks = {
        "normal: ml < lade2": err["normal", "gaussian_nll"] < err["normal", "lade2"],
        "t3: lade2 < ml": err["t3", "lade2"] < err["t3", "gaussian_nll"],
    }
    for d in dists:
        others = [v for (dd, e), v in err.items() if dd == d and e != "lade3"]
        checks[f"{d}: lade3 worst"] = err[d, "lade3"] > max(others)
    ok = all(checks.values()) and elapsed < 600
    table = "; ".join(
        f"{d} " + " ".join(f"{e}={err[d, e]:.3g}" for e in ("gaussian_nll", "lade1", "lade2", "lade3")) for d in dists
    )
    failed = [k for k, v in checks.items() if not v]
    detail = f"{table}; failed: {failed or 'none'}; {elapsed:.0f}s"
    criterion(7, "ARCH estimator ordering", ok, detail)


# ---------------------------------------------------------------------------
# 8. Kolmogorov tail
# ---------------------------------------------------------------------------


def _q_truncated(lam, tol=1e-12):
    total, k = 0.0, 1
    while True:
        term = np.exp(-2.0 * k * k * lam * lam)
        total += (-1) ** (k - 1) * term
        if term < tol:
            return 2.0 * total
        k += 1


def test_criterion_08_ks_p_value_oracle(criterion):
    start = time.perf_counter()
    q1 = kolmogorov_q(1.0)
    grid = np.linspace(0.3, 3.0, 100)
    ours = np.array([kolmogorov_q(v) for v in grid])
    ref = np.array([_q_truncated(v) for v in grid])
    monotone = bool(np.all(np.diff(ours) <= 0))
    dev = float(np.max(np.abs(ours - ref)))
    elapsed = time.perf_counter() - start
    ok = abs(q1 - 0.27000) <= 1e-4 and monotone and dev <= 1e-12 and elapsed < 1
    criterion(8, "KS p-value oracle", ok, f"Q(1)={q1:.6f}, monotone={monotone}, max dev vs series {dev:.1e}")


# ---------------------------------------------------------------------------
# 9. oracle equivalence suites
# ---------------------------------------------------------------------------


def _golden_min(x):
    r = np.abs(x[1:] / np.where(x[:-1] == 0, 1, x[:-1]))
    hi = float(np.max(r)) + 1.0
    return minimize_scalar(lambda t: lad_objective(x, t), bracket=(-hi, 0.0, hi), method="golden", tol=1e-12).fun


def _brute_median(v, w):
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    obj = np.array([np.sum(w * np.abs(v - m)) for m in v])
    return v[np.flatnonzero(obj <= obj.min() + 1e-12 * max(1.0, obj.min()))[0]]


def _double_loop_d(a, b):
    best = 0.0
    for x in list(a) + list(b):
        best = max(best, abs(sum(v <= x for v in a) / len(a) - sum(v <= x for v in b) / len(b)))
    return best


def _loop_objective(params, x, variant):
    c0, b = params[0], params[1:]
    total = 0.0
    for t in range(len(b), len(x)):
        s2 = c0 + sum(b[i] * x[t - 1 - i] ** 2 for i in range(len(b)))
        x2 = x[t] ** 2
        total += {
            "gaussian_nll": lambda: np.log(s2) + x2 / s2,
            "lade1": lambda: abs(x2 / s2 - 1),
            "lade2": lambda: abs(np.log(x2) - np.log(s2)),
            "lade3": lambda: abs(x2 - s2),
        }[variant]()
    return total


def test_criterion_09_oracle_suites(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(9)
    lad_gap = 0.0
    for _ in range(500):
        n = int(rng.integers(3, 201))
        x = simulate_ar1(AR1Spec(rng.uniform(-0.9, 0.9)), n, RngStream(int(rng.integers(2**32)))).values
        lad_gap = max(lad_gap, lad_objective(x, ar1_lad(x).value) - _golden_min(x))
    median_mismatch = 0
    for _ in range(200):
        k = int(rng.integers(1, 30))
        v = np.round(rng.standard_normal(k), 1)
        w = rng.integers(0, 4, k).astype(float)
        w[rng.integers(k)] += 1
        median_mismatch += weighted_median(v, w) != _brute_median(v, w)
    d_dev = 0.0
    for _ in range(200):
        n1, n2 = rng.integers(1, 51, 2)
        a, b = np.round(rng.standard_normal(n1), 1), np.round(rng.standard_normal(n2) + 0.3, 1)
        d_dev = max(d_dev, abs(ks_two_sample(a, b).d_stat - _double_loop_d(a, b)))
    obj_dev = 0.0
    for i in range(100):
        p = int(rng.integers(1, 4))
        params = np.concatenate([[rng.uniform(0.1, 3)], rng.uniform(0, 1, p)])
        x = rng.standard_normal(int(rng.integers(p + 2, 60)))
        variant = ("gaussian_nll", "lade1", "lade2", "lade3")[i % 4]
        ref = _loop_objective(params, x, variant)
        obj_dev = max(obj_dev, abs(arch_objective(params, x, variant) - ref) / max(1.0, abs(ref)))
    elapsed = time.perf_counter() - start
    ok = lad_gap <= 1e-8 and median_mismatch == 0 and d_dev <= 1e-12 and obj_dev <= 1e-12 and elapsed < 60
    detail = (
        f"LAD - golden <= {lad_gap:.1e}, weighted-median mismatches {median_mismatch}, "
        f"KS D dev {d_dev:.1e}, objective rel dev {obj_dev:.1e}, {elapsed:.1f}s"
    )
    criterion(9, "oracle equivalence suites", ok, detail)


# ---------------------------------------------------------------------------
# 10. determinism across worker counts
# ---------------------------------------------------------------------------


def _tree(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(criterion, tmp_path):
    mismatched = []
    configs = sorted(CONFIGS.glob("*.json"))
    for path in configs:
        trees = []
        for workers in (1, 8):
            cfg = ExperimentConfig.from_json(path)
            out = tmp_path / f"{path.stem}-{workers}"
            emit_report(run_experiment(cfg, workers=workers), out)
            trees.append(_tree(out))
        if trees[0] != trees[1]:
            mismatched.append(path.stem)
    ok = bool(configs) and not mismatched
    criterion(10, "determinism across worker counts", ok, f"{len(configs)} configs, mismatched: {mismatched or 'none'}")
