"""The five experiment protocols.

Every random draw comes from ``RngStream(master_seed, (experiment_code,))``:

    child(0, ..., r)   Monte-Carlo replicate r (fresh series, all estimators)
    child(1)           the one fixed series the bootstraps condition on
    child(2, k)        bootstrap engine k (fixed code per engine, see _BOOT_CODES)
    child(3, j)        reference normal draws for limit-law checks
    child(4, k, b)     fresh series for replicate b with --fresh-series-per-replicate

Monte-Carlo series and the fixed bootstrap series come from independent streams.
"""

from __future__ import annotations

import logging
import time

import numpy as np

from .. import __version__
from ..bootstrap import (
    BootstrapError,
    PivotSample,
    ar1_residual_bootstrap,
    ar1_weighted_bootstrap,
    ar1_weighted_lad_bootstrap,
    arch_mn_residual_bootstrap,
    arch_param_names,
    arch_weighted_bootstrap,
)
from ..estimators import ar1_lad, ar1_lse, ar1_wlad, ar1_wlse, arch_fit, asymptotic_variance, tau_hat
from ..parallel import ordered_map
from ..processes import AR1Spec, ArchSpec, HeteroAR1Spec, simulate_ar1, simulate_arch, simulate_hetero_ar1
from ..rand_weights import ErrorDist, RngStream
from ..stats import kde_gaussian, ks_two_sample, moment_summary
from .config import EXPERIMENTS, ExperimentConfig
from .report import ExperimentReport, Table

log = logging.getLogger(__name__)

C1_FLOOR = 1e-6

_BOOT_CODES = {
    "rb_lse": 0,
    "wb_lse": 1,
    "wb_lad": 2,
    "rb_gaussian_nll": 3,
    "mn_rb_gaussian_nll": 4,
    "wb_gaussian_nll": 5,
    "wb_lade2": 6,
}
_DIST_CODES = {"standard_normal": 0, "student_t_standardized": 1, "double_exponential_unit": 2}


class ExperimentError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# average absolute error of c0/c1
# ---------------------------------------------------------------------------


def ratio_errors(estimates, truth) -> tuple[np.ndarray, int]:
    """|c0_hat/c1_hat - c0/c1| per replicate, and how many were excluded for c1_hat < 1e-6."""
    est = np.atleast_2d(np.asarray(estimates, dtype=float))
    c0, c1 = float(truth[0]), float(truth[1])
    if c1 == 0:
        raise ValueError("true c1 must be non-zero")
    keep = est[:, 1] >= C1_FLOOR
    err = np.abs(est[keep, 0] / est[keep, 1] - c0 / c1)
    return err, int(np.sum(~keep))


def average_absolute_error(estimates, truth) -> float:
    """Mean of |c0_hat/c1_hat - c0/c1| over replicates with c1_hat >= 1e-6."""
    err, excluded = ratio_errors(estimates, truth)
    if err.size == 0:
        raise ValueError(f"all {excluded} replicates have c1_hat < {C1_FLOOR}; average error undefined")
    return float(err.mean())


# ---------------------------------------------------------------------------
# replicate tasks (module level so a process pool can pickle them)
# ---------------------------------------------------------------------------


def _simulate(spec, n, stream):
    if isinstance(spec, AR1Spec):
        return simulate_ar1(spec, n, stream)
    if isinstance(spec, HeteroAR1Spec):
        return simulate_hetero_ar1(spec, n, stream)
    return simulate_arch(spec, n, stream)


def _tau_lagged(spec, n):
    if isinstance(spec, HeteroAR1Spec):
        return spec.schedule.taus(n)[1:]
    return np.full(n - 1, spec.sigma if spec.sigma > 0 else 1.0)


def _ar_estimate(name, series, spec):
    if name == "lse":
        return ar1_lse(series).value
    if name == "lad":
        return ar1_lad(series).value
    tau = _tau_lagged(spec, series.n)
    return (ar1_wlse if name == "wlse" else ar1_wlad)(series, tau).value


def _ar_mc_task(task):
    spec, n, estimators, stream, r = task
    try:
        x = _simulate(spec, n, stream)
        return [_ar_estimate(e, x, spec) for e in estimators]
    except (ValueError, RuntimeError) as exc:
        raise ExperimentError(f"Monte-Carlo replicate {r}: {exc}") from exc


def _arch_mc_task(task):
    spec, n, variants, stream, r, studentize = task
    try:
        x = _simulate(spec, n, stream.child(0))
        out = []
        for j, v in enumerate(variants):
            fit = arch_fit(x, spec.p, v, stream=stream.child(1, j))
            tau = tau_hat(fit.estimate, x) if (studentize and v == "gaussian_nll") else np.nan
            out.append((fit.estimate, tau))
        return out
    except (ValueError, RuntimeError) as exc:
        raise ExperimentError(f"Monte-Carlo replicate {r}: {exc}") from exc


# ---------------------------------------------------------------------------
# shared reporting steps
# ---------------------------------------------------------------------------


def _mc_sample(values, n, truth, params, meta) -> PivotSample:
    draws = np.sqrt(n) * (np.asarray(values, dtype=float) - np.asarray(truth, dtype=float))
    return PivotSample(draws, "monte_carlo", "sqrt(n)(estimate - truth)", params, meta)


def _record(report: ExperimentReport, label: str, sample: PivotSample) -> None:
    report.samples[label] = sample
    for key in ("rejected", "dropped"):
        if sample.meta.get(key):
            what = "rejected_weight_rows" if key == "rejected" else "dropped_replicates"
            report.exclusions[f"{label}.{what}"] = int(sample.meta[key])
    if len(sample) == 1:
        report.warnings.append(f"{label}: single-draw sample; summaries, densities and KS are degenerate")


def _ks_table(report: ExperimentReport, pairs) -> Table:
    t = Table("ks", ("bootstrap", "reference", "param", "d_stat", "p_value", "n1", "n2", "pass_5pct"))
    for boot, ref in pairs:
        a, b = report.samples[boot], report.samples[ref]
        for param in a.params:
            k = ks_two_sample(a.column(param), b.column(param))
            t.add(boot, ref, param, k.d_stat, k.p_value, k.n1, k.n2, k.p_value >= 0.05)
    return t


def _summaries(report: ExperimentReport, grid_size: int) -> Table:
    t = Table("summary", ("sample", "param", "draws", "mean", "var", "skew", "kurt", "q025", "q50", "q975"))
    for label in sorted(report.samples):
        s = report.samples[label]
        for param in s.params:
            col = s.column(param)
            if col.size < 2:
                continue
            ms = moment_summary(col)
            t.add(label, param, col.size, ms.mean, ms.var, ms.skew, ms.kurt, ms.q025, ms.q50, ms.q975)
            if ms.var > 0:
                report.densities[f"{label}_{param}"] = kde_gaussian(col, grid_size)
            else:
                report.warnings.append(f"{label}/{param}: zero-variance sample, density skipped")
    return t


def _bootstrap(engine, fixed_series, cfg: ExperimentConfig, code: int, root: RngStream) -> PivotSample:
    """Run ``engine(series, B, stream)`` on the fixed series, or one draw per fresh series."""
    stream = root.child(2, code)
    if not cfg.fresh_series_per_replicate:
        return engine(fixed_series, cfg.B, stream)
    parts, dropped, rejected = [], 0, 0
    for b in range(cfg.B):
        x = _simulate(cfg.spec, cfg.n, root.child(4, code, b))
        try:
            s = engine(x, 1, stream.child(b))
        except BootstrapError:
            dropped += 1
            continue
        parts.append(s)
        rejected += s.meta.get("rejected", 0)
        dropped += s.meta.get("dropped", 0)
    if not parts or dropped > 0.05 * cfg.B:
        raise BootstrapError(f"{dropped} of {cfg.B} fresh-series replicates failed")
    first = parts[0]
    meta = dict(first.meta, B=cfg.B, fresh_series=True, rejected=rejected, dropped=dropped)
    meta.pop("theta_hat", None)
    return PivotSample(np.vstack([p.draws for p in parts]), first.kind, first.pivot_def, first.params, meta)


# ---------------------------------------------------------------------------
# protocols
# ---------------------------------------------------------------------------


def _ar_comparison(cfg: ExperimentConfig, root: RngStream, report: ExperimentReport, workers: int) -> None:
    spec, n = cfg.spec, cfg.n
    theta = spec.theta
    tasks = [(spec, n, cfg.estimators, root.child(0, r), r) for r in range(cfg.mc_replicates)]
    est = np.array(ordered_map(_ar_mc_task, tasks, workers))
    for j, e in enumerate(cfg.estimators):
        _record(report, f"mc_{e}", _mc_sample(est[:, j], n, theta, ("theta",), {"n": n, "replicates": len(est)}))

    fixed = _simulate(spec, n, root.child(1))
    pairs = []
    if "rb" in cfg.bootstraps and "lse" in cfg.estimators:
        _record(report, "rb_lse", _bootstrap(ar1_residual_bootstrap, fixed, cfg, _BOOT_CODES["rb_lse"], root))
        pairs.append(("rb_lse", "mc_lse"))
    if "wb" in cfg.bootstraps:
        scheme = cfg.scheme(n - 1)
        engines = {"lse": ar1_weighted_bootstrap, "lad": ar1_weighted_lad_bootstrap}
        for e in cfg.estimators:
            label = f"wb_{e}"
            eng = engines[e]
            s = _bootstrap(lambda x, B, st, eng=eng: eng(x, scheme, B, st), fixed, cfg, _BOOT_CODES[label], root)
            _record(report, label, s)
            pairs.append((label, f"mc_{e}"))
    report.tables.append(_ks_table(report, pairs))

    limits = Table("limits", ("pivot", "limit_variance", "law"))
    err = spec.error
    if isinstance(spec, AR1Spec):
        for e in cfg.estimators:
            law = asymptotic_variance(e, theta=theta, error=err)
            limits.add(f"mc_{e}", law.variance, law.source)
            if f"wb_{e}" in report.samples:
                wl = asymptotic_variance(f"wb_{e}", theta=theta, error=err)
                limits.add(f"wb_{e}", wl.variance, wl.source)
        if "rb_lse" in report.samples:
            limits.add("rb_lse", 1.0 - theta**2, "lse limit N(0, 1 - theta^2)")
    elif theta != 0 and "lse" in cfg.estimators:
        law = asymptotic_variance("lse_hetero", theta=theta, schedule=spec.schedule)
        limits.add("mc_lse", law.variance, law.source)
        if "rb_lse" in report.samples:
            # pooled residuals are iid, so the residual bootstrap targets the homoscedastic law
            limits.add("rb_lse", 1.0 - theta**2, "homoscedastic lse limit (pooled residuals)")
        if "wb_lse" in report.samples and spec.schedule.kind == "two_period":
            wl = asymptotic_variance("wb_two_period", theta=theta, schedule=spec.schedule)
            limits.add("wb_lse", wl.variance, wl.source)
    if limits.rows:
        report.tables.append(limits)


def _limit_law(cfg: ExperimentConfig, root: RngStream, report: ExperimentReport, workers: int) -> None:
    spec, n = cfg.spec, cfg.n
    tasks = [(spec, n, cfg.estimators, root.child(0, r), r) for r in range(cfg.mc_replicates)]
    est = np.array(ordered_map(_ar_mc_task, tasks, workers))
    table = Table("limit_law", ("estimator", "mc_var", "limit_var", "ratio", "d_stat", "p_value"))
    pairs = []
    hetero = isinstance(spec, HeteroAR1Spec)
    for j, e in enumerate(cfg.estimators):
        label = f"mc_{e}"
        s = _mc_sample(est[:, j], n, spec.theta, ("theta",), {"n": n, "replicates": len(est)})
        _record(report, label, s)
        if hetero:
            model = {"lse": "lse_hetero", "wlse": "wlse_hetero"}[e]
            law = asymptotic_variance(model, theta=spec.theta, schedule=spec.schedule)
        else:
            law = asymptotic_variance({"wlse": "lse", "wlad": "lad"}.get(e, e), theta=spec.theta, error=spec.error)
        ref = np.sqrt(law.variance) * root.child(3, j).generator().standard_normal(cfg.mc_replicates)
        ref_label = f"reference_{e}"
        report.samples[ref_label] = PivotSample(
            ref, "reference_normal", f"N(0, {law.variance:.6g}) draws", ("theta",), {"law": law.source}
        )
        col = s.column(0)
        mc_var = float(np.var(col, ddof=1)) if col.size > 1 else float("nan")
        k = ks_two_sample(col, ref)
        table.add(e, mc_var, law.variance, mc_var / law.variance, k.d_stat, k.p_value)
        pairs.append((label, ref_label))
    report.tables.append(table)
    report.tables.append(_ks_table(report, pairs))


def _arch_comparison(cfg: ExperimentConfig, root: RngStream, report: ExperimentReport, workers: int) -> None:
    base = cfg.spec
    if base.p != 1:
        raise ExperimentError("the c0/c1 error table needs an ARCH(1) model")
    truth = (base.c0, base.b[0])
    table = Table("average_error", ("error_dist", "estimator", "average_error", "included", "excluded"))
    for dist_name in cfg.error_dists:
        dist = ErrorDist.parse(dist_name)
        spec = ArchSpec(base.c0, base.b, dist)
        code = (_DIST_CODES[dist.kind], dist.df or 0)
        tasks = [
            (spec, cfg.n, cfg.estimators, root.child(0, *code, r), r, False) for r in range(cfg.mc_replicates)
        ]
        results = ordered_map(_arch_mc_task, tasks, workers)
        est_table = Table(dist.label, ("replicate", "estimator", "c0", "b1"))
        for j, v in enumerate(cfg.estimators):
            ests = np.array([res[j][0] for res in results])
            for r, row in enumerate(ests):
                est_table.add(r, v, float(row[0]), float(row[1]))
            err, excluded = ratio_errors(ests, truth)
            if err.size == 0:
                raise ExperimentError(f"{dist.label}/{v}: every replicate has c1_hat < {C1_FLOOR}")
            if excluded:
                report.exclusions[f"{dist.label}.{v}.c1_below_1e-6"] = excluded
            table.add(dist.label, v, float(err.mean()), err.size, excluded)
        report.estimates[dist.label] = est_table
    report.tables.append(table)
    if cfg.mc_replicates == 1:
        report.warnings.append("mc_replicates = 1: each average error is a single replicate")


def _arch_consistency(cfg: ExperimentConfig, root: RngStream, report: ExperimentReport, workers: int) -> None:
    spec, n, p = cfg.spec, cfg.n, cfg.spec.p
    params = arch_param_names(p)
    studentize = bool({"rb", "mn_rb"} & set(cfg.bootstraps)) and "gaussian_nll" in cfg.estimators
    tasks = [(spec, n, cfg.estimators, root.child(0, r), r, studentize) for r in range(cfg.mc_replicates)]
    results = ordered_map(_arch_mc_task, tasks, workers)
    med = spec.error.median_of_square()
    for j, v in enumerate(cfg.estimators):
        truth = spec.params if v == "gaussian_nll" else med * spec.params
        ests = np.array([res[j][0] for res in results])
        meta = {"n": n, "replicates": len(ests), "estimator": v}
        _record(report, f"mc_{v}", _mc_sample(ests, n, truth, params, meta))
        if v == "gaussian_nll" and studentize:
            taus = np.array([res[j][1] for res in results])
            draws = np.sqrt(n) * (ests - truth) / taus[:, None]
            s = PivotSample(draws, "monte_carlo", "sqrt(n)(estimate - truth)/tau_hat", params, meta)
            _record(report, "mc_gaussian_nll_studentized", s)

    fixed = _simulate(spec, n, root.child(1))
    fits = {v: arch_fit(fixed, p, v, stream=root.child(1, j)) for j, v in enumerate(cfg.estimators)}
    pairs = []
    if "gaussian_nll" in cfg.estimators:
        for kind, m in (("rb", n), ("mn_rb", cfg.m)):
            if kind not in cfg.bootstraps:
                continue
            label = f"{kind}_gaussian_nll"
            fit = None if cfg.fresh_series_per_replicate else fits["gaussian_nll"]

            def eng(x, B, st, m=m, fit=fit):
                return arch_mn_residual_bootstrap(x, p, m, B, st, fit=fit, workers=workers)

            _record(report, label, _bootstrap(eng, fixed, cfg, _BOOT_CODES[label], root))
            pairs.append((label, "mc_gaussian_nll_studentized"))
    if "wb" in cfg.bootstraps:
        scheme = cfg.scheme(n - p)
        for v in cfg.estimators:
            label = f"wb_{v}"
            fit = None if cfg.fresh_series_per_replicate else fits[v]

            def eng(x, B, st, v=v, fit=fit):
                return arch_weighted_bootstrap(x, p, v, scheme, B, st, fit=fit, workers=workers)

            _record(report, label, _bootstrap(eng, fixed, cfg, _BOOT_CODES[label], root))
            pairs.append((label, f"mc_{v}"))
    report.tables.append(_ks_table(report, pairs))

    fitted = Table("fixed_series_fit", ("estimator",) + params + ("objective", "converged"))
    for v, fit in fits.items():
        fitted.add(v, *map(float, fit.estimate), fit.objective, fit.converged)
    report.tables.append(fitted)


_PROTOCOLS = {
    "ar1_bootstrap_comparison": _ar_comparison,
    "hetero_bootstrap_comparison": _ar_comparison,
    "arch_estimator_comparison": _arch_comparison,
    "arch_bootstrap_consistency": _arch_consistency,
    "limit_law_check": _limit_law,
}


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Execute the configured protocol.  ``workers`` never changes any number."""
    if cfg.experiment not in _PROTOCOLS:
        raise ExperimentError(f"unknown experiment {cfg.experiment!r}")
    start = time.perf_counter()
    root = RngStream(cfg.master_seed, (EXPERIMENTS.index(cfg.experiment),))
    report = ExperimentReport(cfg.experiment, cfg.master_seed, __version__, cfg.to_dict())
    if cfg.B == 1:
        report.warnings.append("B = 1: bootstrap samples hold a single draw")
    if cfg.mc_replicates == 1:
        report.warnings.append("mc_replicates = 1: Monte-Carlo samples hold a single draw")
    _PROTOCOLS[cfg.experiment](cfg, root, report, workers)
    if cfg.experiment != "arch_estimator_comparison":
        report.tables.append(_summaries(report, cfg.grid_size))
    report.warnings = list(dict.fromkeys(report.warnings))
    report.wall_time = time.perf_counter() - start
    for w in report.warnings:
        log.warning(w)
    return report
