"""Residual, weighted and m-out-of-n bootstrap engines.

Replicate ``b`` always draws from ``stream.child(b)``, so a PivotSample is a
pure function of (series, settings, stream) and does not depend on how
replicates are scheduled.

Pivots
------
monte_carlo      sqrt(n) (estimate - truth)
residual_bs      sqrt(n) (theta* - theta_hat)
weighted_bs      sqrt(n) (theta* - theta_hat) / sigma_n, sigma_n^2 the analytic weight variance
mn_residual_bs   sqrt(m) (theta* - theta_hat) / tau*
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .estimators.ar import LadProblem, ar1_lad, ar1_lse
from .estimators.arch import arch_fit, standardized_residuals, tau_hat
from .parallel import ordered_map
from .processes import _values, arch_recursion
from .rand_weights import RngStream, WeightScheme, generate_weights

log = logging.getLogger(__name__)

DENOM_GUARD = 1e-8
MAX_WB_REJECT = 0.01
MAX_LAD_REJECT = 0.5
MAX_DROP = 0.05
MN_BURN_IN = 50
REFIT_RESTARTS = 2


class BootstrapError(RuntimeError):
    pass


@dataclass
class PivotSample:
    draws: np.ndarray
    kind: str
    pivot_def: str
    params: tuple[str, ...] = ("theta",)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.draws, dtype=float)
        if d.ndim == 1:
            d = d[:, None]
        if d.shape[0] < 1 or d.shape[1] != len(self.params):
            raise ValueError("pivot draws must be (replicates, params)")
        if not np.all(np.isfinite(d)):
            raise ValueError("pivot draws must be finite")
        self.draws = d

    def column(self, param: str | int = 0) -> np.ndarray:
        j = self.params.index(param) if isinstance(param, str) else param
        return self.draws[:, j]

    def __len__(self):
        return self.draws.shape[0]


def write_pivots_csv(sample: PivotSample, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "param", "pivot"])
        for r, row in enumerate(sample.draws):
            for name, v in zip(sample.params, row):
                w.writerow([r, name, repr(float(v))])


def read_pivots_csv(path: str | Path, param: str | None = None) -> np.ndarray:
    """Pivot values from a ``replicate,param,pivot`` file, optionally for one parameter."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and set(rows[0]) != {"replicate", "param", "pivot"}:
        raise ValueError(f"{path}: expected header 'replicate,param,pivot'")
    names = list(dict.fromkeys(r["param"] for r in rows))
    if param is None:
        if len(names) > 1:
            raise ValueError(f"{path} holds several parameters {names}; pick one")
        param = names[0] if names else None
    return np.array([float(r["pivot"]) for r in rows if r["param"] == param])


# ---------------------------------------------------------------------------
# AR(1)
# ---------------------------------------------------------------------------


def ar1_residual_bootstrap(series, B: int, stream: RngStream) -> PivotSample:
    """Resample standardized LSE residuals and rebuild series through the fitted recursion.

    Residuals Z_t = X_t - theta_hat X_{t-1}, t = 2..n, are centred and scaled
    to mean square 1 over their n - 1 values.  Each replicate draws
    Z*_1..Z*_n with replacement, sets X*_1 = Z*_1, X*_t = theta_hat X*_{t-1} + Z*_t
    and refits least squares.
    """
    x = _values(series)
    n = x.size
    if B < 1:
        raise ValueError("B must be >= 1")
    theta = ar1_lse(x).value
    resid = x[1:] - theta * x[:-1]
    resid = resid - resid.mean()
    scale = np.sqrt(np.mean(resid**2))
    if not scale > 1e-12 * max(1.0, np.max(np.abs(x))):
        raise BootstrapError("residuals are degenerate (zero spread); residual bootstrap undefined")
    resid = resid / scale
    idx = np.stack([stream.child(b).generator().integers(0, resid.size, size=n) for b in range(B)])
    xs = lfilter([1.0], [1.0, -theta], resid[idx], axis=1)
    num = np.sum(xs[:, 1:] * xs[:, :-1], axis=1)
    den = np.sum(xs[:, :-1] ** 2, axis=1)
    if np.any(den <= 0):
        raise BootstrapError("a bootstrap series has zero lagged sum of squares")
    draws = np.sqrt(n) * (num / den - theta)
    return PivotSample(
        draws,
        "residual_bs",
        "sqrt(n)(theta* - theta_hat)",
        meta={"n": n, "B": B, "estimator": "lse", "theta_hat": theta},
    )


def _check_scheme(scheme: WeightScheme, m: int) -> None:
    if scheme.n != m:
        raise ValueError(f"weight scheme has n={scheme.n}; need one weight per summand ({m})")


def _draw_rows(scheme, B, stream, accept, reason="failed the acceptance check"):
    """B accepted weight rows; replicate b redraws from its own stream until accepted."""
    rows = np.empty((B, scheme.n))
    rejected = 0
    for b in range(B):
        g = stream.child(b).generator()
        while True:
            w = generate_weights(g, scheme)
            if accept(w):
                break
            rejected += 1
            if rejected > 10 * B + 100:
                raise BootstrapError(f"weight rows almost always {reason}; scheme unsuitable")
        rows[b] = w
    return rows, rejected


def ar1_weighted_bootstrap(series, scheme: WeightScheme, B: int, stream: RngStream) -> PivotSample:
    """Weighted LSE theta* = sum w_t X_t X_{t-1} / sum w_t X_{t-1}^2 per weight row.

    Rows with |sum w_t X_{t-1}^2| < 1e-8 sum X_{t-1}^2 are redrawn and counted;
    more than 1% rejections is an error.
    """
    x = _values(series)
    n = x.size
    _check_scheme(scheme, n - 1)
    if B < 1:
        raise ValueError("B must be >= 1")
    theta = ar1_lse(x).value
    xy = x[1:] * x[:-1]
    xx = x[:-1] ** 2
    floor = DENOM_GUARD * xx.sum()
    rows, rejected = _draw_rows(scheme, B, stream, lambda w: abs(w @ xx) >= floor)
    if rejected / (B + rejected) > MAX_WB_REJECT:
        raise BootstrapError(
            f"{rejected} of {B + rejected} weight rows hit the denominator guard; scheme unsuitable for this series"
        )
    star = (rows @ xy) / (rows @ xx)
    draws = np.sqrt(n) * (star - theta) / scheme.pivot_scale
    return PivotSample(
        draws,
        "weighted_bs",
        "sqrt(n)(theta* - theta_hat)/sigma_n",
        meta={"n": n, "B": B, "scheme": scheme.kind, "estimator": "lse", "rejected": rejected, "theta_hat": theta},
    )


def ar1_weighted_lad_bootstrap(series, scheme: WeightScheme, B: int, stream: RngStream) -> PivotSample:
    """Minimize sum w_t |X_t - theta X_{t-1}| exactly for each weight row.

    Rows with a negative weight are redrawn (the weighted median needs
    non-negative weights); over 50% rejections is an error.
    """
    x = _values(series)
    n = x.size
    _check_scheme(scheme, n - 1)
    if B < 1:
        raise ValueError("B must be >= 1")
    prob = LadProblem(x)
    theta = ar1_lad(x).value
    base = prob.base

    def ok(w):
        return not np.any(w < 0) and (w @ base) > 0

    rows, rejected = _draw_rows(scheme, B, stream, ok, "had negative entries (LAD needs non-negative weights)")
    if rejected / (B + rejected) > MAX_LAD_REJECT:
        raise BootstrapError(
            f"{rejected} of {B + rejected} weight rows had negative entries; use a non-negative scheme such as multinomial"
        )
    star = prob.solve(rows)
    draws = np.sqrt(n) * (star - theta) / scheme.pivot_scale
    return PivotSample(
        draws,
        "weighted_bs",
        "sqrt(n)(theta*_lad - theta_lad)/sigma_n",
        meta={"n": n, "B": B, "scheme": scheme.kind, "estimator": "lad", "rejected": rejected, "theta_hat": theta},
    )


# ---------------------------------------------------------------------------
# ARCH(p)
# ---------------------------------------------------------------------------


def arch_param_names(p: int) -> tuple[str, ...]:
    return ("c0",) + tuple(f"b{i}" for i in range(1, p + 1))


def _mn_replicate(task):
    theta_hat, p, m, eps_hat, stream = task
    g = stream.generator()
    eps = eps_hat[g.integers(0, eps_hat.size, size=m + MN_BURN_IN)]
    xs = arch_recursion(theta_hat[0], theta_hat[1:], eps)[MN_BURN_IN:]
    try:
        fit = arch_fit(
            xs, p, "gaussian_nll", init=theta_hat, restarts=REFIT_RESTARTS, stream=stream.child(0), wide_probes=False
        )
        tau = tau_hat(fit.estimate, xs)
    except (ValueError, RuntimeError) as exc:
        return None, str(exc)
    return np.sqrt(m) * (fit.estimate - theta_hat) / tau, None


def arch_mn_residual_bootstrap(
    series,
    p: int,
    m: int,
    B: int,
    stream: RngStream,
    *,
    fit=None,
    workers: int = 1,
) -> PivotSample:
    """m-out-of-n residual bootstrap for the Gaussian QMLE.

    Fitted residuals X_t / sigma_t(theta_hat) are standardized (mean 0,
    variance 1) and resampled; each bootstrap path starts from a zero
    presample, runs 50 burn-in steps through the fitted recursion and keeps
    the next m values.  The refit uses the QMLE warm-started at theta_hat.
    ``m = n`` is the ordinary residual bootstrap.
    """
    x = _values(series)
    n = x.size
    if not p + 20 <= m <= n:
        raise ValueError(f"need p + 20 <= m <= n, got m={m}, n={n}")
    if B < 1:
        raise ValueError("B must be >= 1")
    fit = fit if fit is not None else arch_fit(x, p, "gaussian_nll", stream=stream.child(B, 0))
    theta_hat = np.asarray(fit.estimate, dtype=float)
    e = standardized_residuals(theta_hat, x)
    sd = e.std()
    if not sd > 0:
        raise BootstrapError("fitted residuals are degenerate")
    eps_hat = (e - e.mean()) / sd
    tasks = [(theta_hat, p, m, eps_hat, stream.child(b)) for b in range(B)]
    results = ordered_map(_mn_replicate, tasks, workers)
    return _collect(
        results,
        B,
        "mn_residual_bs",
        "sqrt(m)(theta* - theta_hat)/tau*",
        p,
        {"n": n, "m": m, "B": B, "estimator": "gaussian_nll", "theta_hat": theta_hat.tolist()},
    )


def _wb_replicate(task):
    x, p, variant, w, theta_hat, stream, scale = task
    try:
        fit = arch_fit(
            x, p, variant, weights=w, init=theta_hat, restarts=REFIT_RESTARTS, stream=stream, wide_probes=False
        )
    except (ValueError, RuntimeError) as exc:
        return None, str(exc)
    return np.sqrt(x.size) * (fit.estimate - theta_hat) / scale, None


def arch_weighted_bootstrap(
    series,
    p: int,
    variant: str,
    scheme: WeightScheme,
    B: int,
    stream: RngStream,
    *,
    fit=None,
    workers: int = 1,
) -> PivotSample:
    """Weighted bootstrap for the ARCH QMLE (``gaussian_nll``) or log-LAD (``lade2``) fit.

    Each replicate minimizes sum_t w_t * term_t(theta) starting from theta_hat.
    """
    if variant not in ("gaussian_nll", "lade2"):
        raise ValueError("ARCH weighted bootstrap supports gaussian_nll and lade2")
    x = _values(series)
    n = x.size
    _check_scheme(scheme, n - p)
    if B < 1:
        raise ValueError("B must be >= 1")
    fit = fit if fit is not None else arch_fit(x, p, variant, stream=stream.child(B, 0))
    theta_hat = np.asarray(fit.estimate, dtype=float)
    rows = [generate_weights(stream.child(b).generator(), scheme) for b in range(B)]
    tasks = [(x, p, variant, rows[b], theta_hat, stream.child(b, 0), scheme.pivot_scale) for b in range(B)]
    results = ordered_map(_wb_replicate, tasks, workers)
    return _collect(
        results,
        B,
        "weighted_bs",
        "sqrt(n)(theta* - theta_hat)/sigma_n",
        p,
        {"n": n, "B": B, "scheme": scheme.kind, "estimator": variant, "theta_hat": theta_hat.tolist()},
    )


def _collect(results, B, kind, pivot_def, p, meta) -> PivotSample:
    kept = [r for r, _ in results if r is not None and np.all(np.isfinite(r))]
    dropped = B - len(kept)
    if dropped:
        reasons = sorted({msg for r, msg in results if msg})
        log.warning("%s: dropped %d of %d replicates (%s)", kind, dropped, B, "; ".join(reasons) or "non-finite pivot")
    if dropped > MAX_DROP * B or not kept:
        raise BootstrapError(f"{kind}: {dropped} of {B} replicate refits failed (limit {MAX_DROP:.0%})")
    meta = dict(meta, dropped=dropped)
    return PivotSample(np.array(kept), kind, pivot_def, arch_param_names(p), meta)
