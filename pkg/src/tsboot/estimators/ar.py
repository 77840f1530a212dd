"""Closed-form and exact estimators for the AR(1) coefficient."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..processes import _values


@dataclass(frozen=True)
class EstimatorResult:
    """Point estimate plus the objective value and solver bookkeeping.

    For closed-form estimators ``iterations`` is 0 and ``converged`` is True.
    """

    estimate: np.ndarray
    objective: float
    converged: bool = True
    iterations: int = 0
    restarts_used: int = 0

    @property
    def value(self) -> float:
        """The estimate of a scalar parameter."""
        if self.estimate.size != 1:
            raise ValueError("estimate is a vector; use .estimate")
        return float(self.estimate[0])


def _lagged(series):
    x = _values(series)
    if x.size < 2:
        raise ValueError("need at least two observations")
    return x[1:], x[:-1]


def _check_tau(tau, m: int) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (m,):
        raise ValueError(f"need one tau per summand t = 2..n ({m}), got shape {tau.shape}")
    if np.any(~(tau > 0)):
        raise ValueError("tau values must be positive")
    return tau


def ar1_lse(series) -> EstimatorResult:
    """Least-squares estimate sum X_t X_{t-1} / sum X_{t-1}^2."""
    y, x = _lagged(series)
    den = x @ x
    if den <= 0:
        raise ValueError("all lagged values are zero; least squares is undefined")
    theta = (y @ x) / den
    r = y - theta * x
    return EstimatorResult(np.array([theta]), float(r @ r))


def ar1_wlse(series, tau) -> EstimatorResult:
    """Weighted least squares with weights 1/tau_t^2, t = 2..n.

    ``tau`` holds tau_2, ..., tau_n (one entry per summand).
    """
    y, x = _lagged(series)
    w = 1.0 / _check_tau(tau, x.size) ** 2
    den = w @ (x * x)
    if den <= 0:
        raise ValueError("all lagged values are zero; least squares is undefined")
    theta = (w @ (x * y)) / den
    r = y - theta * x
    return EstimatorResult(np.array([theta]), float(w @ (r * r)))


def weighted_median(values, weights) -> float:
    """Smallest v in ``values`` with weight{< v} <= W/2 and weight{> v} <= W/2.

    This is the left end of the minimizing set of sum_i w_i |v_i - m|.

    Examples
    --------
    >>> weighted_median([1, 2, 3], [1, 1, 3])
    3.0
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("values and weights must be 1-d and equally long")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    order = np.argsort(v, kind="stable")
    return float(v[order][_median_index(w[order][None, :])[0]])


def _median_index(sorted_w: np.ndarray) -> np.ndarray:
    """Row-wise index of the weighted median for weights sorted by value."""
    cum = np.cumsum(sorted_w, axis=1)
    total = cum[:, -1]
    if np.any(total <= 0):
        raise ValueError("weighted median needs at least one positive weight")
    # compare 2*cum against total so exact halves take the left endpoint
    return np.argmax(2.0 * cum >= total[:, None], axis=1)


class LadProblem:
    """Slope ratios X_t / X_{t-1} sorted once, ready for many reweightings.

    Pairs with X_{t-1} = 0 do not depend on theta and are dropped.
    """

    def __init__(self, series, tau=None):
        y, x = _lagged(series)
        self.inv_tau = np.ones(x.size) if tau is None else 1.0 / _check_tau(tau, x.size)
        base = np.abs(x) * self.inv_tau
        keep = x != 0
        if not np.any(keep):
            raise ValueError("all lagged values are zero; LAD is undefined")
        self.keep = keep
        self.y, self.x = y, x
        ratios = y[keep] / x[keep]
        self.order = np.argsort(ratios, kind="stable")
        self.sorted_ratios = ratios[self.order]
        self.base = base

    def solve(self, w: np.ndarray | None = None) -> np.ndarray:
        """Minimizers of sum_t w_t * base_t * |ratio_t - theta| for each weight row.

        ``w`` has shape (m,) or (rows, m) with m = n - 1; returns one estimate per row.
        """
        if w is None:
            w = np.ones(self.x.size)
        w = np.atleast_2d(np.asarray(w, dtype=float))
        if np.any(w < 0):
            raise ValueError("LAD reweighting needs non-negative weights")
        sw = (w * self.base)[:, self.keep][:, self.order]
        return self.sorted_ratios[_median_index(sw)]

    def objective(self, theta: float, w=None) -> float:
        """sum_t w_t |X_t - theta X_{t-1}| / tau_t."""
        w = np.ones(self.x.size) if w is None else np.asarray(w, dtype=float)
        return float(np.sum(w * self.inv_tau * np.abs(self.y - theta * self.x)))


def lad_objective(series, theta: float, tau=None) -> float:
    """sum_t |X_t - theta X_{t-1}| / tau_t (tau = 1 when omitted)."""
    y, x = _lagged(series)
    r = np.abs(y - theta * x)
    if tau is not None:
        r = r / _check_tau(tau, x.size)
    return float(r.sum())


def ar1_lad(series) -> EstimatorResult:
    """Least absolute deviations estimate, exact via the weighted median of slope ratios."""
    theta = float(LadProblem(series).solve()[0])
    return EstimatorResult(np.array([theta]), lad_objective(series, theta))


def ar1_wlad(series, tau) -> EstimatorResult:
    """argmin_theta sum_t |X_t - theta X_{t-1}| / tau_t, exact."""
    theta = float(LadProblem(series, tau).solve()[0])
    return EstimatorResult(np.array([theta]), lad_objective(series, theta, tau))
