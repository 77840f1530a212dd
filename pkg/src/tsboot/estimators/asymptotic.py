"""Limit variances of sqrt(n)(estimate - truth) for the AR(1) estimators.

Available laws (``model`` argument of :func:`asymptotic_variance`):

``lse``            1 - theta^2
``lad``            1 / (4 f(0)^2 E X_t^2), f the innovation density
``wb_lse``         weighted-bootstrap pivot, same as ``lse``
``wb_lad``         weighted-bootstrap LAD pivot, same as ``lad``
``wlse_hetero``    weighted LSE under tau_t heteroscedasticity: lim n / s_n^2,
                   s_n^2 = sum_t tau_t^-2 E X_{t-1}^2
``lse_hetero``     plain LSE under heteroscedasticity:
                   lim n sum_t tau_t^2 E X_{t-1}^2 / (sum_t E X_{t-1}^2)^2
``wb_two_period``  weighted-bootstrap pivot for alternating variances
                   sigma1^2 (odd t) / sigma2^2 (even t), closed form
                   4 (1 - theta^2)/(1 + theta^2) *
                   (s1 s2 + theta^2 (s1^2 + s2^2)/2) / (s1 + s2)^2, s_i = sigma_i^2

The two heteroscedastic laws are evaluated from their defining sums at a
large finite n (default 10^6), starting E X_0^2 = tau_1^2 / (1 - theta^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from ..processes import TauSchedule
from ..rand_weights import ErrorDist

HETERO_EVAL_N = 1_000_000

MODELS = ("lse", "lad", "wb_lse", "wb_lad", "wlse_hetero", "lse_hetero", "wb_two_period")


@dataclass(frozen=True)
class AsymptoticLaw:
    variance: float
    rate: str = "sqrt(n)"
    source: str = ""

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"limit variance must be positive, got {self.variance}")


def second_moments(theta: float, schedule: TauSchedule, n: int) -> np.ndarray:
    """E X_t^2 for t = 0..n under X_t = theta X_{t-1} + tau_t eps_t."""
    tau2 = schedule.taus(n) ** 2
    v0 = tau2[0] / (1.0 - theta**2)
    v, _ = lfilter([1.0], [1.0, -(theta**2)], tau2, zi=[theta**2 * v0])
    return np.concatenate([[v0], v])


def _hetero_sums(theta, schedule: TauSchedule, n: int | None):
    if schedule.kind == "explicit":
        n = len(schedule.values)
    elif n is None:
        n = HETERO_EVAL_N
    ex2 = second_moments(theta, schedule, n)
    tau2 = schedule.taus(n) ** 2
    # summands t = 2..n pair tau_t with E X_{t-1}^2
    return n, tau2[1:], ex2[1:n]


def asymptotic_variance(
    model: str,
    *,
    theta: float,
    error: ErrorDist | None = None,
    schedule: TauSchedule | None = None,
    sigma1_sq: float | None = None,
    sigma2_sq: float | None = None,
    n_eval: int | None = None,
) -> AsymptoticLaw:
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    if not abs(theta) < 1:
        raise ValueError("need |theta| < 1")
    error = error or ErrorDist()

    if model in ("lse", "wb_lse"):
        return AsymptoticLaw(1.0 - theta**2, source="lse limit N(0, 1 - theta^2)")

    if model in ("lad", "wb_lad"):
        # sigma cancels: f(0) scales as 1/sigma and E X^2 as sigma^2
        f0 = error.density_at_zero()
        return AsymptoticLaw((1.0 - theta**2) / (4.0 * f0**2), source="lad limit 1/(4 f(0)^2 E X^2)")

    if model == "wb_two_period":
        if schedule is not None:
            if schedule.kind != "two_period":
                raise ValueError("wb_two_period needs a two_period schedule")
            sigma1_sq, sigma2_sq = schedule.sigma1**2, schedule.sigma2**2
        if sigma1_sq is None or sigma2_sq is None:
            raise ValueError("wb_two_period needs sigma1_sq and sigma2_sq")
        s1, s2, t2 = sigma1_sq, sigma2_sq, theta**2
        var = 4.0 * (1.0 - t2) / (1.0 + t2) * (s1 * s2 + t2 * (s1**2 + s2**2) / 2.0) / (s1 + s2) ** 2
        return AsymptoticLaw(var, source="two-period weighted bootstrap limit")

    if schedule is None:
        raise ValueError(f"{model} needs a tau schedule")
    if theta == 0:
        raise ValueError(f"{model}: theta = 0 is outside the hypotheses of this limit law")
    if model == "lse_hetero" and schedule.kind == "power" and schedule.alpha != 0:
        raise ValueError("lse_hetero: tau_t^2 = c t^alpha with alpha != 0 has no finite limit")
    n, tau2, ex2 = _hetero_sums(theta, schedule, n_eval)
    if model == "wlse_hetero":
        s2n = np.sum(ex2 / tau2) / n
        return AsymptoticLaw(1.0 / s2n, source=f"weighted LSE limit n/s_n^2 at n={n}")
    num = np.sum(tau2 * ex2) / n
    den = np.sum(ex2) / n
    return AsymptoticLaw(num / den**2, source=f"heteroscedastic LSE limit at n={n}")
