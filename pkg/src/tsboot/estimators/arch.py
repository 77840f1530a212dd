"""ARCH(p) objectives and fitting.

Four criteria over t = p+1, ..., n with sigma_t^2 = c0 + sum_i b_i X_{t-i}^2:

``gaussian_nll``  sum log sigma_t^2 + X_t^2 / sigma_t^2   (conditional Gaussian QMLE)
``lade1``         sum |X_t^2 / sigma_t^2 - 1|
``lade2``         sum |log X_t^2 - log sigma_t^2|
``lade3``         sum |X_t^2 - sigma_t^2|

The LAD criteria identify the parameters only up to the factor
median(eps_t^2); ratios such as c0/b1 are comparable across all four.
"""

from __future__ import annotations

import numpy as np

from ..processes import _values, arch_sigma2_path
from ..rand_weights import RngStream
from .ar import EstimatorResult
from .solver import DEFAULT_RESTARTS, minimize_box_positive

VARIANTS = ("gaussian_nll", "lade1", "lade2", "lade3")
MIN_EXCESS_LENGTH = 20


class ZeroObservationError(ValueError):
    """lade2 met X_t = 0, where log X_t^2 is undefined."""


def _terms(params, x: np.ndarray, variant: str) -> np.ndarray:
    p = len(params) - 1
    s2 = arch_sigma2_path(params, x)
    x2 = x[p:] ** 2
    if variant == "gaussian_nll":
        return np.log(s2) + x2 / s2
    if variant == "lade1":
        return np.abs(x2 / s2 - 1.0)
    if variant == "lade2":
        if np.any(x2 == 0):
            raise ZeroObservationError("lade2 objective needs every X_t != 0 for t > p")
        return np.abs(np.log(x2) - np.log(s2))
    if variant == "lade3":
        return np.abs(x2 - s2)
    raise ValueError(f"unknown ARCH objective {variant!r}; choose from {VARIANTS}")


def arch_objective(params, series, variant: str, weights=None) -> float:
    """Value of an ARCH criterion, optionally with per-term weights (length n - p)."""
    x = _values(series)
    # far from the data sigma^2 can over/underflow; the value is then +-inf or nan
    with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
        terms = _terms(np.asarray(params, dtype=float), x, variant)
        if weights is None:
            return float(terms.sum())
        return float(np.asarray(weights, dtype=float) @ terms)


def default_init(series, p: int) -> np.ndarray:
    x = _values(series)
    c0 = max(float(np.var(x)) * (1.0 - 0.1 * p), 1e-8)
    return np.array([c0] + [0.1] * p)


def arch_fit(
    series,
    p: int = 1,
    variant: str = "gaussian_nll",
    *,
    weights=None,
    init=None,
    restarts: int = DEFAULT_RESTARTS,
    stream: RngStream | None = None,
    wide_probes: bool = True,
) -> EstimatorResult:
    """Fit ARCH(p) by minimizing one of the four criteria over c0 > 0, b >= 0.

    ``weights`` turns the criterion into its weighted-bootstrap version.
    ``stream`` drives the restart jitter; by default a fixed stream is used
    so repeated fits of the same data agree exactly.  ``wide_probes=False``
    keeps every restart near ``init`` (used for warm-started refits).
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown ARCH objective {variant!r}; choose from {VARIANTS}")
    x = _values(series)
    if p < 1:
        raise ValueError("ARCH order must be >= 1")
    if x.size < p + MIN_EXCESS_LENGTH:
        raise ValueError(f"ARCH({p}) fit needs at least {p + MIN_EXCESS_LENGTH} observations, got {x.size}")
    if variant == "lade2" and np.any(x[p:] == 0):
        raise ZeroObservationError("lade2 objective needs every X_t != 0 for t > p")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (x.size - p,):
            raise ValueError(f"need {x.size - p} weights, got shape {weights.shape}")

    def f(theta):
        return arch_objective(theta, x, variant, weights)

    start = default_init(x, p) if init is None else np.asarray(init, dtype=float)
    return minimize_box_positive(f, start, restarts=restarts, stream=stream, wide_probes=wide_probes)


def standardized_residuals(params, series) -> np.ndarray:
    """X_t / sigma_t(params), t = p+1..n."""
    x = _values(series)
    p = len(params) - 1
    return x[p:] / np.sqrt(arch_sigma2_path(params, x))


def tau_hat(params, series) -> float:
    """sqrt(mean(e^4) - mean(e^2)^2) of the fitted residuals e_t = X_t / sigma_t."""
    e2 = standardized_residuals(params, series) ** 2
    v = float(np.mean(e2 * e2) - np.mean(e2) ** 2)
    if not v > 0:
        raise ValueError("degenerate residuals: fourth-moment spread is zero")
    return float(np.sqrt(v))
