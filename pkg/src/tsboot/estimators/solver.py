"""Derivative-free minimization over {c0 > 0, b_i >= 0}.

The parameter vector is ``(c0, b_1, ..., b_p)``.  Nelder-Mead runs in
unconstrained coordinates: ``c0 = exp(u0)`` and ``b_i = softplus(u_i)``.
The LAD objectives are not differentiable, so no gradients are used.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import minimize

from ..rand_weights import RngStream, as_generator
from .ar import EstimatorResult

MAX_EVALS = 10_000
SIMPLEX_TOL = 1e-8
DEFAULT_RESTARTS = 5
RESTART_JITTER = 0.5
BOUNDARY_SNAP = 1e-3
SNAP_RTOL = 1e-10
PROBES = 64
PROBE_SPREAD = 3.0


class SolverError(RuntimeError):
    pass


def to_unconstrained(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if not theta[0] > 0 or np.any(theta[1:] <= 0):
        raise ValueError("transform needs c0 > 0 and b_i > 0")
    u = np.empty_like(theta)
    u[0] = np.log(theta[0])
    b = theta[1:]
    # softplus inverse, written to stay accurate for large b
    u[1:] = b + np.log(-np.expm1(-b))
    return u


def from_unconstrained(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    theta = np.empty_like(u)
    theta[0] = np.exp(u[0])
    theta[1:] = np.logaddexp(0.0, u[1:])
    return theta


def _snap_to_boundary(objective, theta: np.ndarray) -> np.ndarray:
    # softplus never reaches 0, so a boundary optimum ends at some tiny b_i;
    # set such coordinates to exactly 0 when that does not raise the objective
    best = objective(theta)
    for i in range(1, theta.size):
        if theta[i] > BOUNDARY_SNAP:
            continue
        trial = theta.copy()
        trial[i] = 0.0
        val = objective(trial)
        if np.isfinite(val) and val <= best + SNAP_RTOL * abs(best):
            theta, best = trial, val
    return theta


def minimize_box_positive(
    objective: Callable[[np.ndarray], float],
    init,
    restarts: int = DEFAULT_RESTARTS,
    stream: RngStream | np.random.Generator | None = None,
    trace: list | None = None,
    wide_probes: bool = True,
) -> EstimatorResult:
    """Multi-start Nelder-Mead for ``objective(c0, b_1, ..., b_p)``.

    The first start is ``init`` itself.  Of the other ``restarts - 1``
    starts, half jitter ``init`` in the unconstrained coordinates and the rest
    are the lowest-objective points of 64 wide random probes around it.  Each run stops once every
    vertex is within 1e-8 of the best (per coordinate) or after 10^4
    evaluations.  Returns the best terminal point over all starts.

    With ``wide_probes=False`` every extra start is a local jitter; warm-started
    refits use this to stay in the basin of ``init``.

    If ``trace`` is a list, the objective value of the best vertex after
    every iteration is appended to it (one sub-list per start).
    """
    init = np.array(init, dtype=float)
    # zero b is outside the open transform domain; nudge onto it
    init[1:] = np.maximum(init[1:], 1e-8)
    if not init[0] > 0:
        raise ValueError("initial c0 must be positive")
    restarts = max(1, int(restarts))
    rng = as_generator(stream if stream is not None else RngStream(0))
    u_init = to_unconstrained(init)

    def g(u):
        # points that underflow c0 or overflow sigma^2 count as +inf
        try:
            with np.errstate(over="ignore", under="ignore", invalid="ignore", divide="ignore"):
                val = objective(from_unconstrained(u))
        except (ValueError, FloatingPointError):
            return np.inf
        return val if np.isfinite(val) else np.inf

    starts = [u_init]
    if restarts > 1:
        # half the extra starts are local jitters of init, the rest are the
        # best points of a wide random probe cloud (the LAD criteria can be
        # multimodal with far-away minima)
        n_local = (restarts - 1) // 2 if wide_probes else restarts - 1
        starts += [u_init + RESTART_JITTER * rng.standard_normal(u_init.size) for _ in range(n_local)]
        if restarts - 1 > n_local:
            probes = u_init + PROBE_SPREAD * rng.standard_normal((PROBES, u_init.size))
            vals = np.array([g(u) for u in probes])
            order = np.argsort(vals, kind="stable")
            starts += [probes[i] for i in order[: restarts - 1 - n_local]]

    best = None
    used = 0
    total_iter = 0
    for u0 in starts:
        if not np.isfinite(g(u0)):
            continue
        used += 1
        path = [] if trace is not None else None
        cb = None if path is None else (lambda xk: path.append(g(xk)))
        res = minimize(
            g,
            u0,
            method="Nelder-Mead",
            callback=cb,
            options={
                "xatol": SIMPLEX_TOL,
                "fatol": np.inf,
                "maxfev": MAX_EVALS,
                "maxiter": MAX_EVALS,
            },
        )
        if trace is not None:
            trace.append(path)
        total_iter += int(res.nit)
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise SolverError("objective is not finite at any starting point")
    est = _snap_to_boundary(objective, from_unconstrained(best.x))
    return EstimatorResult(
        estimate=est,
        objective=float(objective(est)),
        converged=bool(best.success),
        iterations=total_iter,
        restarts_used=used,
    )
