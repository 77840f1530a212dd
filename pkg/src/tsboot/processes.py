"""Simulators for AR(1), heteroscedastic AR(1) and ARCH(p) series.

Initialization conventions
--------------------------
AR(1): ``X_0 ~ Normal(0, sigma^2 / (1 - theta^2))`` whatever the innovation
law, so no burn-in is needed.  Heteroscedastic AR(1): ``X_0 ~ Normal(0,
tau_1^2 / (1 - theta^2))``.  ARCH(p): zero presample and a discarded burn-in.
Returned AR series are ``X_1, ..., X_n`` (``X_0`` is not part of the data).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .rand_weights import ErrorDist, RngStream, as_generator

DEFAULT_ARCH_BURN_IN = 500


@dataclass(frozen=True)
class AR1Spec:
    theta: float
    sigma: float = 1.0
    error: ErrorDist = field(default_factory=ErrorDist)

    def __post_init__(self):
        if not abs(self.theta) < 1:
            raise ValueError(f"AR(1) needs |theta| < 1, got {self.theta}")
        # sigma = 0 is allowed for noise-free fixtures
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    @property
    def tag(self) -> str:
        return f"ar1(theta={self.theta!r},sigma={self.sigma!r},error={self.error.label})"


@dataclass(frozen=True)
class TauSchedule:
    """Deterministic innovation scales tau_t, t = 1, 2, ...

    ``constant``: tau_t = tau.  ``two_period``: tau_t = sigma1 for odd t and
    sigma2 for even t (standard deviations).  ``power``: tau_t^2 = c t^alpha.
    ``explicit``: the given values, which must cover the requested length.
    """

    kind: str
    tau: float = 1.0
    sigma1: float = 1.0
    sigma2: float = 1.0
    c: float = 1.0
    alpha: float = 0.0
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("constant", "two_period", "power", "explicit"):
            raise ValueError(f"unknown tau schedule {self.kind!r}")
        if self.kind == "explicit":
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        positive = {
            "constant": (self.tau,),
            "two_period": (self.sigma1, self.sigma2),
            "power": (self.c,),
            "explicit": self.values or (0.0,),
        }[self.kind]
        if not all(v > 0 for v in positive):
            raise ValueError("innovation scales must be positive")

    @classmethod
    def constant(cls, tau: float) -> "TauSchedule":
        return cls("constant", tau=tau)

    @classmethod
    def two_period(cls, sigma1: float, sigma2: float) -> "TauSchedule":
        return cls("two_period", sigma1=sigma1, sigma2=sigma2)

    @classmethod
    def two_period_variances(cls, sigma1_sq: float, sigma2_sq: float) -> "TauSchedule":
        return cls.two_period(float(np.sqrt(sigma1_sq)), float(np.sqrt(sigma2_sq)))

    @classmethod
    def power(cls, c: float, alpha: float) -> "TauSchedule":
        return cls("power", c=c, alpha=alpha)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "TauSchedule":
        return cls("explicit", values=tuple(values))

    def taus(self, n: int) -> np.ndarray:
        """tau_1, ..., tau_n."""
        t = np.arange(1, n + 1)
        if self.kind == "constant":
            return np.full(n, float(self.tau))
        if self.kind == "two_period":
            return np.where(t % 2 == 1, self.sigma1, self.sigma2).astype(float)
        if self.kind == "power":
            return np.sqrt(self.c * t.astype(float) ** self.alpha)
        if len(self.values) < n:
            raise ValueError(f"explicit schedule has {len(self.values)} entries, need {n}")
        return np.asarray(self.values[:n], dtype=float)

    @property
    def label(self) -> str:
        if self.kind == "constant":
            return f"constant({self.tau!r})"
        if self.kind == "two_period":
            return f"two_period({self.sigma1**2:.6g},{self.sigma2**2:.6g})"
        if self.kind == "power":
            return f"power({self.c!r},{self.alpha!r})"
        return f"explicit[{len(self.values)}]"


@dataclass(frozen=True)
class HeteroAR1Spec:
    theta: float
    schedule: TauSchedule
    error: ErrorDist = field(default_factory=ErrorDist)

    def __post_init__(self):
        if not abs(self.theta) < 1:
            raise ValueError(f"AR(1) needs |theta| < 1, got {self.theta}")

    @property
    def tag(self) -> str:
        return f"hetero_ar1(theta={self.theta!r},tau={self.schedule.label},error={self.error.label})"


@dataclass(frozen=True)
class ArchSpec:
    c0: float
    b: tuple[float, ...]
    error: ErrorDist = field(default_factory=ErrorDist)

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(v) for v in np.atleast_1d(self.b)))
        if not self.c0 > 0:
            raise ValueError("ARCH intercept c0 must be positive")
        if len(self.b) < 1 or any(v < 0 for v in self.b):
            raise ValueError("ARCH needs p >= 1 non-negative lag coefficients")

    @property
    def p(self) -> int:
        return len(self.b)

    @property
    def params(self) -> np.ndarray:
        return np.array((self.c0,) + self.b)

    @property
    def stationary(self) -> bool:
        return sum(self.b) < 1

    @property
    def tag(self) -> str:
        return f"arch(c0={self.c0!r},b={list(self.b)!r},error={self.error.label})"


@dataclass(frozen=True)
class Series:
    values: np.ndarray
    spec_tag: str = ""

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a series needs at least two observations")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def scaled(self, c: float) -> "Series":
        return Series(self.values * c, self.spec_tag)


def _values(series) -> np.ndarray:
    if isinstance(series, Series):
        return series.values
    return np.asarray(series, dtype=float)


def simulate_ar1(spec: AR1Spec, n: int, stream: RngStream) -> Series:
    if n < 2:
        raise ValueError("need n >= 2")
    rng = as_generator(stream)
    x0 = spec.sigma / np.sqrt(1.0 - spec.theta**2) * rng.standard_normal()
    z = spec.sigma * spec.error.sample(rng, n)
    return Series(_ar_filter(spec.theta, x0, z), spec.tag)


def simulate_hetero_ar1(spec: HeteroAR1Spec, n: int, stream: RngStream) -> Series:
    if n < 2:
        raise ValueError("need n >= 2")
    tau = spec.schedule.taus(n)
    rng = as_generator(stream)
    x0 = tau[0] / np.sqrt(1.0 - spec.theta**2) * rng.standard_normal()
    z = tau * spec.error.sample(rng, n)
    return Series(_ar_filter(spec.theta, x0, z), spec.tag)


def _ar_filter(theta: float, x0: float, z: np.ndarray) -> np.ndarray:
    # X_t = theta X_{t-1} + Z_t with X_0 = x0
    out, _ = lfilter([1.0], [1.0, -theta], z, zi=[theta * x0])
    return out


def simulate_arch(
    spec: ArchSpec, n: int, stream: RngStream, burn_in: int = DEFAULT_ARCH_BURN_IN
) -> Series:
    if not spec.stationary:
        raise ValueError(f"ARCH simulation needs sum(b) < 1, got {sum(spec.b)}")
    if burn_in < 0 or n < 2:
        raise ValueError("need n >= 2 and burn_in >= 0")
    # kept innovations are drawn first, so changing burn_in only changes the start-up segment
    rng = as_generator(stream)
    kept = spec.error.sample(rng, n)
    warm = spec.error.sample(rng, burn_in)
    x = arch_recursion(spec.c0, spec.b, np.concatenate([warm, kept]))
    return Series(x[burn_in:], spec.tag)


def arch_recursion(c0: float, b: Sequence[float], eps: np.ndarray) -> np.ndarray:
    """X_t = sigma_t eps_t, sigma_t^2 = c0 + sum_i b_i X_{t-i}^2, zero presample."""
    b = np.asarray(b, dtype=float)
    p = b.size
    total = eps.size
    x = np.zeros(total + p)
    x2 = np.zeros(total + p)
    brev = b[::-1]
    for t in range(total):
        s2 = c0 + brev @ x2[t : t + p]
        xt = np.sqrt(s2) * eps[t]
        x[t + p] = xt
        x2[t + p] = xt * xt
    return x[p:]


def arch_sigma2_path(params: Sequence[float], series) -> np.ndarray:
    """Conditional variances sigma_t^2 for t = p+1, ..., n given the observed series."""
    params = np.asarray(params, dtype=float)
    c0, b = params[0], params[1:]
    p = b.size
    x = _values(series)
    if p < 1:
        raise ValueError("ARCH order must be >= 1")
    if x.size <= p:
        raise ValueError(f"series of length {x.size} too short for ARCH({p})")
    if not c0 > 0 or np.any(b < 0):
        raise ValueError("need c0 > 0 and non-negative b")
    x2 = x * x
    n = x.size
    s2 = np.full(n - p, c0)
    for i in range(1, p + 1):
        s2 = s2 + b[i - 1] * x2[p - i : n - i]
    return s2


def write_series_csv(series: Series, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "x"])
        for t, v in enumerate(series.values, start=1):
            w.writerow([t, repr(float(v))])


def read_series_csv(path: str | Path) -> Series:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != ["t", "x"]:
        raise ValueError(f"{path}: expected header 't,x'")
    return Series([float(r[1]) for r in rows[1:] if r], spec_tag=f"csv:{Path(path).name}")
