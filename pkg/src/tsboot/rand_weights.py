"""Random streams, innovation laws and exchangeable bootstrap weights.

Every random draw in the package goes through an :class:`RngStream`.  A
stream is a value: ``(master_seed, path)``.  Child streams are derived by
appending an index to the path, and the generator for a stream is built
from ``numpy.random.SeedSequence(master_seed, spawn_key=path)`` feeding a
PCG64 bit generator.  Both pieces are covered by numpy's stream
compatibility policy, so a given ``(master_seed, path)`` yields the same
numbers on every platform.  ``STREAM_VERSION`` is bumped if this mapping
ever changes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

STREAM_VERSION = 1

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed <= _U64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")
        if any(k < 0 for k in self.path):
            raise ValueError("stream path entries must be non-negative")
        object.__setattr__(self, "path", tuple(int(k) for k in self.path))

    def child(self, *index: int) -> "RngStream":
        return RngStream(self.master_seed, self.path + tuple(index))

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at the start of this stream."""
        ss = np.random.SeedSequence(self.master_seed, spawn_key=self.path)
        return np.random.Generator(np.random.PCG64(ss))


def as_generator(stream: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return stream.generator()


# ---------------------------------------------------------------------------
# Innovation laws (mean 0, variance 1)
# ---------------------------------------------------------------------------

_ERROR_KINDS = ("standard_normal", "student_t_standardized", "double_exponential_unit")

_ERROR_ALIASES = {
    "normal": "standard_normal",
    "gaussian": "standard_normal",
    "standard_normal": "standard_normal",
    "laplace": "double_exponential_unit",
    "double_exponential": "double_exponential_unit",
    "double_exponential_unit": "double_exponential_unit",
    "student_t": "student_t_standardized",
    "t": "student_t_standardized",
    "student_t_standardized": "student_t_standardized",
}


@dataclass(frozen=True)
class ErrorDist:
    """Zero-mean, unit-variance innovation law.

    ``student_t_standardized`` is a t(df) variate scaled by
    ``sqrt((df - 2) / df)``; ``double_exponential_unit`` is the Laplace law
    with density ``exp(-sqrt(2) |x|) / sqrt(2)``.
    """

    kind: str = "standard_normal"
    df: int | None = None

    def __post_init__(self):
        if self.kind not in _ERROR_KINDS:
            raise ValueError(f"unknown error law {self.kind!r}")
        if self.kind == "student_t_standardized":
            if self.df is None or int(self.df) != self.df or self.df <= 2:
                raise ValueError("standardized Student t needs integer df >= 3")
        elif self.df is not None:
            raise ValueError(f"{self.kind} takes no degrees of freedom")

    @classmethod
    def parse(cls, text: str) -> "ErrorDist":
        """Parse ``"normal"``, ``"t3"``, ``"student_t:4"``, ``"laplace"`` and the canonical names."""
        s = text.strip().lower()
        if s.startswith("t") and s[1:].isdigit():
            return cls("student_t_standardized", int(s[1:]))
        name, _, arg = s.partition(":")
        kind = _ERROR_ALIASES.get(name)
        if kind is None:
            raise ValueError(f"unknown error law {text!r}")
        if kind == "student_t_standardized":
            if not arg.isdigit():
                raise ValueError(f"Student t law needs degrees of freedom, e.g. 't3', got {text!r}")
            return cls(kind, int(arg))
        if arg:
            raise ValueError(f"{kind} takes no argument, got {text!r}")
        return cls(kind)

    @property
    def label(self) -> str:
        if self.kind == "student_t_standardized":
            return f"t{self.df}"
        return {"standard_normal": "normal", "double_exponential_unit": "laplace"}[self.kind]

    def density_at_zero(self) -> float:
        """Density of the unit-variance law at 0 (enters the LAD limit variance)."""
        if self.kind == "standard_normal":
            return 1.0 / np.sqrt(2.0 * np.pi)
        if self.kind == "double_exponential_unit":
            return 1.0 / np.sqrt(2.0)
        from scipy import stats

        scale = np.sqrt((self.df - 2) / self.df)
        return float(stats.t.pdf(0.0, self.df) / scale)

    def median_of_square(self) -> float:
        """Median of eps**2; LAD-type ARCH fits estimate parameters scaled by this."""
        from scipy import stats

        if self.kind == "standard_normal":
            return float(stats.norm.ppf(0.75) ** 2)
        if self.kind == "double_exponential_unit":
            return float((np.log(2.0) / np.sqrt(2.0)) ** 2)
        scale = np.sqrt((self.df - 2) / self.df)
        return float((stats.t.ppf(0.75, self.df) * scale) ** 2)

    def sample(self, rng: np.random.Generator, size=None) -> np.ndarray:
        if self.kind == "standard_normal":
            return rng.standard_normal(size)
        if self.kind == "double_exponential_unit":
            return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size)
        return rng.standard_t(self.df, size) * np.sqrt((self.df - 2) / self.df)


def draw_error(stream: RngStream | np.random.Generator, dist: ErrorDist, size=None):
    """Draw from a unit-variance innovation law.

    Returns a float when ``size`` is None, an array otherwise.  Callers needing
    scale ``sigma`` multiply the result.
    """
    out = dist.sample(as_generator(stream), size)
    return float(out) if size is None else out


def resample_with_replacement(
    stream: RngStream | np.random.Generator, values: Sequence[float], m: int
) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("cannot resample from an empty sequence")
    if m < 1:
        raise ValueError(f"resample size must be >= 1, got {m}")
    idx = as_generator(stream).integers(0, values.size, size=m)
    return values[idx]


# ---------------------------------------------------------------------------
# Exchangeable weights
# ---------------------------------------------------------------------------


_WEIGHT_KINDS = ("multinomial", "iid_normal", "constant")


@dataclass(frozen=True)
class WeightMoments:
    mean: float
    var: float
    cov: float
    fourth_central: float | None


@dataclass(frozen=True)
class WeightScheme:
    """Row-exchangeable bootstrap weights of length ``n``.

    kinds
        ``multinomial``: Mult(n; 1/n, ..., 1/n) counts.
        ``iid_normal``: independent Normal(1, variance) weights; these may
        be negative.
        ``constant``: every weight equal to 1.  Only useful as a degenerate
        fixture; its pivot scale is defined as 1.
    """

    kind: str
    n: int
    variance: float = 1.0

    def __post_init__(self):
        if self.kind not in _WEIGHT_KINDS:
            raise ValueError(f"unknown weight scheme {self.kind!r}")
        if self.n < 2:
            raise ValueError(f"weight rows need n >= 2, got {self.n}")
        if self.kind == "iid_normal" and not self.variance > 0:
            raise ValueError("iid weights need a positive variance")

    @classmethod
    def multinomial(cls, n: int) -> "WeightScheme":
        return cls("multinomial", n)

    @classmethod
    def iid_normal(cls, n: int, variance: float = 1.0) -> "WeightScheme":
        return cls("iid_normal", n, variance)

    @classmethod
    def constant(cls, n: int) -> "WeightScheme":
        return cls("constant", n)

    def resized(self, n: int) -> "WeightScheme":
        return WeightScheme(self.kind, n, self.variance)

    @property
    def non_negative(self) -> bool:
        return self.kind != "iid_normal"

    @property
    def pivot_scale(self) -> float:
        """sigma_n used to studentize bootstrap pivots (analytic, never empirical)."""
        v = weight_moments(self).var
        return float(np.sqrt(v)) if v > 0 else 1.0


def weight_moments(scheme: WeightScheme) -> WeightMoments:
    """Analytic moments of a single weight and of a pair of weights.

    For multinomial rows w1 ~ Binomial(n, p) with p = 1/n, so
    E(w1 - 1)^4 = n(p q^4 + p^4 q) + 3 n (n - 1) p^2 q^2.  The closed form
    (1 - 1/n)(4 - 9/n + 6/n^2 + 2/n^3) sometimes quoted for this quantity is
    wrong (n = 2 gives 0.625; enumeration gives 0.5) and is not used.
    """
    n = scheme.n
    if scheme.kind == "multinomial":
        p = 1.0 / n
        q = 1.0 - p
        fourth = n * (p * q**4 + p**4 * q) + 3.0 * n * (n - 1) * p**2 * q**2
        return WeightMoments(1.0, 1.0 - p, -p, fourth)
    if scheme.kind == "iid_normal":
        s2 = float(scheme.variance)
        return WeightMoments(1.0, s2, 0.0, 3.0 * s2**2)
    return WeightMoments(1.0, 0.0, 0.0, 0.0)


def generate_weights(
    stream: RngStream | np.random.Generator, scheme: WeightScheme, rows: int | None = None
) -> np.ndarray:
    """One weight row (or ``rows`` rows stacked) drawn from ``scheme``.

    Multinomial rows are tallies of n independent uniform category draws.
    """
    rng = as_generator(stream)
    n = scheme.n
    shape = (n,) if rows is None else (rows, n)
    if scheme.kind == "constant":
        return np.ones(shape)
    if scheme.kind == "iid_normal":
        return 1.0 + np.sqrt(scheme.variance) * rng.standard_normal(shape)
    k = 1 if rows is None else rows
    cats = rng.integers(0, n, size=(k, n))
    offs = (np.arange(k) * n)[:, None]
    counts = np.bincount((cats + offs).ravel(), minlength=k * n).reshape(k, n).astype(float)
    return counts[0] if rows is None else counts
