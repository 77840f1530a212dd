"""Experiment configuration: one flat JSON document plus a model object.

Unknown keys are errors, both at the top level and inside ``model``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..estimators import VARIANTS
from ..processes import AR1Spec, ArchSpec, HeteroAR1Spec, TauSchedule
from ..rand_weights import ErrorDist, WeightScheme

EXPERIMENTS = (
    "ar1_bootstrap_comparison",
    "hetero_bootstrap_comparison",
    "arch_estimator_comparison",
    "arch_bootstrap_consistency",
    "limit_law_check",
)

MODEL_TYPES = {
    "ar1_bootstrap_comparison": ("ar1",),
    "hetero_bootstrap_comparison": ("hetero_ar1",),
    "arch_estimator_comparison": ("arch",),
    "arch_bootstrap_consistency": ("arch",),
    "limit_law_check": ("ar1", "hetero_ar1"),
}

AR_ESTIMATORS = ("lse", "lad", "wlse", "wlad")
AR_BOOTSTRAPS = ("rb", "wb")
ARCH_BOOTSTRAPS = ("rb", "mn_rb", "wb")
WEIGHT_SCHEMES = ("multinomial", "iid_normal", "constant")

_MODEL_KEYS = {
    "ar1": {"type", "theta", "sigma", "error"},
    "hetero_ar1": {"type", "theta", "error", "schedule", "sigma1_sq", "sigma2_sq", "tau", "c", "alpha"},
    "arch": {"type", "c0", "b", "error"},
}


class ConfigError(ValueError):
    pass


def _require(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _count(name, v):
    _require(isinstance(v, int) and not isinstance(v, bool) and v >= 1, f"{name} must be an integer >= 1, got {v!r}")
    return v


def _real(model, key, default=None):
    v = model.get(key, default)
    _require(isinstance(v, (int, float)) and not isinstance(v, bool), f"model.{key} must be a number, got {v!r}")
    return float(v)


def build_model(model: dict):
    """AR1Spec / HeteroAR1Spec / ArchSpec from the flat model object."""
    _require(isinstance(model, dict), "model must be a JSON object")
    kind = model.get("type")
    _require(kind in _MODEL_KEYS, f"model.type must be one of {sorted(_MODEL_KEYS)}, got {kind!r}")
    unknown = set(model) - _MODEL_KEYS[kind]
    _require(not unknown, f"unknown model keys for {kind}: {sorted(unknown)}")
    try:
        error = ErrorDist.parse(model.get("error", "normal"))
        if kind == "ar1":
            return AR1Spec(_real(model, "theta"), _real(model, "sigma", 1.0), error)
        if kind == "hetero_ar1":
            sched = model.get("schedule", "two_period")
            if sched == "two_period":
                schedule = TauSchedule.two_period_variances(_real(model, "sigma1_sq"), _real(model, "sigma2_sq"))
            elif sched == "constant":
                schedule = TauSchedule.constant(_real(model, "tau", 1.0))
            elif sched == "power":
                schedule = TauSchedule.power(_real(model, "c", 1.0), _real(model, "alpha"))
            else:
                raise ConfigError(f"model.schedule must be two_period, constant or power, got {sched!r}")
            return HeteroAR1Spec(_real(model, "theta"), schedule, error)
        b = model.get("b")
        b = [b] if isinstance(b, (int, float)) else b
        _require(isinstance(b, list) and b, "model.b must be a number or a non-empty list")
        return ArchSpec(_real(model, "c0"), tuple(float(v) for v in b), error)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid model: {exc}") from None


@dataclass
class ExperimentConfig:
    experiment: str
    model: dict
    n: int
    master_seed: int
    B: int = 200
    mc_replicates: int = 200
    m: int | None = None
    weight_scheme: str = "multinomial"
    weight_variance: float = 1.0
    estimators: list[str] | None = None
    bootstraps: list[str] | None = None
    error_dists: list[str] | None = None
    output_dir: str = "out"
    fresh_series_per_replicate: bool = False
    grid_size: int = 512
    spec: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        _require(self.experiment in EXPERIMENTS, f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        self.spec = build_model(self.model)
        allowed = MODEL_TYPES[self.experiment]
        _require(self.model["type"] in allowed, f"{self.experiment} needs model.type in {allowed}")
        for name in ("n", "B", "mc_replicates", "grid_size"):
            _count(name, getattr(self, name))
        _require(
            isinstance(self.master_seed, int) and not isinstance(self.master_seed, bool) and self.master_seed >= 0,
            "master_seed must be a non-negative integer",
        )
        _require(self.weight_scheme in WEIGHT_SCHEMES, f"weight_scheme must be one of {WEIGHT_SCHEMES}")
        _require(
            isinstance(self.weight_variance, (int, float)) and self.weight_variance > 0,
            "weight_variance must be positive",
        )
        _require(isinstance(self.fresh_series_per_replicate, bool), "fresh_series_per_replicate must be true/false")
        is_arch = self.model["type"] == "arch"

        if self.estimators is None:
            self.estimators = {
                "arch_estimator_comparison": list(VARIANTS),
                "arch_bootstrap_consistency": ["gaussian_nll", "lade2"],
            }.get(self.experiment, ["lse"])
        valid = VARIANTS if is_arch else AR_ESTIMATORS
        if self.experiment == "arch_bootstrap_consistency":
            valid = ("gaussian_nll", "lade2")
        if self.experiment in ("ar1_bootstrap_comparison", "hetero_bootstrap_comparison"):
            valid = ("lse", "lad")
        self._names("estimators", valid)
        if self.experiment == "limit_law_check" and self.model["type"] == "hetero_ar1":
            no_law = sorted(set(self.estimators) & {"lad", "wlad"})
            _require(not no_law, f"no heteroscedastic limit law is available for {no_law}")

        if self.bootstraps is None:
            self.bootstraps = list(ARCH_BOOTSTRAPS if is_arch else AR_BOOTSTRAPS)
        self._names("bootstraps", ARCH_BOOTSTRAPS if is_arch else AR_BOOTSTRAPS)

        if self.error_dists is None:
            self.error_dists = [self.model.get("error", "normal")]
        _require(isinstance(self.error_dists, list) and self.error_dists, "error_dists must be a non-empty list")
        for d in self.error_dists:
            try:
                ErrorDist.parse(d)
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"error_dists: {exc}") from None

        if is_arch:
            p = self.spec.p
            _require(self.n >= p + 20, f"ARCH({p}) needs n >= {p + 20}")
            if self.m is None:
                self.m = self.n
            _count("m", self.m)
            _require(p + 20 <= self.m <= self.n, f"need {p + 20} <= m <= n")
        else:
            _require(self.n >= 3, "AR(1) experiments need n >= 3")
            _require(self.m is None, "m applies to ARCH experiments only")

    def _names(self, key, valid):
        vals = getattr(self, key)
        _require(isinstance(vals, list) and vals, f"{key} must be a non-empty list")
        bad = [v for v in vals if v not in valid]
        _require(not bad, f"{key}: unknown {bad}; choose from {list(valid)}")
        _require(len(set(vals)) == len(vals), f"{key} has duplicates")

    def scheme(self, n: int) -> WeightScheme:
        if self.weight_scheme == "iid_normal":
            return WeightScheme.iid_normal(n, self.weight_variance)
        return WeightScheme(self.weight_scheme, n)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _require(isinstance(data, dict), "config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__ if f != "spec"}
        unknown = set(data) - known
        _require(not unknown, f"unknown config keys: {sorted(unknown)}")
        missing = {"experiment", "model", "n", "master_seed"} - set(data)
        _require(not missing, f"missing config keys: {sorted(missing)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        """Experimental settings with defaults filled in; the output location is not one of them."""
        d = asdict(self)
        d.pop("spec")
        d.pop("output_dir")
        return d
