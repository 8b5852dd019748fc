"""JSON run configuration: model description, precision, solver and Monte Carlo settings.

A configuration is a JSON object with ``"schema": 1``.  Laws are objects
``{"law": <name>, ...parameters}`` resolved through :data:`LAWS`.  Example::

    {"schema": 1,
     "model": {"variant": "cramer_lundberg",
               "premium": {"law": "degenerate", "value": 1.3035},
               "claim": {"law": "gig", "k": 0.139866}},
     "epsilon": 0.011, "split": 1.0, "bound": "yang", "barrier": 4.5}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import distributions as D
from .errors import ConfigError
from .models import CramerLundberg, InterestRate, RiskModel, binomial_interest_distribution

SCHEMA_VERSION = 1


def _discrete(values, probs, name="discrete"):
    return D.DiscreteLaw(values, probs, name=name)


LAWS = {
    "degenerate": D.degenerate,
    "two_point": D.two_point,
    "discrete": _discrete,
    "exponential": D.exponential,
    "uniform": D.uniform,
    "gaussian": D.gaussian,
    "pareto": D.pareto,
    "two_sided_exponential": D.TwoSidedExponential,
    "gig": D.GIGClaimLaw,
    "heavytail": D.HeavyTailIncrement,
    "binomial": binomial_interest_distribution,
}

BOUNDS = ("auto", "lundberg", "korshunov", "yang")
SOLVERS = ("fredholm", "grid")


def build_law(entry: dict) -> D.Distribution:
    if not isinstance(entry, dict) or "law" not in entry:
        raise ConfigError(f"law entry must be an object with a 'law' key, got {entry!r}")
    params = {k: v for k, v in entry.items() if k != "law"}
    try:
        factory = LAWS[entry["law"]]
    except KeyError:
        raise ConfigError(f"unknown law {entry['law']!r}; known: {', '.join(sorted(LAWS))}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for law {entry['law']!r}: {exc}") from None


def build_model(entry: dict) -> RiskModel:
    variant = entry.get("variant", "cramer_lundberg")
    try:
        if variant == "cramer_lundberg":
            if "increment" in entry:
                return CramerLundberg(build_law(entry["increment"]))
            return CramerLundberg.from_premium_claim(build_law(entry["premium"]), build_law(entry["claim"]))
        if variant == "interest_rate":
            return InterestRate(
                build_law(entry["premium"]),
                build_law(entry["claim"]),
                build_law(entry["interest"]),
                float(entry.get("alpha", 0.0)),
            )
    except KeyError as exc:
        raise ConfigError(f"model entry for {variant!r} is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid model entry: {exc}") from None
    raise ConfigError(f"unknown model variant {variant!r}")


@dataclass(frozen=True)
class Validation:
    points: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0)
    interest_points: tuple[float, ...] = (0.0,)
    trials: int = 2000
    horizon: int = 2000
    seed: int = 20240101
    level: float = 0.95


@dataclass(frozen=True)
class RunConfig:
    model: dict
    epsilon: float = 0.1
    split: float = 0.5
    bound: str = "auto"
    gamma: float = 2.0
    barrier: float | None = None
    solver: str | None = None
    nodes: int = 256
    tolerance: float = 1e-5
    cells: int = 400
    eps_iter: float = 1e-8
    j: float | None = None
    beta: float = 0.5
    curve_max: float | None = None
    curve_points: int = 91
    validation: Validation = field(default_factory=Validation)
    out: str = "results"
    name: str = "run"

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.split <= 1.0:
            raise ConfigError(f"split must lie in (0, 1], got {self.split}")
        if self.bound not in BOUNDS:
            raise ConfigError(f"bound must be one of {BOUNDS}, got {self.bound!r}")
        if self.solver is not None and self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.barrier is not None and not self.barrier > 0:
            raise ConfigError("barrier must be positive")
        v = self.validation
        if v.trials < 1 or v.horizon < 1:
            raise ConfigError("validation trials and horizon must be at least 1")

    def build_model(self) -> RiskModel:
        return build_model(self.model)

    def solver_for(self, model: RiskModel) -> str:
        """The requested solver, or the grid when the model has interest or no increment density."""
        if self.solver is not None:
            return self.solver
        if isinstance(model, InterestRate) or not model.increment.has_density:
            return "grid"
        return "fredholm"

    def with_overrides(self, **kw) -> "RunConfig":
        """Copy with the non-None keyword values replaced (validation keys go to ``validation``)."""
        vkeys = {f.name for f in fields(Validation)}
        vk = {k: v for k, v in kw.items() if k in vkeys and v is not None}
        top = {k: v for k, v in kw.items() if k not in vkeys and v is not None}
        return replace(self, validation=replace(self.validation, **vk), **top)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["validation"] = {f.name: getattr(self.validation, f.name) for f in fields(Validation)}
        d["validation"]["points"] = list(self.validation.points)
        d["validation"]["interest_points"] = list(self.validation.interest_points)
        d["schema"] = SCHEMA_VERSION
        return d


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"unsupported or missing schema version {doc.get('schema')!r}; expected {SCHEMA_VERSION}")
    if "model" not in doc:
        raise ConfigError("configuration needs a 'model' entry")
    known = {f.name for f in fields(RunConfig)}
    extra = set(doc) - known - {"schema"}
    if extra:
        raise ConfigError(f"unknown configuration keys: {', '.join(sorted(extra))}")
    kw = {k: v for k, v in doc.items() if k != "schema"}
    if "validation" in kw:
        vdoc = dict(kw["validation"])
        vknown = {f.name for f in fields(Validation)}
        if set(vdoc) - vknown:
            raise ConfigError(f"unknown validation keys: {', '.join(sorted(set(vdoc) - vknown))}")
        for key in ("points", "interest_points"):
            if key in vdoc:
                vdoc[key] = tuple(float(x) for x in vdoc[key])
        kw["validation"] = Validation(**vdoc)
    cfg = RunConfig(**kw)
    cfg.build_model()  # fail early on bad law specs
    return cfg


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(doc)
