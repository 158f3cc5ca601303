"""JSON experiment configuration.

Example::

    {
      "space": {"basis": "legendre", "n": 4},
      "target": {"name": "exp"},
      "pipelines": ["conditioned", "subsampled", "bss", "greedy_removed"],
      "m": "budget(0.5)",
      "sparsify": {"strategy": "randomized", "c": 2.0},
      "trials": 100,
      "seed": 0
    }

``m`` is an integer, the string ``"budget(eps)"``, or an object mapping
pipeline names to either form. Unknown keys are rejected everywhere.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Union

from .estimator import PIPELINES, TrialParams
from .errors import WLSError
from .sampling import minimal_budget
from .sparsify import STRATEGIES
from .spaces import BASES, FunctionSpace
from .targets import BUILTINS


class ConfigError(WLSError, ValueError):
    """Malformed or inconsistent experiment configuration."""


_BUDGET = re.compile(r"^\s*budget\(\s*([0-9.eE+-]+)\s*\)\s*$")


def parse_m_rule(rule):
    """Return ``(m, epsilon)`` with exactly one of them set."""
    if isinstance(rule, bool):
        raise ConfigError(f"invalid m rule {rule!r}")
    if isinstance(rule, int):
        if rule < 1:
            raise ConfigError("m must be positive")
        return rule, None
    if isinstance(rule, str):
        match = _BUDGET.match(rule)
        if match:
            eps = float(match.group(1))
            if not 0 < eps < 1:
                raise ConfigError("budget epsilon must lie in (0, 1)")
            return None, eps
    raise ConfigError(f"m must be an integer or 'budget(eps)', got {rule!r}")


@dataclass
class SpaceConfig:
    basis: str = "legendre"
    n: int = 4
    quadrature_order: int = 64

    def build(self):
        return FunctionSpace(self.basis, self.n, self.quadrature_order)


@dataclass
class TargetConfig:
    name: Optional[str] = "exp"
    k: int = 2
    complex: bool = False
    seed: int = 0
    coeffs: Optional[List[Union[float, List[float]]]] = None


@dataclass
class SparsifyConfig:
    strategy: str = "randomized"
    c: float = 2.0
    lambda_floor: float = 0.5
    trial_budget: int = 10**4
    move_budget: int = 10**4
    theta: float = 1.0


@dataclass
class ExperimentConfig:
    space: SpaceConfig = field(default_factory=SpaceConfig)
    target: TargetConfig = field(default_factory=TargetConfig)
    pipelines: List[str] = field(default_factory=lambda: ["conditioned"])
    m: Union[int, str, Dict[str, Union[int, str]]] = "budget(0.5)"
    sparsify: SparsifyConfig = field(default_factory=SparsifyConfig)
    trials: int = 100
    seed: int = 0
    max_redraws: int = 1000
    output_path: Optional[str] = None

    def m_for(self, pipeline):
        rule = self.m.get(pipeline, "budget(0.5)") if isinstance(self.m, dict) else self.m
        return parse_m_rule(rule)

    def resolved_m(self, pipeline):
        m, eps = self.m_for(pipeline)
        return m if m is not None else minimal_budget(self.space.n, eps)

    def params(self, pipeline):
        m, eps = self.m_for(pipeline)
        s = self.sparsify
        return TrialParams(
            m=m, epsilon=eps if eps is not None else 0.5, strategy=s.strategy, theta=s.theta,
            trial_budget=s.trial_budget, move_budget=s.move_budget, c=s.c,
            lambda_floor=s.lambda_floor, max_redraws=self.max_redraws,
        )

    def as_dict(self):
        return asdict(self)


def _section(cls, data, where):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    known = set(cls.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}")
    return cls(**data)


def parse_config(data: dict) -> ExperimentConfig:
    """Validate a decoded JSON document and build an :class:`ExperimentConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = dict(data)
    if "pipeline" in data:
        if "pipelines" in data:
            raise ConfigError("give either 'pipeline' or 'pipelines', not both")
        data["pipelines"] = [data.pop("pipeline")]
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown field(s) in config: {', '.join(unknown)}")
    cfg = ExperimentConfig(
        space=_section(SpaceConfig, data.pop("space", None), "space"),
        target=_section(TargetConfig, data.pop("target", None), "target"),
        sparsify=_section(SparsifyConfig, data.pop("sparsify", None), "sparsify"),
        **data,
    )
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    if cfg.space.basis not in BASES:
        raise ConfigError(f"unknown basis {cfg.space.basis!r}")
    try:
        cfg.space.build()
    except WLSError as exc:
        raise ConfigError(str(exc)) from exc
    if isinstance(cfg.pipelines, str):
        cfg.pipelines = [cfg.pipelines]
    if not cfg.pipelines:
        raise ConfigError("at least one pipeline is required")
    for p in cfg.pipelines:
        if p not in PIPELINES:
            raise ConfigError(f"unknown pipeline {p!r}; expected one of {PIPELINES}")
        cfg.m_for(p)
    if isinstance(cfg.m, dict):
        for p in cfg.m:
            if p not in PIPELINES:
                raise ConfigError(f"m given for unknown pipeline {p!r}")
    if cfg.target.coeffs is None and cfg.target.name not in BUILTINS:
        raise ConfigError(f"unknown target {cfg.target.name!r}; expected one of {BUILTINS}")
    if cfg.sparsify.strategy not in STRATEGIES:
        raise ConfigError(f"unknown strategy {cfg.sparsify.strategy!r}")
    if not 0 < cfg.sparsify.theta <= 1:
        raise ConfigError("theta must lie in (0, 1]")
    if cfg.sparsify.c <= 1:
        raise ConfigError("c must exceed 1")
    if not isinstance(cfg.trials, int) or cfg.trials < 1:
        raise ConfigError("trials must be a positive integer")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool):
        raise ConfigError("seed must be an integer")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data)
