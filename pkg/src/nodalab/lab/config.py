"""Experiment configuration: loading, validation and provenance hashing."""
from __future__ import annotations

import copy
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import DomainError
from ..solver.coefficients import PRESETS

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

__all__ = ["GridSpec", "ExperimentConfig", "SCENARIOS", "load_config", "default_config"]

SCENARIOS = ("example1", "example2", "angenent1d", "monotonicity_audit", "stratification",
             "dimension", "custom")


@dataclass
class GridSpec:
    h: float = 0.02
    tau: float = 1e-3
    bbox: list | None = None


@dataclass
class ExperimentConfig:
    """One reproducible experiment.

    ``times`` are the sampled output times; they must lie in
    ``[t_start, horizon]``.  ``params`` carries scenario-specific settings.
    """

    name: str
    scenario: str
    grid: GridSpec = field(default_factory=GridSpec)
    coefficients: str = "heat"
    coefficient_params: dict = field(default_factory=dict)
    times: list = field(default_factory=list)
    t_start: float = 0.0
    horizon: float | None = None
    tolerances: dict = field(default_factory=dict)
    output_dir: str | None = None
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.grid, dict):
            self.grid = GridSpec(**self.grid)
        self.validate()

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise DomainError(f"unknown scenario {self.scenario!r}; choose from {SCENARIOS}")
        if self.coefficients not in PRESETS:
            raise DomainError(f"unknown coefficient preset {self.coefficients!r}")
        if not (self.grid.h > 0 and self.grid.tau > 0):
            raise DomainError("grid spacing and time step must be positive")
        for key, val in self.tolerances.items():
            if not (isinstance(val, (int, float)) and val > 0):
                raise DomainError(f"tolerance {key!r} must be positive, got {val!r}")
        horizon = self.horizon if self.horizon is not None else max(self.times, default=self.t_start)
        for t in self.times:
            if not (self.t_start <= t <= horizon):
                raise DomainError(f"time sample {t} outside [{self.t_start}, {horizon}]")

    def tolerance(self, key: str, default: float) -> float:
        return float(self.tolerances.get(key, default))

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def config_hash(self) -> str:
        """Short SHA-256 of the canonical JSON form (output paths excluded)."""
        d = self.to_dict()
        d.pop("output_dir", None)
        blob = json.dumps(d, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def with_updates(self, **kw) -> "ExperimentConfig":
        d = copy.deepcopy(self.to_dict())
        for k, v in kw.items():
            if isinstance(v, dict) and isinstance(d.get(k), dict):
                d[k].update(v)
            else:
                d[k] = v
        return ExperimentConfig.from_mapping(d)

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise DomainError(f"unknown configuration keys {sorted(unknown)}")
        if "grid" in data and isinstance(data["grid"], dict):
            data["grid"] = GridSpec(**data["grid"])
        return cls(**data)


def load_config(path) -> ExperimentConfig:
    """Read a TOML (``.toml``) or JSON configuration file."""
    path = Path(path)
    text = path.read_bytes()
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(text.decode())
    elif path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        raise DomainError(f"configuration must be .toml or .json, got {path.name}")
    return ExperimentConfig.from_mapping(data)


_DEFAULTS = {
    "example1": dict(times=[0.0, 0.005, 0.01, 0.02], grid=dict(h=0.01, tau=1e-3),
                     tolerances={"r0": 1e-3, "f_value": 1e-9, "f_slope": 1e-6, "f_time": 1e-3}),
    "example2": dict(times=[0.0, 0.005, 0.01, 0.02], grid=dict(h=0.004, tau=2.5e-4),
                     tolerances={"cross_check": 1e-2},
                     params={"cartesian_h": 0.025, "cartesian_tau": 1e-3, "annulus": [2.5, 3.0]}),
    "angenent1d": dict(times=[], horizon=0.1, grid=dict(h=0.01, tau=1e-3),
                       coefficients="diagonal_random",
                       tolerances={"band": 1e-10},
                       params={"runs": 100, "modes": 6, "t_end": 0.1}),
    "monotonicity_audit": dict(coefficients="lipschitz_perturbation", coefficient_params={"lam": 0.05},
                               t_start=-0.05, times=[0.0], grid=dict(h=0.0125, tau=2e-3, bbox=[[-1, 1], [-1, 1]]),
                               tolerances={"eps": 0.05},
                               params={"centers": 5, "center_extent": 0.4, "radii": [0.02, 0.2], "n_radii": 12,
                                       "R0": 0.5, "fine_tau": 2.5e-4, "fine_window": 0.005, "order": 3}),
    "stratification": dict(times=[0.005, 0.02], grid=dict(h=0.01, tau=1e-3, bbox=[[-1.5, 1.5], [-1.5, 1.5]]),
                           tolerances={"eta": 0.1}, params={"max_scale": 0.4}),
    "dimension": dict(times=[0.0, 0.025, 0.05, 0.075, 0.1], grid=dict(h=0.02, tau=2e-3),
                      tolerances={"band": 0.15},
                      params={"radius": 2.0, "initial": "sign_changing", "scales": [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]}),
    "custom": dict(times=[0.0, 0.1], grid=dict(h=0.05, tau=5e-3, bbox=[[-1, 1], [-1, 1]]),
                   params={"initial": {"kind": "random_caloric", "order": 3}}),
}


def default_config(scenario: str, **overrides) -> ExperimentConfig:
    """Built-in configuration of a scenario, with optional top-level overrides."""
    if scenario not in _DEFAULTS:
        raise DomainError(f"unknown scenario {scenario!r}")
    d = copy.deepcopy(_DEFAULTS[scenario])
    d.setdefault("name", scenario)
    d["scenario"] = scenario
    for k, v in overrides.items():
        if isinstance(v, dict) and isinstance(d.get(k), dict):
            d[k].update(v)
        else:
            d[k] = v
    return ExperimentConfig.from_mapping(d)
