"""Run configuration: one JSON file, CLI-overridable, content-hashed.

Every CLI output embeds the hash of the effective configuration so that
re-runs with identical config and seeds are byte-identical and mixed-up
artifacts are detectable.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import ConfigError
from .evaluate import config_hash
from .identify import OptimizerSettings
from .params import ParameterVector
from .simulate import KalmanNoise


@dataclass
class RunConfig:
    building: str = "twin"  # path to a description JSON, or the builtin twin
    output_dir: str = "thermident-out"
    dt: float = 900.0
    nodes_per_element: int = 2
    kalman: KalmanNoise = field(default_factory=KalmanNoise)
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)
    gamma0: dict | None = None  # ParameterVector dict; None = package default guess
    seed: int = 0
    horizon: int = 96
    cadence: str = "daily"

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    def hash(self) -> str:
        return config_hash(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        kalman = KalmanNoise(**d.pop("kalman", {}))
        optimizer = OptimizerSettings(**d.pop("optimizer", {}))
        try:
            return cls(kalman=kalman, optimizer=optimizer, **d)
        except TypeError as exc:
            raise ConfigError(f"unknown config field: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls()
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            return cls.from_dict(json.loads(p.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc

    def gamma0_vector(self, zone_ids: list[str]) -> ParameterVector:
        if self.gamma0 is not None:
            return ParameterVector.from_dict(self.gamma0)
        return ParameterVector(
            gamma_ew=8.0,
            gamma_iw=20.0,
            gamma_floor=35.0,
            gamma_ceil=30.0,
            gamma_absorp=0.6,
            gamma_win_sol_abs=0.05,
            u_win=1.0,
            c_ig={z: 5.0 for z in zone_ids},
        )
