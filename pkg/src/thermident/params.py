"""Tunable physical parameters and the disturbance vector layout.

The parameter vector bundles the seven global coefficients (surface
convection, solar absorption, window transmission) with one constant
background internal gain per zone, so a 6-zone building has 13 entries.
Disturbances are fixed at 6 channels: ambient temperature, supply air
temperature, and solar irradiance for the four cardinal orientations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SchemaError

# Air properties used throughout (mass flows are kg/s).
CP_AIR = 1005.0  # J/(kg K)
RHO_AIR = 1.2  # kg/m^3

# Disturbance vector channel indices.
V_TA = 0  # ambient air temperature, degC
V_TS = 1  # supply air temperature upstream of reheat coils, degC
V_SOL_E = 2
V_SOL_S = 3
V_SOL_W = 4
V_SOL_N = 5
N_DISTURBANCES = 6

ORIENTATIONS = ("E", "S", "W", "N")
SOLAR_CHANNEL = {"E": V_SOL_E, "S": V_SOL_S, "W": V_SOL_W, "N": V_SOL_N}

DISTURBANCE_NAMES = ("v_Ta", "v_Ts", "v_solE", "v_solS", "v_solW", "v_solN")

GLOBAL_PARAM_NAMES = (
    "gamma_ew",
    "gamma_iw",
    "gamma_floor",
    "gamma_ceil",
    "gamma_absorp",
    "gamma_win_sol_abs",
    "u_win",
)

PARAM_UNITS = {
    "gamma_ew": "W/(m^2 K)",
    "gamma_iw": "W/(m^2 K)",
    "gamma_floor": "W/(m^2 K)",
    "gamma_ceil": "W/(m^2 K)",
    "gamma_absorp": "-",
    "gamma_win_sol_abs": "-",
    "u_win": "W/(m^2 K)",
    "c_ig": "W/m^2",
}


def validate_disturbances(v: np.ndarray) -> np.ndarray:
    """Check a disturbance vector (or T x 6 sequence) and return it as float array."""
    arr = np.asarray(v, dtype=float)
    if arr.shape[-1] != N_DISTURBANCES:
        raise SchemaError(
            f"disturbance vector must have {N_DISTURBANCES} channels, got shape {arr.shape}"
        )
    if np.any(arr[..., V_SOL_E:] < 0):
        raise SchemaError("solar irradiance channels must be nonnegative")
    return arr


@dataclass
class ParameterVector:
    """The tunable physical parameters: 7 global coefficients + c_IG per zone.

    ``c_ig`` is keyed by zone id so the vector layout follows the zone order
    of the building description it is used with.
    """

    gamma_ew: float
    gamma_iw: float
    gamma_floor: float
    gamma_ceil: float
    gamma_absorp: float
    gamma_win_sol_abs: float
    u_win: float
    c_ig: dict[str, float] = field(default_factory=dict)

    def validate(self) -> None:
        for name in GLOBAL_PARAM_NAMES:
            if getattr(self, name) <= 0:
                raise SchemaError(f"parameter {name} must be > 0")
        for frac in ("gamma_absorp", "gamma_win_sol_abs"):
            if not 0.0 <= getattr(self, frac) <= 1.0:
                raise SchemaError(f"parameter {frac} must lie in [0, 1]")
        for zone, value in self.c_ig.items():
            if value <= 0:
                raise SchemaError(f"c_ig[{zone}] must be > 0")

    @property
    def zone_ids(self) -> list[str]:
        return list(self.c_ig.keys())

    def c_ig_array(self, zone_ids: list[str] | None = None) -> np.ndarray:
        ids = self.zone_ids if zone_ids is None else zone_ids
        try:
            return np.array([self.c_ig[z] for z in ids], dtype=float)
        except KeyError as exc:
            raise SchemaError(f"missing c_ig entry for zone {exc.args[0]!r}") from exc

    def as_array(self, zone_ids: list[str] | None = None) -> np.ndarray:
        head = np.array([getattr(self, n) for n in GLOBAL_PARAM_NAMES], dtype=float)
        return np.concatenate([head, self.c_ig_array(zone_ids)])

    @classmethod
    def from_array(cls, values: np.ndarray, zone_ids: list[str]) -> "ParameterVector":
        values = np.asarray(values, dtype=float)
        expected = len(GLOBAL_PARAM_NAMES) + len(zone_ids)
        if values.shape != (expected,):
            raise SchemaError(
                f"parameter array must have length {expected} "
                f"({len(GLOBAL_PARAM_NAMES)} global + one c_ig per zone), got {values.shape}"
            )
        head = dict(zip(GLOBAL_PARAM_NAMES, values[: len(GLOBAL_PARAM_NAMES)]))
        c_ig = dict(zip(zone_ids, values[len(GLOBAL_PARAM_NAMES):]))
        return cls(**head, c_ig=c_ig)

    def names(self, zone_ids: list[str] | None = None) -> list[str]:
        ids = self.zone_ids if zone_ids is None else zone_ids
        return list(GLOBAL_PARAM_NAMES) + [f"c_ig_{z}" for z in ids]

    def to_dict(self) -> dict:
        d = {n: getattr(self, n) for n in GLOBAL_PARAM_NAMES}
        d["c_ig"] = dict(self.c_ig)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ParameterVector":
        try:
            return cls(
                **{n: float(d[n]) for n in GLOBAL_PARAM_NAMES},
                c_ig={str(k): float(v) for k, v in d["c_ig"].items()},
            )
        except KeyError as exc:
            raise SchemaError(f"parameter file missing field {exc.args[0]!r}") from exc


@dataclass
class ParameterBounds:
    """Box constraints for identification, aligned with ParameterVector layout."""

    lower: ParameterVector
    upper: ParameterVector

    def arrays(self, zone_ids: list[str]) -> tuple[np.ndarray, np.ndarray]:
        lo = self.lower.as_array(zone_ids)
        hi = self.upper.as_array(zone_ids)
        if np.any(lo >= hi):
            raise SchemaError("each lower bound must be strictly below its upper bound")
        return lo, hi


def default_bounds(zone_ids: list[str]) -> ParameterBounds:
    """Physically plausible box constraints for office-type construction."""
    lower = ParameterVector(
        gamma_ew=1.0, gamma_iw=1.0, gamma_floor=1.0, gamma_ceil=1.0,
        gamma_absorp=0.01, gamma_win_sol_abs=0.001, u_win=0.1,
        c_ig={z: 0.01 for z in zone_ids},
    )
    upper = ParameterVector(
        gamma_ew=100.0, gamma_iw=100.0, gamma_floor=150.0, gamma_ceil=150.0,
        gamma_absorp=1.0, gamma_win_sol_abs=1.0, u_win=6.0,
        c_ig={z: 40.0 for z in zone_ids},
    )
    return ParameterBounds(lower, upper)
