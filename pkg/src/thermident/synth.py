"""Synthetic ground-truth data generation for the twin building.

Weather is a daily sinusoid plus slow drift for the ambient temperature,
half-sine daytime irradiance per facade orientation with per-day cloud
factors, and a nearly constant supply air temperature. Internal gains
follow an occupancy shape (morning ramp, early-afternoon peak, evening
decay, attenuated weekends) with per-week and per-day random scaling and
smooth in-day noise. Airflows come either from an excitation schedule or
from a simple proportional cooling controller tracking a setpoint.

Everything is deterministic for a given seed; the generated dataset stores
the ground-truth state and internal-gains trajectories for use as oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .building import BuildingDescription
from .dataset import STEP_SECONDS, STEPS_PER_DAY, TimeSeriesDataset
from .excitation import generate_excitation
from .igprofile import InternalGainsProfile
from .params import (
    N_DISTURBANCES,
    V_SOL_E,
    V_SOL_N,
    V_SOL_S,
    V_SOL_W,
    V_TA,
    V_TS,
    ParameterVector,
)
from .rcmodel import DiscreteModel, build_discrete_model

_SPINUP_DAYS = 2  # hidden settling days stripped from the returned dataset


@dataclass
class WeatherConfig:
    base_temp: float = 14.0  # degC daily mean ambient
    daily_amplitude: float = 5.5
    drift_std: float = 0.5  # slow ambient drift (stationary std)
    supply_temp: float = 13.0
    cloud_min: float = 0.55
    solar_peaks: dict = field(
        default_factory=lambda: {"E": 500.0, "S": 650.0, "W": 500.0, "N": 130.0}
    )


@dataclass
class IGConfig:
    amplitudes: dict = field(
        default_factory=lambda: {"NW": 9.0, "W": 11.0, "S": 6.0, "E": 11.0, "NE": 8.0, "C": 12.0}
    )
    weekly_sigma: dict = field(
        default_factory=lambda: {"NW": 0.60, "W": 0.40, "S": 0.40, "E": 0.40, "NE": 0.40, "C": 0.40}
    )
    day_sigma: float = 0.20
    weekend_factor: float = 0.45
    noise_std: float = 1.2  # W/m^2, smooth in-day noise
    noise_tau_steps: float = 8.0


@dataclass
class NoiseConfig:
    meas_std: float = 0.0  # degC on zone temperature measurements
    process_room_std: float = 0.0  # degC per step on room states
    process_mass_std: float = 0.0


@dataclass
class ControllerConfig:
    """Proportional cooling control to a setpoint with airflow saturation."""

    setpoint_occupied: float = 21.5
    setpoint_night: float = 25.0
    occupied_start_hour: int = 7
    occupied_end_hour: int = 19
    gain_per_kelvin: float = 0.6


def _hours(t: np.ndarray) -> np.ndarray:
    day = t.astype("datetime64[D]")
    return (t - day).astype(int) / 3600.0


def _weekdays(t: np.ndarray) -> np.ndarray:
    return (t.astype("datetime64[D]").astype(int) + 3) % 7


def generate_weather(t: np.ndarray, seed: int, config: WeatherConfig | None = None) -> np.ndarray:
    """Disturbance matrix (T, 6) for the given timestamps."""
    config = config or WeatherConfig()
    rng = np.random.default_rng([int(seed), 11])
    T = len(t)
    hours = _hours(t)
    v = np.zeros((T, N_DISTURBANCES))

    phase = 2 * np.pi * (hours - 9.0) / 24.0
    drift = np.empty(T)
    phi = 0.995
    sigma = config.drift_std * np.sqrt(1 - phi**2)
    drift[0] = config.drift_std * rng.standard_normal()
    for k in range(1, T):
        drift[k] = phi * drift[k - 1] + sigma * rng.standard_normal()
    v[:, V_TA] = config.base_temp + config.daily_amplitude * np.sin(phase) + drift

    v[:, V_TS] = config.supply_temp + 0.1 * rng.standard_normal(T)

    windows = {"E": (6.5, 13.5), "S": (8.0, 17.0), "W": (12.5, 19.5), "N": (7.0, 19.0)}
    channels = {"E": V_SOL_E, "S": V_SOL_S, "W": V_SOL_W, "N": V_SOL_N}
    day_index = t.astype("datetime64[D]").astype(int)
    unique_days = np.unique(day_index)
    clouds = {
        int(d): float(np.random.default_rng([int(seed), 13, int(d)]).uniform(config.cloud_min, 1.0))
        for d in unique_days
    }
    cloud = np.array([clouds[int(d)] for d in day_index])
    for orient, (h0, h1) in windows.items():
        inside = (hours >= h0) & (hours <= h1)
        profile = np.where(inside, np.sin(np.pi * (hours - h0) / (h1 - h0)), 0.0)
        v[:, channels[orient]] = np.clip(config.solar_peaks[orient] * cloud * profile, 0.0, None)
    return v


def _occupancy_shape(hours: np.ndarray) -> np.ndarray:
    """Weekday occupancy shape, peaking early afternoon, normalized to max 1."""

    def smoothstep(x):
        x = np.clip(x, 0.0, 1.0)
        return x * x * (3 - 2 * x)

    up = smoothstep((hours - 7.0) / 2.5)
    down = 1.0 - smoothstep((hours - 16.5) / 5.0)
    bump = 0.75 + 0.35 * np.exp(-((hours - 13.5) ** 2) / (2 * 2.0**2))
    shape = up * down * bump
    return shape / 1.1


def generate_internal_gains(
    t: np.ndarray, zone_ids: list[str], seed: int, config: IGConfig | None = None
) -> np.ndarray:
    """Time-varying internal gains f_IG (T, nz) in W/m^2, nonnegative."""
    config = config or IGConfig()
    hours = _hours(t)
    weekdays = _weekdays(t)
    day_index = t.astype("datetime64[D]").astype(int)
    week_index = (day_index + 3) // 7  # changes at Monday boundaries
    shape = _occupancy_shape(hours)
    weekend = weekdays >= 5

    T = len(t)
    f = np.zeros((T, len(zone_ids)))
    for zi, zone in enumerate(zone_ids):
        amp = config.amplitudes.get(zone, 8.0)
        sigma = config.weekly_sigma.get(zone, 0.15)
        wk_factor = np.empty(T)
        for w in np.unique(week_index):
            g = np.random.default_rng([int(seed), 17, int(w), zi]).standard_normal()
            wk_factor[week_index == w] = np.exp(sigma * g - sigma**2 / 2)
        day_factor = np.empty(T)
        for d in np.unique(day_index):
            g = np.random.default_rng([int(seed), 19, int(d), zi]).standard_normal()
            day_factor[day_index == d] = np.exp(config.day_sigma * g - config.day_sigma**2 / 2)
        level = amp * wk_factor * day_factor * shape
        level[weekend] *= config.weekend_factor

        rng = np.random.default_rng([int(seed), 23, zi])
        phi = np.exp(-1.0 / config.noise_tau_steps)
        sig = config.noise_std * np.sqrt(1 - phi**2)
        noise = np.empty(T)
        noise[0] = config.noise_std * rng.standard_normal()
        for k in range(1, T):
            noise[k] = phi * noise[k - 1] + sig * rng.standard_normal()

        f[:, zi] = np.clip(level + noise, 0.0, None)
    return f


def controller_flows(
    dm: DiscreteModel,
    y_zone: np.ndarray,
    timestamp: np.datetime64,
    config: ControllerConfig,
) -> np.ndarray:
    """Per-box flows from proportional cooling control on zone temperatures."""
    hour = float(_hours(np.array([timestamp], dtype="datetime64[s]"))[0])
    weekday = int(_weekdays(np.array([timestamp], dtype="datetime64[s]"))[0])
    occupied = weekday < 5 and config.occupied_start_hour <= hour < config.occupied_end_hour
    setpoint = config.setpoint_occupied if occupied else config.setpoint_night
    u = np.empty(dm.n_boxes)
    for j, box_zone in enumerate(_box_zone_indices(dm)):
        err = y_zone[box_zone] - setpoint
        frac = np.clip(config.gain_per_kelvin * err, 0.0, 1.0)
        u[j] = dm.min_flow[j] + frac * (dm.max_flow[j] - dm.min_flow[j])
    return u


def _box_zone_indices(dm: DiscreteModel) -> np.ndarray:
    # box ids follow "vav_<zone>..." naming in the twin; fall back to B_vu rows
    idx = np.empty(dm.n_boxes, dtype=int)
    for j in range(dm.n_boxes):
        rows = np.nonzero(dm.b_vu[j][:, V_TS])[0]
        zone_row = np.argmax(dm.c_out[:, rows].sum(axis=1))
        idx[j] = int(zone_row)
    return idx


def synthesize_dataset(
    desc: BuildingDescription,
    gamma_true: ParameterVector,
    start: str | np.datetime64,
    days: int,
    seed: int,
    excitation_days: list[int] | None = None,
    warmup_days: int = 1,
    weather: WeatherConfig | None = None,
    ig: IGConfig | None = None,
    noise: NoiseConfig | None = None,
    controller: ControllerConfig | None = None,
    dt: float = float(STEP_SECONDS),
    nodes_per_element: int = 2,
) -> TimeSeriesDataset:
    """Ground-truth rollout of the twin over ``days`` days before ``start``+days.

    The dataset begins ``warmup_days`` before ``start`` (those steps are
    flagged as warm-up for estimators); two further hidden settling days are
    simulated and discarded. ``excitation_days`` lists day offsets relative
    to ``start`` that run the excitation schedule instead of the controller.
    """
    noise = noise or NoiseConfig()
    controller_cfg = controller or ControllerConfig()
    dm = build_discrete_model(desc, gamma_true, dt=dt, nodes_per_element=nodes_per_element)

    start = np.datetime64(np.datetime64(start, "s"))
    first = start - np.timedelta64((warmup_days + _SPINUP_DAYS) * 86400, "s")
    total_days = days + warmup_days + _SPINUP_DAYS
    T = total_days * STEPS_PER_DAY
    t = first + np.arange(T) * np.timedelta64(STEP_SECONDS, "s")

    v = generate_weather(t, seed, weather)
    f_ig = generate_internal_gains(t, dm.zone_ids, seed, ig)

    u_fixed = np.full((T, dm.n_boxes), np.nan)
    if excitation_days:
        schedule = generate_excitation(desc, seed=seed, days=days, start=start)
        for d in excitation_days:
            lo = d * STEPS_PER_DAY
            hi = lo + STEPS_PER_DAY
            offset = (warmup_days + _SPINUP_DAYS) * STEPS_PER_DAY
            u_fixed[offset + lo : offset + hi] = schedule.u[lo:hi]

    rng_meas = np.random.default_rng([int(seed), 29])
    rng_proc = np.random.default_rng([int(seed), 31])
    c_ig = dm.c_ig_array()

    proc_std = np.full(dm.n, noise.process_mass_std)
    proc_std[dm.room_states] = noise.process_room_std

    x = np.empty((T, dm.n))
    u = np.empty((T, dm.n_boxes))
    x[0] = np.mean(v[: STEPS_PER_DAY, V_TA]) + 6.0
    for k in range(T):
        y_true_k = dm.c_out @ x[k]
        if np.any(np.isnan(u_fixed[k])):
            u[k] = controller_flows(dm, y_true_k, t[k], controller_cfg)
        else:
            u[k] = u_fixed[k]
        if k + 1 < T:
            x_next = dm.a @ x[k] + dm.b_v @ v[k] + dm.b_ig @ (c_ig + f_ig[k])
            x_next += u[k] @ (dm.b_xu @ x[k]) + u[k] @ (dm.b_vu @ v[k])
            if np.any(proc_std > 0):
                x_next += proc_std * rng_proc.standard_normal(dm.n)
            x[k + 1] = x_next

    y = x @ dm.c_out.T
    if noise.meas_std > 0:
        y = y + noise.meas_std * rng_meas.standard_normal(y.shape)

    cut = _SPINUP_DAYS * STEPS_PER_DAY
    return TimeSeriesDataset(
        t=t[cut:],
        y=y[cut:],
        u=u[cut:],
        v=v[cut:],
        zone_ids=list(dm.zone_ids),
        box_ids=list(dm.box_ids),
        warmup_steps=warmup_days * STEPS_PER_DAY,
        x_true=x[cut:],
        f_ig_true=f_ig[cut:],
        state_ids=list(dm.state_ids),
    )


def synthesize_weekend_experiment(
    desc: BuildingDescription,
    gamma_true: ParameterVector,
    saturday: str,
    seed: int,
    **kwargs,
) -> TimeSeriesDataset:
    """Friday warm-up (regular operation) + Saturday/Sunday excitation."""
    return synthesize_dataset(
        desc,
        gamma_true,
        start=saturday,
        days=2,
        seed=seed,
        excitation_days=[0, 1],
        warmup_days=1,
        **kwargs,
    )


def synthesize_weeks(
    desc: BuildingDescription,
    gamma_true: ParameterVector,
    monday: str,
    weeks: int,
    seed: int,
    **kwargs,
) -> TimeSeriesDataset:
    """Sunday warm-up + ``weeks`` full calendar weeks of regular operation."""
    return synthesize_dataset(
        desc,
        gamma_true,
        start=monday,
        days=7 * weeks,
        seed=seed,
        warmup_days=1,
        **kwargs,
    )


def true_weekly_mean_profile(
    zone_ids: list[str], config: IGConfig | None = None
) -> InternalGainsProfile:
    """Expected (noise-free, unit week factor) weekly f_IG profile of the generator."""
    config = config or IGConfig()
    base = np.datetime64("2015-04-06T00:00:00", "s")  # a Monday
    t = base + np.arange(7 * STEPS_PER_DAY) * np.timedelta64(STEP_SECONDS, "s")
    shape = _occupancy_shape(_hours(t))
    weekend = _weekdays(t) >= 5
    f = np.zeros((len(t), len(zone_ids)))
    for zi, zone in enumerate(zone_ids):
        level = config.amplitudes.get(zone, 8.0) * shape
        level[weekend] *= config.weekend_factor
        f[:, zi] = level
    return InternalGainsProfile(
        zone_ids=list(zone_ids), c_ig=np.zeros(len(zone_ids)), f_hat=f
    )
