"""Parameter identification and internal-gains estimation.

Physical parameters are identified from excitation-weekend data by
minimizing the sum of squared errors between measured and simulated zone
temperatures, with the time-varying internal gains approximated as zero
(weekends are near-vacant), the measured airflows and disturbances applied,
and the initial state re-estimated by a Kalman filter for every candidate
parameter vector.

The time-varying gains are then estimated week by week: simulate one step
without gains, attribute the output residual to the gains channel by
least squares, and average the per-week estimates on the weekly grid.
The online predictor repeats the same one-step estimate at prediction time
and holds the latest value over the horizon.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.optimize

from .building import BuildingDescription
from .dataset import STEPS_PER_DAY, STEPS_PER_WEEK, TimeSeriesDataset
from .errors import EstimationError
from .igprofile import InternalGainsProfile
from .params import GLOBAL_PARAM_NAMES, ParameterBounds, ParameterVector, default_bounds
from .rcmodel import DiscreteModel, build_discrete_model
from .simulate import KalmanNoise, kalman_filter, step, transition

logger = logging.getLogger(__name__)

KF_WARMUP_STEPS = 32  # 8 h of weekend data ahead of the scored window


def weekend_identification_slice(ds: TimeSeriesDataset) -> TimeSeriesDataset:
    """Trim a weekend-experiment dataset to its weekend for identification.

    Drops the weekday warm-up (the zero-gains approximation does not hold
    there) and marks the first 8 h of the weekend as the new warm-up, so
    the Kalman initialization runs entirely on near-vacant data.
    """
    return ds.window(ds.warmup_steps, ds.n_steps, warmup_steps=KF_WARMUP_STEPS)


# ---------------------------------------------------------------------------
# One-step gains estimation (the snapshot estimator)
# ---------------------------------------------------------------------------

def simulate_no_ig(
    dm: DiscreteModel, x_prev: np.ndarray, u_prev: np.ndarray, v_prev: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One step with the time-varying gains zeroed (background c_IG kept)."""
    x_tilde = step(dm, x_prev, u_prev, v_prev, f_ig=None)
    return x_tilde, dm.c_out @ x_tilde


def estimate_ig_snapshot(
    dm: DiscreteModel,
    y_meas: np.ndarray,
    y_sim: np.ndarray,
    allow_rank_deficient: bool = False,
) -> np.ndarray:
    """Attribute the one-step output residual to the gains channel.

    Solves (C B_IG) f = y_meas - y_sim by least squares. For the usual
    square, full-rank map this is the exact solve; a rank-deficient map
    raises unless ``allow_rank_deficient`` requests the minimum-norm
    solution (which is then logged).
    """
    cb = dm.output_ig_map()
    f, _, rank, _ = np.linalg.lstsq(cb, np.asarray(y_meas) - np.asarray(y_sim), rcond=None)
    if rank < cb.shape[1]:
        if not allow_rank_deficient:
            raise EstimationError(
                f"gains map C B_IG is rank deficient ({rank} < {cb.shape[1]})"
            )
        logger.warning(
            "gains map rank deficient (%d < %d); using minimum-norm solution",
            rank,
            cb.shape[1],
        )
    return f


def _ig_observer(
    dm: DiscreteModel,
    dataset: TimeSeriesDataset,
    x_start: np.ndarray,
    start: int,
    stop: int | None = None,
    allow_rank_deficient: bool = False,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Track the state by attributing each output residual to the gains.

    Starting from x(start), for k = start+1 .. stop-1 the observer
    estimates f(k-1) from the measurement at k and reconstructs
    x(k) = x_no_ig(k) + B_IG f(k-1). Returns (x_states, f_est, valid):
    x_states[i] is x(start+i); f_est[i] estimates f at index start+i;
    valid flags timestamps with complete data.
    """
    stop = dataset.n_steps if stop is None else stop
    length = stop - start - 1
    x_states = np.empty((length + 1, dm.n))
    f_est = np.full((length, dm.n_zones), np.nan)
    valid = np.zeros(length, dtype=bool)
    x_states[0] = x_start
    x = x_start
    for i in range(length):
        k = start + i
        row_ok = (
            np.all(np.isfinite(dataset.u[k]))
            and np.all(np.isfinite(dataset.v[k]))
            and np.all(np.isfinite(dataset.y[k + 1]))
        )
        if not row_ok:
            # hold gains at zero across the gap; state continues without correction
            x = step(dm, x, np.nan_to_num(dataset.u[k]), np.nan_to_num(dataset.v[k]))
            x_states[i + 1] = x
            continue
        x_tilde, y_tilde = simulate_no_ig(dm, x, dataset.u[k], dataset.v[k])
        f = estimate_ig_snapshot(dm, dataset.y[k + 1], y_tilde, allow_rank_deficient)
        x = x_tilde + dm.b_ig @ f
        x_states[i + 1] = x
        f_est[i] = f
        valid[i] = True
    return x_states, f_est, valid


# ---------------------------------------------------------------------------
# Fixed weekly gains profile
# ---------------------------------------------------------------------------

def estimate_fixed_ig(
    dm: DiscreteModel,
    training_weeks: list[TimeSeriesDataset],
    noise: KalmanNoise | None = None,
) -> InternalGainsProfile:
    """Estimate the weekly gains profile as the average of per-week estimates.

    Each training dataset must hold one calendar week after its warm-up.
    Per week, a Kalman filter over the warm-up initializes the state, the
    one-step estimator runs over the week, and the estimates are averaged
    pointwise on the weekly grid; timestamps missing in a week are excluded
    from the mean with per-slot counts kept.
    """
    if not training_weeks:
        raise EstimationError("need at least one training week")
    noise = noise or KalmanNoise()
    n_weeks = len(training_weeks)
    per_week = np.full((n_weeks, STEPS_PER_WEEK, dm.n_zones), np.nan)

    for w, ds in enumerate(training_weeks):
        warm = ds.warmup_steps
        if warm < 1:
            raise EstimationError(f"training week {w}: needs a warm-up segment")
        if ds.n_steps - warm < STEPS_PER_WEEK:
            raise EstimationError(f"training week {w}: shorter than one week after warm-up")
        kf = kalman_filter(dm, ds, noise=noise, ig=None, stop=warm)
        x0 = kf.x_final  # state at index warm-1
        stop = warm + STEPS_PER_WEEK
        _, f_est, valid = _ig_observer(dm, ds, x0, start=warm - 1, stop=stop)
        slots = ds.time_of_week()[warm - 1 : stop - 1]
        per_week[w, slots[valid], :] = f_est[valid]

    counts = np.sum(~np.isnan(per_week[:, :, 0]), axis=0)
    with np.errstate(invalid="ignore"):
        f_hat = np.nanmean(per_week, axis=0)
    f_hat[counts == 0] = 0.0
    return InternalGainsProfile(
        zone_ids=list(dm.zone_ids),
        c_ig=dm.c_ig_array(),
        f_hat=f_hat,
        per_week=per_week,
        counts=np.tile(counts[:, None], (1, dm.n_zones)),
        meta={"n_weeks": n_weeks},
    )


# ---------------------------------------------------------------------------
# Predictors
# ---------------------------------------------------------------------------

@dataclass
class PredictionSet:
    """h-step-ahead predictions from a set of start times.

    ``y_pred[s, h-1]`` is the prediction of the measurement at
    ``starts[s] + h``; predictions at start s use data up to s only.
    """

    starts: np.ndarray  # (S,) indices into the dataset
    y_pred: np.ndarray  # (S, H, nz)
    y_meas: np.ndarray  # (S, H, nz) aligned measurements
    zone_ids: list[str]
    horizon: int
    cadence: str
    predictor: str
    meta: dict = field(default_factory=dict)

    def errors(self) -> np.ndarray:
        return self.y_pred - self.y_meas


def _starts(dataset: TimeSeriesDataset, horizon: int, cadence: str) -> np.ndarray:
    first = max(dataset.warmup_steps, 1)
    last = dataset.n_steps - 1 - horizon
    if last < first:
        raise EstimationError(
            f"horizon {horizon} exceeds usable data length ({dataset.n_steps} steps, "
            f"{dataset.warmup_steps} warm-up)"
        )
    if cadence == "daily":
        return np.arange(first, last + 1, STEPS_PER_DAY)
    if cadence == "sliding":
        return np.arange(first, last + 1)
    raise EstimationError(f"unknown cadence {cadence!r} (use 'daily' or 'sliding')")


def _collect(dataset, starts, horizon, rollout) -> tuple[np.ndarray, np.ndarray]:
    nz = dataset.y.shape[1]
    y_pred = np.empty((len(starts), horizon, nz))
    y_meas = np.empty_like(y_pred)
    for si, s in enumerate(starts):
        y_pred[si] = rollout(int(s))
        y_meas[si] = dataset.y[s + 1 : s + 1 + horizon]
    return y_pred, y_meas


def predict_fixed_ig(
    dm: DiscreteModel,
    profile: InternalGainsProfile,
    dataset: TimeSeriesDataset,
    horizon: int = STEPS_PER_DAY,
    noise: KalmanNoise | None = None,
    cadence: str = "daily",
) -> PredictionSet:
    """Open-loop predictions using the fixed weekly gains profile.

    The state at each start is the Kalman-filtered estimate given data up
    to the start ('daily': starts every 24 h; 'sliding': every step).
    """
    noise = noise or KalmanNoise()
    starts = _starts(dataset, horizon, cadence)
    kf = kalman_filter(dm, dataset, noise=noise, ig=profile)
    tow = dataset.time_of_week()
    f_all = profile.f_at(tow)
    c_ig = dm.c_ig_array()

    def rollout(s: int) -> np.ndarray:
        x = kf.x_filt[s].copy()
        out = np.empty((horizon, dm.n_zones))
        for h in range(horizon):
            k = s + h
            x = (
                dm.a @ x
                + dm.b_v @ dataset.v[k]
                + dm.b_ig @ (c_ig + f_all[k])
                + dataset.u[k] @ (dm.b_xu @ x)
                + dataset.u[k] @ (dm.b_vu @ dataset.v[k])
            )
            out[h] = dm.c_out @ x
        return out

    y_pred, y_meas = _collect(dataset, starts, horizon, rollout)
    return PredictionSet(
        starts=starts,
        y_pred=y_pred,
        y_meas=y_meas,
        zone_ids=list(dm.zone_ids),
        horizon=horizon,
        cadence=cadence,
        predictor="fixed",
    )


def predict_online_ig(
    dm: DiscreteModel,
    dataset: TimeSeriesDataset,
    horizon: int = 1,
    noise: KalmanNoise | None = None,
    cadence: str = "sliding",
) -> PredictionSet:
    """Predictions with the gains re-estimated online from the latest measurement.

    At each start the newest one-step residual gives f(start-1); the gains
    are then held constant over the prediction horizon. The state is
    tracked by the same residual attribution, so it stays consistent with
    the measurements up to the start.
    """
    starts = _starts(dataset, horizon, cadence)
    x0 = np.full(dm.n, float(np.mean(dataset.y[0])))
    x_states, f_est, valid = _ig_observer(dm, dataset, x0, start=0)
    c_ig = dm.c_ig_array()

    def rollout(s: int) -> np.ndarray:
        x = x_states[s].copy()
        f_hold = f_est[s - 1] if valid[s - 1] else np.zeros(dm.n_zones)
        out = np.empty((horizon, dm.n_zones))
        for h in range(horizon):
            k = s + h
            x = (
                dm.a @ x
                + dm.b_v @ dataset.v[k]
                + dm.b_ig @ (c_ig + f_hold)
                + dataset.u[k] @ (dm.b_xu @ x)
                + dataset.u[k] @ (dm.b_vu @ dataset.v[k])
            )
            out[h] = dm.c_out @ x
        return out

    y_pred, y_meas = _collect(dataset, starts, horizon, rollout)
    return PredictionSet(
        starts=starts,
        y_pred=y_pred,
        y_meas=y_meas,
        zone_ids=list(dm.zone_ids),
        horizon=horizon,
        cadence=cadence,
        predictor="online",
    )


# ---------------------------------------------------------------------------
# Parameter identification
# ---------------------------------------------------------------------------

@dataclass
class OptimizerSettings:
    method: str = "powell"  # 'powell' or 'nelder-mead'
    multistart: int = 1
    seed: int = 0
    max_iter: int = 10
    xtol: float = 1e-4
    ftol: float = 1e-10
    polish: bool = True  # finish with bounded least squares from the best start
    polish_max_nfev: int = 400


@dataclass
class IdentificationResult:
    """Identified parameters with diagnostics and recomputable residuals."""

    gamma_hat: ParameterVector
    objective: float  # SSE over all scored steps, degC^2
    rms_train: dict[str, float]
    rms_validation: dict[str, float] | None
    converged: bool
    n_evaluations: int
    message: str
    method: str
    start_objectives: list[float]
    residuals: list[np.ndarray] = field(default_factory=list)  # per dataset, (K, nz)

    def to_dict(self) -> dict:
        d = {
            "gamma_hat": self.gamma_hat.to_dict(),
            "objective_sse": self.objective,
            "rms_train": self.rms_train,
            "rms_validation": self.rms_validation,
            "converged": self.converged,
            "n_evaluations": self.n_evaluations,
            "message": self.message,
            "method": self.method,
            "start_objectives": self.start_objectives,
        }
        return d


class _Objective:
    """SSE of the weekend rollout, with KF initial state per candidate."""

    def __init__(self, desc, datasets, noise, dt, nodes_per_element, kf_warmup_steps):
        self.desc = desc
        self.zone_ids = desc.zone_ids
        self.datasets = datasets
        self.noise = noise
        self.dt = dt
        self.nodes_per_element = nodes_per_element
        self.kf_warmup = kf_warmup_steps
        self.n_evals = 0
        for ds in datasets:
            if ds.warmup_steps < 1:
                raise EstimationError("identification datasets need a warm-up segment")

    def model(self, values: np.ndarray) -> DiscreteModel:
        gamma = ParameterVector.from_array(values, self.zone_ids)
        return build_discrete_model(
            self.desc, gamma, dt=self.dt, nodes_per_element=self.nodes_per_element
        )

    def residuals(self, values: np.ndarray) -> list[np.ndarray]:
        """Per-dataset output residual arrays over the scored windows (f_IG = 0)."""
        self.n_evals += 1
        dm = self.model(values)
        out = []
        for ds in self.datasets:
            score_start = ds.warmup_steps
            kf_start = max(0, score_start - self.kf_warmup)
            kf = kalman_filter(dm, ds, noise=self.noise, ig=None, start=kf_start, stop=score_start)
            x = kf.x_final  # posterior at index score_start - 1
            c_ig = dm.c_ig_array()
            res = np.empty((ds.n_steps - score_start, dm.n_zones))
            for i, k in enumerate(range(score_start, ds.n_steps)):
                x = (
                    dm.a @ x
                    + dm.b_v @ ds.v[k - 1]
                    + dm.b_ig @ c_ig
                    + ds.u[k - 1] @ (dm.b_xu @ x)
                    + ds.u[k - 1] @ (dm.b_vu @ ds.v[k - 1])
                )
                res[i] = dm.c_out @ x - ds.y[k]
            mask = np.all(np.isfinite(res), axis=1)
            out.append(np.where(mask[:, None], res, 0.0))
        return out

    def residual_vector(self, values: np.ndarray) -> np.ndarray:
        try:
            res = self.residuals(values)
        except Exception:
            return np.full(sum(ds.n_steps - ds.warmup_steps for ds in self.datasets)
                           * len(self.zone_ids), 1e3)
        return np.concatenate([r.ravel() for r in res])

    def sse(self, values: np.ndarray) -> float:
        try:
            res = self.residuals(values)
        except Exception:
            return 1e12
        total = sum(float(np.sum(r**2)) for r in res)
        return total if np.isfinite(total) else 1e12


def identify_parameters(
    desc: BuildingDescription,
    datasets: list[TimeSeriesDataset],
    gamma0: ParameterVector,
    bounds: ParameterBounds | None = None,
    noise: KalmanNoise | None = None,
    dt: float = 900.0,
    nodes_per_element: int = 2,
    settings: OptimizerSettings | None = None,
    validation_datasets: list[TimeSeriesDataset] | None = None,
    kf_warmup_steps: int = KF_WARMUP_STEPS,
) -> IdentificationResult:
    """Identify the physical parameters from (excitation) weekend datasets.

    Minimizes the output SSE subject to the model dynamics with f_IG = 0,
    measured inputs and disturbances, box constraints on the parameters,
    and the initial state re-estimated by a Kalman filter over the
    ``kf_warmup_steps`` steps preceding each dataset's scored window.

    The optimizer works on parameters scaled by the initial guess
    (bound-constrained direction-set search, optionally multi-started) and
    by default polishes the best iterate with bounded least squares.
    """
    noise = noise or KalmanNoise()
    settings = settings or OptimizerSettings()
    bounds = bounds or default_bounds(desc.zone_ids)
    zone_ids = desc.zone_ids

    g0 = gamma0.as_array(zone_ids)
    lo, hi = bounds.arrays(zone_ids)
    if np.any(g0 < lo) or np.any(g0 > hi):
        raise EstimationError("initial guess violates the parameter bounds")

    objective = _Objective(desc, datasets, noise, dt, nodes_per_element, kf_warmup_steps)

    # optimize in units of the initial guess so steps are relative
    scale = g0.copy()
    z_lo, z_hi = lo / scale, hi / scale

    def z_sse(z: np.ndarray) -> float:
        return objective.sse(np.clip(z, z_lo, z_hi) * scale)

    rng = np.random.default_rng(settings.seed)
    starts = [np.ones_like(g0)]
    for _ in range(settings.multistart - 1):
        starts.append(np.clip(np.exp(0.2 * rng.standard_normal(len(g0))), z_lo, z_hi))

    method = {"powell": "Powell", "nelder-mead": "Nelder-Mead"}.get(settings.method.lower())
    if method is None:
        raise EstimationError(f"unknown optimizer method {settings.method!r}")

    best = None
    start_objectives = []
    for z0 in starts:
        res = scipy.optimize.minimize(
            z_sse,
            z0,
            method=method,
            bounds=scipy.optimize.Bounds(z_lo, z_hi),
            options={
                "maxiter": settings.max_iter,
                "xtol": settings.xtol,
                "ftol": settings.ftol,
            }
            if method == "Powell"
            else {"maxiter": settings.max_iter * 200, "xatol": settings.xtol, "fatol": settings.ftol},
        )
        start_objectives.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
    z_best = np.clip(best.x, z_lo, z_hi)
    converged = bool(best.success)
    message = str(best.message)

    if settings.polish:
        ls = scipy.optimize.least_squares(
            lambda z: objective.residual_vector(z * scale),
            z_best,
            bounds=(z_lo, z_hi),
            method="trf",
            diff_step=1e-6,
            max_nfev=settings.polish_max_nfev,
        )
        if np.sum(ls.fun**2) <= best.fun:
            z_best = ls.x
            converged = bool(ls.status > 0)
            message = f"{message}; polish: {ls.message}"

    g_hat = np.clip(z_best * scale, lo, hi)
    gamma_hat = ParameterVector.from_array(g_hat, zone_ids)
    residuals = objective.residuals(g_hat)
    sse = sum(float(np.sum(r**2)) for r in residuals)

    def rms_table(res_list):
        stacked = np.vstack(res_list)
        return {
            z: float(np.sqrt(np.mean(stacked[:, i] ** 2))) for i, z in enumerate(zone_ids)
        }

    rms_validation = None
    if validation_datasets:
        val_obj = _Objective(desc, validation_datasets, noise, dt, nodes_per_element, kf_warmup_steps)
        rms_validation = rms_table(val_obj.residuals(g_hat))

    return IdentificationResult(
        gamma_hat=gamma_hat,
        objective=sse,
        rms_train=rms_table(residuals),
        rms_validation=rms_validation,
        converged=converged,
        n_evaluations=objective.n_evals,
        message=message,
        method=settings.method + ("+lsq-polish" if settings.polish else ""),
        start_objectives=start_objectives,
        residuals=residuals,
    )
