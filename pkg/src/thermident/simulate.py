"""Forward simulation of the discrete bilinear model and Kalman filtering.

With the airflows known, the bilinear model is linear time-varying: the
dynamics matrix at step k is A + sum_j B_xu_j u_j(k). The Kalman filter
exploits this, using the Joseph-form covariance update to keep the
covariance symmetric positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import TimeSeriesDataset
from .errors import EstimationError, SimulationError
from .igprofile import InternalGainsProfile
from .rcmodel import DiscreteModel


def step(
    dm: DiscreteModel,
    x: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    f_ig: np.ndarray | None = None,
) -> np.ndarray:
    """One step of the discrete bilinear model (c_IG comes from the model)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != (dm.n,) or u.shape != (dm.n_boxes,) or v.shape != (dm.b_v.shape[1],):
        raise SimulationError(
            f"dimension mismatch: x{x.shape}, u{u.shape}, v{v.shape} for model "
            f"n={dm.n}, m={dm.n_boxes}"
        )
    gains = dm.c_ig_array()
    if f_ig is not None:
        gains = gains + np.asarray(f_ig, dtype=float)
    x_next = dm.a @ x + dm.b_v @ v + dm.b_ig @ gains
    x_next += u @ (dm.b_xu @ x) + u @ (dm.b_vu @ v)
    return x_next


def transition(dm: DiscreteModel, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(A_k, w_k) of the LTV form x+ = A_k x + w_k for known u(k), v(k).

    w_k excludes the internal-gains term so callers can add B_IG (c+f) as
    needed.
    """
    a_k = dm.a + np.tensordot(u, dm.b_xu, axes=1)
    w_k = dm.b_v @ v + u @ (dm.b_vu @ v)
    return a_k, w_k


@dataclass
class Trajectory:
    """States and outputs of a rollout; index 0 is the initial condition."""

    t: np.ndarray  # datetime64[s], (K+1,) -- last entry is one step past the data
    x: np.ndarray  # (K+1, n)
    y: np.ndarray  # (K+1, nz)


def _gains_series(
    dm: DiscreteModel, dataset: TimeSeriesDataset, ig, start: int, stop: int
) -> np.ndarray:
    """Resolve the f_IG argument into a (stop-start, nz) array."""
    length = stop - start
    if ig is None:
        return np.zeros((length, dm.n_zones))
    if isinstance(ig, InternalGainsProfile):
        return ig.f_at(dataset.time_of_week()[start:stop])
    arr = np.asarray(ig, dtype=float)
    if arr.ndim == 1:
        return np.broadcast_to(arr, (length, dm.n_zones)).copy()
    if arr.shape[0] == dataset.n_steps:
        return arr[start:stop]
    if arr.shape[0] == length:
        return arr
    raise SimulationError(f"f_IG series shape {arr.shape} does not cover steps {start}..{stop}")


def simulate(
    dm: DiscreteModel,
    x0: np.ndarray,
    dataset: TimeSeriesDataset,
    ig: InternalGainsProfile | np.ndarray | None = None,
    start: int = 0,
    stop: int | None = None,
) -> Trajectory:
    """Open-loop rollout over dataset steps [start, stop) from state x0.

    ``ig`` may be an InternalGainsProfile (indexed by time-of-week), an
    explicit per-step array, or None for zero time-varying gains. The
    constant background c_IG always comes from the model parameters.
    Raises SimulationError if the state leaves the finite range.
    """
    stop = dataset.n_steps if stop is None else stop
    if not 0 <= start <= stop <= dataset.n_steps:
        raise SimulationError(f"rollout window [{start}, {stop}) outside dataset")
    gains = _gains_series(dm, dataset, ig, start, stop)
    c_ig = dm.c_ig_array()

    n_steps = stop - start
    x = np.empty((n_steps + 1, dm.n))
    x[0] = x0
    for k in range(n_steps):
        i = start + k
        xk = dm.a @ x[k] + dm.b_v @ dataset.v[i] + dm.b_ig @ (c_ig + gains[k])
        xk += dataset.u[i] @ (dm.b_xu @ x[k]) + dataset.u[i] @ (dm.b_vu @ dataset.v[i])
        if not np.all(np.isfinite(xk)):
            raise SimulationError(f"state diverged (NaN/inf) at step {i}")
        x[k + 1] = xk
    t = np.empty(n_steps + 1, dtype="datetime64[s]")
    t[:-1] = dataset.t[start:stop]
    t[-1] = dataset.t[stop - 1] + np.timedelta64(900, "s") if n_steps else dataset.t[start]
    if n_steps == 0:
        t = dataset.t[start : start + 1]
        x = x[:1]
    return Trajectory(t=t, x=x, y=x @ dm.c_out.T)


@dataclass
class KalmanNoise:
    """Process / measurement covariance settings (diagonal)."""

    q_room_var: float = 1e-4  # degC^2 per step, room-air states
    q_mass_var: float = 1e-5  # degC^2 per step, wall/floor/ceiling nodes
    r_meas_std: float = 0.05  # degC, zone temperature sensors

    def q_matrix(self, dm: DiscreteModel) -> np.ndarray:
        q = np.full(dm.n, self.q_mass_var)
        q[dm.room_states] = self.q_room_var
        return np.diag(q)

    def r_matrix(self, dm: DiscreteModel) -> np.ndarray:
        return np.eye(dm.n_zones) * self.r_meas_std**2


@dataclass
class KalmanEstimate:
    """Filtered means, covariance, and the innovation record of one run."""

    t: np.ndarray
    x_filt: np.ndarray  # (K, n) posterior means
    cov: np.ndarray  # final posterior covariance (n, n)
    innovations: np.ndarray  # (K, nz)
    nis: np.ndarray  # (K,) normalized innovation squared
    cov_trace: np.ndarray = field(default_factory=lambda: np.zeros(0))  # (K,)

    @property
    def x_final(self) -> np.ndarray:
        return self.x_filt[-1]


def kalman_filter(
    dm: DiscreteModel,
    dataset: TimeSeriesDataset,
    noise: KalmanNoise | None = None,
    ig: InternalGainsProfile | np.ndarray | None = None,
    x0: np.ndarray | None = None,
    p0: np.ndarray | None = None,
    start: int = 0,
    stop: int | None = None,
    check_spd: bool = False,
) -> KalmanEstimate:
    """Time-varying Kalman filter over dataset steps [start, stop).

    The measurement at each step is the zone temperature vector; the
    dynamics use the known airflows, disturbances and (optionally) an
    internal-gains model. The state estimate at index k is the posterior
    after measuring y(k), so ``x_filt[-1]`` initializes a rollout that
    continues from the last filtered time.
    """
    noise = noise or KalmanNoise()
    stop = dataset.n_steps if stop is None else stop
    if not 0 <= start < stop <= dataset.n_steps:
        raise EstimationError(f"filter window [{start}, {stop}) outside dataset")
    q = noise.q_matrix(dm)
    r = noise.r_matrix(dm)
    if np.any(np.diag(q) < 0) or np.any(np.diag(r) <= 0):
        raise EstimationError("noise covariances must be positive (semi)definite")
    c = dm.c_out
    gains = _gains_series(dm, dataset, ig, start, stop)
    c_ig = dm.c_ig_array()

    x_hat = np.full(dm.n, float(np.mean(dataset.y[start]))) if x0 is None else np.asarray(x0, float).copy()
    p = np.eye(dm.n) * 4.0 if p0 is None else np.asarray(p0, float).copy()

    n_steps = stop - start
    x_filt = np.empty((n_steps, dm.n))
    innovations = np.empty((n_steps, dm.n_zones))
    nis = np.empty(n_steps)
    cov_trace = np.empty(n_steps)
    eye = np.eye(dm.n)

    for k in range(n_steps):
        i = start + k
        if k > 0:
            a_k, w_k = transition(dm, dataset.u[i - 1], dataset.v[i - 1])
            w_k = w_k + dm.b_ig @ (c_ig + gains[k - 1])
            x_hat = a_k @ x_hat + w_k
            p = a_k @ p @ a_k.T + q
        # measurement update with y(i)
        s = c @ p @ c.T + r
        innov = dataset.y[i] - c @ x_hat
        gain = np.linalg.solve(s, c @ p).T
        x_hat = x_hat + gain @ innov
        ikc = eye - gain @ c
        p = ikc @ p @ ikc.T + gain @ r @ gain.T
        p = 0.5 * (p + p.T)
        if check_spd:
            min_eig = float(np.linalg.eigvalsh(p)[0])
            if min_eig < -1e-10:
                raise EstimationError(
                    f"covariance lost positive semidefiniteness at step {i} "
                    f"(min eigenvalue {min_eig:.3e})"
                )
        x_filt[k] = x_hat
        innovations[k] = innov
        nis[k] = float(innov @ np.linalg.solve(s, innov))
        cov_trace[k] = float(np.trace(p))

    return KalmanEstimate(
        t=dataset.t[start:stop].copy(),
        x_filt=x_filt,
        cov=p,
        innovations=innovations,
        nis=nis,
        cov_trace=cov_trace,
    )


def filtered_states(
    dm: DiscreteModel,
    dataset: TimeSeriesDataset,
    noise: KalmanNoise | None = None,
    ig: InternalGainsProfile | np.ndarray | None = None,
) -> np.ndarray:
    """Posterior state estimate at every step of the dataset (one filter pass)."""
    return kalman_filter(dm, dataset, noise=noise, ig=ig).x_filt
