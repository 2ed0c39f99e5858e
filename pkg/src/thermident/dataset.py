"""Aligned operational time series on a fixed 15-minute grid.

A dataset holds measured zone temperatures, per-box airflows and the six
disturbance channels; synthetic datasets may also carry the ground-truth
state and internal-gains trajectories. CSV layout: an ISO-8601 timestamp
column followed by ``y_<zone>``, ``u_<box>`` and ``v_*`` columns, with
ground truth (when present) in a sibling ``*_truth.csv``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import SchemaError
from .params import DISTURBANCE_NAMES, N_DISTURBANCES, validate_disturbances

STEP_SECONDS = 900
STEPS_PER_DAY = 96
STEPS_PER_WEEK = 7 * STEPS_PER_DAY


def time_of_week_index(t: np.ndarray) -> np.ndarray:
    """15-minute slot since Monday 00:00 (0..671) for datetime64 timestamps."""
    t = np.asarray(t, dtype="datetime64[s]")
    days = t.astype("datetime64[D]")
    weekday = (days.astype(int) + 3) % 7  # epoch 1970-01-01 was a Thursday
    slot = (t - days).astype(int) // STEP_SECONDS
    return weekday * STEPS_PER_DAY + slot


def is_weekend(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype="datetime64[s]")
    weekday = (t.astype("datetime64[D]").astype(int) + 3) % 7
    return weekday >= 5


@dataclass
class TimeSeriesDataset:
    """Aligned sequences of outputs, inputs and disturbances (15-min grid)."""

    t: np.ndarray  # datetime64[s], shape (T,)
    y: np.ndarray  # zone temperatures degC, (T, nz)
    u: np.ndarray  # airflows kg/s, (T, m)
    v: np.ndarray  # disturbances, (T, 6)
    zone_ids: list[str]
    box_ids: list[str]
    warmup_steps: int = 0
    x_true: np.ndarray | None = None  # (T, n) synthetic ground truth
    f_ig_true: np.ndarray | None = None  # (T, nz)
    state_ids: list[str] | None = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype="datetime64[s]")
        self.y = np.asarray(self.y, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        self.v = validate_disturbances(self.v)
        T = len(self.t)
        for name, arr in (("y", self.y), ("u", self.u), ("v", self.v)):
            if arr.shape[0] != T:
                raise SchemaError(f"dataset field {name} has {arr.shape[0]} rows, expected {T}")
        if self.y.shape[1] != len(self.zone_ids):
            raise SchemaError("y column count does not match zone_ids")
        if self.u.shape[1] != len(self.box_ids):
            raise SchemaError("u column count does not match box_ids")
        if T > 1:
            gaps = np.diff(self.t).astype(int)
            if np.any(gaps != STEP_SECONDS):
                raise SchemaError("timestamps must form a uniform 900 s grid")
        if not 0 <= self.warmup_steps <= T:
            raise SchemaError("warmup_steps out of range")

    @property
    def n_steps(self) -> int:
        return len(self.t)

    def time_of_week(self) -> np.ndarray:
        return time_of_week_index(self.t)

    def window(self, start: int, stop: int, warmup_steps: int = 0) -> "TimeSeriesDataset":
        """Slice [start, stop) keeping alignment; ground truth slices along."""
        return replace(
            self,
            t=self.t[start:stop],
            y=self.y[start:stop],
            u=self.u[start:stop],
            v=self.v[start:stop],
            warmup_steps=warmup_steps,
            x_true=None if self.x_true is None else self.x_true[start:stop],
            f_ig_true=None if self.f_ig_true is None else self.f_ig_true[start:stop],
        )

    # -- CSV I/O ------------------------------------------------------------

    def to_frame(self) -> pd.DataFrame:
        data: dict = {"timestamp": pd.to_datetime(self.t)}
        for i, z in enumerate(self.zone_ids):
            data[f"y_{z}"] = self.y[:, i]
        for j, b in enumerate(self.box_ids):
            data[f"u_{b}"] = self.u[:, j]
        for k, name in enumerate(DISTURBANCE_NAMES):
            data[name] = self.v[:, k]
        return pd.DataFrame(data)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        frame = self.to_frame()
        frame.insert(1, "warmup", 0)
        frame.loc[: self.warmup_steps - 1, "warmup"] = 1
        frame.to_csv(path, index=False, date_format="%Y-%m-%dT%H:%M:%S")
        if self.x_true is not None or self.f_ig_true is not None:
            truth = pd.DataFrame({"timestamp": pd.to_datetime(self.t)})
            if self.x_true is not None:
                ids = self.state_ids or [f"s{i}" for i in range(self.x_true.shape[1])]
                for i, sid in enumerate(ids):
                    truth[f"x_{sid}"] = self.x_true[:, i]
            if self.f_ig_true is not None:
                for i, z in enumerate(self.zone_ids):
                    truth[f"fig_{z}"] = self.f_ig_true[:, i]
            truth.to_csv(_truth_path(path), index=False, date_format="%Y-%m-%dT%H:%M:%S")

    @classmethod
    def load(cls, path: str | Path) -> "TimeSeriesDataset":
        path = Path(path)
        frame = pd.read_csv(path)
        if "timestamp" not in frame.columns:
            raise SchemaError(f"{path}: missing timestamp column")
        t = pd.to_datetime(frame["timestamp"]).to_numpy().astype("datetime64[s]")
        zone_ids = [c[2:] for c in frame.columns if c.startswith("y_")]
        box_ids = [c[2:] for c in frame.columns if c.startswith("u_")]
        missing = [c for c in DISTURBANCE_NAMES if c not in frame.columns]
        if missing or not zone_ids:
            raise SchemaError(f"{path}: missing columns {missing or ['y_*']}")
        warmup = int(frame["warmup"].sum()) if "warmup" in frame.columns else 0
        x_true = f_ig_true = None
        state_ids = None
        truth_path = _truth_path(path)
        if truth_path.exists():
            truth = pd.read_csv(truth_path)
            x_cols = [c for c in truth.columns if c.startswith("x_")]
            f_cols = [c for c in truth.columns if c.startswith("fig_")]
            if x_cols:
                x_true = truth[x_cols].to_numpy()
                state_ids = [c[2:] for c in x_cols]
            if f_cols:
                f_ig_true = truth[f_cols].to_numpy()
        return cls(
            t=t,
            y=frame[[f"y_{z}" for z in zone_ids]].to_numpy(),
            u=frame[[f"u_{b}" for b in box_ids]].to_numpy(),
            v=frame[list(DISTURBANCE_NAMES)].to_numpy(),
            zone_ids=zone_ids,
            box_ids=box_ids,
            warmup_steps=warmup,
            x_true=x_true,
            f_ig_true=f_ig_true,
            state_ids=state_ids,
        )


def _truth_path(path: Path) -> Path:
    return path.with_name(path.stem + "_truth" + path.suffix)


def check_flows_within_limits(ds: TimeSeriesDataset, lo: np.ndarray, hi: np.ndarray) -> None:
    if np.any(ds.u < lo - 1e-12) or np.any(ds.u > hi + 1e-12):
        raise SchemaError("dataset airflows violate VAV box limits")
