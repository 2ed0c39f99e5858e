"""Weekly internal-gains profile: constant background + time-of-week function.

The time-varying part is sampled on the weekly 15-minute grid (672 slots,
anchored Monday 00:00). Besides the averaged estimate the profile keeps the
raw per-week estimates and per-slot sample counts, so the weekly average can
be re-derived and reported Fig.-style (individual weeks + their mean).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .dataset import STEPS_PER_WEEK
from .errors import SchemaError


@dataclass
class InternalGainsProfile:
    """Per-zone constant background c_IG plus weekly-periodic f_IG samples."""

    zone_ids: list[str]
    c_ig: np.ndarray  # (nz,), W/m^2
    f_hat: np.ndarray  # (672, nz), W/m^2, averaged estimate
    per_week: np.ndarray | None = None  # (W, 672, nz) raw per-week estimates
    counts: np.ndarray | None = None  # (672, nz) samples behind each mean entry
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.c_ig = np.asarray(self.c_ig, dtype=float)
        self.f_hat = np.asarray(self.f_hat, dtype=float)
        if self.f_hat.shape != (STEPS_PER_WEEK, len(self.zone_ids)):
            raise SchemaError(
                f"f_hat must be ({STEPS_PER_WEEK}, n_zones), got {self.f_hat.shape}"
            )
        if self.c_ig.shape != (len(self.zone_ids),):
            raise SchemaError("c_ig must have one entry per zone")

    def f_at(self, time_of_week: np.ndarray) -> np.ndarray:
        """f_IG values for the given time-of-week slots; shape (..., nz)."""
        return self.f_hat[np.asarray(time_of_week) % STEPS_PER_WEEK]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        frame = pd.DataFrame({"time_of_week": np.arange(STEPS_PER_WEEK)})
        for i, z in enumerate(self.zone_ids):
            frame[f"f_{z}"] = self.f_hat[:, i]
        if self.counts is not None:
            for i, z in enumerate(self.zone_ids):
                frame[f"count_{z}"] = self.counts[:, i]
        frame.to_csv(path, index=False)
        if self.per_week is not None:
            rows = []
            for w in range(self.per_week.shape[0]):
                week = pd.DataFrame({"week": w, "time_of_week": np.arange(STEPS_PER_WEEK)})
                for i, z in enumerate(self.zone_ids):
                    week[f"f_{z}"] = self.per_week[w, :, i]
                rows.append(week)
            pd.concat(rows).to_csv(path.with_name(path.stem + "_weeks" + path.suffix), index=False)

    @classmethod
    def load(cls, path: str | Path, c_ig: dict[str, float] | None = None) -> "InternalGainsProfile":
        frame = pd.read_csv(path)
        zone_ids = [c[2:] for c in frame.columns if c.startswith("f_")]
        if not zone_ids or len(frame) != STEPS_PER_WEEK:
            raise SchemaError(f"{path}: not a weekly internal-gains profile")
        f_hat = frame[[f"f_{z}" for z in zone_ids]].to_numpy()
        count_cols = [f"count_{z}" for z in zone_ids]
        counts = frame[count_cols].to_numpy() if all(c in frame.columns for c in count_cols) else None
        c = np.zeros(len(zone_ids)) if c_ig is None else np.array([c_ig[z] for z in zone_ids])
        return cls(zone_ids=zone_ids, c_ig=c, f_hat=f_hat, counts=counts)
