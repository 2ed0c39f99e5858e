"""Forced-response excitation schedules.

Starting at 8am, every 2 hours the supply airflow of one zone is driven to
its maximum, its neighbors are held at minimum flow, and every remaining
zone gets a random (but within-block constant) flow. Rotating through all
zones covers the building once per day; temperatures of neighboring zones
decorrelate, which is what parameter identification needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .building import BuildingDescription
from .dataset import STEPS_PER_DAY, STEP_SECONDS

BLOCK_STEPS = 8  # 2 h of 15-min steps
FIRST_BLOCK_STEP = 32  # 8am


@dataclass
class ExcitationSchedule:
    """Per-timestep airflow setpoints plus the block metadata behind them."""

    t: np.ndarray  # datetime64[s]
    u: np.ndarray  # (T, m) kg/s
    box_ids: list[str]
    blocks: list[dict] = field(default_factory=list)  # start step, zone, role flows
    seed: int | None = None

    def save(self, path: str | Path) -> None:
        frame = pd.DataFrame({"timestamp": pd.to_datetime(self.t)})
        for j, b in enumerate(self.box_ids):
            frame[f"u_{b}"] = self.u[:, j]
        frame.to_csv(path, index=False, date_format="%Y-%m-%dT%H:%M:%S")


def generate_excitation(
    desc: BuildingDescription,
    seed: int,
    days: int,
    start: np.datetime64 | str = "2015-03-07T00:00:00",
) -> ExcitationSchedule:
    """Daily excitation schedule over ``days`` days from midnight of ``start``.

    Deterministic for a given seed: the zone rotation order is reshuffled
    per day and each non-neighbor zone's flow fraction is redrawn per block.
    Outside the excitation blocks all boxes idle at minimum flow.
    """
    rng = np.random.default_rng(seed)
    start = np.datetime64(start, "s")
    n_steps = days * STEPS_PER_DAY
    t = start + np.arange(n_steps) * np.timedelta64(STEP_SECONDS, "s")

    lo = np.array([b.min_flow for b in desc.vav_boxes])
    hi = np.array([b.max_flow for b in desc.vav_boxes])
    u = np.tile(lo, (n_steps, 1))

    zone_ids = desc.zone_ids
    box_zone = np.array([zone_ids.index(b.zone) for b in desc.vav_boxes])
    blocks: list[dict] = []

    for day in range(days):
        order = rng.permutation(len(zone_ids))
        for slot, zi in enumerate(order):
            begin = day * STEPS_PER_DAY + FIRST_BLOCK_STEP + slot * BLOCK_STEPS
            end = begin + BLOCK_STEPS
            if begin >= n_steps:
                break
            zone = zone_ids[zi]
            neighbors = set(desc.zone(zone).adjacent)
            flows = np.empty(len(desc.vav_boxes))
            fracs = {}
            for other_zi, other in enumerate(zone_ids):
                mask = box_zone == other_zi
                if other == zone:
                    flows[mask] = hi[mask]
                elif other in neighbors:
                    flows[mask] = lo[mask]
                else:
                    frac = rng.uniform()
                    fracs[other] = frac
                    flows[mask] = lo[mask] + frac * (hi[mask] - lo[mask])
            u[begin:min(end, n_steps)] = flows
            blocks.append(
                {"start_step": int(begin), "zone": zone, "random_fractions": fracs}
            )

    return ExcitationSchedule(t=t, u=u, box_ids=desc.box_ids, blocks=blocks, seed=seed)
