"""Prediction-accuracy metrics: per-zone RMS, horizon curves, comparisons.

All metrics score zone outputs only. The horizon curve pools, for each
lead time h, every h-step-ahead prediction over the valid start times of
the prediction set ('daily' anchored starts or 'sliding' all-offsets).
Reports serialize to JSON with a content hash of the generating config so
re-runs are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import EstimationError
from .identify import PredictionSet


def rms_by_zone(predicted: np.ndarray, measured: np.ndarray) -> np.ndarray:
    """Root-mean-square error per zone over all aligned samples.

    Accepts arrays whose last axis is the zone axis; all leading axes are
    pooled. Samples with NaN in either input are excluded per zone.
    """
    predicted = np.asarray(predicted, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if predicted.shape != measured.shape:
        raise EstimationError(
            f"shape mismatch: predicted {predicted.shape} vs measured {measured.shape}"
        )
    err = (predicted - measured).reshape(-1, predicted.shape[-1])
    out = np.empty(err.shape[1])
    for z in range(err.shape[1]):
        col = err[:, z]
        col = col[np.isfinite(col)]
        if col.size == 0:
            raise EstimationError(f"no overlapping samples for zone index {z}")
        out[z] = np.sqrt(np.mean(col**2))
    return out


def horizon_curve(pred: PredictionSet, horizons: np.ndarray | None = None) -> pd.DataFrame:
    """RMS versus lead time: one row per horizon, one column per zone plus mean."""
    horizons = np.arange(1, pred.horizon + 1) if horizons is None else np.asarray(horizons)
    if horizons.max() > pred.horizon:
        raise EstimationError(
            f"requested horizon {horizons.max()} exceeds prediction set horizon {pred.horizon}"
        )
    rows = []
    for h in horizons:
        rms = rms_by_zone(pred.y_pred[:, h - 1], pred.y_meas[:, h - 1])
        rows.append([h, *rms, rms.mean()])
    return pd.DataFrame(rows, columns=["horizon", *pred.zone_ids, "mean"])


@dataclass
class EvaluationReport:
    """Per-zone RMS for each predictor plus derived comparison figures."""

    zone_ids: list[str]
    rms: dict[str, dict[str, float]]  # predictor name -> zone -> RMS
    mean_rms: dict[str, float]
    improvement: dict[str, float] | None = None  # zone -> fractional improvement
    mean_improvement: float | None = None
    horizon: pd.DataFrame | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "zone_ids": list(self.zone_ids),
            "rms": self.rms,
            "mean_rms": self.mean_rms,
            "improvement": self.improvement,
            "mean_improvement": self.mean_improvement,
            "meta": self.meta,
        }
        if self.horizon is not None:
            d["horizon_curve"] = self.horizon.to_dict(orient="list")
        return d

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EvaluationReport":
        d = json.loads(Path(path).read_text())
        horizon = None
        if "horizon_curve" in d:
            horizon = pd.DataFrame(d["horizon_curve"])
        return cls(
            zone_ids=d["zone_ids"],
            rms=d["rms"],
            mean_rms=d["mean_rms"],
            improvement=d.get("improvement"),
            mean_improvement=d.get("mean_improvement"),
            horizon=horizon,
            meta=d.get("meta", {}),
        )


def report_from_predictions(pred: PredictionSet, meta: dict | None = None) -> EvaluationReport:
    rms = rms_by_zone(pred.y_pred, pred.y_meas)
    table = {z: float(r) for z, r in zip(pred.zone_ids, rms)}
    return EvaluationReport(
        zone_ids=list(pred.zone_ids),
        rms={pred.predictor: table},
        mean_rms={pred.predictor: float(rms.mean())},
        meta={
            "cadence": pred.cadence,
            "horizon": pred.horizon,
            "n_starts": int(len(pred.starts)),
            **(meta or {}),
        },
    )


def compare_predictors(
    report_fixed: EvaluationReport, report_online: EvaluationReport
) -> EvaluationReport:
    """Combine a fixed-gains report and an online-gains report.

    Improvement is (fixed - online) / fixed, per zone and on the means.
    The two reports must score the same zones and compatible settings.
    """
    if report_fixed.zone_ids != report_online.zone_ids:
        raise EstimationError("reports score different zone sets")
    for key in ("cadence", "horizon"):
        a, b = report_fixed.meta.get(key), report_online.meta.get(key)
        if a is not None and b is not None and a != b:
            raise EstimationError(f"mismatched configs: {key} {a!r} vs {b!r}")
    fixed = _single_table(report_fixed)
    online = _single_table(report_online)
    improvement = {
        z: (fixed[z] - online[z]) / fixed[z] for z in report_fixed.zone_ids
    }
    mean_fixed = float(np.mean([fixed[z] for z in report_fixed.zone_ids]))
    mean_online = float(np.mean([online[z] for z in report_fixed.zone_ids]))
    return EvaluationReport(
        zone_ids=list(report_fixed.zone_ids),
        rms={"fixed": fixed, "online": online},
        mean_rms={"fixed": mean_fixed, "online": mean_online},
        improvement=improvement,
        mean_improvement=(mean_fixed - mean_online) / mean_fixed,
        meta={**report_fixed.meta, **report_online.meta},
    )


def _single_table(report: EvaluationReport) -> dict[str, float]:
    if len(report.rms) != 1:
        raise EstimationError("expected a single-predictor report")
    return next(iter(report.rms.values()))


def config_hash(config: dict) -> str:
    """Stable short hash of a JSON-serializable configuration."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
