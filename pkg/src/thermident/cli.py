"""Batch command-line front end.

Subcommands: build, excite, synthesize, identify, estimate-ig, predict,
evaluate. Each validates its inputs, delegates to the library, writes its
module's output files into the configured output directory, and exits 0 on
success. Failures are serialized as one JSON object on stderr with a
nonzero exit code. A lock file guards the output directory against
concurrent invocations. Log level comes from the THERMIDENT_LOG
environment variable only.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from .building import BuildingDescription
from .config import RunConfig
from .dataset import TimeSeriesDataset
from .errors import ConfigError, ThermidentError
from .evaluate import (
    EvaluationReport,
    compare_predictors,
    horizon_curve,
    report_from_predictions,
)
from .excitation import generate_excitation
from .identify import (
    estimate_fixed_ig,
    identify_parameters,
    predict_fixed_ig,
    predict_online_ig,
    weekend_identification_slice,
)
from .igprofile import InternalGainsProfile
from .params import ParameterVector, default_bounds
from .rcmodel import DiscreteModel, build_discrete_model
from .synth import synthesize_dataset, synthesize_weekend_experiment, synthesize_weeks
from .twin import twin_description, twin_true_parameters

logger = logging.getLogger("thermident")

LOCK_NAME = ".thermident.lock"


@contextmanager
def _locked_output_dir(path: str | Path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    lock = out / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"output directory {out} is locked by another run (remove {lock} if stale)"
        )
    try:
        os.close(fd)
        yield out
    finally:
        lock.unlink(missing_ok=True)


def _load_description(spec: str) -> BuildingDescription:
    if spec == "twin":
        return twin_description()
    return BuildingDescription.load(spec)


def _load_gamma(path: str | None, zone_ids, config: RunConfig) -> ParameterVector:
    if path is None:
        return config.gamma0_vector(zone_ids)
    if path == "twin-truth":
        return twin_true_parameters()
    return ParameterVector.from_dict(json.loads(Path(path).read_text()))


def _stamp(payload: dict, config: RunConfig) -> dict:
    payload["config_hash"] = config.hash()
    return payload


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_build(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    gamma = _load_gamma(args.params, desc.zone_ids, config)
    dm = build_discrete_model(desc, gamma, dt=config.dt, nodes_per_element=config.nodes_per_element)
    with _locked_output_dir(config.output_dir) as out:
        artifact = _stamp(dm.to_dict(), config)
        _write_json(out / args.out, artifact)
    print(f"model artifact written: {Path(config.output_dir) / args.out} "
          f"(n={dm.n}, zones={dm.n_zones}, boxes={dm.n_boxes})")


def cmd_excite(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    schedule = generate_excitation(desc, seed=args.seed, days=args.days, start=args.start)
    with _locked_output_dir(config.output_dir) as out:
        schedule.save(out / args.out)
        _write_json(out / (Path(args.out).stem + "_meta.json"),
                    _stamp({"seed": args.seed, "days": args.days,
                            "blocks": schedule.blocks}, config))
    print(f"excitation schedule written: {Path(config.output_dir) / args.out}")


def cmd_synthesize(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    gamma = _load_gamma(args.params or "twin-truth", desc.zone_ids, config)
    from .synth import NoiseConfig

    noise = NoiseConfig(meas_std=args.meas_noise)
    if args.mode == "weekend":
        ds = synthesize_weekend_experiment(desc, gamma, args.start, seed=args.seed, noise=noise)
    elif args.mode == "weeks":
        ds = synthesize_weeks(desc, gamma, args.start, weeks=args.weeks, seed=args.seed, noise=noise)
    else:
        ds = synthesize_dataset(desc, gamma, args.start, days=args.days, seed=args.seed, noise=noise)
    with _locked_output_dir(config.output_dir) as out:
        ds.save(out / args.out)
        _write_json(out / (Path(args.out).stem + "_meta.json"),
                    _stamp({"mode": args.mode, "seed": args.seed, "start": args.start,
                            "steps": ds.n_steps, "warmup_steps": ds.warmup_steps}, config))
    print(f"dataset written: {Path(config.output_dir) / args.out} ({ds.n_steps} steps)")


def cmd_identify(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    datasets = [TimeSeriesDataset.load(p) for p in args.datasets]
    if args.weekend_slice:
        datasets = [weekend_identification_slice(d) for d in datasets]
    validation = [TimeSeriesDataset.load(p) for p in args.validation] if args.validation else None
    gamma0 = _load_gamma(args.gamma0, desc.zone_ids, config)
    result = identify_parameters(
        desc,
        datasets,
        gamma0,
        bounds=default_bounds(desc.zone_ids),
        noise=config.kalman,
        dt=config.dt,
        nodes_per_element=config.nodes_per_element,
        settings=config.optimizer,
        validation_datasets=validation,
        kf_warmup_steps=args.kf_warmup,
    )
    with _locked_output_dir(config.output_dir) as out:
        _write_json(out / args.out, _stamp(result.to_dict(), config))
    print(f"identification report written: {Path(config.output_dir) / args.out}")
    print(f"  objective SSE = {result.objective:.6g}, evaluations = {result.n_evaluations}")
    for zone, rms in result.rms_train.items():
        print(f"  train RMS {zone}: {rms:.4f} degC")


def cmd_estimate_ig(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    gamma = _load_gamma(args.params, desc.zone_ids, config)
    dm = build_discrete_model(desc, gamma, dt=config.dt, nodes_per_element=config.nodes_per_element)
    weeks = [TimeSeriesDataset.load(p) for p in args.weeks]
    profile = estimate_fixed_ig(dm, weeks, noise=config.kalman)
    with _locked_output_dir(config.output_dir) as out:
        profile.save(out / args.out)
        _write_json(out / (Path(args.out).stem + "_meta.json"),
                    _stamp({"n_weeks": len(weeks)}, config))
    print(f"gains profile written: {Path(config.output_dir) / args.out}")


def cmd_predict(args, config: RunConfig) -> None:
    desc = _load_description(args.desc)
    gamma = _load_gamma(args.params, desc.zone_ids, config)
    dm = build_discrete_model(desc, gamma, dt=config.dt, nodes_per_element=config.nodes_per_element)
    ds = TimeSeriesDataset.load(args.dataset)
    if args.online:
        pred = predict_online_ig(dm, ds, horizon=config.horizon,
                                 noise=config.kalman, cadence=config.cadence)
    else:
        if not args.profile:
            raise ConfigError("fixed-gains prediction requires --profile (or pass --online)")
        profile = InternalGainsProfile.load(args.profile, c_ig=gamma.c_ig)
        pred = predict_fixed_ig(dm, profile, ds, horizon=config.horizon,
                                noise=config.kalman, cadence=config.cadence)
    import pandas as pd

    rows = []
    for si, s in enumerate(pred.starts):
        for h in range(pred.horizon):
            row = {"start": int(s), "horizon": h + 1}
            for zi, z in enumerate(pred.zone_ids):
                row[f"pred_{z}"] = pred.y_pred[si, h, zi]
                row[f"meas_{z}"] = pred.y_meas[si, h, zi]
            rows.append(row)
    with _locked_output_dir(config.output_dir) as out:
        pd.DataFrame(rows).to_csv(out / args.out, index=False)
        report = report_from_predictions(pred, meta={"config_hash": config.hash()})
        report.save(out / (Path(args.out).stem + "_report.json"))
    print(f"predictions written: {Path(config.output_dir) / args.out} "
          f"({pred.predictor}, {len(pred.starts)} starts, horizon {pred.horizon})")


def cmd_evaluate(args, config: RunConfig) -> None:
    with _locked_output_dir(config.output_dir) as out:
        if args.mode == "compare":
            fixed = EvaluationReport.load(args.fixed)
            online = EvaluationReport.load(args.online)
            report = compare_predictors(fixed, online)
            report.meta["config_hash"] = config.hash()
            report.save(out / args.out)
            print(f"comparison written: {Path(config.output_dir) / args.out}")
            print(f"  mean RMS fixed={report.mean_rms['fixed']:.4f} "
                  f"online={report.mean_rms['online']:.4f} "
                  f"improvement={100 * report.mean_improvement:.1f}%")
        elif args.mode == "horizon":
            desc = _load_description(args.desc)
            gamma = _load_gamma(args.params, desc.zone_ids, config)
            dm = build_discrete_model(desc, gamma, dt=config.dt,
                                      nodes_per_element=config.nodes_per_element)
            ds = TimeSeriesDataset.load(args.dataset)
            profile = InternalGainsProfile.load(args.profile, c_ig=gamma.c_ig)
            pred = predict_fixed_ig(dm, profile, ds, horizon=config.horizon,
                                    noise=config.kalman, cadence=config.cadence)
            curve = horizon_curve(pred)
            curve.to_csv(out / args.out, index=False)
            print(f"horizon curve written: {Path(config.output_dir) / args.out}")
        else:
            raise ConfigError(f"unknown evaluate mode {args.mode!r}")


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thermident",
        description="Bilinear RC building models: build, identify, predict, evaluate.",
    )
    parser.add_argument("--config", help="run configuration JSON", default=None)
    parser.add_argument("--output-dir", help="override config output directory", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="validate a building description and dump model matrices")
    p.add_argument("--desc", required=True, help="building description JSON, or 'twin'")
    p.add_argument("--params", help="parameter JSON ('twin-truth' for the builtin set)")
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("excite", help="generate an excitation schedule")
    p.add_argument("--desc", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=2)
    p.add_argument("--start", default="2015-03-07T00:00:00")
    p.add_argument("--out", default="schedule.csv")
    p.set_defaults(func=cmd_excite)

    p = sub.add_parser("synthesize", help="generate synthetic twin data")
    p.add_argument("--desc", default="twin")
    p.add_argument("--params", help="true parameters (default: builtin twin truth)")
    p.add_argument("--mode", choices=["weekend", "weeks", "days"], default="weekend")
    p.add_argument("--start", default="2015-03-07")
    p.add_argument("--weeks", type=int, default=1)
    p.add_argument("--days", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--meas-noise", type=float, default=0.0)
    p.add_argument("--out", default="dataset.csv")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("identify", help="identify physical parameters from weekend data")
    p.add_argument("--desc", default="twin")
    p.add_argument("--datasets", nargs="+", required=True)
    p.add_argument("--validation", nargs="*", default=None)
    p.add_argument("--gamma0", help="initial guess JSON (default: builtin plausible guess)")
    p.add_argument("--weekend-slice", action="store_true",
                   help="trim datasets to their weekend before fitting")
    p.add_argument("--kf-warmup", type=int, default=96)
    p.add_argument("--out", default="identification.json")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("estimate-ig", help="estimate the weekly internal-gains profile")
    p.add_argument("--desc", default="twin")
    p.add_argument("--params", required=True, help="identified parameters JSON")
    p.add_argument("--weeks", nargs="+", required=True, help="training week CSVs")
    p.add_argument("--out", default="ig_profile.csv")
    p.set_defaults(func=cmd_estimate_ig)

    p = sub.add_parser("predict", help="run fixed-profile or online-gains predictions")
    p.add_argument("--desc", default="twin")
    p.add_argument("--params", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--profile", help="gains profile CSV (fixed predictor)")
    p.add_argument("--online", action="store_true")
    p.add_argument("--out", default="predictions.csv")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="compute reports: comparisons and horizon curves")
    p.add_argument("--mode", choices=["compare", "horizon"], required=True)
    p.add_argument("--fixed", help="fixed-predictor report JSON (compare mode)")
    p.add_argument("--online", help="online-predictor report JSON (compare mode)")
    p.add_argument("--desc", default="twin")
    p.add_argument("--params")
    p.add_argument("--dataset")
    p.add_argument("--profile")
    p.add_argument("--out", default="evaluation.json")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("THERMIDENT_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.load(args.config)
        if args.output_dir:
            config.output_dir = args.output_dir
        args.func(args, config)
    except ThermidentError as exc:
        json.dump(exc.to_dict(), sys.stderr)
        sys.stderr.write("\n")
        return 2
    except FileNotFoundError as exc:
        json.dump({"code": "E_CONFIG", "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
