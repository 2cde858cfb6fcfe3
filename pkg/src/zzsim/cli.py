"""Command-line entry point and deterministic CSV emission.

Usage:
    simulate --config cfg.json [options]
    simulate --preset stage1 [options]

Exit codes: 0 success, 1 runtime or I/O failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, PRESETS, feedback_off, parse_config, preset_config
from .ensemble import EnsembleError, EnsembleStats, aggregate_arrays, run_ensemble_raw

CSV_HEADER = (
    "tau,mean_purity,std_purity,mean_r2sq,std_r2sq,mean_rzz,"
    "mean_enc1_purity,mean_enc2_purity,mean_concurrence,mean_bell_fidelity,n"
)

TRAJECTORY_HEADER = "traj,tau,purity,r2sq,rzz,enc1_purity,enc2_purity,concurrence,bell_fidelity"


def _fmt(value: float) -> str:
    """9 significant digits, trailing zeros kept; deterministic bytes."""
    return f"{value:#.9g}"


def write_timeseries_csv(stats: EnsembleStats, destination) -> None:
    """Emit the ensemble statistics table with LF endings and a fixed header."""
    lines = [CSV_HEADER]
    for i in range(len(stats.taus)):
        lines.append(
            f"{stats.taus[i]:.9f},"
            f"{_fmt(stats.mean['purity'][i])},{_fmt(stats.std['purity'][i])},"
            f"{_fmt(stats.mean['r2sq'][i])},{_fmt(stats.std['r2sq'][i])},"
            f"{_fmt(stats.mean['rzz'][i])},"
            f"{_fmt(stats.mean['enc1_purity'][i])},{_fmt(stats.mean['enc2_purity'][i])},"
            f"{_fmt(stats.mean['concurrence'][i])},{_fmt(stats.mean['bell_fidelity'][i])},"
            f"{stats.count}"
        )
    Path(destination).write_text("\n".join(lines) + "\n", newline="\n")


def write_trajectories_csv(taus: np.ndarray, data: dict[str, np.ndarray], destination) -> None:
    """Per-trajectory dump: the metric columns plus a leading trajectory index."""
    fields = ("purity", "r2sq", "rzz", "enc1_purity", "enc2_purity", "concurrence", "bell_fidelity")
    lines = [TRAJECTORY_HEADER]
    n_traj, n_bins = data["purity"].shape
    for t in range(n_traj):
        for i in range(n_bins):
            lines.append(f"{t},{taus[i]:.9f}," + ",".join(_fmt(data[f][t, i]) for f in fields))
    Path(destination).write_text("\n".join(lines) + "\n", newline="\n")


def _run_one(config: ExperimentConfig, out_dir: Path) -> list[Path]:
    written = []
    data = run_ensemble_raw(config)
    stats = aggregate_arrays(config.tau_grid(), data)
    path = out_dir / f"{config.name}.csv"
    write_timeseries_csv(stats, path)
    written.append(path)
    if config.emit_trajectories:
        dump = out_dir / f"{config.name}_trajectories.csv"
        write_trajectories_csv(config.tau_grid(), data, dump)
        written.append(dump)
    return written


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simulate",
        description="Run weak-parity-measurement feedback ensembles and emit CSV time series.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="JSON configuration file")
    source.add_argument("--preset", choices=sorted(PRESETS), help="named preset")
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    parser.add_argument("--seed", type=int, help="override the base seed")
    parser.add_argument("--n-traj", type=int, help="override the trajectory count")
    parser.add_argument("--feedback", choices=("on", "off"), help="off replaces the policy with none")
    parser.add_argument("--stepper", choices=("em", "kraus"), help="override the integrator")
    parser.add_argument("--emit-trajectories", action="store_true", help="also dump per-trajectory series")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config is not None:
            config = parse_config(args.config.read_text())
        else:
            config = preset_config(args.preset)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.n_traj is not None:
            overrides["n_traj"] = args.n_traj
        if args.stepper is not None:
            overrides["stepper"] = args.stepper
        if args.emit_trajectories:
            overrides["emit_trajectories"] = True
        if args.feedback == "off" and not config.compare_feedback:
            overrides["policy"] = "none"
        if overrides:
            config = replace(config, **overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        out_dir = args.out
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if config.compare_feedback:
            arm_on = replace(config, name=f"{config.name}_feedback")
            arm_off = replace(feedback_off(config), name=f"{config.name}_nofeedback")
            written += _run_one(arm_on, out_dir)
            written += _run_one(arm_off, out_dir)
        else:
            written += _run_one(config, out_dir)
    except (EnsembleError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
