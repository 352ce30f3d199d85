"""Command-line entry point: ``qkr <command> [--config FILE] [--set key=value ...]``."""
from __future__ import annotations

import argparse
import math
import os
import sys
import textwrap
from pathlib import Path

import numpy as np

from . import __version__, experiments, io
from .classical import lyapunov_ensemble, phase_portrait, seed_line
from .config import CONFIG_KEYS, ConfigError, ExperimentConfig, load_config
from .core import DomainError, ResolutionError
from .propagator import TruncationError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_VALIDATION = 4

COMMANDS = {
    "time-series": "squeezing, spread and classical reference after every kick",
    "k-sweep": "one row per K after n_fixed kicks",
    "extrema": "minimal S and maximal d over kicks 1..n_window",
    "sigma-sweep": "time series for every width in sigma_list",
    "phase-stability": "optimal-phase difference of two neighbouring packets",
    "disintegration": "long run without termination, with |psi| and |A_k| snapshots",
    "oracle-check": "spectral map against the Bessel-matrix map on a small grid",
    "phase-portrait": "classical orbits of the standard map for each K in portrait_K",
    "lyapunov": "ensemble Lyapunov exponent for each K in K_grid",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _epilog() -> str:
    keys = textwrap.fill(", ".join(CONFIG_KEYS), width=76, initial_indent="  ",
                         subsequent_indent="  ")
    commands = "\n".join(f"  {name:<16} {text}" for name, text in COMMANDS.items())
    return (f"commands:\n{commands}\n\nconfig keys (file lines or --set key=value):\n{keys}\n\n"
            "exit status: 0 ok, 2 usage, 3 config, 4 validation failure")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qkr",
        description="Gaussian wave packets in the quantum kicked rotator: squeezing and instability.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=list(COMMANDS), metavar="command",
                        help="one of: " + ", ".join(COMMANDS))
    parser.add_argument("--config", type=Path, help="flat key = value configuration file")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    parser.add_argument("--threads", type=int, help="worker threads for K sweeps (same as --set threads=N)")
    parser.add_argument("--out-dir", type=Path,
                        help="output directory (default: $QKR_OUT_DIR or the current directory)")
    return parser


def _run_quantum(name: str, cfg: ExperimentConfig, out_dir: Path) -> tuple[list[Path], int]:
    runner = {
        "time-series": experiments.run_time_series,
        "k-sweep": experiments.run_k_sweep,
        "extrema": experiments.run_extrema_sweep,
        "sigma-sweep": experiments.run_sigma_sweep,
        "phase-stability": experiments.run_phase_stability,
        "disintegration": experiments.run_disintegration,
    }[name]
    records = runner(cfg)
    stem = name.replace("-", "_")
    outputs = [io.write_records(out_dir / f"{stem}.csv", records)]
    outputs += io.write_profiles(out_dir, stem, records)
    flagged = sum(r.delocalized for r in records)
    print(f"{name}: {len(records)} records ({flagged} delocalized) -> {outputs[0]}")
    return outputs, EXIT_OK


def _run_oracle(cfg: ExperimentConfig, out_dir: Path) -> tuple[list[Path], int]:
    report = experiments.run_oracle_check(cfg)
    path = io.write_table(out_dir / "oracle_check.csv", ("n", "max_deviation", "worst_k", "norm_bessel"),
                          report.per_kick)
    print(report.describe())
    return [path], EXIT_OK if report.passed else EXIT_VALIDATION


def _run_portrait(cfg: ExperimentConfig, out_dir: Path) -> tuple[list[Path], int]:
    p_values = -math.pi + (2.0 * math.pi / cfg.portrait_seeds) * np.arange(cfg.portrait_seeds)
    seeds = seed_line(math.pi, p_values)
    rows = []
    for K in cfg.portrait_K:
        for i, cloud in enumerate(phase_portrait(K, seeds, cfg.portrait_kicks)):
            rows.extend((K, i, n, x, P) for n, (x, P) in enumerate(cloud))
    path = io.write_table(out_dir / "phase_portrait.csv", ("K", "seed", "n", "x", "P"), rows)
    print(f"phase-portrait: {len(rows)} points -> {path}")
    return [path], EXIT_OK


def _run_lyapunov(cfg: ExperimentConfig, out_dir: Path) -> tuple[list[Path], int]:
    rows = []
    for K in cfg.K_grid:
        est = lyapunov_ensemble(K, cfg.lyapunov_kicks, cfg.lyapunov_seeds, cfg.rng_seed)
        rows.append((K, est.value, math.log(K / 2.0), float(est.per_seed.min()),
                     float(est.per_seed.max()), est.regular))
    path = io.write_table(out_dir / "lyapunov.csv",
                          ("K", "lyapunov", "ln_half_K", "lyapunov_min", "lyapunov_max", "regular"), rows)
    print(f"lyapunov: {len(rows)} values of K -> {path}")
    return [path], EXIT_OK


def parse_and_dispatch(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    if args.config is not None and not args.config.is_file():
        print(f"qkr: error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    overrides = list(args.overrides)
    if args.threads is not None:
        overrides.append(f"threads={args.threads}")
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"qkr: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out_dir or Path(os.environ.get("QKR_OUT_DIR", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "oracle-check":
            outputs, status = _run_oracle(cfg, out_dir)
        elif args.command == "phase-portrait":
            outputs, status = _run_portrait(cfg, out_dir)
        elif args.command == "lyapunov":
            outputs, status = _run_lyapunov(cfg, out_dir)
        else:
            outputs, status = _run_quantum(args.command, cfg, out_dir)
    except (DomainError, ResolutionError) as exc:
        print(f"qkr: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"qkr: validation failure: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    io.write_manifest(out_dir, args.command.replace("-", "_"), cfg, outputs, __version__)
    return status


def main() -> None:
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
