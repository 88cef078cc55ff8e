"""``cqms-lab <command> --config path [--emit csv|json] [--out dir] [--seed u64]``."""

from __future__ import annotations

import argparse
import dataclasses
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import mpmath
import numpy as np
import scipy

from . import __version__
from .config import COMMANDS, ExperimentConfig
from .errors import LabError
from .experiments import run_command
from .report import CommandReport, write_csv_tables, write_json


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqms-lab", description=__doc__)
    parser.add_argument("command", choices=[*COMMANDS, "all"])
    parser.add_argument("--config", required=True, help="JSON experiment configuration")
    parser.add_argument("--emit", choices=["json", "csv"], help="report format (default from config, else json)")
    parser.add_argument("--out", help="output directory (default from config)")
    parser.add_argument("--seed", type=_u64, help="override the configured RNG seed")
    parser.add_argument("--cache-dir", help="directory for persisted ball caches")
    parser.add_argument("--parallel", action="store_true", help="run the commands of 'all' in worker processes")
    parser.add_argument("--timings", action="store_true",
                        help="write wall-clock times to timings.json (kept out of the reports)")
    parser.add_argument("--quiet", action="store_true", help="only print the summary line")
    return parser


def versions() -> dict:
    return {
        "cqms_lab": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


def _timed(config: ExperimentConfig, name: str) -> tuple[CommandReport, float]:
    start = time.perf_counter()
    rep = run_command(config, name)
    return rep, time.perf_counter() - start


def run(config: ExperimentConfig, commands, parallel: bool = False) -> list[tuple[CommandReport, float]]:
    if parallel and len(commands) > 1:
        with ProcessPoolExecutor(max_workers=min(len(commands), 4)) as pool:
            futures = [pool.submit(_timed, config, name) for name in commands]
            return [f.result() for f in futures]
    return [_timed(config, name) for name in commands]


def write_outputs(config: ExperimentConfig, reports: list[CommandReport], out_dir: Path, emit: str) -> list[Path]:
    written = []
    for rep in reports:
        if emit == "csv":
            written.extend(write_csv_tables(out_dir, rep))
        else:
            doc = {"config": config.echo(), "versions": versions(), "report": rep.to_json()}
            written.append(write_json(out_dir / f"{rep.command}.json", doc))
    return written


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = ExperimentConfig.load(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.emit:
            overrides["emit"] = args.emit
        if args.out:
            overrides["out_dir"] = args.out
        if args.cache_dir:
            overrides["cache_dir"] = args.cache_dir
        config = dataclasses.replace(config, **overrides)
        commands = list(COMMANDS) if args.command == "all" else [args.command]
        results = run(config, commands, parallel=args.parallel)
    except LabError as exc:
        print(f"cqms-lab: error: {exc}", file=sys.stderr)
        return 2
    reports = [rep for rep, _ in results]
    out_dir = Path(config.out_dir)
    write_outputs(config, reports, out_dir, config.emit)
    if args.timings:
        write_json(out_dir / "timings.json", {rep.command: round(t, 3) for rep, t in results})
    n_pass = n_total = 0
    for rep in reports:
        for v in rep.verdicts:
            n_total += 1
            n_pass += v.passed
            if not args.quiet:
                print(f"{rep.command:16s} {v.line()}")
    ok = all(rep.passed for rep in reports)
    print(f"{n_pass}/{n_total} verdicts passed; reports in {out_dir}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
