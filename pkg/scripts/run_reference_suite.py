"""Run every command on configs/reference.json twice and confirm byte-identical reports."""

import argparse
import filecmp
import sys
import tempfile
from pathlib import Path

from cqms_lab.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--config", default=str(ROOT / "configs" / "reference.json"))
    parser.add_argument("--out", help="keep the first run's reports here")
    args = parser.parse_args()
    with tempfile.TemporaryDirectory() as tmp:
        first = Path(args.out) if args.out else Path(tmp) / "a"
        second = Path(tmp) / "b"
        code = cli_main(["all", "--config", args.config, "--out", str(first), "--parallel", "--timings"])
        cli_main(["all", "--config", args.config, "--out", str(second), "--parallel", "--quiet"])
        names = sorted(p.name for p in first.glob("*.json") if p.name != "timings.json")
        _, mismatch, errors = filecmp.cmpfiles(first, second, names, shallow=False)
    print(f"determinism: {len(names) - len(mismatch) - len(errors)}/{len(names)} reports byte-identical")
    return code if not (mismatch or errors) else 1


if __name__ == "__main__":
    sys.exit(main())
