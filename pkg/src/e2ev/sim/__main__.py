"""e2ev-sim run|sweep --config sim.json --out results.csv"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .model import SimConfig, SweepConfig, estimate_detection, result_row, sweep, to_csv


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="e2ev-sim", description="Detection-rate simulation.")
    ap.add_argument("command", choices=("run", "sweep"))
    ap.add_argument("--config", required=True, type=Path, help="JSON config file")
    ap.add_argument("--out", type=Path, help="CSV output path (default: stdout)")
    ap.add_argument("--backend", choices=("numba", "numpy"), help="kernel backend override")
    args = ap.parse_args(argv)

    try:
        obj = json.loads(args.config.read_text())
        if args.command == "run":
            cfg = SimConfig.from_dict(obj)
            rows = [result_row(cfg, estimate_detection(cfg, args.backend))]
        else:
            rows = sweep(SweepConfig.from_dict(obj), args.backend)
    except (OSError, ValueError, TypeError) as exc:
        print(f"e2ev-sim: {exc}", file=sys.stderr)
        return 2

    text = to_csv(rows)
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
