"""e2ev-verify: check a published election from its files alone.

Exit status 0 means PASS, 1 means FAIL, 2 means an input could not be decoded.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .core import verify_election


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="e2ev-verify", description="Verify a published election.")
    ap.add_argument("--manifest", required=True, type=Path)
    ap.add_argument("--board", required=True, type=Path)
    ap.add_argument("--receipt", type=Path, help="also check that this receipt's ballot was counted")
    ap.add_argument("--report", type=Path, help="write report.json here (default: stdout)")
    ap.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    args = ap.parse_args(argv)

    try:
        manifest = args.manifest.read_bytes()
        board = args.board.read_bytes()
        receipt = args.receipt.read_bytes() if args.receipt else None
    except OSError as exc:
        print(f"e2ev-verify: {exc}", file=sys.stderr)
        return 2

    start = time.perf_counter()
    report = verify_election(manifest, board, receipt)
    if args.timing:
        report.timing = {"seconds": round(time.perf_counter() - start, 3)}

    out = report.to_bytes()
    if args.report:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_bytes(out)
    else:
        sys.stdout.buffer.write(out)
    first = report.first_failure()
    if first is not None:
        print(
            f"FAIL {first.check} seq={first.seq} field={first.field} "
            f"expected={first.expected} found={first.found}",
            file=sys.stderr,
        )
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
