"""Run every empirical bound oracle and write the machine-readable report.

Equivalent to `stabledp verify all --out results/verify_report.json`; exits
nonzero if any check lands on the wrong side of its expectation (the
under-noised negative control is expected to fail and counts as OK when it
does).
"""

from __future__ import annotations

import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from stabledp.cli import cmd_verify  # noqa: E402


def main() -> int:
    out = ROOT / "results" / "verify_report.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    code = cmd_verify("all", out_path=out)
    print(f"\nreport: {out}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
