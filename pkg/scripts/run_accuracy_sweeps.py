"""Accuracy vs. regularization under three noise policies.

Runs the lambda x epsilon sweep on the bundled synthetic multiclass task
three times: no noise, stability-calibrated noise (scale falls as 1/lambda
for fixed epsilon), and a fixed Laplace scale. Writes one CSV + metadata
pair per policy under results/ and prints the aggregate accuracy curves.
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from stabledp.cli import SweepConfig, cmd_sweep  # noqa: E402


def aggregate(path: Path) -> list[tuple[float, float, float]]:
    rows = []
    with open(path) as fh:
        for row in csv.DictReader(fh):
            if row["repeat"] == "-1":
                rows.append((float(row["lambda"]), float(row["test_accuracy"]),
                             float(row["test_accuracy_std"])))
    return rows


def main() -> None:
    out_root = ROOT / "results"
    policies = {
        "none": SweepConfig(noise_mode="none"),
        "stability_optimal": SweepConfig(noise_mode="stability_optimal"),
        "fixed_scale": SweepConfig(noise_mode="fixed_scale", fixed_scale_b=0.3),
    }
    curves = {}
    for name, cfg in policies.items():
        path = cmd_sweep(cfg, out_root / f"sweep_{name}")
        curves[name] = aggregate(path)
        print(f"wrote {path}")

    lambdas = [lam for lam, _, _ in curves["none"]]
    print(f"\n{'lambda':>10} {'non-private':>12} {'stability':>12} {'fixed b=0.3':>12}")
    for i, lam in enumerate(lambdas):
        print(f"{lam:>10g} "
              f"{curves['none'][i][1]:>12.4f} "
              f"{curves['stability_optimal'][i][1]:>12.4f} "
              f"{curves['fixed_scale'][i][1]:>12.4f}")


if __name__ == "__main__":
    main()
