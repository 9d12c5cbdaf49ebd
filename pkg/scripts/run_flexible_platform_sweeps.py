"""Flexible-platform sweeps over the late arm's entry shift (0..150).

Covers FWER / k-FWER convergence toward the individual-control level,
required sample sizes and budget-constrained power for the joining sponsor,
and disjunctive / conjunctive power in the all-effective case.
"""

import argparse
from pathlib import Path

from platformsim.presets import run_preset

PRESETS = ("fig5_flex_fwer", "fig6_flex_n_and_power", "fig7_flex_disj_conj")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/flexible_platform")
    parser.add_argument("--reps", type=int, default=50_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument(
        "--step", type=int, default=10, help="shift grid step in patients (default 10)"
    )
    args = parser.parse_args()

    sweep = tuple(range(0, 151, args.step))
    for name in PRESETS:
        result = run_preset(
            name,
            overrides={
                "reps": args.reps,
                "seed": args.seed,
                "workers": args.workers,
                "sweep": sweep,
            },
            out_dir=Path(args.out) / name,
        )
        print(f"{name}: wrote {result.results_csv}")
        for path in result.plotdata_paths:
            print(f"  plot data: {path}")


if __name__ == "__main__":
    main()
