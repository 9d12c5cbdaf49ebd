"""Fixed-platform sweeps over the number of treatment arms (2..10).

Covers the k-FWER inflation curves, required sample sizes for 90% marginal
power, marginal power under a fixed 600-patient total, and disjunctive /
conjunctive power when every arm works.
"""

import argparse
from pathlib import Path

from platformsim.presets import run_preset

PRESETS = ("fig2_kfwer_sweep", "fig3_required_n", "fig3_power_fixed_total", "fig4_disj_conj")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/fixed_platform")
    parser.add_argument("--reps", type=int, default=50_000)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for name in PRESETS:
        result = run_preset(
            name,
            overrides={"reps": args.reps, "seed": args.seed, "workers": args.workers},
            out_dir=Path(args.out) / name,
        )
        print(f"{name}: wrote {result.results_csv}")
        for path in result.plotdata_paths:
            print(f"  plot data: {path}")


if __name__ == "__main__":
    main()
