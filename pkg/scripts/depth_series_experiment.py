"""Chart-over-depth experiment on synthetic frames.

Simulates a chart frame at each field depth with coefficients derived from the
water tables, corrects it with every method, and prints accuracy and
consistency summaries, first on lossless float frames and then on 8-bit ones.

    python scripts/depth_series_experiment.py --water-type IA --csv-dir out/
"""

import argparse
import time
from pathlib import Path

import numpy as np

from uwcolor.experiments import CHART_RANGE_M, FIELD_DEPTHS_M, depth_series_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--water-type", default="IA")
    ap.add_argument("--z", type=float, default=CHART_RANGE_M)
    ap.add_argument("--depths", type=float, nargs="+", default=list(FIELD_DEPTHS_M))
    ap.add_argument("--size", default="640x480")
    ap.add_argument("--ambient-model", choices=("exponential", "as_written"), default="exponential")
    ap.add_argument("--csv-dir", type=Path, help="write accuracy/consistency CSVs per variant here")
    args = ap.parse_args()
    width, height = (int(v) for v in args.size.split("x"))

    for label, eight_bit in (("float frames", False), ("8-bit frames", True)):
        t0 = time.perf_counter()
        res = depth_series_experiment(args.depths, args.water_type, args.z, width, height,
                                      args.ambient_model, eight_bit=eight_bit)
        print(f"== {label} ({time.perf_counter() - t0:.1f} s)")
        for d, c, (est, opt) in zip(res.depths, res.injected, res.estimated):
            print(f"  depth {d:5.2f} m  injected beta_D {np.round(c.beta_d, 4)} beta_B {np.round(c.beta_b, 4)}"
                  f"  estimated beta_D {np.round(est.beta_d, 4)}")
        print(summarize(res))
        wins = sum(res.distances("proposed_est")[p] < res.distances("cuifm")[p] for p in res.distances("cuifm"))
        print(f"proposed_est beats cuifm on {wins}/24 patches\n")
        if args.csv_dir:
            args.csv_dir.mkdir(parents=True, exist_ok=True)
            tag = "8bit" if eight_bit else "float"
            res.evaluation.write_accuracy_csv(args.csv_dir / f"accuracy_{tag}.csv")
            res.evaluation.write_consistency_csv(args.csv_dir / f"consistency_{tag}.csv")


if __name__ == "__main__":
    main()
