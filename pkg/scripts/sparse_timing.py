"""Time sparse keypoint correction for a given keypoint count and patch size."""

import argparse
import time

import numpy as np

from uwcolor.formation import AttenuationCoeffs, VeilingLight
from uwcolor.pipeline import SparseRangeMap, correct_sparse


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--keypoints", type=int, default=30)
    ap.add_argument("--patch-px", type=int, default=64)
    ap.add_argument("--size", default="640x480")
    ap.add_argument("--repeats", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    w, h = (int(v) for v in args.size.split("x"))

    rng = np.random.default_rng(args.seed)
    img = rng.uniform(size=(h, w, 3))
    pts = np.column_stack([rng.integers(0, w, args.keypoints), rng.integers(0, h, args.keypoints),
                           rng.uniform(0.3, 5, args.keypoints)])
    rmap = SparseRangeMap(pts)
    coeffs = AttenuationCoeffs([0.6, 0.3, 0.2], [0.4, 0.25, 0.2])
    v = VeilingLight([0.1, 0.35, 0.5])

    correct_sparse(img, rmap, coeffs, v, args.patch_px)
    times = []
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        correct_sparse(img, rmap, coeffs, v, args.patch_px)
        times.append(time.perf_counter() - t0)
    t = np.array(times) * 1e3
    print(f"{args.keypoints} keypoints, {args.patch_px}px patches, {w}x{h}: "
          f"median {np.median(t):.1f} ms, min {t.min():.1f} ms, max {t.max():.1f} ms")


if __name__ == "__main__":
    main()
