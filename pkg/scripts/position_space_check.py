"""Smeared potential block at a point: retarded position-space integral versus momentum space.

Slow (tens of seconds per configuration).  Larger mass makes the legs decay faster on
the light cone, so the truncated cone integral converges with a smaller radius.
"""
import argparse
import time

import numpy as np

from qftk.config import PairQuadrature
from qftk.interacting import BLOCKS, a_int1_pointwise, a_int1_spatial
from qftk.test_spaces import from_json


def smearings():
    zeta = from_json([{"hermite": [[0, 0, 0, 1, 0], [1, 0, 0, 0.5, 0.2]], "component": c, "scale": 0.5}
                      for c in range(4)])
    chi = from_json([{"hermite": [[0, 1, 0, 1, 0], [0, 0, 0, 0.3, 0]], "component": c, "scale": 0.5}
                     for c in range(4)])
    return zeta, chi


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=2.0)
    ap.add_argument("--radius", type=float, nargs="+", default=[8.0, 10.0, 12.0])
    ap.add_argument("--blocks", nargs="+", default=list(BLOCKS))
    args = ap.parse_args()
    zeta, chi = smearings()
    x = np.array([0.2, 0.1, -0.3, 0.2])
    for block in args.blocks:
        ref = a_int1_pointwise(block, x, zeta, chi, m=args.m, pq=PairQuadrature(24, 12, 16))
        print(f"{block} momentum space {ref:.6e}", flush=True)
        for radius in args.radius:
            t = time.time()
            val = a_int1_spatial(block, x, zeta, chi, m=args.m, radius=radius, ball=(32, 16, 32),
                                 momentum_radius=3.0, momentum_ball=(32, 24, 32))
            print(f"  radius {radius:5.1f}  relative difference {abs(val - ref) / abs(ref):.2e}  "
                  f"{time.time() - t:.0f}s", flush=True)


if __name__ == "__main__":
    main()
