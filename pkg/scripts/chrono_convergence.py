"""Regularized tree kernel along a longer epsilon schedule, against the sharp massless limit."""
import argparse

from qftk.config import RunConfig
from qftk.convergence import convergence_table
from qftk.interacting import chrono2_tree_kernel, chrono2_tree_oracle
from qftk.suites import default_chrono_smearing


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=6)
    ap.add_argument("--start", type=float, default=0.4)
    args = ap.parse_args()
    sm = default_chrono_smearing(RunConfig())
    oracle = chrono2_tree_oracle(sm)
    eps = [args.start / 2**k for k in range(args.steps)]
    values = []
    for e in eps:
        values.append(chrono2_tree_kernel(e, e, sm))
        print(f"eps={e:.5f}  value {values[-1]:.12e}  |value - limit| {abs(values[-1] - oracle):.3e}", flush=True)
    table = convergence_table(eps, eps, values)
    print(f"observed order {table['observed_order']:.3f}")
    print(f"extrapolated relative error {abs(table['extrapolated'] - oracle) / abs(oracle):.2e}")


if __name__ == "__main__":
    main()
