"""Closed-form blocks against the rule chain, with the quadrature refined step by step.

The relative difference between the two routes should stay at rounding level for every
grid, while the values themselves converge as the pair grid is refined.
"""
import argparse

import numpy as np

from qftk.config import PairQuadrature
from qftk.interacting import BLOCKS, a_int1_closed, a_int1_via_rules, psi_int1_closed, psi_int1_via_rules
from qftk.suites import random_smearings

GRIDS = [PairQuadrature(8, 4, 6), PairQuadrature(12, 6, 8), PairQuadrature(16, 8, 12)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--e", type=float, default=0.302822)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    smear = random_smearings(rng)
    smear0 = random_smearings(rng, photon_leg=True)
    jobs = [("A_int", a_int1_closed, a_int1_via_rules, smear, "mu"),
            ("psi_int", psi_int1_closed, psi_int1_via_rules, smear0, "a")]
    for name, closed_fn, rules_fn, (zeta, chi, phi), index in jobs:
        for block in BLOCKS:
            previous = None
            for pq in GRIDS:
                kw = {index: 0, "e": args.e, "pq": pq}
                closed = closed_fn(block, zeta, chi, phi, **kw)
                rules = rules_fn(block, zeta, chi, phi, **kw)
                rel = abs(closed - rules) / max(abs(closed), 1e-300)
                step = "" if previous is None else f" grid change {abs(closed - previous) / abs(closed):.1e}"
                print(f"{name:7} {block} n_r={pq.n_r:2d}  value {closed:.6e}  closed/rules {rel:.1e}{step}",
                      flush=True)
                previous = closed


if __name__ == "__main__":
    main()
