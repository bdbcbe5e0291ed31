"""Noether charge versus dGamma(P^mu) for both Dirac realizations, all mu, both fixed pairs."""
import argparse

from qftk.fock_oracle import bsp_check
from qftk.suites import BSP_HINTS, bsp_pairs


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=float, default=1.0)
    ap.add_argument("--variants", nargs="+", default=["dirac_standard", "dirac_local"])
    args = ap.parse_args()
    print(f"{'variant':15} {'pair':>4} {'mu':>2} {'residual':>10} {'rel.dev':>10} {'pair terms':>10}")
    for variant in args.variants:
        for k, (zeta, chi) in enumerate(bsp_pairs(BSP_HINTS)):
            for mu in range(4):
                r = bsp_check(variant, mu, zeta, chi, m=args.m)
                print(f"{variant:15} {k:4d} {mu:2d} {r['residual']:10.2e} {r['relative_deviation']:10.2e} "
                      f"{r['pair_terms_relative']:10.2e}", flush=True)


if __name__ == "__main__":
    main()
