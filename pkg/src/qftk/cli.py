"""``qftk`` command line: invariant suites, kernel evaluation, first-order values, BSP and chrono studies.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or parse error,
3 test-function class or other precondition violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import ChronoConfig, RunConfig, load_config, override
from .convergence import ConvergenceError
from .errors import ClassViolation, SpanError
from .field_kernels import (
    ANNIH,
    CREAT,
    PlaneWaveKernel,
    identity_sqrt_b,
    smear_momentum,
    smear_spacetime,
)
from .interacting import (
    BLOCKS,
    ChronoSmearing,
    a_int1_closed,
    a_int1_via_rules,
    chrono2_tree_oracle,
    chrono_convergence,
    psi_int1_closed,
    psi_int1_via_rules,
)
from .fock_oracle import bsp_check
from .suites import (
    BSP_HINTS,
    EXPECTED_DIFFER,
    FAIL,
    PASS,
    SUITES,
    TOL_BSP,
    TOL_FIRST_ORDER,
    MIN_LOCAL_DEVIATION,
    bsp_pairs,
    bsp_suite,
    default_chrono_smearing,
    record,
    suite_passed,
)
from .test_spaces import QuadratureHints, from_json, spacetime_from_json

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CLASS = 0, 1, 2, 3


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------- output


def _num(x) -> str:
    x = float(x)
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    return format(x, ".17g")


def to_json(obj) -> str:
    """Deterministic JSON: sorted keys, every real printed with 17 significant digits."""
    if isinstance(obj, dict):
        items = sorted(obj.items(), key=lambda kv: str(kv[0]))
        return "{" + ", ".join(f"{json.dumps(str(k))}: {to_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(to_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return "{" + f'"im": {_num(obj.imag)}, "re": {_num(obj.real)}' + "}"
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return to_json(obj.tolist())
    return json.dumps(str(obj))


def _csv_cell(v):
    if isinstance(v, (complex, np.complexfloating)):
        return f"{_num(v.real)}{'+' if v.imag >= 0 else '-'}{_num(abs(v.imag))}j"
    if isinstance(v, (float, np.floating)):
        return _num(v).strip('"')
    if isinstance(v, (dict, list, tuple)):
        return to_json(v)
    return v


def to_csv(rows: list) -> str:
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(r.get(k, "")) for k in keys})
    return buf.getvalue()


def emit(report: dict, rows: list, as_csv: bool, out=None):
    out = out or sys.stdout
    out.write(to_csv(rows) if as_csv else to_json(report) + "\n")


# --------------------------------------------------------------------------- inputs


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read JSON from {path}: {exc}") from exc


def _config(args) -> RunConfig:
    data = _read_json(args.config) if args.config else None
    try:
        cfg = load_config(data)
        cfg = override(cfg, m=args.m, e=args.e, seed=args.seed, rep=args.rep,
                       dirac=_dirac_variant(args.variant) if getattr(args, "variant", None) else None)
        if getattr(args, "schedule", None):
            cfg = override(cfg, chrono=ChronoConfig(tuple(args.schedule), tuple(args.schedule), cfg.chrono.tau))
    except (ValueError, TypeError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    return cfg


def _dirac_variant(name: str) -> str:
    table = {"standard": "dirac_standard", "local": "dirac_local",
             "dirac_standard": "dirac_standard", "dirac_local": "dirac_local"}
    if name not in table:
        raise UsageError(f"unknown Dirac variant {name!r}")
    return table[name]


def _momentum_fn(path: str, cfg: RunConfig):
    desc = _read_json(path)
    try:
        return from_json(desc, cfg.quadrature)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ClassViolation):
            raise
        raise UsageError(f"malformed test function in {path}: {exc}") from exc


def _spacetime_fn(path: str):
    desc = _read_json(path)
    try:
        return spacetime_from_json(desc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ClassViolation):
            raise
        raise UsageError(f"malformed space-time smearing in {path}: {exc}") from exc


def _kernel(args, cfg: RunConfig) -> PlaneWaveKernel:
    species = args.species
    variant = args.kernel_variant or (cfg.dirac if species == "dirac" else cfg.photon)
    try:
        return PlaneWaveKernel(
            species, args.polarity, variant, args.component, adjoint=args.adjoint, m=cfg.m, rep=cfg.rep,
            sqrt_b=identity_sqrt_b if variant == "photon_sqrtB" else None,
        )
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from exc


# --------------------------------------------------------------------------- commands


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("QFTK_THREADS", "1")))
    except ValueError as exc:
        raise UsageError("QFTK_THREADS must be an integer") from exc


def cmd_verify(args, cfg: RunConfig):
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(['all', *SUITES])}")
    variant = _dirac_variant(args.variant) if args.variant else None

    def run(name):
        if name == "bsp":
            return bsp_suite(cfg, variant)
        return SUITES[name](cfg)

    with ThreadPoolExecutor(max_workers=min(_threads(), len(names))) as pool:
        results = list(pool.map(run, names))
    suites = [{"suite": n, "checks": r, "status": PASS if suite_passed(r) else FAIL} for n, r in zip(names, results)]
    ok = all(s["status"] == PASS for s in suites)
    report = {"command": "verify", "suites": suites, "status": PASS if ok else FAIL}
    rows = [{"suite": s["suite"], **{k: c[k] for k in ("check", "residual", "tolerance", "status")}}
            for s in suites for c in s["checks"]]
    return report, rows, EXIT_OK if ok else EXIT_FAIL


def cmd_kernel_eval(args, cfg: RunConfig):
    kernel = _kernel(args, cfg)
    p = np.array(args.p or [[0.0, 0.0, 0.0]], dtype=float)
    x = np.array(args.x or [0.0, 0.0, 0.0, 0.0], dtype=float)
    comps = range(4) if args.component is None else [args.component]
    rows = []
    for c in comps:
        k = kernel.with_component(c)
        amp = k.amplitude(p) * k.phase(p, x)[:, None]
        for i, pi in enumerate(p):
            for slot in range(4):
                rows.append({"component": c, "p": pi.tolist(), "slot": slot, "value": complex(amp[i, slot])})
    return {"command": "kernel-eval", "kernel": kernel.to_json(), "x": x.tolist(), "values": rows}, rows, EXIT_OK


def cmd_smear(args, cfg: RunConfig):
    kernel = _kernel(args, cfg)
    rows = []
    if args.spacetime:
        phi = _spacetime_fn(args.spacetime)
        fn = smear_spacetime(kernel, phi)
        p = np.array(args.p or [[0.5, 0.0, 0.0]], dtype=float)
        vals = fn(p)
        for i, pi in enumerate(p):
            for slot in range(4):
                rows.append({"p": pi.tolist(), "slot": slot, "value": complex(vals[i, slot])})
        return {"command": "smear", "mode": "spacetime", "kernel": kernel.to_json(), "values": rows}, rows, EXIT_OK
    if not args.smearing:
        raise UsageError("smear needs --smearing (momentum) or --spacetime")
    xi = _momentum_fn(args.smearing, cfg)
    fn = smear_momentum(kernel, xi)
    xs = args.x_list or [[0.0, 0.0, 0.0, 0.0]]
    comps = range(4) if args.component is None else [args.component]
    for c in comps:
        for x in xs:
            val, err = fn(c, x, with_error=True)
            rows.append({"component": c, "x": list(x), "value": val, "quadrature_error": err})
    return {"command": "smear", "mode": "momentum", "kernel": kernel.to_json(), "values": rows}, rows, EXIT_OK


def cmd_first_order(args, cfg: RunConfig):
    zeta = _momentum_fn(args.zeta, cfg)
    chi = _momentum_fn(args.chi, cfg)
    phi = _spacetime_fn(args.phi)
    blocks = BLOCKS if args.block == "all" else [args.block]
    common = dict(e=cfg.e, m=cfg.m, rep=cfg.rep, variant=cfg.dirac, pq=cfg.pair_quadrature)
    rows = []
    for block in blocks:
        if args.field == "A_int":
            closed, quad_error = a_int1_closed(block, zeta, chi, phi, mu=args.index, with_error=True, **common)
            rules = a_int1_via_rules(block, zeta, chi, phi, mu=args.index, **common)
            printed = (a_int1_closed(block, zeta, chi, phi, mu=0, form="printed", **common)
                       if args.printed and args.index == 0 else None)
        else:
            closed, quad_error = psi_int1_closed(block, zeta, chi, phi, a=args.index, with_error=True, **common)
            rules = psi_int1_via_rules(block, zeta, chi, phi, a=args.index, **common)
            printed = (psi_int1_closed(block, zeta, chi, phi, a=args.index, form="printed", **common)
                       if args.printed else None)
        scale = max(abs(closed), abs(rules))
        rel = abs(closed - rules) / scale if scale > 0 else 0.0
        row = {"field": args.field, "block": block, "index": args.index, "closed_form": closed,
               "rule_chain": rules, "relative_difference": rel, "quad_error": quad_error,
               "status": PASS if rel <= TOL_FIRST_ORDER else FAIL}
        if printed is not None:
            row["printed_form"] = printed
        rows.append(row)
    ok = all(r["status"] == PASS for r in rows)
    return {"command": "first-order", "results": rows, "status": PASS if ok else FAIL}, rows, \
        EXIT_OK if ok else EXIT_FAIL


def cmd_bsp(args, cfg: RunConfig):
    variant = _dirac_variant(args.variant) if args.variant else "dirac_standard"
    # the general-purpose default grid is far finer than these Hermite pairs need
    hints = BSP_HINTS if cfg.quadrature == QuadratureHints() else cfg.quadrature
    if args.zeta or args.chi:
        if not (args.zeta and args.chi):
            raise UsageError("bsp needs both --zeta and --chi")
        pairs = [(_momentum_fn(args.zeta, cfg), _momentum_fn(args.chi, cfg))]
    else:
        pairs = bsp_pairs(hints)
        if variant == "dirac_local":
            pairs = pairs[:1]
    mus = range(4) if args.mu is None else [args.mu]
    rows = []
    for k, (zeta, chi) in enumerate(pairs):
        for mu in mus:
            r = bsp_check(variant, mu, zeta, chi, cfg.m, cfg.rep, hints)
            if variant == "dirac_standard":
                rec = record(f"pair {k}, mu={mu}", r["residual"], TOL_BSP)
            else:
                rec = record(f"pair {k}, mu={mu}: deviation", r["relative_deviation"], MIN_LOCAL_DEVIATION,
                             bound="min", expected_differ=True)
            rec.update(variant=variant, mu=mu, computed=r["computed"], target=r["target"],
                       relative_deviation=r["relative_deviation"])
            rows.append(rec)
    ok = all(r["status"] in (PASS, EXPECTED_DIFFER) for r in rows)
    return {"command": "bsp", "results": rows, "status": PASS if ok else FAIL}, rows, EXIT_OK if ok else EXIT_FAIL


def cmd_chrono(args, cfg: RunConfig):
    if args.g1 or args.g2:
        if not (args.g1 and args.g2):
            raise UsageError("chrono needs both --g1 and --g2")
        sm = ChronoSmearing(_momentum_fn(args.g1, cfg), _momentum_fn(args.g2, cfg), tau=cfg.chrono.tau)
    else:
        sm = default_chrono_smearing(cfg)
    try:
        table = chrono_convergence(sm, cfg.chrono.eps_theta, cfg.chrono.eps_mass)
    except ConvergenceError as exc:
        report = {"command": "chrono", "status": FAIL, "diagnostic": str(exc)}
        return report, [{"status": FAIL, "diagnostic": str(exc)}], EXIT_FAIL
    oracle = chrono2_tree_oracle(sm)
    rows = [dict(r, extrapolation="") for r in table["rows"]]
    report = {
        "command": "chrono",
        "rows": table["rows"],
        "observed_order": table["observed_order"],
        "extrapolated": table["extrapolated"],
        "oracle": oracle,
        "relative_error": abs(table["extrapolated"] - oracle) / abs(oracle),
        "warning": table["warning"],
    }
    if "monotone" in table:
        report["monotone"] = table["monotone"]
    rows.append({"eps_theta": 0.0, "eps_mass": 0.0, "value": table["extrapolated"], "extrapolation": "limit"})
    if table["warning"]:
        print(f"warning: {table['warning']}", file=sys.stderr)
    return report, rows, EXIT_OK


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--csv", action="store_true", help="emit CSV instead of JSON")
    common.add_argument("--m", type=float, help="fermion mass override")
    common.add_argument("--e", type=float, help="coupling override")
    common.add_argument("--seed", type=int, help="random seed override")
    common.add_argument("--rep", choices=("standard", "chiral"), help="gamma-matrix representation")

    parser = argparse.ArgumentParser(prog="qftk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run invariant suites")
    p.add_argument("suite", help=f"one of: all, {', '.join(SUITES)}")
    p.add_argument("--variant", help="Dirac variant for the bsp suite (standard or local)")

    def kernel_args(q):
        q.add_argument("--species", choices=("dirac", "photon"), default="dirac")
        q.add_argument("--polarity", choices=(ANNIH, CREAT), default=ANNIH)
        q.add_argument("--kernel-variant", dest="kernel_variant",
                       help="dirac_standard, dirac_local, photon_identityB or photon_sqrtB")
        q.add_argument("--component", type=int)
        q.add_argument("--adjoint", action="store_true")
        q.add_argument("--p", type=float, nargs=3, action="append", metavar=("PX", "PY", "PZ"))

    p = sub.add_parser("kernel-eval", parents=[common], help="evaluate a plane-wave kernel")
    kernel_args(p)
    p.add_argument("--x", type=float, nargs=4, metavar=("T", "X", "Y", "Z"))

    p = sub.add_parser("smear", parents=[common], help="smear a kernel with a test function")
    kernel_args(p)
    p.add_argument("--smearing", help="momentum test function JSON (Hermite description)")
    p.add_argument("--spacetime", help="space-time smearing JSON (Gaussian description)")
    p.add_argument("--x", dest="x_list", type=float, nargs=4, action="append", metavar=("T", "X", "Y", "Z"))

    p = sub.add_parser("first-order", parents=[common], help="first-order interacting-field blocks")
    p.add_argument("--field", choices=("A_int", "psi_int"), default="A_int")
    p.add_argument("--block", choices=(*BLOCKS, "all"), default="all")
    p.add_argument("--zeta", required=True, help="first-slot momentum smearing JSON")
    p.add_argument("--chi", required=True, help="second-slot momentum smearing JSON")
    p.add_argument("--phi", required=True, help="space-time smearing JSON")
    p.add_argument("--index", type=int, default=0, help="Lorentz index (A_int) or spinor index (psi_int)")
    p.add_argument("--variant", help="Dirac variant (standard or local)")
    p.add_argument("--printed", action="store_true", help="also evaluate the uncorrected printed block formula")

    p = sub.add_parser("bsp", parents=[common], help="translation-generator check of the Noether current")
    p.add_argument("--variant", help="Dirac variant (standard or local)")
    p.add_argument("--mu", type=int, choices=range(4))
    p.add_argument("--zeta")
    p.add_argument("--chi")

    p = sub.add_parser("chrono", parents=[common], help="epsilon-convergence of the order-2 tree term")
    p.add_argument("--g1")
    p.add_argument("--g2")
    p.add_argument("--schedule", type=float, nargs="+", help="common eps_theta = eps_mass schedule")
    return parser


COMMANDS = {
    "verify": cmd_verify,
    "kernel-eval": cmd_kernel_eval,
    "smear": cmd_smear,
    "first-order": cmd_first_order,
    "bsp": cmd_bsp,
    "chrono": cmd_chrono,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        report, rows, code = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"qftk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ClassViolation as exc:
        print(f"qftk: class violation (zero-mass test space requirement): {exc}", file=sys.stderr)
        return EXIT_CLASS
    except SpanError as exc:
        print(f"qftk: precondition violated: {exc}", file=sys.stderr)
        return EXIT_CLASS
    emit(report, rows, args.csv)
    return code


if __name__ == "__main__":
    sys.exit(main())
