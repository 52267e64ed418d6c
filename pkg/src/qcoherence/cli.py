"""Command-line entry point: ``qcoherence {compute,verify,reproduce,mk-state}``.

Exit codes: 0 success, 1 a verified condition failed, 2 invalid input or
arguments, 3 optimizer did not converge.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import documents as docs
from . import framework as fw
from .errors import CoherenceError, NotConverged
from .measures import MEASURE_NAMES, MeasureKind, get_measure
from .states import counterexample_state, max_coherent, random_density

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NOT_CONVERGED = 0, 1, 2, 3

MAX_COHERENT_TOL = 1e-5
COUNTEREXAMPLE_TOL = 1e-5
ENTROPY_TOL = 1e-8
IDENTITY_TOL = 1e-10


def _emit(obj, out: str | None):
    text = docs.dumps(obj) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("dimensions must be positive")
    return vals


def _suite_list(text: str) -> list[str]:
    names = [x.strip() for x in text.split(",") if x.strip()]
    bad = [n for n in names if n not in fw.SUITE_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown condition(s) {bad}; choose from {','.join(fw.SUITE_NAMES)}")
    return names


def cmd_compute(args) -> int:
    m = get_measure(args.measure, tol=args.tol, seed=args.seed)
    rho = docs.state_from_doc(docs.load_json(args.state))
    H = None
    if m.kind is MeasureKind.OBSERVABLE:
        if not args.observable:
            raise CoherenceError(f"measure {m.name!r} requires --observable")
        H = docs.observable_from_doc(docs.load_json(args.observable))
    value = m(rho, H)
    _emit({"measure": m.name, "value": value, "dim": rho.dim, "tol": args.tol, "seed": args.seed}, None)
    return EXIT_OK


def _markdown(reports) -> str:
    lines = ["| measure | condition | result | trials | worst violation | tolerance |",
             "|---|---|---|---|---|---|"]
    for r in reports:
        for x in [r, *r.subreports]:
            lines.append(f"| {x.measure} | {x.condition} | {'pass' if x.passed else 'FAIL'} | "
                         f"{x.trials} | {x.worst_violation:.3e} | {x.tolerance:.1e} |")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    m = get_measure(args.measure, seed=args.seed)
    for name in args.suite:
        if (name == "ms") != (m.kind is MeasureKind.OBSERVABLE):
            raise CoherenceError(f"condition {name!r} does not apply to measure {m.name!r}")
    cfg = fw.SuiteConfig(dims=tuple(args.dims), samples=args.samples, seed=args.seed,
                         tol_exact=args.tol_exact, tol_opt=args.tol_opt, workers=args.workers)
    reports = fw.run_suite(m, args.suite, cfg, flag_equality=args.flag_equality)
    _emit([r.to_dict() for r in reports], args.out)
    if args.md:
        md = _markdown(reports)
        if args.out:
            Path(args.out).with_suffix(".md").write_text(md)
        else:
            sys.stderr.write(md)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def _reproduce(case: str, seed: int) -> tuple[dict, bool]:
    if case == "eq17":
        rows = fw.max_coherent_table((2, 3, 4, 5), seed=seed)
        return {"case": case, "tolerance": MAX_COHERENT_TOL, "rows": rows}, all(r["residual"] < MAX_COHERENT_TOL for r in rows)
    if case == "eq18":
        rec = fw.reproduce_counterexample(seed=seed)
        ok = (abs(rec["c_tr_rho1"] - 1.0) < COUNTEREXAMPLE_TOL and abs(rec["c_tr_rho2"] - 4 / 3) < COUNTEREXAMPLE_TOL
              and rec["lhs_upper_bound"] <= 1 + COUNTEREXAMPLE_TOL and rec["lhs_optimizer"] <= 1 + COUNTEREXAMPLE_TOL
              and rec["additivity_fails"])
        return {"case": case, "tolerance": COUNTEREXAMPLE_TOL, **rec}, ok
    if case == "entropy-additivity":
        rec = fw.entropy_additivity_residual(500, seed)
        return {"case": case, "tolerance": ENTROPY_TOL, **rec}, rec["max_residual"] < ENTROPY_TOL
    if case == "flag-identities":
        rec = fw.flag_identity_residuals(20, seed)
        worst = max(rec["flag_residual"], rec["merge_flag_residual"], rec["round_trip_residual"])
        return {"case": case, "tolerance": IDENTITY_TOL, **rec}, worst < IDENTITY_TOL
    raise ValueError(case)


def cmd_reproduce(args) -> int:
    rec, ok = _reproduce(args.case, args.seed)
    rec["ok"] = ok
    _emit(rec, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_mk_state(args) -> int:
    if args.kind == "max-coherent":
        rho = max_coherent(args.dim)
    elif args.kind == "random":
        rho = random_density(args.dim, args.rank or args.dim, seed=args.seed)
    else:
        rho = counterexample_state()[0]
    _emit(docs.state_to_doc(rho), args.out)
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qcoherence", description="Coherence measures and condition checks.")
    sub = p.add_subparsers(dest="verb", required=True)

    c = sub.add_parser("compute", help="evaluate a measure on a state file")
    c.add_argument("--measure", required=True, choices=MEASURE_NAMES)
    c.add_argument("--state", required=True)
    c.add_argument("--observable")
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run sampled condition checks")
    v.add_argument("--measure", required=True, choices=MEASURE_NAMES)
    v.add_argument("--suite", type=_suite_list, default=None,
                   help="comma-separated subset of " + ",".join(fw.SUITE_NAMES))
    v.add_argument("--dims", type=_int_list, default=[2, 3])
    v.add_argument("--samples", type=_positive_int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol-exact", type=float, default=1e-8)
    v.add_argument("--tol-opt", type=float, default=1e-4)
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--flag-equality", action="store_true",
                   help="require equality (not just <=) in the flag check")
    v.add_argument("--out")
    v.add_argument("--md", action="store_true", help="also write a markdown table")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reproduce", help="recompute a published value")
    r.add_argument("case", nargs="?", choices=("eq17", "eq18", "entropy-additivity", "flag-identities"))
    r.add_argument("--case", dest="case_opt", choices=("eq17", "eq18", "entropy-additivity", "flag-identities"))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("mk-state", help="write a density-state document")
    s.add_argument("--kind", required=True, choices=("max-coherent", "random", "counterexample"))
    s.add_argument("--dim", type=_positive_int, default=2)
    s.add_argument("--rank", type=_positive_int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_mk_state)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "verify" and args.suite is None:
        args.suite = ["ms"] if args.measure == "skew-info" else ["c1", "c2", "c3"]
    if args.verb == "reproduce":
        args.case = args.case or args.case_opt
        if args.case is None:
            parser.error("reproduce needs a case")
    try:
        return args.func(args)
    except NotConverged as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NOT_CONVERGED
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
