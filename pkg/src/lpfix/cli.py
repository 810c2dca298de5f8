"""Command-line front end: run solves, grid solves, and bench sweeps.

Exit codes: 0 fixpoint found, 1 error, 2 verified violation certificate,
3 query budget exhausted.  Traces go to CSV (stream-friendly), summaries
and certificates to JSON.  All randomness flows from --seed (or the
LPFIX_SEED environment variable), so identical configurations produce
bit-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .errors import LpfixError
from .grid import min_grid_resolution, solve_grid_l1
from .oracles import load_instance, random_affine_instance, restrict_to_grid
from .pnorm import PNorm
from .solver import SolveParams, solve_continuous

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CERTIFICATE = 2
EXIT_BUDGET = 3


def _seed_from_env(value):
    if value is not None:
        return value
    env = os.environ.get("LPFIX_SEED")
    return int(env) if env else 0


def _add_common(sp):
    sp.add_argument("--instance", help="instance JSON path")
    sp.add_argument("--epsilon", type=float, help="residual target override")
    sp.add_argument("--lambda", dest="lam", type=float, help="contraction factor override")
    sp.add_argument("--p", help="metric override: 1, 2, inf, or a decimal")
    sp.add_argument("--d", type=int, help="dimension override")
    sp.add_argument("--cloud", type=int, default=2 ** 17, metavar="N",
                    help="search cloud size (default 2^17)")
    sp.add_argument("--dirs", type=int, metavar="K",
                    help="direction sample size (default 64*d)")
    sp.add_argument("--rho-min", type=float, metavar="R",
                    help="certificate floor (default 1/(2(d+1)))")
    sp.add_argument("--seed", type=int, metavar="S",
                    help="seed (falls back to LPFIX_SEED, then 0)")
    sp.add_argument("--max-queries", type=int, metavar="Q")
    sp.add_argument("--out-csv", metavar="PATH")
    sp.add_argument("--out-json", metavar="PATH")


def _float_repr(x) -> str:
    return repr(float(x))


def _load(args):
    if not args.instance:
        raise LpfixError("--instance PATH is required")
    inst, meta = load_instance(args.instance)
    if args.epsilon is not None:
        meta["epsilon"] = args.epsilon
    if args.lam is not None:
        meta["lambda"] = args.lam
    if args.p is not None:
        meta["p"] = PNorm.of(args.p)
    if args.d is not None and args.d != meta["d"]:
        raise LpfixError(f"--d {args.d} conflicts with instance d={meta['d']}")
    return inst, meta


def _write_trace_csv(path, report, n_cloud):
    d = report.params.d
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["iter"] + [f"query_{i}" for i in range(d)]
                   + ["residual", "alive_fraction", "achieved_rho",
                      "discard_fraction", "cum_queries"])
        for rec in report.trace:
            w.writerow([rec.index]
                       + [_float_repr(v) for v in rec.query]
                       + [_float_repr(rec.residual),
                          _float_repr(rec.alive_frac_after),
                          _float_repr(rec.achieved_rho),
                          _float_repr(rec.discard_fraction),
                          rec.index + 1])


def cmd_solve(args) -> int:
    inst, meta = _load(args)
    if meta["type"] == "non_contraction_demo":
        raise LpfixError("non_contraction_demo instances are grid oracles; "
                         "use grid-solve")
    params = SolveParams(
        d=meta["d"], p=meta["p"] if isinstance(meta["p"], PNorm) else PNorm.of(meta["p"]),
        epsilon=meta["epsilon"], lam=meta["lambda"], n_cloud=args.cloud,
        dirs=args.dirs, rho_min=args.rho_min, max_queries=args.max_queries,
        seed=_seed_from_env(args.seed))
    report = solve_continuous(inst, params)
    if args.out_csv:
        _write_trace_csv(args.out_csv, report, args.cloud)
    summary = {
        "outcome": report.outcome,
        "x": None if report.x is None else [float(v) for v in report.x],
        "residual": None if report.residual is None else float(report.residual),
        "queries_used": report.queries_used,
        "banach_queries": report.banach_queries,
        "theoretical_bound": report.theoretical_bound,
        "min_achieved_rho": report.min_achieved_rho,
        "epsilon": params.epsilon, "lambda": params.lam, "p": str(params.p),
        "d": params.d, "seed": params.seed,
    }
    if args.out_json:
        with open(args.out_json, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2)
    print(json.dumps(summary))
    return EXIT_OK if report.found else EXIT_BUDGET


def cmd_grid_solve(args) -> int:
    inst, meta = _load(args)
    d, eps, lam = meta["d"], meta["epsilon"], meta["lambda"]
    b = args.bits if args.bits is not None else \
        meta.get("b", min_grid_resolution(d, eps, lam))
    demo = meta["type"] == "non_contraction_demo"
    oracle = inst if demo else restrict_to_grid(inst, b)
    result = solve_grid_l1(oracle, d, b, eps, lam, dirs=args.dirs,
                           rho_min=args.rho_min, seed=_seed_from_env(args.seed),
                           max_queries=args.max_queries,
                           check_resolution=not demo)
    if args.out_csv:
        with open(args.out_csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["iter"] + [f"query_{i}" for i in range(d)]
                       + ["residual", "alive_before", "alive_after",
                          "achieved_rho", "discard_fraction", "cum_queries"])
            for rec in result.trace:
                w.writerow([rec.index]
                           + [_float_repr(v) for v in rec.query]
                           + [_float_repr(rec.residual), rec.alive_before,
                              rec.alive_after, _float_repr(rec.achieved_rho),
                              _float_repr(rec.discard_fraction), rec.index + 1])
    summary = {
        "outcome": result.outcome,
        "x": None if result.x is None else [float(v) for v in result.x],
        "residual": None if result.residual is None else float(result.residual),
        "queries_used": result.queries_used,
        "b": b, "d": d, "epsilon": eps, "lambda": lam,
    }
    print(json.dumps(summary))
    if result.found:
        if args.out_json:
            with open(args.out_json, "w", encoding="utf-8") as fh:
                json.dump(summary, fh, indent=2)
        return EXIT_OK
    cert_path = args.out_json or "violation_certificate.json"
    result.certificate.dump(cert_path)
    return EXIT_CERTIFICATE


def _parse_list(text, cast):
    return [cast(tok) for tok in text.split(",") if tok.strip()]


def cmd_bench(args) -> int:
    ds = _parse_list(args.d_list, int)
    ps = _parse_list(args.p_list, str)
    epss = _parse_list(args.eps_list, float)
    lams = _parse_list(args.lambda_list, float)
    base_seed = _seed_from_env(args.seed)
    cells = [(d, p, eps, lam, i)
             for d in ds for p in ps for eps in epss for lam in lams
             for i in range(args.instances)]

    def run(job):
        index, (d, p, eps, lam, i) = job
        cell_seed = base_seed * 1000003 + index
        inst = random_affine_instance(d, p, lam, cell_seed)
        params = SolveParams(d=d, p=p, epsilon=eps, lam=lam, n_cloud=args.cloud,
                             dirs=args.dirs, rho_min=args.rho_min,
                             seed=cell_seed)
        try:
            rep = solve_continuous(inst, params)
            return (d, str(PNorm.of(p)), eps, lam, i, rep.outcome,
                    rep.queries_used, rep.theoretical_bound, rep.banach_queries,
                    rep.residual)
        except LpfixError as exc:
            return (d, str(PNorm.of(p)), eps, lam, i, f"error:{type(exc).__name__}",
                    None, None, None, None)

    with ThreadPoolExecutor(max_workers=args.workers) as ex:
        rows = list(ex.map(run, enumerate(cells)))

    out = sys.stdout if not args.out_csv else open(args.out_csv, "w", newline="",
                                                   encoding="utf-8")
    try:
        w = csv.writer(out)
        w.writerow(["d", "p", "epsilon", "lambda", "instance", "outcome",
                    "queries_used", "bound", "banach_queries", "residual"])
        for row in rows:
            w.writerow(["" if v is None else v for v in row])
    finally:
        if args.out_csv:
            out.close()
    bad = [r for r in rows if r[5] != "found"]
    return EXIT_OK if not bad else EXIT_BUDGET


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpfix")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="continuous centerpoint-cutting solve")
    _add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("grid-solve", help="l1 grid solve with certificates")
    _add_common(sp)
    sp.add_argument("--bits", type=int, help="grid resolution b (default: bound)")
    sp.set_defaults(func=cmd_grid_solve)

    sp = sub.add_parser("bench", help="query-count sweep over instances")
    _add_common(sp)
    sp.add_argument("--d-list", default="2,3", help="comma list of dimensions")
    sp.add_argument("--p-list", default="1,2,inf", help="comma list of metrics")
    sp.add_argument("--eps-list", default="1e-2", help="comma list of epsilons")
    sp.add_argument("--lambda-list", default="0.5,0.9", help="comma list of lambdas")
    sp.add_argument("--instances", type=int, default=5, help="instances per cell")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LpfixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
