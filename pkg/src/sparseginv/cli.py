"""Command-line interface: ``sparseginv <command> ...``.

Exit status is 0 on success, 2 for invalid input and 3 for numerical
failure.  JSON summaries go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import families, harness, linalg, lp, search, verify
from .blocks import GinvResult
from .errors import GinvError, InvalidParams, NumericalError, ValidationError
from .io import read_matrix, write_matrix

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, default=_json_default))


def _tol(args) -> linalg.ToleranceConfig:
    return linalg.ToleranceConfig(rank_rel_tol=args.rank_tol, nnz_tol=args.nnz_tol, residual_tol=args.residual_tol)


def cmd_ginv(args) -> int:
    A = read_matrix(args.input)
    cfg = search.SearchConfig(
        epsilon=args.epsilon, max_sweeps=args.max_sweeps, pivot_strategy=args.pivot, tol=_tol(args)
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", search.SweepLimitExceeded)
        res = search.PIPELINES[args.mode](A, cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.output:
        write_matrix(args.output, res.H)
    out = res.to_dict()
    if not args.trace:
        out.pop("trace")
    if args.certify:
        cert = verify.certificate_for(A, res, cfg.tol)
        out["certificate"] = cert.to_dict()
    _emit(out)
    return EXIT_OK


def cmd_lp(args) -> int:
    A = read_matrix(args.input)
    tol = _tol(args)
    kind = {"p1": "P1", "p1sym": "P1_SYM", "p13": "P13", "p123": "P123"}[args.model]
    if kind == "P1":
        model = lp.build_p1(A, tol)
    elif kind == "P1_SYM":
        model = lp.build_p1_sym(A, tol)
    elif kind == "P13":
        model = lp.build_p13(A, tol)
    else:
        Hhat = read_matrix(args.hhat) if args.hhat else search.ah_symmetric_ginv(A, search.SearchConfig(tol=tol))
        model = lp.build_p123(A, Hhat, tol)
    if args.export:
        Path(args.export).write_text(lp.export_lp(model))
        if args.export_only:
            _emit({"model": kind, "rows": model.num_rows, "variables": 2 * model.num_free, "export": args.export})
            return EXIT_OK
    sol = lp.simplex_solve(model)
    if args.output:
        write_matrix(args.output, sol.H)
    _emit({
        "model": kind,
        "objective_value": sol.objective_value,
        "one_norm": linalg.one_norm(sol.H),
        "nnz": linalg.nnz(sol.H, tol),
        "vertex_bound": model.vertex_bound(),
        "iterations": sol.iterations,
        "rows": model.num_rows,
        "rows_total": model.rows_total,
    })
    return EXIT_OK


def _infer_result(A, H, report, tol) -> GinvResult:
    """Recover the block structure (kind, S, T) of a block-built ``H``."""
    cutoff = tol.nnz_tol
    rows = tuple(int(i) for i in np.flatnonzero(np.abs(H).max(axis=1) > cutoff))  # T
    cols = tuple(int(i) for i in np.flatnonzero(np.abs(H).max(axis=0) > cutoff))  # S
    r = report.rank_A
    base = dict(H=H, one_norm=linalg.one_norm(H), nnz=linalg.nnz(H, tol))
    if linalg.is_symmetric(A, tol) and linalg.is_symmetric(H, tol) and len(rows) == r and rows == cols:
        return GinvResult(kind="symmetric", S=rows, T=rows, **base)
    if report.holds("p3") and len(rows) == r:
        S, _ = search.init_general(A[:, list(rows)], tol, rank=r)
        return GinvResult(kind="ah", S=S, T=rows, **base)
    if report.holds("p4") and len(cols) == r:
        T, _ = search.init_general(A[list(cols), :].T, tol, rank=r)
        return GinvResult(kind="ha", S=cols, T=T, **base)
    if len(rows) == r and len(cols) == r:
        return GinvResult(kind="general", S=cols, T=rows, **base)
    raise InvalidParams(
        f"no block certificate: H is not supported on an r x r block "
        f"(r={r}, {len(rows)} nonzero rows, {len(cols)} nonzero columns)"
    )


def cmd_certify(args) -> int:
    A = read_matrix(args.input)
    H = read_matrix(args.h) if args.h else None
    tol = _tol(args)
    if H is None:
        res = search.PIPELINES[args.mode or "ah"](A, search.SearchConfig(tol=tol))
        H = res.H
    report = verify.check_properties(A, H, tol)
    out = {"properties": report.to_dict()}
    if not report.holds("p1"):
        out["certificate"] = None
        out["note"] = "H is not a generalized inverse of A"
        _emit(out)
        return EXIT_OK
    if args.h:
        try:
            res = _infer_result(A, H, report, tol)
        except InvalidParams as exc:
            out["certificate"] = None
            out["note"] = str(exc)
            _emit(out)
            return EXIT_OK
        if args.mode:
            res.kind = {"sym": "symmetric"}.get(args.mode, args.mode)
    cert = verify.certificate_for(A, res, tol)
    out["kind"] = res.kind
    out["S"], out["T"] = list(res.S), list(res.T)
    out["certificate"] = cert.to_dict()
    _emit(out)
    return EXIT_OK


def _parse_params(items) -> dict:
    params = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise InvalidParams(f"expected key=value, got {item!r}")
        try:
            params[key] = json.loads(val)
        except json.JSONDecodeError:
            params[key] = val
    return params


def cmd_family(args) -> int:
    params = _parse_params(args.params)
    try:
        inst = families.get_family(args.name, **params)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from exc
    prefix = Path(args.output or inst.name)
    write_matrix(prefix.with_suffix(".mtx"), inst.A, "mtx")
    sidecar = inst.to_dict()
    sidecar["shape"] = list(inst.A.shape)
    prefix.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, default=_json_default))
    _emit({"name": inst.name, "matrix": str(prefix.with_suffix(".mtx")), "sidecar": str(prefix.with_suffix(".json")),
           "known_values": inst.known_values})
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        m, n, r = (int(x) for x in args.spec.split(","))
    except ValueError as exc:
        raise InvalidParams(f"--spec must be m,n,r, got {args.spec!r}") from exc
    methods = [x.strip() for x in args.methods.split(",") if x.strip()]
    specs = harness.make_specs(m, n, r, args.count, args.seed, symmetric=args.symmetric)
    cfg = harness.ExperimentConfig(
        search=search.SearchConfig(epsilon=args.epsilon, tol=_tol(args)), threads=args.threads
    )
    records = harness.run_experiment(specs, methods, cfg)
    sys.stdout.write(harness.emit_table(records, args.format, with_aggregate=not args.no_aggregate))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparseginv", description="Sparse reflexive generalized inverses.")
    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--rank-tol", type=float, default=linalg.DEFAULT_TOL.rank_rel_tol)
    tol.add_argument("--nnz-tol", type=float, default=linalg.DEFAULT_TOL.nnz_tol)
    tol.add_argument("--residual-tol", type=float, default=linalg.DEFAULT_TOL.residual_tol)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("ginv", parents=[tol], help="local-search generalized inverse")
    g.add_argument("--mode", choices=sorted(search.PIPELINES), default="ah")
    g.add_argument("--epsilon", type=float, default=0.0)
    g.add_argument("--pivot", choices=search.PIVOT_STRATEGIES, default="first_improving")
    g.add_argument("--max-sweeps", type=int, default=None)
    g.add_argument("--input", required=True)
    g.add_argument("--output")
    g.add_argument("--certify", action="store_true", help="also report the dual certificate")
    g.add_argument("--trace", action="store_true", help="include the swap trace")
    g.set_defaults(func=cmd_ginv)

    q = sub.add_parser("lp", parents=[tol], help="1-norm minimizing LP baseline")
    q.add_argument("--model", choices=("p1", "p1sym", "p13", "p123"), default="p1")
    q.add_argument("--input", required=True)
    q.add_argument("--output")
    q.add_argument("--hhat", help="linearizing ah-symmetric reflexive inverse for p123")
    q.add_argument("--export", help="write the model in LP file format")
    q.add_argument("--export-only", action="store_true")
    q.set_defaults(func=cmd_lp)

    c = sub.add_parser("certify", parents=[tol], help="check properties and bound the optimality gap")
    c.add_argument("--input", required=True)
    c.add_argument("--h", help="candidate H; computed with --mode when omitted")
    c.add_argument("--mode", choices=sorted(search.PIPELINES))
    c.set_defaults(func=cmd_certify)

    f = sub.add_parser("family", help="write a closed-form instance")
    f.add_argument("--name", required=True, choices=sorted(families.FAMILIES))
    f.add_argument("--params", nargs="*", metavar="KEY=VALUE")
    f.add_argument("--output", help="path prefix for the .mtx and .json files")
    f.set_defaults(func=cmd_family)

    b = sub.add_parser("bench", parents=[tol], help="random-instance experiments")
    b.add_argument("--spec", required=True, help="m,n,r")
    b.add_argument("--count", type=int, default=5)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--methods", default="local_search_ah")
    b.add_argument("--epsilon", type=float, default=0.0)
    b.add_argument("--symmetric", action="store_true")
    b.add_argument("--threads", type=int, default=None)
    b.add_argument("--format", choices=("csv", "markdown", "json"), default="markdown")
    b.add_argument("--no-aggregate", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except GinvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
