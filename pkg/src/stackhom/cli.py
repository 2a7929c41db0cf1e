"""Command-line entry point.

Subcommands::

    stackhom algebra info|dot FILE.alg
    stackhom module pdim|syzygy|layers|dot [--graph FILE.mod] FILE.alg
    stackhom monomial report FILE.alg
    stackhom stack check|invariants|verify [--partition SPEC] FILE.alg
    stackhom family --jumps "1:2,2:3" [--verify] [--out DIR]
    stackhom oracle --n 2 [--field F2] [--budget N] [--seed S] FILE.alg
    stackhom verify-all [--fast]

Exit codes: 0 success, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time

from . import dot as dotmod
from . import families as fam
from . import fileformats as ff
from . import monomial as mono
from . import oracle as orc
from . import rephom as rh
from . import stacking as st
from .algebra import AlgebraError
from .fields import GF, make_field, parse_field_label

SCHEMA = "stackhom-report/1"


class InputError(Exception):
    pass


def _report(args, results, warnings=(), t0=None, inputs=()):
    return {
        "schema": SCHEMA,
        "command": " ".join(args),
        "inputs": {p: ff.file_digest(p) for p in inputs},
        "results": results,
        "warnings": list(warnings),
        "seconds": round(time.perf_counter() - t0, 3) if t0 else None,
    }


def _exact(value):
    return {"value": value, "kind": "exact"}


def _load(path) -> ff.AlgebraFile:
    try:
        return ff.load_algebra(path)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}")
    except (ff.ParseError, AlgebraError, ValueError) as exc:
        raise InputError(f"{path}: {exc}")


def _load_module(af: ff.AlgebraFile, path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
        return rh.parse_layered_graph(text, af.algebra)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}")
    except (rh.GraphParseError, ValueError) as exc:
        raise InputError(f"{path}: {exc}")


def _partition(af: ff.AlgebraFile, args) -> st.StackingPartition:
    if getattr(args, "partition", None):
        lower, upper = ff.parse_partition_spec(args.partition)
    elif af.partition is not None:
        lower, upper = af.partition
    else:
        raise InputError("no partition given (flag --partition or .alg line)")
    return st.StackingPartition.of(lower, upper)


def cmd_algebra(args, argv):
    af = _load(args.algebra)
    alg = af.algebra
    if args.action == "dot":
        sys.stdout.write(dotmod.algebra_dot(alg))
        return 0, None
    return 0, _report(argv, alg.describe(), t0=args._t0, inputs=[args.algebra])


def cmd_module(args, argv):
    af = _load(args.algebra)
    if args.graph:
        M = _load_module(af, args.graph)
    else:
        raise InputError("module commands need --graph FILE.mod")
    if args.action == "dot":
        sys.stdout.write(dotmod.layered_graph_dot(M.meta["graph"]))
        return 0, None
    if args.action == "layers":
        layers = rh.module_layers(M)
        res = {
            "top": layers.top,
            "radical_series": layers.radical_series,
            "socle": layers.socle,
            "loewy_length": _exact(layers.loewy_length),
            "tree_graph": M.meta["graph"].is_tree(),
        }
        return 0, _report(argv, res, t0=args._t0, inputs=[args.algebra, args.graph])
    if args.action == "syzygy":
        X = rh.syzygy(M, args.k)
        res = {"k": args.k, "dims": {v: d for v, d in X.dims.items() if d},
               "total_dim": X.total_dim}
        return 0, _report(argv, res, t0=args._t0, inputs=[args.algebra, args.graph])
    if args.action == "pdim":
        r = rh.projective_dimension(M, cutoff=args.cutoff)
        res = {"pdim": {"value": str(r), "kind":
                        "exact" if r.kind != "exceeds_cutoff" else "cutoff"}}
        code = 0 if r.kind != "exceeds_cutoff" else 1
        return code, _report(argv, res, t0=args._t0, inputs=[args.algebra, args.graph])
    raise InputError(f"unknown module action {args.action}")


def cmd_monomial(args, argv):
    af = _load(args.algebra)
    try:
        rep = mono.critical_report(af.algebra)
    except mono.NotMonomialError as exc:
        raise InputError(str(exc))
    return 0, _report(argv, rep.to_json(), t0=args._t0, inputs=[args.algebra])


def cmd_stack(args, argv):
    af = _load(args.algebra)
    part = _partition(af, args)
    alg = af.algebra
    if args.action == "check":
        chk = st.check_partition(alg, part.lower, part.upper, args.complexity)
        res = {"valid": chk.valid, "violations": chk.violations}
        return (0 if chk.valid else 1), _report(argv, res, t0=args._t0,
                                                inputs=[args.algebra])
    if args.action == "invariants":
        inv = st.stack_invariants(alg, part, cutoff=args.cutoff)
        return 0, _report(argv, inv.to_json(), t0=args._t0, inputs=[args.algebra])
    if args.action == "verify":
        if not args.graph:
            raise InputError("stack verify needs --graph FILE.mod")
        N = _load_module(af, args.graph)
        rep = st.verify_splitting(alg, part, N, depth=args.depth)
        return (0 if rep.passed else 1), _report(argv, rep.to_json(), t0=args._t0,
                                                 inputs=[args.algebra, args.graph])
    raise InputError(f"unknown stack action {args.action}")


def cmd_family(args, argv):
    try:
        step = fam.StepFunction.parse(args.jumps)
        bundle = fam.generate_family(step, make_field(args.field))
    except (ValueError, AlgebraError) as exc:
        raise InputError(str(exc))
    results = bundle.describe()
    warnings = []
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        top = bundle.top()
        with open(f"{args.out}/family.alg", "w", encoding="utf-8") as fh:
            fh.write(ff.algebra_to_text(top))
        with open(f"{args.out}/family.dot", "w", encoding="utf-8") as fh:
            fh.write(dotmod.algebra_dot(top))
        for lvl in range(bundle.depth + 1):
            text = fam.witness_graph_text(bundle, lvl)
            with open(f"{args.out}/witness{lvl}.mod", "w", encoding="utf-8") as fh:
                fh.write(text)
            g = rh.parse_layered_graph_text(text, bundle.algebra(lvl))
            with open(f"{args.out}/witness{lvl}.dot", "w", encoding="utf-8") as fh:
                fh.write(dotmod.layered_graph_dot(g))
            with open(f"{args.out}/level{lvl}.dot", "w", encoding="utf-8") as fh:
                fh.write(dotmod.quiver_dot(bundle.algebra(lvl).quiver, f"level{lvl}"))
        results["written_to"] = args.out
    code = 0
    if args.verify:
        budget = None
        if args.oracle:
            budget = orc.EnumerationBudget(field=GF(2), max_lattice=args.budget,
                                           sample_size=0, seed=args.seed, max_dim=12)
        ver = fam.verify_family(bundle, samples=args.samples, seed=args.seed,
                                oracle_budget=budget)
        results["verification"] = ver.to_json()
        code = 0 if ver.passed else 1
    return code, _report(argv, results, warnings, t0=args._t0)


def cmd_oracle(args, argv):
    af = _load(args.algebra)
    try:
        field = make_field(parse_field_label(args.field))
    except ValueError as exc:
        raise InputError(str(exc))
    budget = orc.EnumerationBudget(
        field=field, max_lattice=int(float(args.budget)),
        sample_size=args.sample_size, seed=args.seed,
        pdim_cutoff=args.cutoff, max_dim=args.max_dim)
    obs = orc.observed_findim(af.algebra, args.n, budget)
    res = obs.to_json()
    res["observed"] = {"value": obs.observed,
                       "kind": "exact" if obs.exhaustive else "observed"}
    return 0, _report(argv, res, t0=args._t0, inputs=[args.algebra])


def cmd_verify_all(args, argv):
    from . import acceptance

    outcomes = acceptance.run_all(fast=args.fast, progress=print)
    ok = all(o.passed for o in outcomes)
    res = {o.name: {"passed": o.passed, "detail": o.detail,
                    "seconds": round(o.seconds, 2)} for o in outcomes}
    return (0 if ok else 1), _report(argv, res, t0=args._t0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stackhom")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("algebra", help="inspect an algebra file")
    p.add_argument("action", choices=["info", "dot"])
    p.add_argument("algebra")
    p.set_defaults(fn=cmd_algebra)

    p = sub.add_parser("module", help="module computations from a layered graph")
    p.add_argument("action", choices=["pdim", "syzygy", "layers", "dot"])
    p.add_argument("algebra")
    p.add_argument("--graph", required=False)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=32)
    p.set_defaults(fn=cmd_module)

    p = sub.add_parser("monomial", help="critical paths and intervals")
    p.add_argument("action", choices=["report"])
    p.add_argument("algebra")
    p.set_defaults(fn=cmd_monomial)

    p = sub.add_parser("stack", help="stacking partitions")
    p.add_argument("action", choices=["check", "invariants", "verify"])
    p.add_argument("algebra")
    p.add_argument("--partition")
    p.add_argument("--graph")
    p.add_argument("--complexity", type=int, default=1)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--depth", type=int, default=2)
    p.set_defaults(fn=cmd_stack)

    p = sub.add_parser("family", help="generate and verify a jump family")
    p.add_argument("--jumps", required=True, help='breakpoints, e.g. "1:2,2:3"')
    p.add_argument("--field", default="Q")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--oracle", action="store_true",
                   help="include bounded finitistic observations")
    p.add_argument("--out")
    p.add_argument("--samples", type=int, default=60)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(fn=cmd_family)

    p = sub.add_parser("oracle", help="bounded finitistic dimension observation")
    p.add_argument("algebra")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--field", default="F2")
    p.add_argument("--budget", default="1e5")
    p.add_argument("--sample-size", type=int, default=200)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--cutoff", type=int, default=16)
    p.add_argument("--max-dim", type=int, default=None)
    p.set_defaults(fn=cmd_oracle)

    p = sub.add_parser("verify-all", help="run the full verification suite")
    p.add_argument("--fast", action="store_true",
                   help="reduced sample counts and lattice caps")
    p.set_defaults(fn=cmd_verify_all)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    args = ap.parse_args(argv)
    args._t0 = time.perf_counter()
    try:
        code, report = args.fn(args, argv)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ff.ParseError, rh.GraphParseError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    if report is not None:
        json.dump(report, sys.stdout, indent=2, default=str)
        sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
