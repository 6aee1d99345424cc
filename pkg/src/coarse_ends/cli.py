"""Command-line entry point: ``coarse-ends <command> ...``.

Exit codes: 0 decisive and holds, 1 decisive and fails, 2 inconclusive,
3 usage or configuration error.  Reports are JSON with sorted keys.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import subsets as ss
from .coarse_rel import close_verdict
from .covers import cover_from_json, cover_verdict, separate, star_refinement, verify_star_refinement
from .endpoints import load_endpoints
from .ends import entourage_relation, separate_endpoints
from .errors import CoarseEndsError, ConfigError, PreconditionError
from .freudenthal import compare_ends, freudenthal_count, freudenthal_covers, stable_component_count
from .grid import grid_for, load_grid
from .higson import function_from_json, glue, higson_check
from .spaces import load_space
from .verdict import INCONCLUSIVE, Verdict

SCHEMA_VERSION = 1
EXIT_HOLDS, EXIT_FAILS, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _read_json(path, what):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(what, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(what, f"invalid JSON in {path}: {exc}") from exc


def _space(args):
    if not args.space:
        raise ConfigError("space", "--space is required")
    return load_space(args.space)


def _grid(args, space=None):
    if args.grid:
        return load_grid(args.grid)
    return grid_for(space) if space is not None else load_grid({})


def _subset(path, space):
    return ss.from_json(_read_json(path, "subset"), space)


def _cover(path, space):
    if not path:
        raise ConfigError("cover", "--cover is required")
    return cover_from_json(_read_json(path, "cover"), space)


def _endpoints(args, space):
    if not args.endpoints:
        raise ConfigError("endpoints", "--endpoints is required")
    return load_endpoints(_read_json(args.endpoints, "endpoints"), space)


def _exit_for(outcome):
    if outcome == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_HOLDS if Verdict(outcome).positive else EXIT_FAILS


def _report(command, outcome, body):
    return {"schema_version": SCHEMA_VERSION, "command": command, "outcome": outcome, **body}


# -- commands -------------------------------------------------------------------

def cmd_space(args):
    space = _space(args)
    R = space.horizon if args.R is None else args.R
    t = space.truncation(R)
    body = {"space": space.descriptor(), "describe": space.describe(), "horizon": space.horizon,
            "max_step": space.max_step, "R": R, "ball_size": len(t)}
    return _report("space", "holds", body)


def cmd_close(args):
    space = _space(args)
    grid = _grid(args, space)
    if not (args.a and args.b):
        raise ConfigError("a", "--a and --b are required")
    v = close_verdict(space, _subset(args.a, space), _subset(args.b, space), grid)
    return _report("close", v.outcome, {"witness": v.witness, "grid": grid.to_json()})


def cmd_cover(args):
    space = _space(args)
    grid = _grid(args, space)
    if args.action == "verify":
        cover = _cover(args.cover, space)
        v = cover_verdict(space, cover, grid)
        return _report("cover verify", v.outcome, {"witness": v.witness, "grid": grid.to_json()})
    if args.action == "star-refine":
        cover = _cover(args.cover, space)
        V = star_refinement(space, cover, grid)
        v = verify_star_refinement(space, V, cover, grid)
        return _report("cover star-refine", v.outcome,
                       {"refinement": V.to_json(space), "certificate": V.certificate, "witness": v.witness,
                        "grid": grid.to_json()})
    if not (args.a and args.b):
        raise ConfigError("a", "--a and --b are required")
    A, B = _subset(args.a, space), _subset(args.b, space)
    C, D = separate(space, A, B, grid)
    va = close_verdict(space, A, ss.complement(C), grid).outcome
    vb = close_verdict(space, B, ss.complement(D), grid).outcome
    outcome = "holds" if va == vb == "apart" else INCONCLUSIVE if INCONCLUSIVE in (va, vb) else "fails"
    return _report("cover separate", outcome,
                   {"C": ss.to_json(C, space), "D": ss.to_json(D, space),
                    "A_vs_complement_C": va, "B_vs_complement_D": vb, "grid": grid.to_json()})


def cmd_ends(args):
    space = _space(args)
    grid = _grid(args, space)
    if args.action == "count":
        v = stable_component_count(space, args.R, grid) if args.R is not None else freudenthal_count(space, grid)
        body = {"witness": v.witness, "freudenthal": v.witness.get("count")}
        return _report("ends count", v.outcome, body)
    eps = _endpoints(args, space)
    if args.action == "relate":
        rel = entourage_relation(space, eps, _cover(args.cover, space), grid, jobs=args.jobs)
        if args.dot:
            Path(args.dot).write_text(rel.dot())
        undecided = rel.unresolved or any(v.outcome == INCONCLUSIVE for row in rel.matrix for v in row)
        return _report("ends relate", INCONCLUSIVE if undecided else "holds",
                       {"relation": rel.to_json(), "grid": grid.to_json()})
    if args.action == "separate":
        lookup = dict(eps)
        for name in (args.p, args.q):
            if name not in lookup:
                raise ConfigError("endpoints", f"no endpoint named {name!r}")
        cover, v = separate_endpoints(space, lookup[args.p], lookup[args.q], grid)
        body = {"verdict": v.outcome, "witness": v.witness,
                "cover": cover.to_json(space) if cover is not None else None}
        # a separating cover is the success case
        return _report("ends separate", "holds" if v.outcome == "out" else v.outcome, body)
    covers = [_cover(c, space) for c in args.cover_list] if args.cover_list else \
        freudenthal_covers(space, args.component_radius)
    v = compare_ends(space, eps, covers, grid)
    return _report("ends compare", v.outcome, {"witness": v.witness, "covers": len(covers)})


def _fn(path, space):
    return function_from_json(_read_json(path, "fn"), space)


def cmd_higson(args):
    space = _space(args)
    grid = _grid(args, space)
    if args.action == "check":
        if not args.fn:
            raise ConfigError("fn", "--fn is required")
        try:
            eps = Fraction(args.eps)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError("eps", f"expected a rational such as 1/10: {exc}") from exc
        v = higson_check(space, _fn(args.fn, space), args.n, eps, grid)
        return _report("higson check", v.outcome, {"witness": v.witness})
    if args.cover:
        cover = _cover(args.cover, space)
        if len(cover.parts) != 2:
            raise ConfigError("cover", "gluing takes a two-part cover")
        U1, U2 = cover.parts
    elif args.u1 and args.u2:
        U1, U2 = _subset(args.u1, space), _subset(args.u2, space)
    else:
        raise ConfigError("cover", "give --cover or both --u1 and --u2")
    for name in ("f1", "f2", "g"):
        if not getattr(args, name):
            raise ConfigError(name, f"--{name} is required")
    out, rep = glue(space, U1, U2, _fn(args.f1, space), _fn(args.f2, space), _fn(args.g, space), grid)
    ok = rep["restricts_to_f1"] and rep["restricts_to_f2_plus_g"] == "holds"
    outcome = "holds" if ok else INCONCLUSIVE if rep["restricts_to_f2_plus_g"] == INCONCLUSIVE else "fails"
    return _report("higson glue", outcome, {"report": rep, "glued": out.to_json(space)})


def cmd_suite(args):
    from .suite import dumps, run_suite, summary_table
    only = None
    if args.only:
        try:
            only = {int(x) for x in args.only.split(",")}
        except ValueError as exc:
            raise ConfigError("only", f"expected comma-separated criterion numbers: {exc}") from exc
    grid = load_grid(args.grid) if args.grid else None
    report = run_suite(args.preset, grid, only)
    table = summary_table(report)
    if args.out:
        Path(args.out).write_text(dumps(report))
        sys.stdout.write(table)
    else:
        sys.stdout.write(dumps(report))
        sys.stderr.write(table)
    outcome = {"pass": "holds", "fail": "fails"}.get(report["outcome"], INCONCLUSIVE)
    return None, _exit_for(outcome)


# -- parser ---------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--space", help="space definition JSON")
    common.add_argument("--grid", help="truncation grid (path or inline JSON)")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    p = _Parser(prog="coarse-ends", description="Endpoints and ends of coarse spaces at truncation scale.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("space", parents=[common], help="describe a space")
    s.add_argument("--R", type=int)
    s.set_defaults(func=cmd_space)

    s = sub.add_parser("close", parents=[common], help="decide whether two subsets are close")
    s.add_argument("--a")
    s.add_argument("--b")
    s.set_defaults(func=cmd_close)

    s = sub.add_parser("cover", parents=[common], help="coarse covers")
    s.add_argument("action", choices=("verify", "star-refine", "separate"))
    s.add_argument("--cover")
    s.add_argument("--a")
    s.add_argument("--b")
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("ends", parents=[common], help="endpoints and ends")
    s.add_argument("action", choices=("count", "relate", "separate", "compare"))
    s.add_argument("--R", type=int)
    s.add_argument("--endpoints")
    s.add_argument("--cover", help="cover JSON (relate)")
    s.add_argument("--covers", dest="cover_list", action="append", help="cover JSON, repeatable (compare)")
    s.add_argument("--component-radius", type=int, default=8,
                   help="radius of the component covers used by compare when no --covers is given")
    s.add_argument("--p")
    s.add_argument("--q")
    s.add_argument("--dot", help="also write the relation as Graphviz")
    s.set_defaults(func=cmd_ends)

    s = sub.add_parser("higson", parents=[common], help="Higson functions")
    s.add_argument("action", choices=("check", "glue"))
    s.add_argument("--fn")
    s.add_argument("--n", type=int, default=1)
    s.add_argument("--eps", default="1/10")
    s.add_argument("--cover")
    s.add_argument("--u1")
    s.add_argument("--u2")
    s.add_argument("--f1")
    s.add_argument("--f2")
    s.add_argument("--g")
    s.set_defaults(func=cmd_higson)

    s = sub.add_parser("suite", parents=[common], help="run the acceptance battery")
    s.add_argument("--preset", default="paper-examples")
    s.add_argument("--only", help="comma-separated criterion numbers")
    s.set_defaults(func=cmd_suite)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.jobs < 1:
        print("coarse-ends: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = args.func(args)
    except PreconditionError as exc:
        outcome = exc.verdict.outcome if exc.verdict is not None else INCONCLUSIVE
        name = " ".join(filter(None, (args.command, getattr(args, "action", None))))
        result = _report(name, "precondition_failed",
                         {"error": str(exc), "verdict": exc.verdict.to_json() if exc.verdict is not None else None})
        _emit(args, result)
        return EXIT_INCONCLUSIVE if outcome == INCONCLUSIVE else EXIT_FAILS
    except (ConfigError, CoarseEndsError) as exc:
        print(f"coarse-ends: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if isinstance(result, tuple):
        return result[1]
    _emit(args, result)
    return _exit_for(result["outcome"])


def _emit(args, report):
    text = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    sys.exit(main())
