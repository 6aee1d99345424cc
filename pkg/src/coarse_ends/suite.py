"""The acceptance battery over the built-in samples.

Every criterion returns a JSON-ready dict with an ``outcome`` of pass, fail or
inconclusive, the counts behind it, and any entry that did not pass.  Reports
carry no timings so two runs can be compared byte for byte.
"""
from __future__ import annotations

import itertools
import json
import random
import time
from fractions import Fraction

from . import samples as smp
from . import subsets as ss
from .coarse_rel import chi_profile, close_verdict, working_truncation
from .covers import separate, star_refinement, verify_star_refinement
from .endpoints import Pushforward, direction_ray, validate_endpoint
from .ends import (base_axiom_suite, close_maps_agree, finite_cover_structure, in_u_neighborhood,
                   pushforward_well_defined, same_endpoint, separate_endpoints, uniform_continuity_check)
from .errors import PreconditionError
from .freudenthal import compare_ends, component_count, freudenthal_count
from .grid import TruncationGrid, compact_grid, default_grid
from .higson import Constant, glue, global_axiom_check, higson_check
from .maps import Affine, FloorSqrt, FoldToLine, Identity, Projection
from .verdict import APART, CLOSE, FAILS, HOLDS, IN, INCONCLUSIVE, OUT

SCHEMA_VERSION = 1
PRESETS = ("paper-examples",)
SEED = 20240601


def _result(cid, title, rows, extra=None):
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for r in rows:
        counts[r["result"]] += 1
    outcome = "fail" if counts["fail"] else "inconclusive" if counts["inconclusive"] else "pass"
    out = {"id": cid, "title": title, "outcome": outcome, "counts": counts,
           "exceptions": [r for r in rows if r["result"] != "pass"]}
    out.update(extra or {})
    return out


def _row(result, **kw):
    return dict(kw, result=result)


def _judge(ok, decisive=True):
    if not decisive:
        return "inconclusive"
    return "pass" if ok else "fail"


# -- 1 ---------------------------------------------------------------------------

def criterion_singleton_halfline(grid):
    space = smp.halfline()
    eps = smp.halfline_endpoints(space)
    rows = []
    for name, e in eps:
        v = validate_endpoint(space, e, grid)
        rows.append(_row(_judge(v.outcome == HOLDS, v.decisive), check="valid", p=name, outcome=v.outcome))
    for (a, e), (b, f) in itertools.combinations(eps, 2):
        v = same_endpoint(space, e, f, grid)
        rows.append(_row(_judge(v.outcome == CLOSE, v.decisive), check="same", p=a, q=b, outcome=v.outcome))
    for ci, cover in enumerate(smp.halfline_covers()):
        for (a, e), (b, f) in itertools.combinations(eps, 2):
            v = in_u_neighborhood(space, e, f, cover, grid)
            rows.append(_row(_judge(v.outcome == IN, v.decisive), check="in", cover=ci, p=a, q=b,
                             outcome=v.outcome))
    return _result(1, "the half-line has a single endpoint", rows)


# -- 2 ---------------------------------------------------------------------------

def criterion_coproduct_fold(grid):
    space = smp.halfline_pair()
    (na, a), (nb, b) = smp.halfline_pair_endpoints()
    rows = []
    v = same_endpoint(space, a, b, grid)
    rows.append(_row(_judge(v.outcome == APART, v.decisive), check="sides apart", outcome=v.outcome))
    f = FoldToLine(space)
    fa, fb = Pushforward(f, a), Pushforward(f, b)
    for name, e, target in (("left", fa, direction_ray((1,))), ("right", fb, direction_ray((-1,)))):
        vv = validate_endpoint(f.target, e, grid)
        rows.append(_row(_judge(vv.outcome == HOLDS, vv.decisive), check="pushforward valid", p=name))
        s = same_endpoint(f.target, e, target, grid)
        rows.append(_row(_judge(s.outcome == CLOSE, s.decisive), check="lands on line ray", p=name,
                         outcome=s.outcome))
    s = same_endpoint(f.target, fa, fb, grid)
    rows.append(_row(_judge(s.outcome == APART, s.decisive), check="distinct classes", outcome=s.outcome))
    cmp = compare_ends(space, [(na, a), (nb, b)], smp.component_covers(space), grid)
    ok = cmp.outcome == HOLDS and cmp.witness["quotient"] == 2 and cmp.witness["freudenthal"] == 2
    rows.append(_row(_judge(ok, cmp.decisive), check="compare", quotient=cmp.witness["quotient"],
                     freudenthal=cmp.witness["freudenthal"]))
    return _result(2, "coproduct of half-lines folds onto the two ends of the line", rows,
                   {"quotient": cmp.witness["quotient"], "freudenthal": cmp.witness["freudenthal"]})


# -- 3 ---------------------------------------------------------------------------

def criterion_freudenthal_golden(grid, horizon=256):
    rows = []
    for name, space, expected in (("line", smp.line(horizon), 2), ("plane", smp.plane(horizon), 1),
                                  ("line_pair", smp.line_pair(horizon), 4)):
        v = freudenthal_count(space, grid)
        got = v.witness.get("count")
        rows.append(_row(_judge(got == expected, v.decisive), space=name, expected=expected, count=got))
    t = smp.tree()
    for R in range(1, 7):
        got = component_count(t, R).count
        expected = 3 * 2 ** (R - 1)
        rows.append(_row(_judge(got == expected), space="tree", R=R, expected=expected, count=got))
    return _result(3, "topological end counts", rows)


# -- 4 ---------------------------------------------------------------------------

def apart_pairs():
    """Twenty structured apart pairs: (space name, A, B)."""
    rays = [ss.AxisRay(0, 1), ss.AxisRay(1, 1), ss.AxisRay(0, -1), ss.AxisRay(1, -1)]
    out = [("plane", a, b) for a, b in itertools.combinations(rays, 2)]
    imgs = dict(smp.compass_rays())
    for a, b in (("NE", "SW"), ("NE", "E"), ("NW", "S"), ("SE", "W"), ("E", "NW")):
        out.append(("plane", ss.EndpointImage(imgs[a]), ss.EndpointImage(imgs[b])))
    east = ss.intersection(ss.HalfSpace((1, 2), 1), ss.HalfSpace((1, -2), 1))
    west = ss.intersection(ss.HalfSpace((-1, 2), 1), ss.HalfSpace((-1, -2), 1))
    north = ss.intersection(ss.HalfSpace((2, 1), 1), ss.HalfSpace((-2, 1), 1))
    out += [("plane", east, west), ("plane", east, north)]
    out.append(("plane", ss.Finite(((3, 0), (4, 0))), ss.Finite(((-5, 1),))))
    out.append(("plane", ss.Finite(((0, 2),)), ss.AxisRay(0, -1)))
    out += [("tree", ss.Subtree((i,)), ss.Subtree((j,))) for i, j in ((0, 1), (0, 2), (1, 2))]
    out += [("tree", ss.Subtree((0, 0)), ss.Subtree((0, 1))), ("tree", ss.Subtree((1, 1)), ss.Subtree((2,)))]
    return out


def criterion_separation(grid):
    spaces = {"plane": (smp.plane(), grid), "tree": (smp.tree(), compact_grid())}
    rows = []
    for k, (sname, A, B) in enumerate(apart_pairs()):
        space, g = spaces[sname]
        pre = close_verdict(space, A, B, g)
        if pre.outcome != APART:
            rows.append(_row(_judge(False, pre.decisive), pair=k, space=sname, stage="precondition",
                             outcome=pre.outcome))
            continue
        C, D = separate(space, A, B, g)
        t = working_truncation(space, g)
        disjoint = not (ss._mask(t, C) & ss._mask(t, D)).any()
        va = close_verdict(space, A, ss.complement(C), g).outcome
        vb = close_verdict(space, B, ss.complement(D), g).outcome
        ok = disjoint and va == APART and vb == APART
        decisive = disjoint is False or INCONCLUSIVE not in (va, vb)
        rows.append(_row(_judge(ok, decisive), pair=k, space=sname, disjoint=disjoint, A_vs_notC=va, B_vs_notD=vb))
    return _result(4, "separation of apart pairs", rows, {"pairs": len(rows)})


# -- 5 ---------------------------------------------------------------------------

def criterion_star_refinement(grid):
    rows = []
    for name, space, cover in (("line", smp.line(), smp.line_cover()), ("plane", smp.plane(), smp.four_halfplanes())):
        V = star_refinement(space, cover, grid)
        v = verify_star_refinement(space, V, cover, grid)
        assigned = [r for r in v.witness["assignments"] if "target" in r]
        total = len(assigned) == len(V.parts)
        rows.append(_row(_judge(v.outcome == HOLDS and total, v.decisive), space=name,
                         method=V.certificate["method"], parts=len(V.parts), assigned=len(assigned),
                         outcome=v.outcome))
    return _result(5, "star refinement pipeline", rows)


# -- 6 ---------------------------------------------------------------------------

def criterion_base_axioms(grid):
    rows, detail = [], {}
    cases = (("line", smp.line(), [smp.line_cover()], smp.line_endpoints()),
             ("plane", smp.plane(), [smp.four_halfplanes(), smp.two_cones()], smp.compass_rays()))
    total = {"pass": 0, "fail": 0, "inconclusive": 0}
    for name, space, covers, eps in cases:
        rep = base_axiom_suite(space, covers, eps, grid)
        for k in total:
            total[k] += rep["tally"][k]
        detail[name] = {"tally": rep["tally"], "inconclusive_rate": round(rep["inconclusive_rate"], 6),
                        "refinements": rep["refinement_methods"]}
        rows.append(_row(_judge(rep["tally"]["fail"] == 0), space=name, tally=rep["tally"]))
    n = sum(total.values())
    rate = total["inconclusive"] / n if n else 0.0
    rows.append(_row(_judge(rate <= 0.10), check="inconclusive rate", rate=round(rate, 6)))
    return _result(6, "base axioms of the uniformity", rows,
                   {"entries": total, "inconclusive_rate": round(rate, 6), "per_space": detail})


# -- 7 ---------------------------------------------------------------------------

def criterion_compass_separation(grid):
    space = smp.plane()
    rays = smp.compass_rays()
    rows = []
    for (a, e), (b, f) in itertools.combinations(rays, 2):
        try:
            cover, v = separate_endpoints(space, e, f, grid)
            outcome = v.outcome
            case = v.witness.get("case")
        except PreconditionError as exc:
            outcome, case = exc.verdict.outcome if exc.verdict is not None else INCONCLUSIVE, None
        rows.append(_row(_judge(outcome == OUT, outcome != INCONCLUSIVE), p=a, q=b, outcome=outcome, case=case))
    return _result(7, "compass rays are pairwise separated", rows, {"pairs": len(rows)})


# -- 8 ---------------------------------------------------------------------------

def criterion_totally_bounded(grid):
    rows, detail = [], []
    for name, space, cover, eps in (("line", smp.line(), smp.line_cover(), smp.line_endpoints()[:2]),
                                    ("plane/four", smp.plane(), smp.four_halfplanes(), smp.compass_rays()),
                                    ("plane/cones", smp.plane(), smp.two_cones(), smp.compass_rays())):
        rep = finite_cover_structure(space, eps, cover, grid)
        bounded = rep["class_count"] <= rep["class_bound"]
        detail.append({"cover": name, "classes": rep["class_count"], "bound": rep["class_bound"],
                       "counts": rep["counts"]})
        rows.append(_row(_judge(rep["counts"]["fail"] == 0 and bounded), cover=name, counts=rep["counts"],
                         classes=rep["class_count"]))
        if rep["counts"]["inconclusive"]:
            rows.append(_row("inconclusive", cover=name, check="undecided pairs",
                             undecided=rep["counts"]["inconclusive"]))
    return _result(8, "finite cover structure", rows, {"covers": detail})


# -- 9 ---------------------------------------------------------------------------

def chi_pool():
    rays = [ss.AxisRay(0, 1), ss.AxisRay(1, 1), ss.AxisRay(0, -1), ss.AxisRay(1, -1)]
    imgs = [ss.EndpointImage(e) for _, e in smp.compass_rays()]
    cones = [ss.intersection(ss.HalfSpace((1, 2), 1), ss.HalfSpace((1, -2), 1)),
             ss.intersection(ss.HalfSpace((-1, 2), 1), ss.HalfSpace((-1, -2), 1))]
    halves = [ss.HalfSpace((1, 0), 3), ss.HalfSpace((0, -1), 2)]
    return rays + imgs + cones + halves


def _inf(v):
    return float("inf") if v is None else v


def _profiles(space, grid, A, A2, B, n):
    F = ss.Finite(((1, 1), (-2, 3), (0, -4)))
    sets = {"ab": (A, B), "ba": (B, A), "a2b": (A2, B), "ua": (ss.union(A, A2), B),
            "fa": (ss.union(A, F), B), "th": (ss.Thicken(A, n), B)}
    out = {k: chi_profile(space, X, Y, grid) for k, (X, Y) in sets.items()}
    shifted = TruncationGrid(tuple(R - n for R in grid.radii), grid.tau_divisor, grid.window)
    out["ab_shifted"] = chi_profile(space, A, B, shifted)
    return out


def _common(profs):
    return [i for i in range(len(profs["ab"].values)) if all(p.certified[i] for p in profs.values())]


def chi_triples(space, grid, count=50, seed=SEED):
    """``count`` seeded triples ``(A, A2, B, n)`` with at least a window of jointly certified radii."""
    rng = random.Random(seed)
    pool = chi_pool()
    out = []
    for _ in range(50 * count):
        if len(out) == count:
            break
        a, a2, b = rng.sample(range(len(pool)), 3)
        n = rng.randint(1, 3)
        profs = _profiles(space, grid, pool[a], pool[a2], pool[b], n)
        if len(_common(profs)) >= grid.window:
            out.append((pool[a], pool[a2], pool[b], n))
    return out


def _diff(x, y):
    if x is None or y is None:
        return 0 if x is y else float("inf")
    return abs(x - y)


def chi_law_rows(space, grid, triples):
    """Law rows compared on the jointly certified radii.

    ``thickening`` is the bound ``|chi(E_n A, B) - chi(A, B)| <= n``;
    ``thickening_sandwich`` is ``chi(A, B)(R - n) - n <= chi(E_n A, B)(R) <= chi(A, B)(R)``.
    """
    rows = {"symmetry": [], "union": [], "absorption": [], "thickening": [], "thickening_sandwich": []}
    for k, (A, A2, B, n) in enumerate(triples):
        profs = _profiles(space, grid, A, A2, B, n)
        idx = _common(profs)
        v = {key: [p.values[i] for i in idx] for key, p in profs.items()}
        rows["symmetry"].append(_row(_judge(v["ab"] == v["ba"]), triple=k))
        ok = all(_inf(u) == min(_inf(x), _inf(y)) for u, x, y in zip(v["ua"], v["ab"], v["a2b"]))
        rows["union"].append(_row(_judge(ok), triple=k))
        # the finite set sits inside the smallest ball, so it is invisible at every radius
        rows["absorption"].append(_row(_judge(v["fa"] == v["ab"]), triple=k))
        worst = max(_diff(x, y) for x, y in zip(v["th"], v["ab"]))
        worst = worst if worst != float("inf") else "inf"
        rows["thickening"].append(_row(_judge(worst != "inf" and worst <= n), triple=k, n=n, worst=worst,
                                       thickened=v["th"], plain=v["ab"]))
        ok = all(t is not None and (p is None or t <= p) and lo is not None and t >= lo - n
                 for t, p, lo in zip(v["th"], v["ab"], v["ab_shifted"]))
        rows["thickening_sandwich"].append(_row(_judge(ok), triple=k, n=n))
    return rows


def criterion_chi_laws(grid):
    space = smp.plane()
    triples = chi_triples(space, grid)
    laws = chi_law_rows(space, grid, triples)
    flat = []
    summary = {}
    for law, rows in laws.items():
        c = {"pass": 0, "fail": 0, "inconclusive": 0}
        for r in rows:
            c[r["result"]] += 1
        summary[law] = c
        if law != "thickening_sandwich":
            flat += [dict(r, law=law) for r in rows]
    return _result(9, "chi-profile laws", flat, {"laws": summary, "triples": len(triples)})


# -- 10 --------------------------------------------------------------------------

def criterion_functoriality(grid):
    rows = []
    Zp = smp.halfline()
    hl = smp.halfline_endpoints(Zp)
    Z = smp.line()
    zl = dict(smp.line_endpoints())
    pair = smp.halfline_pair()
    pl = dict(smp.halfline_pair_endpoints())
    strip = smp.strip()
    combos = [
        (FloorSqrt(Zp), hl[0][1], hl[2][1]),
        (FloorSqrt(Zp), hl[0][1], hl[4][1]),
        (FloorSqrt(Zp), hl[2][1], hl[3][1]),
        (Affine(Z, 2, 1), zl["plus"], zl["plus_detour"]),
        (Affine(Z, -1, 0), zl["plus"], zl["plus_detour"]),
        (Affine(Z, 3, 0), zl["minus"], direction_ray((-1,), (4,))),
        (FoldToLine(pair), pl["left"], pl["left"]),
        (Projection(strip, 0), direction_ray((1, 0)), direction_ray((1, 0), (0, 2))),
        (Projection(strip, 0), direction_ray((-1, 0)), direction_ray((-1, 0), (3, -1))),
        (Identity(Zp), hl[0][1], hl[3][1]),
    ]
    for k, (f, a, b) in enumerate(combos):
        v = pushforward_well_defined(f, a, b, grid)
        rows.append(_row(_judge(v.outcome == HOLDS, v.decisive), check="well defined", combo=k, map=f.kind,
                         witness=v.witness))
    close_pairs = [(Identity(Z), Affine(Z, 1, 3), zl["plus"]), (Identity(Z), Affine(Z, 1, -7), zl["minus"]),
                   (Affine(Z, 2, 0), Affine(Z, 2, 5), zl["plus_detour"])]
    for k, (f, g, a) in enumerate(close_pairs):
        v = close_maps_agree(f, g, a, grid)
        rows.append(_row(_judge(v.outcome == HOLDS, v.decisive), check="close maps", combo=k, witness=v.witness))
    zc = smp.line_cover()
    for name, f, eps in (("fold", FoldToLine(pair), smp.halfline_pair_endpoints()),
                         ("projection", Projection(strip, 0),
                          [("E", direction_ray((1, 0))), ("W", direction_ray((-1, 0))),
                           ("E_up", direction_ray((1, 0), (0, 2)))])):
        v = uniform_continuity_check(f, zc, eps, grid)
        rows.append(_row(_judge(v.outcome == HOLDS, v.decisive), check="uniform continuity", map=name,
                         counts=v.witness["counts"], skipped=v.witness["skipped"]))
    try:
        uniform_continuity_check(Projection(smp.plane(), 0), zc, [], grid)
        rows.append(_row("fail", check="plane projection rejected"))
    except PreconditionError:
        rows.append(_row("pass", check="plane projection rejected"))
    return _result(10, "functoriality", rows)


# -- 11 --------------------------------------------------------------------------

EPS_LADDER = (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100))


def criterion_higson(grid):
    space = smp.line()
    cover = smp.line_cover()
    U1, U2 = cover.parts
    fns = smp.line_functions()
    rows = []
    for name, f, _ in fns:
        rs = []
        for e in EPS_LADDER:
            v = higson_check(space, f, 1, e, grid)
            rs.append((v.outcome, v.witness.get("R")))
        held = [R for o, R in rs if o == HOLDS]
        mono = all(b >= a for a, b in zip(held, held[1:]))
        # a failure at a coarse threshold must persist at finer ones
        first_fail = next((i for i, (o, _) in enumerate(rs) if o == FAILS), None)
        persist = first_fail is None or all(o != HOLDS for o, _ in rs[first_fail:])
        decisive = all(o != INCONCLUSIVE for o, _ in rs)
        rows.append(_row(_judge(mono and persist, decisive), check="radius monotone", fn=name,
                         radii=[[o, R] for o, R in rs]))
    for name, f, zero in fns:
        try:
            v = global_axiom_check(space, cover, f, grid)
            ok = zero and v.outcome == HOLDS
            rows.append(_row(_judge(ok, v.decisive), check="global axiom", fn=name, outcome=v.outcome))
        except PreconditionError as exc:
            outcome = exc.verdict.outcome if exc.verdict is not None else INCONCLUSIVE
            rows.append(_row(_judge(not zero, outcome != INCONCLUSIVE), check="global axiom", fn=name,
                             outcome="precondition"))
    lookup = {n: f for n, f, _ in fns}
    cases = [("one", "one", "zero"), ("one", "sign", "zero"), ("sign", "sign_plus_decay", "zero"),
             ("decay", "zero", "table"), ("sign_times_decay", "complex_decay", "right_decay")]
    for a, b, c in cases:
        f1, f2, g = lookup[a], lookup[b], lookup[c]
        out, rep = glue(space, U1, U2, f1, f2, g, grid)
        ok = rep["restricts_to_f1"] and rep["restricts_to_f2_plus_g"] == HOLDS
        hs = []
        for e in (Fraction(1, 10),):
            inputs = [higson_check(space, h, 1, e, grid).outcome for h in (f1, f2, g)]
            res = higson_check(space, out, 1, e, grid).outcome
            if all(o == HOLDS for o in inputs):
                hs.append(res == HOLDS)
        rows.append(_row(_judge(ok and all(hs)), check="glue", f1=a, f2=b, g=c, report=rep))
    try:
        glue(space, ss.ALL, U2, lookup["one"], Constant((Fraction(-1), Fraction(0))), lookup["zero"], grid)
        rows.append(_row("fail", check="incompatible glue rejected"))
    except PreconditionError:
        rows.append(_row("pass", check="incompatible glue rejected"))
    return _result(11, "Higson functions and gluing", rows)


# -- 12 --------------------------------------------------------------------------

ALLOWED = {"pass", "fail", "inconclusive"}


def honesty_rows(criteria):
    """Every entry carries an explicit outcome, and undecided entries never count as passes."""
    rows = []
    for c in criteria:
        ok = c["outcome"] in ALLOWED and all(e["result"] in ALLOWED for e in c["exceptions"])
        if c["counts"]["inconclusive"]:
            ok = ok and c["outcome"] != "pass"
        rows.append(_row(_judge(ok), criterion=c["id"]))
    return rows


CRITERIA = (criterion_singleton_halfline, criterion_coproduct_fold, criterion_freudenthal_golden,
            criterion_separation, criterion_star_refinement, criterion_base_axioms,
            criterion_compass_separation, criterion_totally_bounded, criterion_chi_laws,
            criterion_functoriality, criterion_higson)


def run_suite(preset="paper-examples", grid: TruncationGrid = None, only=None, progress=None) -> dict:
    """Run the criteria in order; ``progress(result, seconds)`` is called after each one."""
    if preset not in PRESETS:
        from .errors import ConfigError
        raise ConfigError("preset", f"unknown preset {preset!r}; expected one of {', '.join(PRESETS)}")
    grid = grid or default_grid()
    results = []
    for k, fn in enumerate(CRITERIA, 1):
        if only and k not in only:
            continue
        start = time.perf_counter()
        results.append(fn(grid))
        if progress:
            progress(results[-1], time.perf_counter() - start)
    rows = honesty_rows(results)
    results.append(_result(12, "honest three-valued reporting", rows,
                           {"note": "byte-identical reruns are checked by comparing two report files"}))
    overall = "fail" if any(r["outcome"] == "fail" for r in results) else \
        "inconclusive" if any(r["outcome"] == "inconclusive" for r in results) else "pass"
    return {"schema_version": SCHEMA_VERSION, "preset": preset, "grid": grid.to_json(),
            "criteria": results, "outcome": overall}


def dumps(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"


def summary_table(report) -> str:
    lines = [f"{'id':>3}  {'outcome':<13} {'pass':>5} {'fail':>5} {'inc':>5}  title"]
    for c in report["criteria"]:
        k = c["counts"]
        lines.append(f"{c['id']:>3}  {c['outcome']:<13} {k['pass']:>5} {k['fail']:>5} {k['inconclusive']:>5}  "
                     f"{c['title']}")
    lines.append(f"overall: {report['outcome']}")
    return "\n".join(lines) + "\n"
