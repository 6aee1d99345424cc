"""The space of ends: endpoint equality, the cover relation, and its structure.

Endpoint images enter every set-level check as ``EndpointImage`` subsets, so
all decisions reuse the profile rule of the closeness module.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import subsets as ss
from .coarse_rel import chi_profile, close_verdict, close_verdicts, is_bounded, working_truncation
from .covers import (CoarseCover, containment, coarse_star, cover_verdict, require_cover,
                     separation_cover, star_refinement)
from .endpoints import Endpoint, Pushforward, Restricted, validate_endpoint
from .errors import ConfigError, DomainError, PreconditionError
from .grid import TruncationGrid
from .maps import maps_close, validate_coarse_map
from .verdict import APART, CLOSE, FAILS, HOLDS, IN, INCONCLUSIVE, OUT, Verdict


def image(phi: Endpoint):
    return ss.EndpointImage(phi)


def _map(fn, items, jobs):
    if jobs and jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


# -- equality of endpoints ---------------------------------------------------

def same_endpoint(space, phi, psi, grid: TruncationGrid) -> Verdict:
    """Finite Hausdorff distance of the two images, both directions on the grid."""
    a, b = image(phi), image(psi)
    if phi == psi:
        return Verdict(CLOSE, {"E": 0, "reason": "identical generators"})
    ab = containment(space, a, b, grid)
    ba = containment(space, b, a, grid)
    witness = {"forward": ab.witness, "backward": ba.witness}
    if ab.outcome == HOLDS and ba.outcome == HOLDS:
        return Verdict(CLOSE, dict(witness, E=max(ab.witness["bound"], ba.witness["bound"])))
    if FAILS in (ab.outcome, ba.outcome):
        return Verdict(APART, witness)
    return Verdict(INCONCLUSIVE, witness)


# -- the relation attached to a cover --------------------------------------------

def _star_containment(space, S, star, grid):
    return containment(space, S, star.spec, grid)


def in_u_neighborhood(space, phi, psi, cover: CoarseCover, grid: TruncationGrid) -> Verdict:
    """Is ``psi`` in the cover neighbourhood of ``phi``?  Symmetric star containment.

    Stars over-approximate by including inconclusive parts; an ``In`` reached
    with such parts is re-checked with them dropped and downgraded to
    inconclusive when it does not survive.  ``Out`` is sound either way, since
    the strict star sits inside the flagged one.
    """
    a, b = image(phi), image(psi)
    sa = coarse_star(space, a, cover, grid)
    sb = coarse_star(space, b, cover, grid)
    fwd = _star_containment(space, b, sa, grid)
    bwd = _star_containment(space, a, sb, grid)
    witness = {"star_p": sa.included, "star_q": sb.included,
               "flagged": sorted(set(sa.flagged) | set(sb.flagged)),
               "q_in_star_p": fwd.outcome, "p_in_star_q": bwd.outcome}
    if FAILS in (fwd.outcome, bwd.outcome):
        side = fwd if fwd.outcome == FAILS else bwd
        return Verdict(OUT, dict(witness, escaping=side.witness.get("escaping"),
                                 direction="q outside star(p)" if side is fwd else "p outside star(q)"))
    if fwd.outcome == HOLDS and bwd.outcome == HOLDS:
        E = max(fwd.witness["E"], bwd.witness["E"])
        if not witness["flagged"]:
            return Verdict(IN, dict(witness, E=E))
        strict = []
        for S, star, T in ((b, sa, a), (a, sb, b)):
            keep = [cover.parts[i] for i in star.included if i not in star.flagged]
            strict.append(containment(space, S, ss.union(*keep), grid))
        if all(v.outcome == HOLDS for v in strict):
            return Verdict(IN, dict(witness, E=max(v.witness["E"] for v in strict), strict=True))
        return Verdict(INCONCLUSIVE, dict(witness, reason="in only through inconclusive parts"))
    return Verdict(INCONCLUSIVE, witness)


def refinement_monotonicity_check(space, phi, psi, coverV, coverU, grid: TruncationGrid) -> Verdict:
    """``q`` in the finer neighbourhood of ``p`` must be in the coarser one."""
    t = working_truncation(space, grid)
    umasks = [ss._mask(t, U) for U in coverU.parts]
    for j, V in enumerate(coverV.parts):
        v = ss._mask(t, V)
        if not any(not (v & ~u).any() for u in umasks):
            raise PreconditionError(f"part {j} of the finer cover lies in no part of the coarser one")
    fine = in_u_neighborhood(space, phi, psi, coverV, grid)
    coarse = in_u_neighborhood(space, phi, psi, coverU, grid)
    witness = {"finer": fine.outcome, "coarser": coarse.outcome}
    if fine.outcome == OUT or (fine.outcome == IN and coarse.outcome == IN):
        return Verdict(HOLDS, witness)
    if fine.outcome == IN and coarse.outcome == OUT:
        return Verdict(FAILS, witness)
    return Verdict(INCONCLUSIVE, witness)


@dataclass
class Relation:
    """The cover relation over deduplicated endpoint classes."""
    names: list
    classes: list
    matrix: list
    duplicates: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)

    def outcome(self, a, b):
        return self.matrix[a][b].outcome

    def dot(self):
        lines = ["graph relation {"]
        for n in self.names:
            lines.append(f'  "{n}";')
        for a in range(len(self.names)):
            for b in range(a + 1, len(self.names)):
                if self.matrix[a][b].outcome == IN:
                    lines.append(f'  "{self.names[a]}" -- "{self.names[b]}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        return {"names": self.names, "classes": self.classes,
                "matrix": [[v.outcome for v in row] for row in self.matrix],
                "bounds": [[v.witness.get("E") for v in row] for row in self.matrix],
                "duplicates": self.duplicates, "unresolved": self.unresolved,
                "edges": [[self.names[a], self.names[b]] for a in range(len(self.names))
                          for b in range(a + 1, len(self.names)) if self.matrix[a][b].outcome == IN]}


def dedupe_endpoints(space, endpoints, grid: TruncationGrid):
    """Union close endpoints; each class is named by its least-descriptor member.

    ``endpoints`` is a list of ``(name, endpoint)``.  Returns ``(reps, classes,
    duplicates, unresolved)`` where unresolved lists inconclusive pairs.
    """
    n = len(endpoints)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    duplicates, unresolved = [], []
    for i, j in itertools.combinations(range(n), 2):
        v = same_endpoint(space, endpoints[i][1], endpoints[j][1], grid)
        if v.outcome == CLOSE:
            duplicates.append([endpoints[i][0], endpoints[j][0]])
            parent[find(j)] = find(i)
        elif v.outcome == INCONCLUSIVE:
            unresolved.append([endpoints[i][0], endpoints[j][0]])
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    reps, classes = [], []
    for members in groups.values():
        best = min(members, key=lambda k: (endpoints[k][1].sort_key(space), endpoints[k][0]))
        reps.append(best)
        classes.append(sorted(endpoints[k][0] for k in members))
    order = sorted(range(len(reps)), key=lambda k: reps[k])
    return [reps[k] for k in order], [classes[k] for k in order], duplicates, unresolved


def entourage_relation(space, endpoints, cover: CoarseCover, grid: TruncationGrid, jobs=1,
                       verify=True) -> Relation:
    """The matrix of :func:`in_u_neighborhood` over deduplicated endpoints."""
    if verify:
        require_cover(space, cover, grid)
    reps, classes, dups, unresolved = dedupe_endpoints(space, endpoints, grid)
    eps = [endpoints[k][1] for k in reps]
    m = len(eps)
    pairs = [(a, b) for a in range(m) for b in range(a, m)]
    results = _map(lambda ab: in_u_neighborhood(space, eps[ab[0]], eps[ab[1]], cover, grid), pairs, jobs)
    matrix = [[None] * m for _ in range(m)]
    for (a, b), v in zip(pairs, results):
        matrix[a][b] = matrix[b][a] = v
    return Relation([endpoints[k][0] for k in reps], classes, matrix, dups, unresolved)


def _relation_table(space, eps, cover, grid):
    m = len(eps)
    table = {}
    for a in range(m):
        for b in range(m):
            table[a, b] = in_u_neighborhood(space, eps[a], eps[b], cover, grid).outcome
    return table


def intersect_covers(space, U: CoarseCover, V: CoarseCover, grid: TruncationGrid) -> CoarseCover:
    """Pairwise intersections of the parts, dropping those empty on the truncation."""
    t = working_truncation(space, grid)
    parts, labels = [], []
    for (i, a), (j, b) in itertools.product(enumerate(U.parts), enumerate(V.parts)):
        p = ss.intersection(a, b)
        if ss._mask(t, p).any():
            parts.append(p)
            labels.append(f"{U.labels[i]}&{V.labels[j]}")
    return CoarseCover(tuple(parts), labels=tuple(labels))


def base_axiom_suite(space, covers, endpoints, grid: TruncationGrid) -> dict:
    """Check the four base axioms of the uniformity on a finite endpoint sample.

    ``covers`` is a list of verified covers, ``endpoints`` a list of ``(name,
    endpoint)``.  Each entry is pass, fail or inconclusive; an entry whose
    hypothesis is undecided counts as inconclusive.
    """
    reps, _, _, _ = dedupe_endpoints(space, endpoints, grid)
    eps = [endpoints[k][1] for k in reps]
    names = [endpoints[k][0] for k in reps]
    m = len(eps)
    tally = {"pass": 0, "fail": 0, "inconclusive": 0}
    checks = {"diagonal": [], "intersection": [], "composition": [], "symmetry": []}

    def record(check, entry, outcome):
        tally[outcome] += 1
        if outcome != "pass":
            checks[check].append(dict(entry, outcome=outcome))

    tables = [_relation_table(space, eps, U, grid) for U in covers]
    for ci, tab in enumerate(tables):
        for a in range(m):
            o = tab[a, a]
            record("diagonal", {"cover": ci, "p": names[a]},
                   "pass" if o == IN else "fail" if o == OUT else "inconclusive")
        for a, b in itertools.combinations(range(m), 2):
            x, y = tab[a, b], tab[b, a]
            record("symmetry", {"cover": ci, "p": names[a], "q": names[b]},
                   "pass" if x == y and x != INCONCLUSIVE else "fail" if {x, y} == {IN, OUT} else "inconclusive")
    for (ci, U), (cj, V) in itertools.combinations(enumerate(covers), 2):
        UV = intersect_covers(space, U, V, grid)
        tuv = _relation_table(space, eps, UV, grid)
        for a, b in itertools.combinations(range(m), 2):
            h = tuv[a, b]
            if h == OUT:
                record("intersection", {"covers": [ci, cj], "p": names[a], "q": names[b]}, "pass")
                continue
            both = (tables[ci][a, b], tables[cj][a, b])
            if h == IN and all(o == IN for o in both):
                record("intersection", {"covers": [ci, cj], "p": names[a], "q": names[b]}, "pass")
            elif h == IN and OUT in both:
                record("intersection", {"covers": [ci, cj], "p": names[a], "q": names[b]}, "fail")
            else:
                record("intersection", {"covers": [ci, cj], "p": names[a], "q": names[b]}, "inconclusive")
    refined = []
    for ci, U in enumerate(covers):
        V = star_refinement(space, U, grid)
        refined.append(V.certificate.get("method"))
        tv = _relation_table(space, eps, V, grid)
        for a, b, c in itertools.product(range(m), repeat=3):
            if len({a, b, c}) < 2:
                continue
            h1, h2 = tv[a, b], tv[b, c]
            entry = {"cover": ci, "p": names[a], "q": names[b], "r": names[c]}
            if OUT in (h1, h2):
                record("composition", entry, "pass")
            elif h1 == IN and h2 == IN:
                o = tables[ci][a, c]
                record("composition", entry, "pass" if o == IN else "fail" if o == OUT else "inconclusive")
            else:
                record("composition", entry, "inconclusive")
    total = sum(tally.values())
    return {"endpoints": names, "covers": len(covers), "refinement_methods": refined,
            "tally": tally, "inconclusive_rate": tally["inconclusive"] / total if total else 0.0,
            "passed": tally["fail"] == 0, "exceptions": checks}


# -- functoriality ---------------------------------------------------------------

def pushforward_endpoint(f, phi: Endpoint, grid: TruncationGrid = None, validate=True):
    """``f o phi``, revalidated on the target when a grid is given."""
    try:
        f.apply(phi.point(0))
    except DomainError as exc:
        raise ConfigError("map", f"endpoint does not live in the source of {f.kind}: {exc}") from exc
    out = Pushforward(f, phi)
    if grid is not None and validate:
        v = validate_endpoint(f.target, out, grid)
        out.__dict__["validation"] = v
    return out


def pushforward_well_defined(f, phi, phi2, grid: TruncationGrid) -> Verdict:
    """Close endpoints must stay close after pushing forward."""
    before = same_endpoint(f.source, phi, phi2, grid)
    if before.outcome != CLOSE:
        return Verdict(HOLDS if before.outcome == APART else INCONCLUSIVE, {"source": before.outcome})
    after = same_endpoint(f.target, Pushforward(f, phi), Pushforward(f, phi2), grid)
    witness = {"source": CLOSE, "target": after.outcome}
    return Verdict({CLOSE: HOLDS, APART: FAILS}.get(after.outcome, INCONCLUSIVE), witness)


def close_maps_agree(f, g, phi, grid: TruncationGrid) -> Verdict:
    """Close maps induce the same endpoint."""
    mc = maps_close(f, g, grid)
    if mc.outcome != CLOSE:
        return Verdict(HOLDS if mc.outcome == APART else INCONCLUSIVE, {"maps": mc.outcome})
    after = same_endpoint(f.target, Pushforward(f, phi), Pushforward(g, phi), grid)
    return Verdict({CLOSE: HOLDS, APART: FAILS}.get(after.outcome, INCONCLUSIVE),
                   {"maps": CLOSE, "endpoints": after.outcome})


def pullback_cover(f, cover: CoarseCover) -> CoarseCover:
    return CoarseCover(tuple(ss.Preimage(f, U) for U in cover.parts),
                       labels=tuple(f"f^-1 {lab}" for lab in cover.labels))


def uniform_continuity_check(f, cover: CoarseCover, endpoints, grid: TruncationGrid) -> Verdict:
    """Pairs related under the pulled-back cover must map to related pairs.

    ``f`` must validate as a coarse map and the pullback must verify as a cover
    of the source; pushforwards that fail validation are skipped and listed.
    """
    fv = validate_coarse_map(f, grid)
    if fv.outcome != HOLDS:
        raise PreconditionError(f"{f.kind} does not validate as a coarse map ({fv.outcome})", fv)
    back = pullback_cover(f, cover)
    require_cover(f.source, back, grid, "pullback cover")
    kept, skipped = [], []
    for name, phi in endpoints:
        fp = Pushforward(f, phi)
        if validate_endpoint(f.target, fp, grid).outcome == HOLDS:
            kept.append((name, phi, fp))
        else:
            skipped.append(name)
    rows = []
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    for (na, pa, fa), (nb, pb, fb) in itertools.combinations(kept, 2):
        src = in_u_neighborhood(f.source, pa, pb, back, grid).outcome
        if src == OUT:
            res = "pass"
            tgt = None
        else:
            tgt = in_u_neighborhood(f.target, fa, fb, cover, grid).outcome
            if src == IN:
                res = "pass" if tgt == IN else "fail" if tgt == OUT else "inconclusive"
            else:
                res = "inconclusive"
        counts[res] += 1
        rows.append({"p": na, "q": nb, "source": src, "target": tgt, "result": res})
    witness = {"pairs": rows, "counts": counts, "skipped": skipped}
    if counts["fail"]:
        return Verdict(FAILS, witness)
    if counts["inconclusive"]:
        return Verdict(INCONCLUSIVE, witness)
    return Verdict(HOLDS, witness)


def subspace_embedding_check(ambient, sub, cover_parts, endpoints, grid: TruncationGrid) -> Verdict:
    """Related images in the ambient space force related endpoints in the subspace.

    ``sub`` is a subspace view of ``ambient`` and ``cover_parts`` a coarse cover
    of it (subsets of the ambient space inside the subspace).  The ambient cover
    is built from one separation cover per part: the part against the union of
    the others, with complements taken inside the subspace; its parts are all
    intersections choosing one side per separation.
    """
    Z = sub.subset
    U = CoarseCover(tuple(cover_parts))
    pairs = []
    for i, Ui in enumerate(U.parts):
        rest = ss.union(*[p for j, p in enumerate(U.parts) if j != i])
        a = ss.complement(ss.difference(Z, Ui))
        b = ss.complement(ss.difference(Z, rest))
        pairs.append(separation_cover(ambient, a, b, grid))
    t = working_truncation(ambient, grid)
    parts = []
    for sigma in itertools.product((0, 1), repeat=len(pairs)):
        p = ss.intersection(*[pairs[i][s] for i, s in enumerate(sigma)])
        if ss._mask(t, p).any():
            parts.append(p)
    V = CoarseCover(tuple(parts))
    rows, counts = [], {"pass": 0, "fail": 0, "inconclusive": 0}
    for (na, pa), (nb, pb) in itertools.combinations(endpoints, 2):
        up = in_u_neighborhood(ambient, pa, pb, V, grid).outcome
        if up == OUT:
            res, down = "pass", None
        else:
            down = in_u_neighborhood(sub, pa, pb, U, grid).outcome
            res = ("pass" if down == IN else "fail" if down == OUT else "inconclusive") if up == IN \
                else "inconclusive"
        counts[res] += 1
        rows.append({"p": na, "q": nb, "ambient": up, "subspace": down, "result": res})
    witness = {"parts": len(parts), "pairs": rows, "counts": counts}
    if counts["fail"]:
        return Verdict(FAILS, witness)
    return Verdict(INCONCLUSIVE if counts["inconclusive"] else HOLDS, witness)


# -- intersections of subspaces ---------------------------------------------------

def restrict_to_intersection(space, U, V, phi, psi, grid: TruncationGrid):
    """An endpoint in ``U & V`` close to ``phi`` (in ``U``) and ``psi`` (in ``V``).

    Returns ``(endpoint, report)``.  Points of ``phi`` already in ``V`` are kept;
    the others are replaced by a point of ``psi`` in ``U & V`` within the
    Hausdorff bound, and by a fixed point of ``U & V`` on the finite exceptional
    index set where no such point exists.
    """
    require_cover(space, CoarseCover((U, V), ss.union(U, V)), grid, "(U, V) over U | V")
    same = same_endpoint(space, phi, psi, grid)
    if same.outcome != CLOSE:
        raise PreconditionError(f"inputs are not the same endpoint ({same.outcome})", same)
    t = working_truncation(space, grid)
    both = ss.intersection(U, V)
    m = ss._mask(t, both)
    if not m.any():
        raise PreconditionError("U & V has no point in the truncation")
    fallback = t.points[int(np.argmax(m))]
    out = Restricted(phi, psi, both, both, int(same.witness["E"]), fallback, space)
    n, _ = phi.index_bound(space, grid.r_max)
    subs, exceptional = [], []
    for i in range(n):
        _, how = out.decision(i)
        if how == "fallback":
            exceptional.append(i)
        elif how != "kept":
            subs.append([i, how])
    v = validate_endpoint(space, out, grid)
    checks = [same_endpoint(space, out, phi, grid).outcome, same_endpoint(space, out, psi, grid).outcome]
    report = {"E": out.bound, "substitutions": subs, "exceptional": exceptional,
              "fallback": space.encode_point(fallback), "valid": v.outcome,
              "close_to_inputs": checks}
    return out, report


# -- separation -----------------------------------------------------------------

def _separating_cover(space, sub, other, grid):
    """Cover ``(V1, V2)`` with ``V1`` apart from ``sub`` and ``V2`` apart from ``other``."""
    V1, V2 = separation_cover(space, ss.complement(sub), ss.complement(other), grid)
    return CoarseCover((V1, V2), labels=("avoid-subsequence", "avoid-image"))


def separate_endpoints(space, phi, psi, grid: TruncationGrid):
    """A two-part cover whose relation puts ``psi`` outside the neighbourhood of ``phi``.

    Returns ``(cover or None, verdict)``.  The subsequence of one image staying
    at least ``|x| / tau_divisor`` away from the other image plays the role of a
    divergent subsequence; both orientations are tried.
    """
    same = same_endpoint(space, phi, psi, grid)
    if same.outcome != APART:
        raise PreconditionError(f"separate_endpoints needs distinct endpoints ({same.outcome})", same)
    tried = []
    for case, (x, y) in enumerate(((phi, psi), (psi, phi)), 1):
        sub = ss.FarFrom(image(x), image(y), grid.tau_divisor)
        apart = close_verdict(space, sub, image(y), grid).outcome
        unbounded = is_bounded(space, sub, grid).outcome
        entry = {"case": case, "apart": apart, "bounded": unbounded}
        tried.append(entry)
        if apart != APART or unbounded != FAILS:
            continue
        try:
            cover = _separating_cover(space, sub, image(y), grid)
        except PreconditionError as exc:
            entry["error"] = str(exc)
            continue
        rel = in_u_neighborhood(space, phi, psi, cover, grid)
        entry["relation"] = rel.outcome
        if rel.outcome == OUT:
            cover.certificate = {"kind": "separation", "case": case, "relation": OUT,
                                 "escaping": rel.witness.get("escaping")}
            return cover, Verdict(OUT, {"case": case, "tried": tried, "relation": rel.witness})
    return None, Verdict(INCONCLUSIVE, {"tried": tried})


# -- totally bounded structure ------------------------------------------------------

@dataclass
class IndexSet:
    included: list
    inconclusive: list
    verdicts: list

    def to_json(self):
        return {"included": self.included, "inconclusive": self.inconclusive, "verdicts": self.verdicts}


def index_set(space, phi, cover: CoarseCover, grid: TruncationGrid) -> IndexSet:
    vs = close_verdicts(space, image(phi), list(cover.parts), grid)
    outs = [v.outcome for v in vs]
    return IndexSet([i for i, o in enumerate(outs) if o == CLOSE],
                    [i for i, o in enumerate(outs) if o == INCONCLUSIVE], outs)


def _subsets(items):
    items = sorted(items)
    for r in range(1, len(items) + 1):
        yield from itertools.combinations(items, r)


def _in_union(space, phi, cover, S, grid):
    return containment(space, image(phi), ss.union(*[cover.parts[i] for i in S]), grid).outcome


def finite_cover_structure(space, endpoints, cover: CoarseCover, grid: TruncationGrid) -> dict:
    """The classes ``{p : phi(Z+) inside E[U_S], S <= I(p)}`` and the iff check.

    ``q`` is related to ``p`` exactly when some ``S`` has both in its class; only
    ``S <= I(p) & I(q)`` can qualify.  Pairs whose relation or class membership
    is undecided are counted as inconclusive rather than checked.
    """
    names = [n for n, _ in endpoints]
    eps = [e for _, e in endpoints]
    idx = [index_set(space, e, cover, grid) for e in eps]
    member = {}
    for a, e in enumerate(eps):
        for S in _subsets(idx[a].included):
            member[a, S] = _in_union(space, e, cover, S, grid)
    classes = {}
    for (a, S), o in sorted(member.items()):
        if o == HOLDS:
            classes.setdefault(S, []).append(names[a])
    rows, counts = [], {"pass": 0, "fail": 0, "inconclusive": 0}
    for a in range(len(eps)):
        for b in range(a, len(eps)):
            rel = in_u_neighborhood(space, eps[a], eps[b], cover, grid).outcome
            common = set(idx[a].included) & set(idx[b].included)
            found, undecided = False, bool(idx[a].inconclusive or idx[b].inconclusive)
            for S in _subsets(common):
                oa, ob = member[a, S], member[b, S]
                if oa == HOLDS and ob == HOLDS:
                    found = True
                    break
                if INCONCLUSIVE in (oa, ob):
                    undecided = True
            if rel == INCONCLUSIVE or (not found and undecided):
                res = "inconclusive"
            else:
                res = "pass" if found == (rel == IN) else "fail"
            counts[res] += 1
            rows.append({"p": names[a], "q": names[b], "relation": rel, "shared_class": found, "result": res})
    k = len(cover.parts)
    return {"index_sets": {names[a]: idx[a].to_json() for a in range(len(eps))},
            "classes": [{"S": list(S), "members": m} for S, m in sorted(classes.items())],
            "class_count": len(classes), "class_bound": 2 ** k,
            "iff": rows, "counts": counts, "passed": counts["fail"] == 0}


# -- lower bounds on endpoint distance -----------------------------------------------

@dataclass
class EndpointDistanceBound:
    """Lower-bound function sampled on the grid radii; ``None`` entries are infinite."""
    f: list
    case: object
    subsequence: dict = field(default_factory=dict)
    slack: int = 0
    verdict: str = HOLDS

    def to_json(self):
        return {"f": self.f, "case": self.case, "subsequence": self.subsequence,
                "slack": self.slack, "verdict": self.verdict}


def endpoint_distance_bound(space, phi, psi, grid: TruncationGrid) -> EndpointDistanceBound:
    """``f = chi(image of one ray, far subsequence of the other)``; zero for equal endpoints."""
    same = same_endpoint(space, phi, psi, grid)
    if same.outcome == CLOSE:
        return EndpointDistanceBound([0] * len(grid.radii), "equal")
    if same.outcome != APART:
        return EndpointDistanceBound([], None, verdict=INCONCLUSIVE)
    for case, (x, y) in enumerate(((phi, psi), (psi, phi)), 1):
        sub = ss.FarFrom(image(y), image(x), grid.tau_divisor)
        if close_verdict(space, image(x), sub, grid).outcome != APART:
            continue
        prof = chi_profile(space, image(x), sub, grid)
        if all(v is None for v in prof.values):
            continue
        return EndpointDistanceBound(list(prof.values), case,
                                     {"divisor": grid.tau_divisor, "pairs": prof.pairs})
    return EndpointDistanceBound([], None, verdict=INCONCLUSIVE)


def _pointwise_min(profiles):
    out = []
    for vals in zip(*profiles):
        finite = [v for v in vals if v is not None]
        out.append(min(finite) if finite else None)
    return out


def cover_separation_bound(space, phi, cover: CoarseCover, grid: TruncationGrid,
                           partners=()) -> dict:
    """The pointwise minimum of the per-case lower bounds for ``phi`` and ``cover``.

    ``partners`` is a list of ``(name, endpoint)``; for those outside the cover
    neighbourhood of ``phi`` the endpoint distance bound must dominate ``f`` up
    to a constant (the excess over the trailing window may not exceed the excess
    seen before it).
    """
    k = len(cover.parts)
    I = index_set(space, phi, cover, grid)
    pieces = {}
    for S in _subsets(range(k)):
        if _in_union(space, phi, cover, S, grid) != FAILS:
            continue
        U_S = ss.union(*[cover.parts[i] for i in S])
        sub = ss.FarFrom(image(phi), U_S, grid.tau_divisor)
        pieces["S=" + ",".join(map(str, S))] = chi_profile(space, sub, U_S, grid).values
    rest = [i for i in range(k) if i not in I.included]
    if rest:
        pieces["b"] = chi_profile(space, image(phi), ss.union(*[cover.parts[i] for i in rest]), grid).values
    f = _pointwise_min(list(pieces.values())) if pieces else [None] * len(grid.radii)
    win = grid.trailing(range(len(grid.radii)))
    rows, counts = [], {"pass": 0, "fail": 0, "inconclusive": 0}
    for name, psi in partners:
        rel = in_u_neighborhood(space, phi, psi, cover, grid).outcome
        if rel != OUT:
            continue
        g = endpoint_distance_bound(space, phi, psi, grid)
        if g.verdict != HOLDS:
            counts["inconclusive"] += 1
            rows.append({"q": name, "result": "inconclusive"})
            continue
        diff = [None if fv is None else (fv - gv if gv is not None else None)
                for fv, gv in zip(f, g.f)]
        early = [d for i, d in enumerate(diff) if i not in win and d is not None]
        late = [d for i, d in enumerate(diff) if i in win and d is not None]
        c = max([0] + early)
        if all(d <= c for d in late):
            res = "pass"
        elif len(late) == len(win) and all(b > a for a, b in zip(late, late[1:])):
            res = "fail"
        else:
            res = "inconclusive"
        counts[res] += 1
        rows.append({"q": name, "g": g.f, "case": g.case, "constant": c, "result": res})
    win_vals = [f[i] for i in win]
    unbounded = all(v is None or v > grid.tau(grid.radii[i]) for v, i in zip(win_vals, win)) if pieces else None
    return {"f": f, "pieces": pieces, "index_set": I.to_json(), "unbounded": unbounded,
            "domination": rows, "counts": counts, "slack": 0}
