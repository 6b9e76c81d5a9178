"""Mechanical checks of every realized catalog entry."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

from .blowup import BlowupError, point_multiplicity
from .catalog import (
    EXPECTED_COUNTS,
    FAMILIES,
    Realization,
    TypeSpec,
    expand_all,
    expected_ez_graph,
    expected_symbol,
    realize,
)
from .dualgraph import (
    GraphError,
    build_dual_graph,
    canonical_form,
    classify_symbol_sum,
    unaccounted,
)
from .lattice import arithmetic_genus, canonical_class, intersection, is_nef_on_base, sigma

# check id -> condition it encodes
CONDITIONS = {
    "realize": "the type data can be eliminated with nonnegative chain coefficients",
    "nef": "bottom adjoint class is nef and pairs positively with L",
    "family-class": "bigness of the adjoint class matches the family",
    "median-not-nef": "2K_Z+L_Z is not nef on a median triplet",
    "minus-one-curves": "adjoint class is nonnegative on (-1)-curves of the base",
    "fundamental": "L ~ -3K - E at every stage",
    "transform": "E^{Delta,s} equals the sum of its components at every stage",
    "incidence": "tracked intersection points account for every intersection number",
    "coeff-range": "coefficients of E_M lie in {1, 2} and no induced coefficient is negative",
    "snc": "Supp E_M is simple normal crossing",
    "orthogonal": "(L_M . E_0) = 0 for every component of E_M",
    "nonzero": "E_M is a nonzero effective divisor",
    "degree-Z": "(L_Z . E_Z) = 2 deg Delta_Z",
    "degree-X": "(L_X . E_X) = 2 (deg Delta_X + deg Delta_Z)",
    "component-degree-Z": "(L_Z . E_0) = deg(Delta_Z on E_0) for smooth components",
    "component-degree-X": "(L_X . E_0) = deg(Delta_Z on E_0^Z) + 2 deg(Delta_X on E_0)",
    "window-Q": "2 <= mult_Q E_Z <= 4 at every point of Delta_Z",
    "window-P": "1 <= mult_P E_X <= 3 at every point of Delta_X",
    "two-curve": "(C_1 . C_2) >= k_1 + k_2 - k for smooth components",
    "genus-drop": "C^2 - (C^M)^2 - (K_{M/base} . C^M) = 2 p_a(C) - 2 p_a(C^M)",
    "sigma-avoid": "Delta avoids the minimal section when the adjoint class is not big",
    "sections": "section components obey the coefficient and degree bounds of the non-big case",
    "symbol": "symbol of the E_M dual graph equals the tabulated symbol",
    "ez-graph": "E_Z dual graph equals the tabulated graph",
}


@dataclass
class Check:
    id: str
    ok: bool
    detail: str = ""

    @property
    def condition(self) -> str:
        return CONDITIONS.get(self.id, "")

    def to_dict(self) -> dict:
        return {"id": self.id, "status": "pass" if self.ok else "fail", "detail": self.detail,
                "condition": self.condition}


@dataclass
class Report:
    type_id: str
    family: str
    checks: list[Check] = field(default_factory=list)
    computed_em: str = ""
    expected_em: str = ""

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks) and self.computed_em == self.expected_em

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def check(self, cid: str) -> Check | None:
        for c in self.checks:
            if c.id == cid:
                return c
        return None

    def to_dict(self) -> dict:
        return {
            "type": self.type_id,
            "family": self.family,
            "status": "pass" if self.ok else "fail",
            "computedEM": self.computed_em,
            "expectedEM": self.expected_em,
            "checks": [c.to_dict() for c in self.checks],
        }


def _collect(cid: str, failures: list[str], ok_detail: str = "") -> Check:
    if failures:
        return Check(cid, False, "; ".join(failures[:4]) + (" ..." if len(failures) > 4 else ""))
    return Check(cid, True, ok_detail)


def _sections(r: Realization, stage: str):
    base = r.tower.base
    if base.kind != "F":
        return []
    return [cid for cid in r.coeffs[stage]
            if r.stage(stage).curves[cid].origin == "base" and r.stage(stage).curves[cid].base_cls.base[0] == 1]


def _is_sigma(r: Realization, cid: str) -> bool:
    c = r.tower.stages[0].curves.get(cid)
    return c is not None and r.tower.base.kind == "F" and c.base_cls.base == (1, 0)


def _delta_degree(r: Realization, step_target: str, cid: str) -> int:
    _, _, cl = r.tower.step_into(step_target)
    return sum(sum(c.branch(cid)) for c in cl)


def verify_axioms(r: Realization) -> list[Check]:
    t = r.spec
    out: list[Check] = []
    bottom = r.tower.stages[0]
    K0 = bottom.canonical()
    L0 = r.L[bottom.name]
    base = r.tower.base

    # nef tests on the bottom base
    if t.is_tetrad:
        adj = 2 * K0 + L0
        val = intersection(K0 + L0, L0)
        ok = is_nef_on_base(adj) and val > 2 * r.degX
        out.append(Check("nef", ok, f"2K+L = {adj}; (K+L.L) = {val} vs 2 degX = {2 * r.degX}"))
        sq = intersection(adj, adj)
        trivial = adj.base == (0,) * base.rank
        got = "tet-trivial" if trivial else "tet-big" if sq > 0 else "tet-nonbig"
        out.append(Check("family-class", got == t.family, f"adjoint class behaves as {got}"))
        m1 = 3 * K0 + L0
    else:
        adj = K0 + L0
        val = intersection(adj, L0)
        ok = is_nef_on_base(adj) and val > 0
        out.append(Check("nef", ok, f"K+L = {adj}; (K+L.L) = {val}"))
        two = 2 * K0 + L0
        out.append(Check("median-not-nef", not is_nef_on_base(two), f"2K+L = {two}"))
        m1 = 2 * K0 + L0
    if base.kind == "F" and base.n == 1:
        s = bottom.surface
        v = intersection(m1, sigma(s))
        out.append(Check("minus-one-curves", v >= 0, f"pairing with sigma = {v}"))
    else:
        out.append(Check("minus-one-curves", True, "no (-1)-curves on the base"))

    # class identities
    bad = []
    for st in r.tower.stages:
        lhs = r.L[st.name]
        rhs = -3 * st.canonical() - r.E[st.name]
        if lhs != rhs:
            bad.append(f"stage {st.name}: L = {lhs} but -3K-E = {rhs}")
    out.append(_collect("fundamental", bad))
    bad = []
    for st in r.tower.stages:
        s = sum((k * st.cls(cid) for cid, k in r.coeffs[st.name].items()), start=type(r.E[st.name]).zero(base))
        if s != r.E[st.name]:
            bad.append(f"stage {st.name}: components sum to {s}, transform is {r.E[st.name]}")
    out.append(_collect("transform", bad))

    # every tracked pair is accounted for
    bad = []
    for st in r.tower.stages:
        ids = list(st.curves)
        comps = [(cid, st.cls(cid), 1) for cid in ids]
        g = build_dual_graph(comps, st)
        for a, b, lat, got in unaccounted(comps, g):
            bad.append(f"{st.name}: {a}.{b} = {lat}, points give {got}")
    out.append(_collect("incidence", bad))

    em = r.coeffs["M"]
    neg = [f"{st}:{cid}={k}" for st, cs in r.coeffs.items() for cid, k in cs.items() if k < 0]
    wrong = [f"{cid}={k}" for cid, k in em.items() if k not in (1, 2)]
    out.append(_collect("coeff-range", neg + wrong, "coefficients " + ",".join(sorted({str(k) for k in em.values()}))))

    M = r.stage("M")
    bad = []
    pos = {cid for cid, k in em.items() if k > 0}
    for cid in sorted(pos):
        if M.curves[cid].singular:
            bad.append(f"{cid} is singular")
    for p in M.points:
        a, b = p.curves
        if a in pos and b in pos:
            if a == b:
                continue
            if p.mult != 1:
                bad.append(f"{a} and {b} meet with contact {p.mult}")
            if len(({a, b} | set(p.through)) & pos) > 2:
                bad.append(f"three components through one point near {a}, {b}")
    comps = [(cid, M.cls(cid), k) for cid, k in em.items() if k > 0]
    g = build_dual_graph(comps, M)
    for a, b, lat, got in unaccounted(comps, g):
        bad.append(f"{a}.{b} = {lat} but points give {got}")
    out.append(_collect("snc", bad))

    bad = []
    for cid, k in em.items():
        v = intersection(r.L["M"], M.cls(cid))
        if v:
            bad.append(f"(L_M.{cid}) = {v}")
    out.append(_collect("orthogonal", bad))
    out.append(Check("nonzero", any(k > 0 for k in em.values()), f"{len(pos)} components"))

    # avoidance of the minimal section in the non-big case
    adjsq = intersection(adj, adj) if t.is_tetrad else intersection(K0 + L0, K0 + L0)
    nonbig = base.kind == "F" and adjsq == 0 and adj.base != (0,) * base.rank
    if nonbig:
        step = "Z" if t.is_tetrad else "M"
        _, _, cl = r.tower.step_into(step)
        bad = []
        if base.n == 0 and cl:
            bad.append("Delta must be empty on F0")
        for c in cl:
            for cid in c.curves():
                if _is_sigma(r, cid):
                    bad.append(f"cluster {c.id} meets sigma")
        out.append(_collect("sigma-avoid", bad))
        out.append(_check_sections(r, step))
    return out


def _check_sections(r: Realization, step: str) -> Check:
    bottom = r.tower.stages[0]
    n = r.tower.base.n
    coeffs = r.coeffs[bottom.name]
    secs = _sections(r, bottom.name)
    sig = [cid for cid in coeffs if _is_sigma(r, cid)]
    bad = []
    for d in secs:
        d2 = intersection(bottom.cls(d), bottom.cls(d))
        deg = _delta_degree(r, step, d)
        if r.spec.is_tetrad:
            bound = d2 if (not sig or n == 0) else n + d2
            if bound < deg:
                bad.append(f"section {d}: bound {bound} < deg {deg}")
        else:
            if not sig:
                bad.append(f"section {d} present but sigma is not a component")
                continue
            cs, cd = coeffs[sig[0]], coeffs[d]
            if cs < cd:
                bad.append(f"coeff sigma {cs} < coeff {d} {cd}")
            elif cs == cd and n + d2 < deg:
                bad.append(f"section {d}: n + D^2 = {n + d2} < deg {deg}")
    return _collect("sections", bad, f"{len(secs)} sections")


def verify_identities(r: Realization) -> list[Check]:
    t = r.spec
    out: list[Check] = []
    Z = r.stage("Z")
    lz_ez = intersection(r.L["Z"], r.E["Z"])
    out.append(Check("degree-Z", lz_ez == 2 * r.degZ, f"(L_Z.E_Z) = {lz_ez}, 2 degZ = {2 * r.degZ}"))
    if t.is_tetrad:
        X = r.stage("X")
        lx_ex = intersection(r.L["X"], r.E["X"])
        want = 2 * (r.degX + r.degZ)
        out.append(Check("degree-X", lx_ex == want, f"(L_X.E_X) = {lx_ex}, 2(degX+degZ) = {want}"))

    bad = []
    for cid, k in r.coeffs["Z"].items():
        if k <= 0 or Z.curves[cid].singular:
            continue
        lhs = intersection(r.L["Z"], Z.cls(cid))
        rhs = _delta_degree(r, "M", cid)
        if lhs != rhs:
            bad.append(f"{cid}: {lhs} vs {rhs}")
    out.append(_collect("component-degree-Z", bad))
    if t.is_tetrad:
        bad = []
        for cid, k in r.coeffs["X"].items():
            if X.curves[cid].singular:
                continue
            lhs = intersection(r.L["X"], X.cls(cid))
            rhs = _delta_degree(r, "M", cid) + 2 * _delta_degree(r, "Z", cid)
            if lhs != rhs:
                bad.append(f"{cid}: {lhs} vs {rhs}")
        out.append(_collect("component-degree-X", bad))

    _, _, zcl = r.tower.step_into("M")
    bad = [f"{c.id}: {point_multiplicity(r.coeffs['Z'], c, 1)}" for c in zcl
           if not 2 <= point_multiplicity(r.coeffs["Z"], c, 1) <= 4]
    out.append(_collect("window-Q", bad))
    if t.is_tetrad:
        _, _, xcl = r.tower.step_into("Z")
        bad = [f"{c.id}: {point_multiplicity(r.coeffs['X'], c, 1)}" for c in xcl
               if not 1 <= point_multiplicity(r.coeffs["X"], c, 1) <= 3]
        out.append(_collect("window-P", bad))

    bad = []
    stages = [("Z", "M")] + ([("X", "Z")] if t.is_tetrad else [])
    for st_name, step in stages:
        st = r.stage(st_name)
        k = r.degZ if step == "M" else r.degX
        smooth = [cid for cid, c in r.coeffs[st_name].items() if c > 0 and not st.curves[cid].singular]
        for a, b in combinations(smooth, 2):
            lhs = intersection(st.cls(a), st.cls(b))
            rhs = _delta_degree(r, step, a) + _delta_degree(r, step, b) - k
            if lhs < rhs:
                bad.append(f"{st_name}: {a}.{b} = {lhs} < {rhs}")
    out.append(_collect("two-curve", bad))

    bad = []
    bottom = r.tower.stages[0]
    M = r.stage("M")
    krel = canonical_class(r.tower.base, M.exc_ids) - canonical_class(r.tower.base)
    for cid in r.coeffs[bottom.name]:
        c0, cm = bottom.cls(cid), M.cls(cid)
        lhs = intersection(c0, c0) - intersection(cm, cm) - intersection(krel, cm)
        rhs = 2 * arithmetic_genus(c0) - 2 * arithmetic_genus(cm, M.exc_ids)
        if lhs != rhs:
            bad.append(f"{cid}: {lhs} vs {rhs}")
    out.append(_collect("genus-drop", bad))
    return out


def computed_symbol(r: Realization):
    M = r.stage("M")
    em = {cid: k for cid, k in r.coeffs["M"].items() if k > 0}
    return classify_symbol_sum(build_dual_graph(em, M))


def ez_graph(r: Realization):
    Z = r.stage("Z")
    return build_dual_graph({cid: k for cid, k in r.coeffs["Z"].items() if k > 0}, Z)


def verify_symbols(r: Realization, t: TypeSpec | None = None) -> list[Check]:
    t = t or r.spec
    out = []
    exp = expected_symbol(t)
    try:
        got = computed_symbol(r)
        out.append(Check("symbol", got == exp, f"computed {got}, expected {exp}"))
    except GraphError as exc:
        out.append(Check("symbol", False, f"grammar violation: {exc}; expected {exp}"))
    want = expected_ez_graph(t)
    if want is not None:
        try:
            a, b = canonical_form(ez_graph(r)), canonical_form(want)
            out.append(Check("ez-graph", a == b, "match" if a == b else f"computed {a}, expected {b}"))
        except GraphError as exc:
            out.append(Check("ez-graph", False, str(exc)))
    return out


def verify(t: TypeSpec) -> Report:
    rep = Report(t.id, t.family)
    try:
        exp = expected_symbol(t)
        rep.expected_em = str(exp)
    except ValueError as exc:
        rep.checks.append(Check("symbol", False, f"bad expected symbol: {exc}"))
        return rep
    try:
        r = realize(t, strict=False)
    except (BlowupError, ValueError) as exc:
        rep.checks.append(Check("realize", False, str(exc)))
        return rep
    rep.checks.append(Check("realize", True, f"degX={r.degX}, degZ={r.degZ}"))
    for fn in (verify_axioms, verify_identities, verify_symbols):
        try:
            rep.checks.extend(fn(r))
        except (BlowupError, GraphError, ValueError) as exc:
            rep.checks.append(Check(fn.__name__.replace("verify_", ""), False, str(exc)))
    try:
        rep.computed_em = str(computed_symbol(r))
    except GraphError as exc:
        rep.computed_em = f"<{exc}>"
    return rep


def verify_distinctness(specs: list[TypeSpec]) -> Check:
    """E_Z graphs of plane tet-trivial types differ across median parts."""
    forms: dict[str, set[str]] = {}
    for t in specs:
        if t.family != "tet-trivial" or t.base.kind != "P2":
            continue
        try:
            forms.setdefault(t.median_part, set()).add(canonical_form(ez_graph(realize(t))))
        except (BlowupError, GraphError, ValueError) as exc:
            return Check("ez-distinct", False, f"{t.id}: {exc}")
    bad = [f"{k} has {len(v)} different graphs" for k, v in forms.items() if len(v) != 1]
    owner: dict[str, str] = {}
    for k in sorted(forms):
        for f in forms[k]:
            if f in owner:
                bad.append(f"{owner[f]} and {k} share an E_Z graph")
            owner.setdefault(f, k)
    return _collect("ez-distinct", bad, f"{len(forms)} median parts pairwise distinct")


CONDITIONS["ez-distinct"] = "E_Z graphs separate the median parts of plane tet-trivial types"


@dataclass
class Summary:
    counts: dict[str, int]
    passed: dict[str, int]
    failed: list[str]
    distinct: Check | None = None

    @property
    def ok(self) -> bool:
        return not self.failed and (self.distinct is None or self.distinct.ok)

    def text(self) -> str:
        parts = [f"{f}: {self.passed.get(f, 0)}/{self.counts.get(f, 0)}" for f in FAMILIES if self.counts.get(f)]
        lines = ["verified " + ", ".join(parts)]
        if self.distinct is not None:
            lines.append(f"ez-distinct: {'pass' if self.distinct.ok else 'fail'} ({self.distinct.detail})")
        if self.failed:
            lines.append("failed: " + ", ".join(self.failed))
        return "\n".join(lines)


def run_all(specs: list[TypeSpec], concrete: bool = False) -> tuple[list[Report], Summary]:
    types = specs if concrete else expand_all(specs)
    reports = sorted((verify(t) for t in types), key=lambda r: (FAMILIES.index(r.family), r.type_id))
    counts = {f: 0 for f in FAMILIES}
    passed = {f: 0 for f in FAMILIES}
    for rep in reports:
        counts[rep.family] += 1
        passed[rep.family] += rep.ok
    distinct = None
    if any(t.family == "tet-trivial" for t in types):
        distinct = verify_distinctness(types)
    summary = Summary(counts, passed, [r.type_id for r in reports if not r.ok], distinct)
    return reports, summary


def reports_json(reports: list[Report]) -> str:
    return json.dumps([r.to_dict() for r in reports], ensure_ascii=False, indent=2)


__all__ = [
    "Check", "Report", "Summary", "verify", "verify_axioms", "verify_identities", "verify_symbols",
    "verify_distinctness", "run_all", "computed_symbol", "ez_graph", "EXPECTED_COUNTS",
]
