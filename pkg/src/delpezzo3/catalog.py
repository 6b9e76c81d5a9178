"""Catalog of classified types: loading, parameter expansion and realization."""
from __future__ import annotations

import itertools
import json
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from ._expr import ExprError, eval_int
from .blowup import (
    ClusterSpec,
    Point,
    Tower,
    divisor_class,
    eliminate,
    relative_canonical,
    transform_with_s,
)
from .dualgraph import SingSymbol, WeightedDualGraph, graph_from_pattern, parse_symbol
from .lattice import BaseSurface, DivClass, SymbolicCurve, canonical_class, intersection

FAMILIES = ("median", "tet-big", "tet-nonbig", "tet-trivial")
EXPECTED_COUNTS = {"median": 77, "tet-big": 45, "tet-nonbig": 115, "tet-trivial": 63}
CATALOG_ENV = "DELPEZZO3_CATALOG"
SCHEMA_VERSION = 1

_KINDS = {"smooth": "smooth-rational", "nodal": "nodal-rational", "cuspidal": "cuspidal-rational"}


class CatalogError(ValueError):
    """Schema violation or unknown type."""


class RealizationError(ValueError):
    pass


@dataclass(frozen=True)
class ParamGroup:
    names: tuple[str, ...]
    domain: tuple[tuple[int, ...], ...]


@dataclass
class TypeSpec:
    id: str
    family: str
    base: BaseSurface
    components: list[dict]
    clustersX: list[dict]
    clustersZ: list[dict]
    residual: list[dict]
    params: list[ParamGroup]
    expectedEM: str
    expectedEZ: str | None = None
    values: dict[str, int] = field(default_factory=dict)
    template: str = ""

    @property
    def is_concrete(self) -> bool:
        return all(n in self.values for g in self.params for n in g.names)

    @property
    def is_tetrad(self) -> bool:
        return self.family != "median"

    @property
    def median_part(self) -> str:
        """The type name without the trailing (c,d) group."""
        if any("c" in g.names or "d" in g.names for g in self.params):
            return re.sub(r"\([^()]*\)$", "", self.id)
        return self.id

    def curves(self) -> list[SymbolicCurve]:
        return [_curve(self.base, c) for c in self.components]


def default_catalog_dir() -> Path:
    env = os.environ.get(CATALOG_ENV)
    if env:
        return Path(env)
    return Path(__file__).with_name("data")


def ascii_alias(type_id: str) -> str:
    s = type_id.replace("⟨", "<").replace("⟩", ">")
    return re.sub(r"[\[\]{}$\s]", "", s)


def _curve(base: BaseSurface, raw: dict) -> SymbolicCurve:
    cl = raw["class"]
    if base.kind == "P2":
        cls = DivClass.make(base, (cl["d"],))
    else:
        cls = DivClass.make(base, (cl.get("a", 0), cl.get("b", 0)))
    return SymbolicCurve(raw["id"], cls, _KINDS[raw.get("kind", "smooth")], raw.get("coeff", 1))


def _fail(where: str, msg: str):
    raise CatalogError(f"{where}: {msg}")


def _check_type(raw: Any, where: str, family: str) -> TypeSpec:
    if not isinstance(raw, dict):
        _fail(where, "type entry must be an object")
    for key in ("id", "base", "components", "expectedEM"):
        if key not in raw:
            _fail(where, f"missing field {key!r}")
    tid = raw["id"]
    where = f"{where}[{tid}]"
    b = raw["base"]
    if not isinstance(b, dict) or b.get("kind") not in ("P2", "F"):
        _fail(f"{where}.base", "kind must be P2 or F")
    try:
        base = BaseSurface(b["kind"], b.get("n"))
    except ValueError as exc:
        _fail(f"{where}.base", str(exc))
    comps = raw["components"]
    if not isinstance(comps, list) or not comps:
        _fail(f"{where}.components", "must be a nonempty list")
    ids = set()
    for i, c in enumerate(comps):
        w = f"{where}.components[{i}]"
        if not isinstance(c, dict) or "id" not in c or "class" not in c:
            _fail(w, "needs id and class")
        if c["id"] in ids:
            _fail(w, f"duplicate component id {c['id']}")
        ids.add(c["id"])
        need = {"d"} if base.kind == "P2" else {"a", "b"}
        if not isinstance(c["class"], dict) or not set(c["class"]) <= need or not c["class"]:
            _fail(f"{w}.class", f"expected keys {sorted(need)}")
        if c.get("kind", "smooth") not in _KINDS:
            _fail(f"{w}.kind", f"unknown kind {c.get('kind')!r}")
        if not isinstance(c.get("coeff", 1), int) or c.get("coeff", 1) < 1:
            _fail(f"{w}.coeff", "positive integer required")
    params = []
    for i, p in enumerate(raw.get("params", [])):
        w = f"{where}.params[{i}]"
        if not isinstance(p, dict) or "names" not in p or "domain" not in p:
            _fail(w, "needs names and domain")
        names = tuple(p["names"])
        dom = []
        for tup in p["domain"]:
            if not isinstance(tup, list) or len(tup) != len(names) or not all(isinstance(x, int) for x in tup):
                _fail(f"{w}.domain", f"tuple {tup!r} does not match {names}")
            dom.append(tuple(tup))
        if len(set(dom)) != len(dom):
            _fail(f"{w}.domain", "repeated tuple")
        params.append(ParamGroup(names, tuple(dom)))
    for key in ("clustersX", "clustersZ", "residual"):
        if not isinstance(raw.get(key, []), list):
            _fail(f"{where}.{key}", "must be a list")
    if family == "median" and raw.get("clustersX"):
        _fail(f"{where}.clustersX", "median types have no X clusters")
    for sym_key in ("expectedEM", "expectedEZ"):
        val = raw.get(sym_key)
        if val is None:
            continue
        if not isinstance(val, str):
            _fail(f"{where}.{sym_key}", "must be a string")
    spec = TypeSpec(
        id=tid, family=family, base=base, components=comps,
        clustersX=raw.get("clustersX", []), clustersZ=raw.get("clustersZ", []),
        residual=raw.get("residual", []), params=params,
        expectedEM=raw["expectedEM"], expectedEZ=raw.get("expectedEZ"), template=tid,
    )
    # catch malformed expressions at load time
    for concrete in expand_parameters(spec):
        try:
            expected_symbol(concrete)
            if concrete.expectedEZ:
                expected_ez_graph(concrete)
        except (ExprError, ValueError) as exc:
            _fail(f"{where}.expectedEM", str(exc))
    return spec


def load_catalog_file(path: Path | str) -> list[TypeSpec]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise CatalogError(f"{path}: empty catalog file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CatalogError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise CatalogError(f"{path}: top level must be an object")
    for key in ("version", "family", "types"):
        if key not in doc:
            raise CatalogError(f"{path}: missing field {key!r}")
    if doc["version"] != SCHEMA_VERSION:
        raise CatalogError(f"{path}.version: unsupported version {doc['version']!r}")
    if doc["family"] not in FAMILIES:
        raise CatalogError(f"{path}.family: unknown family {doc['family']!r}")
    if not isinstance(doc["types"], list):
        raise CatalogError(f"{path}.types: must be a list")
    return [_check_type(t, f"{path.name}.types[{i}]", doc["family"]) for i, t in enumerate(doc["types"])]


def load_catalog(path: Path | str | None = None) -> list[TypeSpec]:
    path = default_catalog_dir() if path is None else Path(path)
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise CatalogError(f"{path}: no catalog files")
    specs: list[TypeSpec] = []
    for f in files:
        specs.extend(load_catalog_file(f))
    seen: dict[str, str] = {}
    for s in specs:
        for c in expand_parameters(s):
            if c.id in seen:
                raise CatalogError(f"duplicate type id {c.id}")
            seen[c.id] = s.family
    return specs


def _concrete_id(template: str, env: dict[str, int]) -> str:
    def sub_group(m):
        inner = m.group(2)
        parts = [str(env[x.strip()]) if x.strip() in env else x for x in inner.split(",")]
        return m.group(1) + ",".join(parts) + m.group(3)

    out = re.sub(r"(⟨)([^⟩]*)(⟩)", sub_group, template)
    out = re.sub(r"(\()([^()]*)(\))$", sub_group, out)
    return out


def expand_parameters(t: TypeSpec) -> list[TypeSpec]:
    if not t.params:
        return [t]
    out = []
    for combo in itertools.product(*(g.domain for g in t.params)):
        env = dict(t.values)
        for g, tup in zip(t.params, combo):
            env.update(zip(g.names, tup))
        out.append(replace(t, id=_concrete_id(t.template, env), values=env))
    return out


def expand_all(specs: list[TypeSpec]) -> list[TypeSpec]:
    return [c for s in specs for c in expand_parameters(s)]


def family_counts(specs: list[TypeSpec]) -> dict[str, int]:
    counts = {f: 0 for f in FAMILIES}
    for s in specs:
        counts[s.family] += len(expand_parameters(s))
    return counts


def find_type(specs: list[TypeSpec], type_id: str) -> list[TypeSpec]:
    """Concrete types whose id, template id or ASCII alias equals type_id."""
    want = ascii_alias(type_id)
    out = []
    for s in specs:
        conc = expand_parameters(s)
        if ascii_alias(s.template) == want:
            out.extend(conc)
            continue
        out.extend(c for c in conc if ascii_alias(c.id) == want)
    return out


def expected_symbol(t: TypeSpec) -> SingSymbol:
    return parse_symbol(t.expectedEM, t.values)


def expected_ez_graph(t: TypeSpec) -> WeightedDualGraph | None:
    if not t.expectedEZ:
        return None
    return graph_from_pattern(t.expectedEZ, t.values)


# realization

def _branch_vec(spec, env) -> list[int] | int:
    if isinstance(spec, list):
        return [eval_int(x, env) for x in spec]
    return eval_int(spec, env)


def _curve_ref(cid: str, env) -> str:
    # chain references may carry a parameter index, as in G:P:b
    head, sep, idx = cid.rpartition(":")
    if sep and head.split(":")[0] in ("G", "Γ") and not idx.isdigit():
        return f"{head}:{eval_int(idx, env)}"
    return cid


def concrete_clusters(raw_list: list[dict], stage: str, env: dict[str, int]) -> list[ClusterSpec]:
    out = []
    for raw in raw_list:
        count = eval_int(raw.get("count", 1), env)
        branch = {_curve_ref(k, env): _branch_vec(v, env) for k, v in raw.get("branch", {}).items()}
        if "length" in raw:
            length = eval_int(raw["length"], env)
        else:
            length = max((len(v) if isinstance(v, list) else v for v in branch.values()), default=0)
        if count <= 0 or length <= 0:
            continue
        for i in range(count):
            cid = raw["id"] if count == 1 and not raw.get("numbered") else f"{raw['id']}{i + 1}"
            at = raw.get("at")
            if isinstance(at, list):
                at = [_curve_ref(x, env) for x in at]
            out.append(ClusterSpec.build(cid, stage, length, branch, at=at, avoid=raw.get("avoid", ())))
    return out


def concrete_points(t: TypeSpec, complete: bool = True) -> list[Point]:
    """Declared residual points, then transverse points for whatever is left.

    Curves whose meeting is not described meet transversally at distinct
    nominal points, so each unaccounted unit of intersection becomes its own
    point "a|b#i".
    """
    pts = []
    for i, r in enumerate(t.residual):
        a, b = r["curves"]
        mult = eval_int(r.get("mult", 1), t.values)
        count = eval_int(r.get("count", 1), t.values)
        if mult <= 0 or count <= 0:
            continue
        pid = r.get("id", f"R{i + 1}")
        for j in range(count):
            pts.append(Point(pid if count == 1 else f"{pid}{j + 1}", (a, b), mult))
    if not complete:
        return pts
    curves = t.curves()
    for i, ca in enumerate(curves):
        for cb in curves[i + 1:]:
            have = sum(p.mult for p in pts if set(p.curves) == {ca.id, cb.id})
            for j in range(intersection(ca.cls, cb.cls) - have):
                pts.append(Point(f"{ca.id}|{cb.id}#{have + j + 1}", (ca.id, cb.id), 1))
    return pts


@dataclass
class Realization:
    spec: TypeSpec
    tower: Tower
    coeffs: dict[str, dict[str, int]]
    E: dict[str, DivClass]
    L: dict[str, DivClass]
    degX: int
    degZ: int

    @property
    def bottom(self) -> str:
        return self.tower.stages[0].name

    def stage(self, name: str):
        return self.tower.stage(name)


def realize(t: TypeSpec, strict: bool = True) -> Realization:
    if not t.is_concrete:
        raise RealizationError(f"{t.id}: parameters not bound")
    env = t.values
    curves = t.curves()
    xs = concrete_clusters(t.clustersX, "X", env)
    zs = concrete_clusters(t.clustersZ, "Z", env)
    stages = ("X", "Z", "M") if t.is_tetrad else ("Z", "M")
    tower = eliminate(t.base, xs + zs, curves, concrete_points(t), stages)
    bottom = tower.stages[0]
    coeffs = {bottom.name: {c.id: c.coefficient for c in curves}}
    E = {bottom.name: divisor_class(coeffs[bottom.name], bottom)}
    L = {bottom.name: -3 * bottom.canonical() - E[bottom.name]}
    if t.is_tetrad:
        E["Z"], coeffs["Z"] = transform_with_s(coeffs["X"], tower, "Z", 1, strict=strict)
        L["Z"] = L["X"] - 2 * relative_canonical(tower, "Z")
    E["M"], coeffs["M"] = transform_with_s(coeffs["Z"], tower, "M", 2, strict=strict)
    L["M"] = L["Z"] - relative_canonical(tower, "M")
    return Realization(t, tower, coeffs, E, L, sum(c.length for c in xs), sum(c.length for c in zs))


def canonical_at(r: Realization, stage: str) -> DivClass:
    return canonical_class(r.tower.base, r.stage(stage).exc_ids)
