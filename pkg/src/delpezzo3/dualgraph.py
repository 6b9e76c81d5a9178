"""Weighted dual graphs, canonical forms and the index-three symbol grammar."""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ._expr import eval_int
from .lattice import intersection

MAX_CANONICAL = 32
EMPTY_FORM = "<empty>"

_KIND_CODE = {"smooth-rational": "", "nodal-rational": "n", "cuspidal-rational": "c"}


class GraphError(ValueError):
    pass


class GrammarError(GraphError):
    """A connected graph that matches no template of the index-three list."""


@dataclass(frozen=True)
class Vertex:
    id: str
    selfint: int
    weight: int
    kind: str = ""


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    mults: tuple[int, ...]


@dataclass
class WeightedDualGraph:
    vertices: list[Vertex] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex ids")
        known = set(ids)
        for e in self.edges:
            if e.u not in known or e.v not in known:
                raise GraphError(f"edge {e.u}-{e.v} references an unknown vertex")
            if not e.mults or any(m <= 0 for m in e.mults):
                raise GraphError(f"edge {e.u}-{e.v} needs positive local multiplicities")

    def vertex(self, vid: str) -> Vertex:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def neighbors(self, vid: str) -> list[tuple[str, tuple[int, ...]]]:
        out = []
        for e in self.edges:
            if e.u == vid and e.v != vid:
                out.append((e.v, e.mults))
            elif e.v == vid and e.u != vid:
                out.append((e.u, e.mults))
        return out

    def loops(self, vid: str) -> tuple[int, ...]:
        ms: list[int] = []
        for e in self.edges:
            if e.u == vid and e.v == vid:
                ms.extend(e.mults)
        return tuple(sorted(ms))

    def components(self) -> list["WeightedDualGraph"]:
        parent = {v.id: v.id for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            parent[find(e.u)] = find(e.v)
        groups: dict[str, list[Vertex]] = {}
        for v in self.vertices:
            groups.setdefault(find(v.id), []).append(v)
        out = []
        for vs in groups.values():
            ids = {v.id for v in vs}
            out.append(WeightedDualGraph(vs, [e for e in self.edges if e.u in ids]))
        return out

    def relabeled(self, mapping: Mapping[str, str]) -> "WeightedDualGraph":
        vs = [Vertex(mapping[v.id], v.selfint, v.weight, v.kind) for v in self.vertices]
        es = [Edge(mapping[e.u], mapping[e.v], e.mults) for e in self.edges]
        return WeightedDualGraph(vs, es)


def _merge_edges(edges: Iterable[tuple[str, str, int]]) -> list[Edge]:
    acc: dict[tuple[str, str], list[int]] = {}
    for u, v, m in edges:
        key = (u, v) if u <= v else (v, u)
        acc.setdefault(key, []).append(m)
    return [Edge(u, v, tuple(sorted(ms))) for (u, v), ms in acc.items()]


def build_dual_graph(components, stage, strict: bool = False) -> WeightedDualGraph:
    """Dual graph of a divisor on a tower stage.

    components: mapping id -> coefficient, or iterable of (id, cls, coeff).
    Edges come from the stage's tracked intersection points.  With strict,
    a pair whose points do not add up to its intersection number raises.
    """
    if isinstance(components, Mapping):
        comps = [(cid, stage.cls(cid), k) for cid, k in components.items()]
    else:
        comps = list(components)
    comps = [(cid, cls, k) for cid, cls, k in comps if k]
    for cid, _, k in comps:
        if k < 0:
            raise GraphError(f"component {cid} has negative coefficient {k}")
    ids = [c[0] for c in comps]
    idset = set(ids)
    vertices = []
    for cid, cls, k in comps:
        curve = stage.curves.get(cid)
        kind = ""
        if curve is not None and curve.singular:
            kind = _KIND_CODE[curve.kind]
        vertices.append(Vertex(cid, intersection(cls, cls), k, kind))
    raw = []
    for p in stage.points:
        a, b = p.curves
        if a in idset and b in idset:
            raw.append((a, b, p.mult))
    graph = WeightedDualGraph(vertices, _merge_edges(raw))
    if strict:
        bad = unaccounted(comps, graph)
        if bad:
            a, b, lat, pts = bad[0]
            raise GraphError(f"{a}.{b} = {lat} but tracked points give {pts}")
    return graph


def unaccounted(comps, graph: WeightedDualGraph) -> list[tuple[str, str, int, int]]:
    """Pairs whose edge total differs from the lattice intersection."""
    tot: dict[frozenset, int] = {}
    for e in graph.edges:
        if e.u != e.v:
            tot[frozenset((e.u, e.v))] = sum(e.mults)
    out = []
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            a, ca, _ = comps[i]
            b, cb, _ = comps[j]
            lat = intersection(ca, cb)
            got = tot.get(frozenset((a, b)), 0)
            if lat != got:
                out.append((a, b, lat, got))
    return out


# canonical form

def _vertex_key(g: WeightedDualGraph, v: Vertex):
    return (v.selfint, v.weight, v.kind, g.loops(v.id))


def _rank(keys: list) -> list[int]:
    order = sorted(set(keys))
    pos = {k: i for i, k in enumerate(order)}
    return [pos[k] for k in keys]


def _component_form(g: WeightedDualGraph) -> str:
    vs = g.vertices
    idx = {v.id: i for i, v in enumerate(vs)}
    adj: list[list[tuple[int, tuple[int, ...]]]] = [[] for _ in vs]
    for e in g.edges:
        if e.u == e.v:
            continue
        a, b = idx[e.u], idx[e.v]
        adj[a].append((b, e.mults))
        adj[b].append((a, e.mults))
    base = [_vertex_key(g, v) for v in vs]

    def refine(colors: list[int]) -> list[int]:
        while True:
            keys = [(colors[i], tuple(sorted((m, colors[j]) for j, m in adj[i]))) for i in range(len(vs))]
            new = _rank(keys)
            if len(set(new)) == len(set(colors)):
                return new
            colors = new

    def encode(colors: list[int]) -> tuple:
        order = sorted(range(len(vs)), key=lambda i: colors[i])
        pos = {v: k for k, v in enumerate(order)}
        vt = tuple(base[i] for i in order)
        et = tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b]), m)
                          for a in range(len(vs)) for b, m in adj[a] if a < b))
        return (vt, et)

    def search(colors: list[int]):
        colors = refine(colors)
        if len(set(colors)) == len(colors):
            return encode(colors)
        counts = Counter(colors)
        target = min(c for c, n in counts.items() if n > 1)
        best = None
        for i in range(len(vs)):
            if colors[i] != target:
                continue
            keys = [(2 * c + (0 if j == i or c != target else 1)) for j, c in enumerate(colors)]
            cand = search(_rank(keys))
            if best is None or cand < best:
                best = cand
        return best

    vt, et = search(_rank(base))
    parts = [";".join(f"{s},{w}{k}" + (f"@{list(lp)}" if lp else "") for s, w, k, lp in vt)]
    parts.append(";".join(f"{a}-{b}:{'.'.join(map(str, m))}" for a, b, m in et))
    return "[" + "|".join(parts) + "]"


def canonical_form(g: WeightedDualGraph) -> str:
    if len(g.vertices) > MAX_CANONICAL:
        raise GraphError(f"canonical_form supports at most {MAX_CANONICAL} vertices")
    if not g.vertices:
        return EMPTY_FORM
    return "+".join(sorted(_component_form(c) for c in g.components()))


# symbols

@dataclass(frozen=True, order=True)
class Atom:
    kind: str
    t: int
    weights: tuple[int, ...]

    def __post_init__(self):
        if self.kind == "A":
            w = tuple(sorted(self.weights))
            if self.t == 1 and len(w) == 2 and w[0] == w[1]:
                w = (w[0],)
            if (self.t == 1 and len(w) != 1) or (self.t > 1 and len(w) != 2) or self.t < 1:
                raise GraphError(f"bad A atom {self.t} {self.weights}")
            object.__setattr__(self, "weights", w)
        elif self.kind == "D":
            if self.t < 4 or len(self.weights) != 1:
                raise GraphError(f"bad D atom {self.t} {self.weights}")
        else:
            raise GraphError(f"unknown atom kind {self.kind}")
        if any(x not in (1, 2) for x in self.weights):
            raise GraphError("atom weights are 1 or 2")

    def __str__(self):
        return f"{self.kind}{self.t}({','.join(map(str, self.weights))})"

    def sort_key(self):
        return (0 if self.kind == "D" else 1, -self.t, self.weights)


@dataclass(frozen=True)
class SingSymbol:
    atoms: tuple[tuple[Atom, int], ...] = ()

    @classmethod
    def of(cls, atoms: Iterable[Atom]) -> "SingSymbol":
        cnt = Counter(atoms)
        return cls(tuple(sorted(cnt.items(), key=lambda kv: kv[0].sort_key())))

    def counter(self) -> Counter:
        return Counter(dict(self.atoms))

    def __str__(self):
        if not self.atoms:
            return "0"
        return "+".join((f"{n}" if n > 1 else "") + str(a) for a, n in self.atoms)

    def __len__(self):
        return sum(n for _, n in self.atoms)


_SUB = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")
_ATOM_RE = re.compile(r"(\d*)\s*([AD])_?(\d+|\{[^}]*\})\s*\(([^)]*)\)")


def _split_top(expr: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in expr:
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append(cur)
            cur = ""
        else:
            cur += ch
    out.append(cur)
    return [p.strip() for p in out if p.strip()]


def parse_symbol(expr: str, env: Mapping[str, int] | None = None) -> SingSymbol:
    """Parse "A_{s+4}(1,1)+2A1(1)"-style symbols, evaluating index expressions."""
    text = expr.translate(_SUB).replace("\\g", "").replace("$", "").replace(" ", "")
    text = re.sub(r"s\(c,d\)", "s", text)
    if text in ("", "0"):
        return SingSymbol()
    atoms: list[Atom] = []
    for part in _split_top(text):
        m = _ATOM_RE.fullmatch(part)
        if not m:
            raise GraphError(f"malformed symbol term {part!r} in {expr!r}")
        count = int(m.group(1)) if m.group(1) else 1
        idx = m.group(3)
        t = eval_int(idx[1:-1] if idx.startswith("{") else idx, env)
        ws = tuple(eval_int(w, env) for w in m.group(4).split(","))
        atoms.extend([Atom(m.group(2), t, ws)] * count)
    return SingSymbol.of(atoms)


def _expected_selfint(weight: int, nbr_weights: int) -> int | None:
    num = 6 - nbr_weights
    den = 3 - weight
    if den <= 0 or num % den:
        return None
    return -(num // den)


def classify_component(g: WeightedDualGraph) -> Atom:
    n = len(g.vertices)
    if n == 0:
        raise GrammarError("empty graph")
    if len(g.components()) != 1:
        raise GrammarError("graph is not connected")
    for v in g.vertices:
        if v.kind:
            raise GrammarError(f"{v.id} is singular")
        if v.weight not in (1, 2):
            raise GrammarError(f"{v.id} has weight {v.weight}")
        if g.loops(v.id):
            raise GrammarError(f"{v.id} has a self-intersection point")
    for e in g.edges:
        if e.mults != (1,):
            raise GrammarError(f"edge {e.u}-{e.v} is not a single transverse point")
    if len(g.edges) != n - 1:
        raise GrammarError("graph is not a tree")
    deg = {v.id: len(g.neighbors(v.id)) for v in g.vertices}
    for v in g.vertices:
        nw = sum(g.vertex(u).weight for u, _ in g.neighbors(v.id))
        if _expected_selfint(v.weight, nw) != v.selfint:
            raise GrammarError(f"{v.id}: ({v.selfint}, {v.weight}) breaks the index-three balance")
    if n == 1:
        return Atom("A", 1, (g.vertices[0].weight,))
    forks = [v for v in g.vertices if deg[v.id] >= 3]
    if not forks:
        ends = [v for v in g.vertices if deg[v.id] == 1]
        inner = [v for v in g.vertices if deg[v.id] == 2]
        if any(v.weight != 2 for v in inner):
            raise GrammarError("interior of a chain must carry weight 2")
        return Atom("A", n, (ends[0].weight, ends[1].weight))
    if len(forks) > 1 or deg[forks[0].id] != 3:
        raise GrammarError("more than one fork or a vertex of degree > 3")
    fork = forks[0]
    if fork.weight != 2:
        raise GrammarError("the fork carries weight 2")
    arms = []
    for u, _ in g.neighbors(fork.id):
        arm, prev, cur = [u], fork.id, u
        while deg[cur] == 2:
            nxt = [w for w, _ in g.neighbors(cur) if w != prev][0]
            prev, cur = cur, nxt
            arm.append(cur)
        arms.append(arm)
    short = [a for a in arms if len(a) == 1 and g.vertex(a[0]).weight == 1]
    if len(short) < 2:
        raise GrammarError("a fork needs two leaves of weight 1")
    arms.sort(key=lambda a: (len(a) != 1 or g.vertex(a[0]).weight != 1, len(a)))
    long_arm = arms[2]
    if any(g.vertex(x).weight != 2 for x in long_arm[:-1]):
        raise GrammarError("interior of the long arm must carry weight 2")
    return Atom("D", n, (g.vertex(long_arm[-1]).weight,))


def classify_symbol_sum(g: WeightedDualGraph) -> SingSymbol:
    return SingSymbol.of(classify_component(c) for c in g.components())


# exports

def to_dot(g: WeightedDualGraph, name: str = "G") -> str:
    safe = name.replace('"', "'")
    lines = [f'graph "{safe}" {{']
    for v in g.vertices:
        extra = {"n": " nodal", "c": " cuspidal"}.get(v.kind, "")
        lines.append(f'  "{v.id}" [label="{v.id}\\n({v.selfint}, {v.weight}){extra}"];')
    for e in sorted(g.edges, key=lambda e: (e.u, e.v)):
        for m in e.mults:
            lab = f' [label="{m}"]' if m > 1 else ""
            lines.append(f'  "{e.u}" -- "{e.v}"{lab};')
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dict(g: WeightedDualGraph) -> dict:
    return {
        "vertices": [{"id": v.id, "selfint": v.selfint, "weight": v.weight, "kind": v.kind} for v in g.vertices],
        "edges": [{"u": e.u, "v": e.v, "mults": list(e.mults)} for e in sorted(g.edges, key=lambda e: (e.u, e.v))],
    }


def to_json(g: WeightedDualGraph) -> str:
    return json.dumps(to_dict(g), ensure_ascii=False, indent=2)


# expected-graph patterns
#
# Statements separated by ';'.  Each statement is a walk of vertex tokens
# joined by connectors, all separated by spaces:
#   name:S/W        define vertex with self-intersection S and weight W
#   name:S/W!n      nodal (!c cuspidal); the singular point is a loop
#   name:S/W*{e}    a run of e vertices chained in order
#   name            reuse a defined vertex; for a run, its last vertex,
#                   or the vertex before an empty run
#   -   one transverse point;  =   two transverse points;  -[m]-  contact m

_VTX_RE = re.compile(r"^([A-Za-z_][\w]*)(?::(-?\d+)/(\d+)(!n|!c)?(?:\*\{([^}]*)\})?)?$")
_CONN_RE = re.compile(r"^(-|=|-\[(\d+)\]-)$")


def graph_from_pattern(pattern: str, env: Mapping[str, int] | None = None) -> WeightedDualGraph:
    vertices: list[Vertex] = []
    edges: list[tuple[str, str, int]] = []
    runs: dict[str, list[str]] = {}
    anchor: dict[str, str | None] = {}

    def endpoint(name: str, first: bool) -> str | None:
        members = runs[name]
        if members:
            return members[0] if first else members[-1]
        return anchor[name] if not first else None

    for stmt in pattern.split(";"):
        toks = stmt.split()
        if not toks:
            continue
        prev: str | None = None
        pending: list[int] | None = None
        for i, tok in enumerate(toks):
            if i % 2 == 1:
                m = _CONN_RE.match(tok)
                if not m:
                    raise GraphError(f"bad connector {tok!r} in pattern")
                pending = [1, 1] if tok == "=" else [int(m.group(2))] if m.group(2) else [1]
                continue
            m = _VTX_RE.match(tok)
            if not m:
                raise GraphError(f"bad vertex token {tok!r} in pattern")
            name, s, w, mod, count = m.groups()
            if s is not None:
                if name in runs:
                    raise GraphError(f"vertex {name} defined twice")
                kind = {"!n": "n", "!c": "c", None: ""}[mod]
                n = eval_int(count, env) if count is not None else None
                if n is None:
                    runs[name] = [name]
                    vertices.append(Vertex(name, int(s), int(w), kind))
                    if kind:
                        edges.append((name, name, 1 if kind == "n" else 2))
                else:
                    if n < 0:
                        raise GraphError(f"run {name} has negative length")
                    ids = [f"{name}.{k}" for k in range(1, n + 1)]
                    runs[name] = ids
                    vertices.extend(Vertex(x, int(s), int(w), kind) for x in ids)
                    edges.extend((ids[k], ids[k + 1], 1) for k in range(n - 1))
                anchor[name] = prev
            elif name not in runs:
                raise GraphError(f"vertex {name} used before definition")
            head = endpoint(name, s is not None)
            if pending is not None and prev is not None:
                if head is not None:
                    edges.extend((prev, head, mm) for mm in pending)
                    pending = None
            if runs[name]:
                prev = runs[name][-1]
                pending = None
            elif s is None:
                prev = endpoint(name, False)
    return WeightedDualGraph(vertices, _merge_edges(edges))
