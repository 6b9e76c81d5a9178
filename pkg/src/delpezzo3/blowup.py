"""Eliminations of (nu1) clusters: blowup towers, chain curves and twisted transforms.

A tower is a sequence of stages.  Each stage knows the classes of every
tracked curve (strict transforms of the base curves plus the chain
curves Gamma created so far) and the intersection points between them.
Points carry a local intersection multiplicity so that tangencies and
their partial resolution can be followed through the blowups.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .lattice import (
    BaseSurface,
    DivClass,
    SymbolicCurve,
    arithmetic_genus,
    canonical_class,
    intersection,
)


class BlowupError(ValueError):
    """Cluster data that cannot be realized as an elimination."""


class NegativeCoefficientError(BlowupError):
    pass


def exc_id(cluster: str, j: int) -> str:
    return f"e:{cluster}:{j}"


def gamma_id(cluster: str, j: int) -> str:
    return f"Γ:{cluster}:{j}"


def normalize_curve_id(cid: str) -> str:
    # ASCII spelling G:P:1 for Γ:P:1
    if cid.startswith("G:"):
        return "Γ" + cid[1:]
    return cid


@dataclass(frozen=True)
class ChainPoint:
    index: int
    branch: tuple[tuple[str, int], ...] = ()

    def mult(self, curve: str) -> int:
        for k, v in self.branch:
            if k == curve:
                return v
        return 0


@dataclass(frozen=True)
class ClusterSpec:
    id: str
    stage: str
    chain: tuple[ChainPoint, ...]
    at: str | tuple[str, str] | None = None
    avoid: tuple[str, ...] = ()

    def __post_init__(self):
        if self.stage not in ("X", "Z"):
            raise BlowupError(f"cluster {self.id}: stage must be X or Z")
        if not self.chain:
            raise BlowupError(f"cluster {self.id}: empty chain")
        for j, p in enumerate(self.chain, 1):
            if p.index != j:
                raise BlowupError(f"cluster {self.id}: chain indices must run 1..k")

    @classmethod
    def build(cls, id: str, stage: str, length: int, branch: Mapping[str, Sequence[int] | int],
              at=None, avoid: Iterable[str] = ()) -> "ClusterSpec":
        rows = {}
        for curve, spec in branch.items():
            curve = normalize_curve_id(curve)
            if isinstance(spec, int):
                if spec > length:
                    raise BlowupError(f"cluster {id}: {curve} passes {spec} points of a length-{length} chain")
                vec = [1] * spec + [0] * (length - spec)
            else:
                vec = list(spec) + [0] * (length - len(spec))
                if len(vec) > length:
                    raise BlowupError(f"cluster {id}: branch vector of {curve} longer than the chain")
            rows[curve] = vec
        chain = tuple(
            ChainPoint(j + 1, tuple(sorted((c, v[j]) for c, v in rows.items() if v[j])))
            for j in range(length)
        )
        if isinstance(at, list):
            at = tuple(normalize_curve_id(x) for x in at)
        return cls(id, stage, chain, at, tuple(avoid))

    @property
    def length(self) -> int:
        return len(self.chain)

    def branch(self, curve: str) -> tuple[int, ...]:
        return tuple(p.mult(curve) for p in self.chain)

    def curves(self) -> list[str]:
        seen: dict[str, None] = {}
        for p in self.chain:
            for c, _ in p.branch:
                seen[c] = None
        return list(seen)

    def exc_ids(self) -> list[str]:
        return [exc_id(self.id, j) for j in range(1, self.length + 1)]

    def gamma_ids(self) -> list[str]:
        return [gamma_id(self.id, j) for j in range(1, self.length + 1)]


@dataclass(frozen=True)
class Point:
    """An intersection point of two tracked curves (or a node/cusp of one)."""

    id: str
    curves: tuple[str, str]
    mult: int = 1
    kind: str = "meet"
    through: frozenset[str] = frozenset()

    def involves(self, a: str, b: str) -> bool:
        return set(self.curves) == {a, b} and (a != b or self.curves[0] == self.curves[1])


@dataclass(frozen=True)
class StageCurve:
    id: str
    cls: DivClass
    kind: str = "smooth-rational"
    singular: bool = False
    origin: str = "base"
    base_cls: DivClass | None = None


@dataclass
class Stage:
    name: str
    surface: BaseSurface
    exc_ids: tuple[str, ...]
    curves: dict[str, StageCurve]
    points: list[Point]

    def cls(self, cid: str) -> DivClass:
        return self.curves[cid].cls

    def canonical(self) -> DivClass:
        return canonical_class(self.surface, self.exc_ids)

    def points_between(self, a: str, b: str) -> list[Point]:
        return [p for p in self.points if p.involves(a, b)]

    def genus(self, cid: str) -> int:
        return arithmetic_genus(self.curves[cid].cls, self.exc_ids)


@dataclass
class Tower:
    base: BaseSurface
    clusters: tuple[ClusterSpec, ...]
    stages: list[Stage]
    steps: list[tuple[str, str, tuple[ClusterSpec, ...]]] = field(default_factory=list)

    def stage(self, name: str) -> Stage:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)

    @property
    def exc_ids(self) -> tuple[str, ...]:
        return self.stages[-1].exc_ids

    def step_into(self, target: str) -> tuple[Stage, Stage, tuple[ClusterSpec, ...]]:
        for src, dst, cl in self.steps:
            if dst == target:
                return self.stage(src), self.stage(dst), cl
        raise KeyError(target)

    def gammas(self, cluster_id: str, stage: str | None = None) -> list[DivClass]:
        st = self.stages[-1] if stage is None else self.stage(stage)
        for c in self.clusters:
            if c.id == cluster_id:
                return [st.cls(g) for g in c.gamma_ids()]
        raise KeyError(cluster_id)


def base_stage(name: str, surface: BaseSurface, curves: Iterable[SymbolicCurve],
               points: Iterable[Point] = ()) -> Stage:
    tracked: dict[str, StageCurve] = {}
    pts = list(points)
    for c in curves:
        if c.cls.exc:
            raise BlowupError(f"curve {c.id} must be given by a base class")
        if c.id in tracked:
            raise BlowupError(f"duplicate curve id {c.id}")
        tracked[c.id] = StageCurve(c.id, c.cls, c.kind, c.singular, "base", c.cls)
        if c.kind == "nodal-rational":
            pts.append(Point(f"sing:{c.id}", (c.id, c.id), 1, "node"))
        elif c.kind == "cuspidal-rational":
            pts.append(Point(f"sing:{c.id}", (c.id, c.id), 2, "cusp"))
    ids = set()
    for p in pts:
        if p.id in ids:
            raise BlowupError(f"duplicate point id {p.id}")
        ids.add(p.id)
        for c in p.curves:
            if c not in tracked:
                raise BlowupError(f"point {p.id} references unknown curve {c}")
    return Stage(name, surface, (), tracked, pts)


def _resolve_point(stage: Stage, cluster: ClusterSpec, taken: set[str]) -> Point | None:
    at = cluster.at
    if at is None:
        return None
    if isinstance(at, str):
        for p in stage.points:
            if p.id == at:
                if p.id in taken:
                    raise BlowupError(f"two clusters of stage {cluster.stage} share point {at}")
                return p
        raise BlowupError(f"cluster {cluster.id}: unknown point {at}")
    a, b = at
    for c in (a, b):
        if c not in stage.curves:
            raise BlowupError(f"cluster {cluster.id}: unknown curve {c}")
    for p in stage.points:
        if p.involves(a, b) and p.id not in taken:
            return p
    raise BlowupError(f"cluster {cluster.id}: no free intersection point of {a} and {b}")


def _validate(stage: Stage, cluster: ClusterSpec, point: Point | None):
    for c in cluster.curves():
        if c not in stage.curves:
            raise BlowupError(f"cluster {cluster.id}: unknown curve {c}")
        vec = cluster.branch(c)
        if any(x < 0 for x in vec):
            raise BlowupError(f"cluster {cluster.id}: negative multiplicity on {c}")
        if any(vec[i + 1] > vec[i] for i in range(len(vec) - 1)):
            raise BlowupError(f"cluster {cluster.id}: branch of {c} returns to the chain")
        at_sing = point is not None and point.kind in ("node", "cusp") and point.curves[0] == c
        if vec[0] > 2 or (vec[0] == 2 and not at_sing) or any(x > 1 for x in vec[1:]):
            raise BlowupError(f"cluster {cluster.id}: multiplicity of {c} too large for its germ")
    first = {c for c, _ in cluster.chain[0].branch}
    if point is None:
        if len(first) > 1:
            raise BlowupError(f"cluster {cluster.id}: generic point on several curves {sorted(first)}")
        return
    need = set(point.curves)
    missing = need - first
    if missing:
        raise BlowupError(f"cluster {cluster.id}: curves {sorted(missing)} pass the base point but carry no branch")
    if point.kind in ("node", "cusp") and cluster.branch(point.curves[0])[0] != 2:
        raise BlowupError(f"cluster {cluster.id}: a singular point has multiplicity 2")
    extra = first - need - set(point.through)
    if extra:
        raise BlowupError(f"cluster {cluster.id}: curves {sorted(extra)} do not pass point {point.id}")


def blow_up(stage: Stage, clusters: Sequence[ClusterSpec], target: str) -> Stage:
    """Eliminate all clusters of one stage, returning the next stage."""
    surface = stage.surface
    taken: dict[str, ClusterSpec] = {}
    located: dict[str, Point | None] = {}
    seen_ids = set()
    for c in clusters:
        if c.id in seen_ids:
            raise BlowupError(f"duplicate cluster id {c.id}")
        seen_ids.add(c.id)
        p = _resolve_point(stage, c, set(taken))
        _validate(stage, c, p)
        located[c.id] = p
        if p is not None:
            taken[p.id] = c

    exc = list(stage.exc_ids)
    curves: dict[str, StageCurve] = {}
    for cid, sc in stage.curves.items():
        cls = sc.cls
        resolved = False
        for c in clusters:
            for j, m in enumerate(c.branch(cid), 1):
                if m:
                    cls = cls - DivClass.exceptional(surface, exc_id(c.id, j), m)
            p = located[c.id]
            if p is not None and p.kind in ("node", "cusp") and p.curves[0] == cid:
                resolved = True
        curves[cid] = replace(sc, cls=cls, singular=sc.singular and not resolved)

    new_gammas: list[str] = []
    for c in clusters:
        ids = c.exc_ids()
        exc.extend(ids)
        for j in range(c.length):
            cls = DivClass.exceptional(surface, ids[j])
            if j + 1 < c.length:
                cls = cls - DivClass.exceptional(surface, ids[j + 1])
            g = gamma_id(c.id, j + 1)
            if g in curves:
                raise BlowupError(f"curve id clash {g}")
            curves[g] = StageCurve(g, cls, origin="exc")
            new_gammas.append(g)

    points: list[Point] = []
    for p in stage.points:
        c = taken.get(p.id)
        if c is None:
            points.append(p)
            continue
        if p.kind in ("node", "cusp"):
            continue
        a, b = p.curves
        ma, mb = c.branch(a), c.branch(b)
        used = sum(x * y for x, y in zip(ma, mb))
        rest = p.mult - used
        if rest < 0:
            raise BlowupError(
                f"cluster {c.id}: {a} and {b} share more infinitely near points than their contact order {p.mult}")
        if rest:
            last = max(j for j in range(c.length) if ma[j] and mb[j]) + 1
            points.append(replace(p, mult=rest, through=p.through | {gamma_id(c.id, last)}))

    cusp_gamma: dict[tuple[str, str], int] = {}
    for c in clusters:
        p = located[c.id]
        if p is not None and p.kind == "cusp":
            cid = p.curves[0]
            if not any(c.branch(cid)[1:]):
                cusp_gamma[(cid, gamma_id(c.id, 1))] = 2

    order = list(curves)
    done: set[frozenset] = set()
    for g in new_gammas:
        for o in order:
            if o == g or frozenset((g, o)) in done:
                continue
            done.add(frozenset((g, o)))
            val = intersection(curves[g].cls, curves[o].cls)
            if val < 0:
                raise BlowupError(f"distinct curves {g} and {o} meet negatively ({val})")
            if not val:
                continue
            tangent = cusp_gamma.get((o, g))
            if tangent is not None and val == tangent:
                points.append(Point(f"{o}|{g}#1", (o, g), tangent))
                continue
            for i in range(val):
                points.append(Point(f"{o}|{g}#{i + 1}", (o, g), 1))

    return Stage(target, surface, tuple(exc), curves, points)


def eliminate(base: BaseSurface, clusters: Sequence[ClusterSpec], curves: Iterable[SymbolicCurve] = (),
              points: Iterable[Point] = (), stages: Sequence[str] | None = None) -> Tower:
    """Build the tower of eliminations; X clusters first, then Z clusters."""
    xs = tuple(c for c in clusters if c.stage == "X")
    zs = tuple(c for c in clusters if c.stage == "Z")
    if stages is None:
        stages = ("X", "Z", "M") if xs else ("Z", "M")
    first = base_stage(stages[0], base, curves, points)
    tower = Tower(base, tuple(xs) + tuple(zs), [first])
    groups = [xs, zs] if len(stages) == 3 else [zs]
    if len(stages) == 2 and xs:
        raise BlowupError("X clusters need a three-stage tower")
    cur = first
    for name, group in zip(stages[1:], groups):
        nxt = blow_up(cur, group, name)
        tower.stages.append(nxt)
        tower.steps.append((cur.name, name, tuple(group)))
        cur = nxt
    return tower


def relative_canonical(tower: Tower, stage: str) -> DivClass:
    """K of the step ending at `stage` ("Z" or "M"), as sum of its e's."""
    _, dst, cl = tower.step_into(stage)
    acc = DivClass.zero(tower.base)
    for c in cl:
        for e in c.exc_ids():
            acc = acc + DivClass.exceptional(tower.base, e)
    return acc


def strict_transform(curve: SymbolicCurve | str, tower: Tower, stage: str | None = None) -> DivClass:
    cid = curve if isinstance(curve, str) else curve.id
    st = tower.stages[-1] if stage is None else tower.stage(stage)
    return st.cls(cid)


def point_multiplicity(coeffs: Mapping[str, int], cluster: ClusterSpec, j: int) -> int:
    """Coefficient-weighted branch sum of a divisor at the j-th chain point."""
    return sum(coeffs.get(c, 0) * m for c, m in cluster.chain[j - 1].branch)


def chain_coefficients(coeffs: Mapping[str, int], cluster: ClusterSpec, s: int) -> list[int]:
    out, acc = [], 0
    for j in range(1, cluster.length + 1):
        acc += point_multiplicity(coeffs, cluster, j)
        out.append(acc - s * j)
    return out


def transform_with_s(coeffs: Mapping[str, int], tower: Tower, stage: str, s: int,
                     strict: bool = True) -> tuple[DivClass, dict[str, int]]:
    """E^{Delta,s} = pullback(E) - s*K_rel for the step ending at `stage`.

    coeffs maps tracked curve ids of the source stage to coefficients.
    Returns the class and the coefficients on the target stage, with chain
    curves of coefficient zero dropped.
    """
    src, dst, cl = tower.step_into(stage)
    cls = DivClass.zero(tower.base)
    for cid, k in coeffs.items():
        cls = cls + k * src.cls(cid)
    cls = cls - s * relative_canonical(tower, stage)
    out = {cid: k for cid, k in coeffs.items() if k}
    for c in cl:
        for g, val in zip(c.gamma_ids(), chain_coefficients(coeffs, c, s)):
            if val < 0 and strict:
                raise NegativeCoefficientError(f"coefficient of {g} would be {val}")
            if val:
                out[g] = val
    return cls, out


def divisor_class(coeffs: Mapping[str, int], stage: Stage) -> DivClass:
    acc = DivClass.zero(stage.surface)
    for cid, k in coeffs.items():
        acc = acc + k * stage.cls(cid)
    return acc
