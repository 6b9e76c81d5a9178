"""Integer divisor classes on P^2, F_n and their blowups.

A class is stored as a base part plus one coefficient per exceptional
basis vector.  Exceptional basis vectors are total transforms of the
blown-up points, pairwise orthogonal with self-intersection -1, so they
can be keyed by name instead of by position.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

PLANE = "P2"
HIRZEBRUCH = "F"

CURVE_KINDS = ("smooth-rational", "nodal-rational", "cuspidal-rational")


class LatticeError(ValueError):
    """Structural misuse: mixed surfaces, bad preconditions."""


@dataclass(frozen=True)
class BaseSurface:
    kind: str
    n: int | None = None

    def __post_init__(self):
        if self.kind == PLANE:
            if self.n is not None:
                raise LatticeError("P2 takes no n")
        elif self.kind == HIRZEBRUCH:
            if self.n is None or self.n < 0:
                raise LatticeError(f"F_n needs n >= 0, got {self.n!r}")
        else:
            raise LatticeError(f"unknown surface kind {self.kind!r}")

    @property
    def rank(self) -> int:
        return 1 if self.kind == PLANE else 2

    @property
    def k_squared(self) -> int:
        return 9 if self.kind == PLANE else 8

    def __str__(self):
        return "P2" if self.kind == PLANE else f"F{self.n}"


def P2() -> BaseSurface:
    return BaseSurface(PLANE)


def F(n: int) -> BaseSurface:
    return BaseSurface(HIRZEBRUCH, n)


def _clean(exc: Mapping[str, int] | Iterable[tuple[str, int]]) -> tuple[tuple[str, int], ...]:
    items = exc.items() if isinstance(exc, Mapping) else exc
    acc: dict[str, int] = {}
    for k, v in items:
        acc[k] = acc.get(k, 0) + int(v)
    return tuple(sorted((k, v) for k, v in acc.items() if v))


@dataclass(frozen=True)
class DivClass:
    """base is (d,) on P2 and (a, b) meaning a*sigma + b*l on F_n."""

    surface: BaseSurface
    base: tuple[int, ...]
    exc: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if len(self.base) != self.surface.rank:
            raise LatticeError(f"base part {self.base} does not fit {self.surface}")
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        object.__setattr__(self, "exc", _clean(self.exc))

    @classmethod
    def make(cls, surface: BaseSurface, base, exc=()) -> "DivClass":
        if isinstance(base, int):
            base = (base,)
        return cls(surface, tuple(base), _clean(exc))

    @classmethod
    def zero(cls, surface: BaseSurface) -> "DivClass":
        return cls(surface, (0,) * surface.rank)

    @classmethod
    def exceptional(cls, surface: BaseSurface, eid: str, coeff: int = 1) -> "DivClass":
        return cls(surface, (0,) * surface.rank, ((eid, coeff),))

    def coeff(self, eid: str) -> int:
        for k, v in self.exc:
            if k == eid:
                return v
        return 0

    @property
    def exc_dict(self) -> dict[str, int]:
        return dict(self.exc)

    def on_base(self) -> "DivClass":
        return DivClass(self.surface, self.base)

    def is_base(self) -> bool:
        return not self.exc

    def _check(self, other: "DivClass"):
        if not isinstance(other, DivClass):
            return NotImplemented
        if other.surface != self.surface:
            raise LatticeError(f"classes live on different surfaces: {self.surface} vs {other.surface}")
        return None

    def __add__(self, other: "DivClass") -> "DivClass":
        if self._check(other) is NotImplemented:
            return NotImplemented
        base = tuple(x + y for x, y in zip(self.base, other.base))
        return DivClass(self.surface, base, _clean(list(self.exc) + list(other.exc)))

    def __neg__(self) -> "DivClass":
        return DivClass(self.surface, tuple(-x for x in self.base), tuple((k, -v) for k, v in self.exc))

    def __sub__(self, other: "DivClass") -> "DivClass":
        return self + (-other)

    def __mul__(self, k: int) -> "DivClass":
        if not isinstance(k, int):
            return NotImplemented
        return DivClass(self.surface, tuple(k * x for x in self.base), tuple((e, k * v) for e, v in self.exc))

    __rmul__ = __mul__

    def __str__(self):
        if self.surface.kind == PLANE:
            parts = [f"{self.base[0]}l"]
        else:
            a, b = self.base
            parts = [f"{a}s", f"{b}l"]
        parts += [f"{v:+d}{k}" for k, v in self.exc]
        return " ".join(parts)


def total(classes: Iterable[DivClass], surface: BaseSurface) -> DivClass:
    acc = DivClass.zero(surface)
    for c in classes:
        acc = acc + c
    return acc


def intersection(a: DivClass, b: DivClass) -> int:
    if a.surface != b.surface:
        raise LatticeError(f"classes live on different surfaces: {a.surface} vs {b.surface}")
    if a.surface.kind == PLANE:
        val = a.base[0] * b.base[0]
    else:
        n = a.surface.n
        (aa, ab), (ba, bb) = a.base, b.base
        val = aa * bb + ab * ba - n * aa * ba
    if a.exc and b.exc:
        bd = dict(b.exc)
        val -= sum(v * bd.get(k, 0) for k, v in a.exc)
    return val


def self_intersection(a: DivClass) -> int:
    return intersection(a, a)


def canonical_class(surface: BaseSurface, exc_ids: Iterable[str] = ()) -> DivClass:
    if surface.kind == PLANE:
        base = (-3,)
    else:
        base = (-2, -(surface.n + 2))
    return DivClass(surface, base, tuple((e, 1) for e in exc_ids))


def is_nef_on_base(c: DivClass) -> bool:
    if c.exc:
        raise LatticeError("nefness is only decided on the base surface")
    if c.surface.kind == PLANE:
        return c.base[0] >= 0
    a, b = c.base
    return a >= 0 and b - c.surface.n * a >= 0


def arithmetic_genus(c: DivClass, exc_ids: Iterable[str] = ()) -> int:
    """p_a by adjunction; exc_ids are the blowups of the ambient tower."""
    ids = set(exc_ids) | {k for k, _ in c.exc}
    k = canonical_class(c.surface, sorted(ids))
    twice = intersection(c, c) + intersection(c, k)
    if twice % 2:
        raise LatticeError(f"class {c} has non-integral arithmetic genus")
    return twice // 2 + 1


# named base classes
def line(surface: BaseSurface) -> DivClass:
    """l: a line on P2 or a fiber on F_n."""
    return DivClass(surface, (1,) if surface.kind == PLANE else (0, 1))


def sigma(surface: BaseSurface) -> DivClass:
    if surface.kind != HIRZEBRUCH:
        raise LatticeError("sigma only exists on F_n")
    return DivClass(surface, (1, 0))


def sigma_inf(surface: BaseSurface) -> DivClass:
    return DivClass(surface, (1, surface.n))


@dataclass(frozen=True)
class SymbolicCurve:
    id: str
    cls: DivClass
    kind: str = "smooth-rational"
    coefficient: int = 1
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise LatticeError(f"unknown curve kind {self.kind!r}")

    @property
    def singular(self) -> bool:
        return self.kind != "smooth-rational"
