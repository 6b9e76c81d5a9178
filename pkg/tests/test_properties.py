"""Property tests over random classes, towers and graphs."""
from hypothesis import given, settings
from hypothesis import strategies as st

from delpezzo3.blowup import ClusterSpec, chain_coefficients, eliminate, relative_canonical
from delpezzo3.dualgraph import Edge, Vertex, WeightedDualGraph, canonical_form
from delpezzo3.lattice import (
    DivClass,
    F,
    P2,
    arithmetic_genus,
    canonical_class,
    intersection,
    self_intersection,
)

surfaces = st.one_of(st.just(P2()), st.integers(0, 9).map(F))
small = st.integers(-6, 6)


def base_class(surface, data):
    return DivClass.make(surface, tuple(data.draw(small) for _ in range(surface.rank)))


@given(surfaces, st.data(), st.integers(1, 8))
def test_pullback_invariance(surface, data, nblow):
    a = base_class(surface, data)
    b = base_class(surface, data)
    eids = [f"e{i}" for i in range(nblow)]
    # pullback leaves the base part alone and meets no exceptional curve
    assert intersection(a, b) == intersection(b, a)
    for e in eids:
        assert intersection(a, DivClass.exceptional(surface, e)) == 0


@given(surfaces, st.integers(0, 12))
def test_canonical_square_drops_by_blowups(surface, n):
    k = canonical_class(surface, [f"e{i}" for i in range(n)])
    assert self_intersection(k) == surface.k_squared - n


@given(surfaces, st.data())
def test_genus_is_integral(surface, data):
    c = base_class(surface, data) + DivClass.make(surface, (0,) * surface.rank,
                                                  {"e1": data.draw(small), "e2": data.draw(small)})
    arithmetic_genus(c, ["e1", "e2"])


@given(st.lists(st.integers(1, 6), min_size=1, max_size=4))
def test_relative_canonical_weights(lengths):
    clusters = [ClusterSpec.build(f"P{i}", "Z", k, {}) for i, k in enumerate(lengths)]
    t = eliminate(P2(), clusters)
    M = t.stage("M")
    acc = DivClass.zero(P2())
    for c in clusters:
        for j, g in enumerate(c.gamma_ids(), 1):
            acc = acc + j * M.cls(g)
    assert relative_canonical(t, "M") == acc
    k = M.canonical()
    assert self_intersection(k) == 9 - sum(lengths)


@given(st.integers(1, 6), st.lists(st.integers(0, 2), min_size=1, max_size=6), st.integers(1, 2))
def test_chain_coefficient_recursion(k, raw, s):
    vec = (raw + [0] * k)[:k]
    c = ClusterSpec.build("P", "Z", k, {"a": vec})
    out = chain_coefficients({"a": 3}, c, s)
    prev = 0
    for j, val in enumerate(out, 1):
        assert val - prev == 3 * vec[j - 1] - s
        prev = val


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 7))
    vs = [Vertex(f"v{i}", draw(st.integers(-6, 1)), draw(st.integers(1, 2))) for i in range(n)]
    es = []
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                es.append(Edge(vs[i].id, vs[j].id, tuple(sorted(draw(st.lists(st.integers(1, 2), min_size=1, max_size=2))))))
    return WeightedDualGraph(vs, es)


@settings(max_examples=150)
@given(graphs(), st.randoms(use_true_random=False))
def test_canonical_form_relabel_invariant(g, rnd):
    ids = [v.id for v in g.vertices]
    new = [f"w{i}" for i in range(len(ids))]
    rnd.shuffle(new)
    h = g.relabeled(dict(zip(ids, new)))
    h = WeightedDualGraph(list(reversed(h.vertices)), list(reversed(h.edges)))
    assert canonical_form(h) == canonical_form(g)


@settings(max_examples=150)
@given(graphs(), st.integers(0, 6))
def test_canonical_form_sees_selfint_changes(g, idx):
    v = g.vertices[idx % len(g.vertices)]
    changed = [Vertex(x.id, x.selfint - 1, x.weight) if x.id == v.id else x for x in g.vertices]
    assert canonical_form(WeightedDualGraph(changed, g.edges)) != canonical_form(g)
