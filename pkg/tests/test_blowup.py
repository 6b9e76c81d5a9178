import pytest

from delpezzo3.blowup import (
    BlowupError,
    ClusterSpec,
    NegativeCoefficientError,
    Point,
    chain_coefficients,
    eliminate,
    point_multiplicity,
    relative_canonical,
    strict_transform,
    transform_with_s,
)
from delpezzo3.lattice import (
    DivClass,
    F,
    P2,
    SymbolicCurve,
    canonical_class,
    intersection,
    line,
    self_intersection,
)


def chain_tower(k, stage="Z"):
    c = ClusterSpec.build("P", stage, k, {})
    stages = ("X", "Z", "M") if stage == "X" else None
    return eliminate(P2(), [c], stages=stages), c


def test_single_blowup_gives_minus_one_curve():
    t, c = chain_tower(1)
    M = t.stage("M")
    g = M.cls("Γ:P:1")
    assert self_intersection(g) == -1
    assert relative_canonical(t, "M") == g


def test_chain_of_three():
    t, c = chain_tower(3)
    M = t.stage("M")
    gs = [M.cls(g) for g in c.gamma_ids()]
    assert [self_intersection(g) for g in gs] == [-2, -2, -1]
    krel = relative_canonical(t, "M")
    # K_rel = G1 + 2 G2 + 3 G3
    assert krel == gs[0] + 2 * gs[1] + 3 * gs[2]


def test_chain_of_two_relative_canonical():
    t, c = chain_tower(2)
    M = t.stage("M")
    g1, g2 = (M.cls(g) for g in c.gamma_ids())
    krel = relative_canonical(t, "M")
    assert krel == DivClass.exceptional(P2(), "e:P:1") + DivClass.exceptional(P2(), "e:P:2")
    assert krel == g1 + 2 * g2


def test_two_chains_relative_canonical():
    a = ClusterSpec.build("A", "Z", 1, {})
    b = ClusterSpec.build("B", "Z", 3, {})
    t = eliminate(P2(), [a, b])
    M = t.stage("M")
    krel = relative_canonical(t, "M")
    expect = M.cls("Γ:A:1") + M.cls("Γ:B:1") + 2 * M.cls("Γ:B:2") + 3 * M.cls("Γ:B:3")
    assert krel == expect


def test_empty_stage_has_zero_relative_canonical():
    S = F(2)
    t = eliminate(S, [], stages=("X", "Z", "M"))
    assert relative_canonical(t, "Z") == DivClass.zero(S)


def test_canonical_class_of_tower():
    t, c = chain_tower(4)
    k = t.stage("M").canonical()
    assert k == canonical_class(P2(), c.exc_ids())
    assert self_intersection(k) == 9 - 4


def test_strict_transform_missing_every_cluster():
    S = P2()
    l = SymbolicCurve("l", line(S))
    c = ClusterSpec.build("P", "Z", 2, {})
    t = eliminate(S, [c], [l])
    assert strict_transform(l, t) == line(S)


def test_conic_through_ten_points():
    S = P2()
    conic = SymbolicCurve("C", 2 * line(S), coefficient=2)
    cl = [ClusterSpec.build(f"g{i}", "Z", 1, {"C": 1}) for i in range(10)]
    t = eliminate(S, cl, [conic])
    assert self_intersection(strict_transform(conic, t)) == 4 - 10


def one_k_tower():
    # E_X = 2l with a length-4 chain whose first two points lie on l,
    # then three simple points of l at the Z stage
    S = P2()
    l = SymbolicCurve("l", line(S), coefficient=2)
    p = ClusterSpec.build("P", "X", 4, {"l": 2})
    qs = [ClusterSpec.build(f"Q{i}", "Z", 1, {"l": 1}) for i in range(3)]
    return eliminate(S, [p] + qs, [l]), p


def test_one_k_chain_coefficients():
    t, p = one_k_tower()
    assert p.branch("l") == (1, 1, 0, 0)
    assert chain_coefficients({"l": 2}, p, 1) == [1, 2, 1, 0]
    cls, coeffs = transform_with_s({"l": 2}, t, "Z", 1)
    assert coeffs == {"l": 2, "Γ:P:1": 1, "Γ:P:2": 2, "Γ:P:3": 1}
    # the class is the pullback minus K_rel
    assert cls == 2 * line(P2()) - relative_canonical(t, "Z")


def test_one_k_strict_transform_of_line():
    t, _ = one_k_tower()
    assert self_intersection(strict_transform("l", t, "M")) == 1 - 2 - 3


def test_transform_class_matches_coefficients():
    t, _ = one_k_tower()
    cls, coeffs = transform_with_s({"l": 2}, t, "Z", 1)
    Z = t.stage("Z")
    acc = DivClass.zero(P2())
    for cid, k in coeffs.items():
        acc = acc + k * Z.cls(cid)
    assert acc == cls


def test_point_multiplicity_weights_branches():
    c = ClusterSpec.build("Q", "Z", 2, {"a": 1, "b": [1, 1]})
    assert point_multiplicity({"a": 2, "b": 3}, c, 1) == 5
    assert point_multiplicity({"a": 2, "b": 3}, c, 2) == 3
    assert chain_coefficients({"a": 2, "b": 3}, c, 2) == [3, 4]


def test_first_chain_coefficient_identities():
    # coeff of the first chain curve is mult - s
    c = ClusterSpec.build("Q", "Z", 3, {"a": [1, 1, 1], "b": [1]})
    for s in (1, 2):
        coeffs = {"a": 2, "b": 1}
        assert chain_coefficients(coeffs, c, s)[0] == point_multiplicity(coeffs, c, 1) - s


def test_curve_missing_cluster_gives_negative_coefficients():
    S = P2()
    l = SymbolicCurve("l", line(S))
    c = ClusterSpec.build("P", "Z", 2, {})
    t = eliminate(S, [c], [l])
    assert chain_coefficients({"l": 1}, c, 2) == [-2, -4]
    with pytest.raises(NegativeCoefficientError):
        transform_with_s({"l": 1}, t, "M", 2)
    _, coeffs = transform_with_s({"l": 1}, t, "M", 2, strict=False)
    assert coeffs["Γ:P:2"] == -4


def test_zero_coefficients_are_dropped():
    t, _ = one_k_tower()
    _, coeffs = transform_with_s({"l": 2}, t, "Z", 1)
    assert "Γ:P:4" not in coeffs


def test_intersections_of_chain_and_curve():
    t, p = one_k_tower()
    Z = t.stage("Z")
    lz = Z.cls("l")
    assert [intersection(lz, Z.cls(g)) for g in p.gamma_ids()] == [0, 1, 0, 0]
    assert len(Z.points_between("l", "Γ:P:2")) == 1


def test_unknown_curve_is_an_error():
    S = P2()
    l = SymbolicCurve("l", line(S))
    with pytest.raises(BlowupError, match="unknown curve"):
        eliminate(S, [ClusterSpec.build("P", "Z", 2, {"zz": 1})], [l])


def test_shared_point_is_an_error():
    S = P2()
    l = SymbolicCurve("l", line(S))
    a = ClusterSpec.build("P", "Z", 2, {"l": 1}, at="Q")
    b = ClusterSpec.build("R", "Z", 1, {"l": 1}, at="Q")
    with pytest.raises(BlowupError, match="share"):
        eliminate(S, [a, b], [l], [Point("Q", ("l", "l"))])


def test_branch_longer_than_chain():
    with pytest.raises(BlowupError):
        ClusterSpec.build("P", "Z", 2, {"l": 3})
    with pytest.raises(BlowupError):
        ClusterSpec.build("P", "Z", 1, {"l": [1, 1]})


def test_stage_validation():
    with pytest.raises(BlowupError):
        ClusterSpec.build("P", "M", 1, {})
    with pytest.raises(BlowupError):
        ClusterSpec.build("P", "Z", 0, {})
    with pytest.raises(BlowupError):
        eliminate(P2(), [ClusterSpec.build("P", "X", 1, {})], stages=("Z", "M"))


def test_x_stage_tower_has_three_stages():
    t, c = chain_tower(2, stage="X")
    assert [s.name for s in t.stages] == ["X", "Z", "M"]
    assert t.step_into("Z")[2] == (c,)
    assert t.step_into("M")[2] == ()
