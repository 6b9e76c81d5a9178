import pytest

from delpezzo3.lattice import (
    DivClass,
    F,
    LatticeError,
    P2,
    SymbolicCurve,
    arithmetic_genus,
    canonical_class,
    intersection,
    is_nef_on_base,
    line,
    self_intersection,
    sigma,
    sigma_inf,
)


def gram_pairing(surface, a, b, eids):
    # independent oracle: explicit Gram matrix on the ordered basis
    if surface.kind == "P2":
        gram = [[1]]
    else:
        gram = [[-surface.n, 1], [1, 0]]
    r = len(gram)
    size = r + len(eids)
    full = [[0] * size for _ in range(size)]
    for i in range(r):
        for j in range(r):
            full[i][j] = gram[i][j]
    for i in range(r, size):
        full[i][i] = -1

    def vec(c):
        return list(c.base) + [c.coeff(e) for e in eids]

    va, vb = vec(a), vec(b)
    return sum(va[i] * full[i][j] * vb[j] for i in range(size) for j in range(size))


def test_line_squared_on_plane():
    assert self_intersection(line(P2())) == 1


def test_sigma_inf_disjoint_from_sigma():
    for n in range(0, 8):
        S = F(n)
        assert intersection(sigma_inf(S), sigma(S)) == 0
        assert self_intersection(sigma(S)) == -n
        assert self_intersection(sigma_inf(S)) == n


def test_line_minus_exceptional():
    S = P2()
    c = line(S) - DivClass.exceptional(S, "e1")
    assert self_intersection(c) == 0


def test_canonical_class_examples():
    assert canonical_class(P2()) == DivClass.make(P2(), -3)
    assert canonical_class(F(3)) == DivClass.make(F(3), (-2, -5))
    k = canonical_class(P2(), ["e1"])
    assert str(k) == "-3l +1e1"
    assert self_intersection(k) == 8


def test_nef_examples():
    assert is_nef_on_base(DivClass.make(P2(), 4))
    assert not is_nef_on_base(DivClass.make(P2(), -1))
    c = DivClass.make(F(2), (2, 3))
    assert intersection(sigma(F(2)), c) == -1
    assert not is_nef_on_base(c)
    # type [3;2,0]: E = 2 sigma, so L = -3K - E = 4 sigma + 15 l on F_3
    S = F(3)
    L = -3 * canonical_class(S) - 2 * sigma(S)
    assert L == DivClass.make(S, (4, 15))
    two_k_plus_l = 2 * canonical_class(S) + L
    assert two_k_plus_l == 5 * line(S)
    assert is_nef_on_base(two_k_plus_l)


def test_nef_rejects_exceptional_part():
    c = line(P2()) - DivClass.exceptional(P2(), "e1")
    with pytest.raises(LatticeError):
        is_nef_on_base(c)


def test_arithmetic_genus_examples():
    S = P2()
    assert arithmetic_genus(2 * line(S)) == 0
    assert arithmetic_genus(3 * line(S)) == 1
    assert arithmetic_genus(line(S)) == 0
    for n in range(6):
        assert arithmetic_genus(sigma(F(n))) == 0
        assert arithmetic_genus(line(F(n))) == 0


def test_genus_of_blown_up_cubic():
    # the strict transform of a cubic through its node loses the genus
    S = P2()
    c = 3 * line(S) - 2 * DivClass.exceptional(S, "e1")
    assert arithmetic_genus(c) == 0


def test_adjunction_parity_always_even():
    # c.(c+K) is even on every class, so the genus is always an integer
    for d in range(-3, 6):
        for m1 in range(-2, 4):
            for m2 in range(-2, 4):
                c = DivClass.make(P2(), d, {"e1": m1, "e2": m2})
                k = canonical_class(P2(), ["e1", "e2"])
                assert (intersection(c, c) + intersection(c, k)) % 2 == 0
                arithmetic_genus(c, ["e1", "e2"])


def test_surface_validation():
    with pytest.raises(LatticeError):
        F(-1)
    with pytest.raises(LatticeError):
        DivClass(P2(), (1, 2))
    with pytest.raises(LatticeError):
        intersection(line(P2()), line(F(1)))
    with pytest.raises(LatticeError):
        sigma(P2())


def test_arithmetic_is_linear():
    S = F(2)
    a = DivClass.make(S, (1, 3), {"e1": 1})
    b = DivClass.make(S, (2, -1), {"e1": -2, "e2": 1})
    assert (a + b) - b == a
    assert 3 * a == a + a + a
    assert (a - a) == DivClass.zero(S)
    assert intersection(a, b) == gram_pairing(S, a, b, ["e1", "e2"])


def test_symbolic_curve_kind():
    c = SymbolicCurve("C", 3 * line(P2()), "nodal-rational", 1)
    assert c.singular
    with pytest.raises(LatticeError):
        SymbolicCurve("C", line(P2()), "elliptic")
