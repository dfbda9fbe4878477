import pytest
from hypothesis import given, strategies as st

from stringtop.exact_linalg import GF, QQ, ZZ, Matrix, smith_normal_form
from stringtop.graded_algebra import (AlgebraError, BasisElement, DegreeOverflow, GradedAlgebra,
                                      GradedModuleTable, InvariantViolation, NotPoincareDuality,
                                      RegradeShift, TorsionKunneth, intersection_from_cup,
                                      multiply, polynomial_algebra, regrade, sign, tensor,
                                      truncated_polynomial_cup)
from stringtop import catalog


def exterior_odd(label="x", degree=-3):
    return GradedAlgebra("L", [BasisElement("1", 0), BasisElement(label, degree)],
                         {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}, 0, ZZ)


def test_sign():
    assert sign(0) == 1 and sign(3) == -1 and sign(-6) == 1


def test_odd_generator_squares_to_zero_in_tensor():
    T = tensor(exterior_odd(), polynomial_algebra([("u", 2)], 8), max_degree=8)
    assert multiply(T, "x|1", "x|1") == {}


def test_even_koszul_sign():
    T = tensor(exterior_odd(), polynomial_algebra([("u", 2)], 8), max_degree=8)
    assert T.format(multiply(T, "1|u", "x|1")) == "x|u"


def test_koszul_sign_odd_odd():
    A = exterior_odd("x", 1)
    B = exterior_odd("y", 1)
    T = tensor(A, B)
    assert T.format(multiply(T, "1|y", "x|1")) == "-x|y"
    assert T.format(multiply(T, "x|1", "1|y")) == "x|y"


def test_s3_squared_degree_minus_three():
    H = catalog.sphere_intersection(3)
    T = tensor(H, H)
    assert sorted(T.basis[i].label for i in T.in_degree(-3)) == ["[S3]|pt", "pt|[S3]"]


def test_torsion_kunneth_raises():
    Z2 = GradedAlgebra("Z2", [BasisElement("1", 0), BasisElement("t", 1, 2)],
                       {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}}, 0, ZZ,
                       max_degree=4, commutative=False)
    with pytest.raises(TorsionKunneth):
        tensor(Z2, Z2, max_degree=4)


def test_intersection_from_cup_sphere():
    H = intersection_from_cup(truncated_polynomial_cup([("s", 3, 2)]), 3, manifold="S3")
    assert [(b.label, b.degree) for b in H.basis] == [("[S3]", 0), ("pt", -3)]
    assert multiply(H, "[S3]", "[S3]") == {0: 1}
    assert H.format(multiply(H, "[S3]", "pt")) == "pt"
    assert multiply(H, "pt", "pt") == {}


def test_intersection_from_cup_s3xs3():
    cup = truncated_polynomial_cup([("s", 3, 2), ("t", 3, 2)])
    H = intersection_from_cup(cup, 6)
    by_deg = {}
    for b in H.basis:
        by_deg.setdefault(b.degree, []).append(b.label)
    assert {d: len(v) for d, v in by_deg.items()} == {0: 1, -3: 2, -6: 1}


def test_not_poincare_duality():
    cup = truncated_polynomial_cup([("s", 2, 2)])
    with pytest.raises(NotPoincareDuality):
        intersection_from_cup(cup, 3)
    bad = GradedAlgebra("bad", [BasisElement("1", 0), BasisElement("s", 2)],
                        {(0, 0): {0: 2}, (0, 1): {1: 1}, (1, 0): {1: 1}}, None, ZZ, check=False)
    with pytest.raises(NotPoincareDuality):
        intersection_from_cup(bad, 2)


def test_polynomial_product_and_overflow():
    P = polynomial_algebra([("u", 2)], 6)
    assert P.format(multiply(P, "u", "u")) == "u^2"
    assert P.basis[P.index["u^2"]].degree == 4
    with pytest.raises(DegreeOverflow):
        multiply(P, "u^2", "u^2")


def test_pt_times_pt_u_is_zero():
    H = catalog.sphere_intersection(3)
    T = tensor(H, polynomial_algebra([("u", 2)], 8), max_degree=8)
    assert multiply(T, "pt|1", "pt|u") == {}


def test_unit_check():
    with pytest.raises(InvariantViolation):
        GradedAlgebra("A", [BasisElement("1", 0), BasisElement("x", 2)],
                      {(0, 0): {0: 1}, (0, 1): {1: 1}}, 0, ZZ)


def test_torsion_generators():
    A = polynomial_algebra([("a", 10), ("b", 4, 2)], 24)
    assert A.basis[A.index["b^2"]].order == 2
    assert A.basis[A.index["a"]].order == 0
    assert A.basis[A.index["a*b"] if "a*b" in A.index else A.index["b*a"]].order == 2


gens = st.lists(st.tuples(st.sampled_from("xyz"), st.integers(1, 5)), min_size=1, max_size=3,
                unique_by=lambda g: g[0])


@given(gens, st.integers(4, 14), st.sampled_from([ZZ, QQ, GF(3), GF(5)]))
def test_polynomial_algebra_invariants(gs, N, ring):
    A = polynomial_algebra(gs, N, ring)
    A.validate()
    for i, j in A.pairs_in_range():
        x, y = {i: 1}, {j: 1}
        s = sign(A.basis[i].degree * A.basis[j].degree)
        assert A.multiply(x, y) == A._normalize({k: s * c for k, c in A.multiply(y, x).items()})


@given(gens, gens, st.integers(4, 12))
def test_tensor_is_graded_commutative_and_associative(g1, g2, N):
    A = polynomial_algebra(g1, N, name="A")
    B = polynomial_algebra([(l.upper(), d) for l, d in g2], N, name="B")
    T = tensor(A, B, max_degree=N)
    T.validate()
    assert T.is_graded_commutative()


@given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
def test_regrade_composes(a, b, c, d):
    P = polynomial_algebra([("u", 2)], 10)
    t = GradedModuleTable.of(P)
    s1, s2 = RegradeShift(a, b), RegradeShift(c, d)
    assert regrade(regrade(t, s1), s2) == regrade(t, s1 + s2)
    assert regrade(t, RegradeShift()) == t
    r = regrade(P, RegradeShift(a, b))
    assert [x.degree for x in r.basis] == [x.degree - a - b for x in P.basis]
    assert r.table == P.table


def test_regrade_sphere():
    H = GradedModuleTable({0: [("1", 0)], 3: [("[S3]", 0)]}, 3)
    assert sorted(regrade(H, RegradeShift(3, 0)).entries) == [-3, 0]


def test_regrade_negative_rejected():
    with pytest.raises(ValueError):
        RegradeShift(-1, 0)


cups = st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from([1, 2, 3, 4])),
                min_size=1, max_size=3, unique_by=lambda g: g[0])


@given(cups)
def test_intersection_pairing_is_perfect(gs):
    cup = truncated_polynomial_cup([(l, d, 2) for l, d in gs])
    m = sum(d for _, d in gs)
    H = intersection_from_cup(cup, m)
    H.validate()
    assert H.basis[H.unit].degree == 0
    pt = H.point_class()
    assert H.basis[pt].degree == -m
    # for each degree p the pairing H_p x H_{-m-p} -> Z.pt is unimodular
    for p in set(b.degree for b in H.basis):
        lo, hi = H.in_degree(p), H.in_degree(-m - p)
        P = Matrix([[H.multiply({i: 1}, {j: 1}).get(pt, 0) for j in hi] for i in lo])
        assert all(abs(d) == 1 for d in smith_normal_form(P, track=False).diagonal)
        assert len(lo) == len(hi)


def test_catalog_entries_validate():
    for e in catalog.catalog_list(16):
        e.model.intersection.validate()
        e.model.pontryagin.validate()


def test_catalog_contents():
    S3 = catalog.model("S3", 12)
    u = S3.pontryagin.basis[S3.pontryagin.index["u"]]
    assert u.degree == 2 and u.order == 0
    V = catalog.model("V2R7", 24)
    assert V.pontryagin.basis[V.pontryagin.index["a"]].degree == 10
    assert V.pontryagin.basis[V.pontryagin.index["b"]].degree == 4
    assert catalog.FIBRATIONS["V2R7"] == ("S6", "S5")
    pt = catalog.model("pt", 12)
    assert len(pt.intersection.basis) == 1 and len(pt.pontryagin.basis) == 1
    with pytest.raises(catalog.UnknownModel):
        catalog.model("CP2")


def test_ring_must_match():
    with pytest.raises(AlgebraError):
        tensor(polynomial_algebra([("u", 2)], 4), polynomial_algebra([("u", 2)], 4, QQ))
