import pytest
from hypothesis import given, settings, strategies as st

from stringtop import catalog
from stringtop.exact_linalg import QQ
from stringtop.graded_algebra import AlgebraError, RegradeShift
from stringtop.spectral_engine import (DifferentialPin, associated_graded, init_e2,
                                       run_to_einfty)
from stringtop.string_products import (EquivalenceViolation,
                                       build_diamond_table, check_theorem_c,
                                       diagonal_morphism, diamond_product,
                                       intersection_morphism, loop_e2_product, mu_a,
                                       path_spec, projection_remark,
                                       restricted_product_spec)

from _ssmodels import consistent_runs

NAMES = catalog.DIAMOND_NAMES


def s3():
    return catalog.model("S3", 12)


def cross(D, label):
    return {D.algebra.index[label]: 1}


def dmul(D, x, y):
    return D.algebra.format(diamond_product(cross(D, x), cross(D, y), s3(), NAMES))


def test_loop_e2_products():
    _, e2 = loop_e2_product(s3(), 12)
    u = e2.index("[S3]|u")
    assert e2.format(e2.product(u, u)) == "[S3]|u^2"
    pt = e2.index("pt|1")
    assert e2.product(pt, pt) == {}
    one = e2.index("[S3]|1")
    for i in range(len(e2.elements)):
        if e2.known_product(one, i):
            assert e2.product(one, i) == {i: 1} == e2.product(i, one)


def test_diamond_examples():
    D = build_diamond_table(s3(), NAMES)
    assert dmul(D, "1x1", "[S3]x1") == "1x1"
    assert dmul(D, "1x[S3]", "[S3]x1") == "0"
    assert dmul(D, "[S3]x[S3]", "1x[S3]") == "[S3]x[S3]"
    assert dmul(D, "1x1", "1x1") == "0"


def test_diamond_formula_entry():
    # (a x b) <> (c x d) = <b . c, pt> a x d with a = b = [S3], c = d = 1
    D = build_diamond_table(s3(), NAMES)
    assert dmul(D, "[S3]x[S3]", "1x1") == "[S3]x1"


def test_diamond_degrees():
    D = build_diamond_table(s3(), NAMES)
    deg = {b.label: b.degree for b in D.algebra.basis}
    assert deg == {"[S3]x[S3]": 3, "[S3]x1": 0, "1x[S3]": 0, "1x1": -3}


def test_diamond_unit_and_noncommutativity():
    D = build_diamond_table(s3(), NAMES)
    A = D.algebra
    assert A.format(D.unit) == "[S3]x1 + 1x[S3]"
    assert D.noncommuting is not None
    x, y = (A.index[l] for l in D.noncommuting)
    assert A.table.get((x, y), {}) != A.table.get((y, x), {})


def test_diamond_unit_matches_printed_table():
    # the printed multiplication table, read off independently of the code
    printed = {
        "1x1": ["0", "1x1", "0", "1x[S3]"],
        "[S3]x1": ["0", "[S3]x1", "0", "[S3]x[S3]"],
        "1x[S3]": ["1x1", "0", "1x[S3]", "0"],
        "[S3]x[S3]": ["1x[S3]", "0", "[S3]x[S3]", "0"],
    }
    cols = ["1x1", "[S3]x1", "1x[S3]", "[S3]x[S3]"]

    def add(a, b):
        terms = sorted(t for t in (a, b) if t != "0")
        return " + ".join(terms) if terms else "0"

    for k, c in enumerate(cols):
        assert add(printed["[S3]x1"][k], printed["1x[S3]"][k]) == c
        assert add(printed[c][1], printed[c][2]) == c


@pytest.mark.parametrize("name", ["S2", "S3", "S4", "S2xS3"])
def test_diamond_associative(name):
    D = build_diamond_table(catalog.model(name, 8), NAMES)
    assert D.associative


def test_intersection_morphism_s3_onto():
    model = catalog.model("S3", 30)
    run = run_to_einfty(loop_e2_product(model, 30)[0], [], "generators")
    img = intersection_morphism(model, run)
    assert img.onto()
    assert img.nonzero_degrees() == list(range(0, 31, 2))


def test_intersection_morphism_point_is_identity():
    model = catalog.point(10)
    run = run_to_einfty(loop_e2_product(model, 10)[0], [], "generators")
    assert intersection_morphism(model, run).onto()
    assert check_theorem_c(model, run).agree


def test_intersection_morphism_s2_rational():
    model = catalog.model("S2", 20, QQ)
    run = run_to_einfty(loop_e2_product(model, 20)[0],
                        [DifferentialPin(2, "[S2]|x", {"pt|x^2": 2})], "generators")
    img = intersection_morphism(model, run)
    assert img.nonzero_degrees() == list(range(0, 21, 2))
    assert not img.onto()


def test_mu_a():
    model = s3()
    run = run_to_einfty(loop_e2_product(model, 12)[0], [], "generators")
    ag = associated_graded(run.einfty)
    einf = run.einfty
    out, _ = mu_a(model, ag, run, "[S3]|1")
    assert einf.format(out) == "pt|1"
    out, _ = mu_a(model, ag, run, "[S3]|u^2")
    assert einf.format(out) == "pt|u^2"
    out, _ = mu_a(model, ag, run, "pt|u")
    assert out == {}


def test_check_theorem_c_sphere_true():
    model = s3()
    rep = check_theorem_c(model, run_to_einfty(loop_e2_product(model, 12)[0], [], "generators"))
    assert (rep.onto, rep.collapse, rep.no_arrivals) == (True, True, True)


def test_check_theorem_c_artificial_pin_all_false():
    model = s3()
    run = run_to_einfty(loop_e2_product(model, 12)[0],
                        [DifferentialPin(3, "[S3]|u", {"pt|u^2": 1})], "generators")
    rep = check_theorem_c(model, run)
    assert (rep.onto, rep.collapse, rep.no_arrivals) == (False, False, False)
    assert rep.witnesses


def test_check_theorem_c_disagreement_is_an_error(monkeypatch):
    import stringtop.string_products as sp

    model = s3()
    run = run_to_einfty(loop_e2_product(model, 12)[0], [], "generators")
    real = sp.intersection_morphism(model, run)
    broken = type(real)(real.degrees, real.truncation, real.certified_through)
    monkeypatch.setattr(broken, "onto", lambda: False)
    monkeypatch.setattr(sp, "intersection_morphism", lambda *a: broken)
    with pytest.raises(EquivalenceViolation):
        sp.check_theorem_c(model, run)


@settings(max_examples=20)
@given(st.integers(0, 10 ** 6))
def test_check_theorem_c_flags_agree_on_random_pins(seed):
    for model, run, _ in consistent_runs(seed, 1):
        rep = check_theorem_c(model, run)
        assert rep.onto == rep.collapse == rep.no_arrivals


def test_restricted_point_is_single_column():
    M = s3()
    pt = catalog.point(12).intersection
    H = M.intersection
    i_shriek = {H.unit: {0: 1}}
    spec = restricted_product_spec(M, pt, i_shriek, 0, 12, "pt")
    e2 = init_e2(spec)
    assert {p for p, _ in e2.entries} == {0}
    u = e2.index("[pt]|u")
    assert e2.format(e2.product(u, u)) == "[pt]|u^2"


def test_restricted_identity_recovers_loop_product():
    M = s3()
    H = M.intersection
    spec = restricted_product_spec(M, H, {i: {i: 1} for i in range(len(H.basis))}, 3, 12, "S3")
    a, b = init_e2(spec), loop_e2_product(M, 12)[1]
    assert [e.label for e in a.elements] == [e.label for e in b.elements]
    assert a.products == b.products


def test_restricted_rejects_non_multiplicative():
    M = s3()
    H = M.intersection
    with pytest.raises(AlgebraError):
        restricted_product_spec(M, H, {H.unit: {H.unit: 2}}, 3, 12)


@pytest.mark.parametrize("a,b", [(3, 3), (2, 3), (3, 2), (2, 2), (5, 3)])
def test_projection_remark(a, b):
    assert projection_remark(catalog.sphere(a, 10), catalog.sphere(b, 10), 10) == []


def test_path_collapse_and_products():
    model = s3()
    pins = [DifferentialPin(3, {"1x[S3]|1": 1, "[S3]x1|1": -1}, "1x1|u"),
            DifferentialPin(3, {"1x[S3]|1": 1, "[S3]x1|1": 1}, 0),
            DifferentialPin(3, {"1x[S3]|u": 1, "[S3]x1|u": 1}, 0)]
    run = run_to_einfty(path_spec(model, 12, NAMES, QQ), pins)
    ag = associated_graded(run.einfty)
    A = ag.algebra
    a = A.index["([S3]x1|1 + 1x[S3]|1)"]
    one = A.index["1x1|1"]
    assert A.multiply({a: 1}, {a: 1}) == {a: 1}
    assert A.multiply({one: 1}, {one: 1}) == {}
    assert A.multiply({one: 1}, {a: 1}) == {one: 1} == A.multiply({a: 1}, {one: 1})
    # the diagonal shriek map commutes with differentials but is not multiplicative
    lmodel = model.with_ring(QQ)
    lrun = run_to_einfty(loop_e2_product(lmodel, 12)[0], [], "generators")
    mor = diagonal_morphism(lmodel, run, lrun, build_diamond_table(model, NAMES, QQ))
    assert not mor.failures and mor.multiplicative is False
    assert mor.shift == RegradeShift(3, 0)
