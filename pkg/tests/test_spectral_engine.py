import random

import pytest
from hypothesis import given, settings, strategies as st

from stringtop import catalog
from stringtop.exact_linalg import GF, QQ, ZZ, Matrix
from stringtop.graded_algebra import RegradeShift, trivial_algebra
from stringtop.spectral_engine import (BidegreeMismatch, DeadTarget, DifferentialPin, EngineError,
                                       FibrationSpec, UndeterminedDifferential,
                                       associated_graded, init_e2, pin_differential,
                                       propagate_leibniz, run_to_einfty, shriek_morphism,
                                       turn_page)
from stringtop.string_products import loop_e2_product, path_spec

from _ssmodels import (brute_dim, check_d_squared, check_descent, check_leibniz,
                       consistent_runs)

PATH_PINS = [
    DifferentialPin(3, {"1x[S3]|1": 1, "[S3]x1|1": -1}, "1x1|u"),
    DifferentialPin(3, {"1x[S3]|1": 1, "[S3]x1|1": 1}, 0),
    DifferentialPin(3, {"1x[S3]|u": 1, "[S3]x1|u": 1}, 0),
]


def s3_path(N=12, ring=QQ):
    return path_spec(catalog.model("S3", N), N, catalog.DIAMOND_NAMES, ring)


def test_s3_loop_e2_entries():
    spec, e2 = loop_e2_product(catalog.model("S3", 12), 12)
    expect = {(p, q) for p in (-3, 0) for q in range(0, 13, 2) if p + q <= 12}
    assert set(e2.entries) == expect
    assert all(str(e2.group(p, q)) == "Z" for p, q in expect)


def test_path_e2_columns():
    e2 = init_e2(s3_path())
    assert sorted({p for p, _ in e2.entries}) == [-3, 0, 3]


def test_trivial_fiber_collapses_immediately():
    base = catalog.sphere_intersection(3)
    spec = FibrationSpec(base, trivial_algebra(), RegradeShift(3, 0), ZZ, 6, "S3 over pt")
    run = run_to_einfty(spec, [], "generators")
    assert run.collapsed_at == 2
    assert sorted(e.label for e in run.einfty.elements) == sorted(e.label for e in run.e2.elements)


def test_pin_bidegree_mismatch():
    e2 = init_e2(s3_path())
    # the literal pin d3(b) = (1x1)|1 does not have the bidegree of d3
    with pytest.raises(BidegreeMismatch):
        pin_differential(_page(3), DifferentialPin(3, {"1x[S3]|1": 1, "[S3]x1|1": -1}, "1x1|1"))
    with pytest.raises(BidegreeMismatch):
        pin_differential(e2, DifferentialPin(3, "1x1|1", 0))


def _page(r, N=12):
    page = init_e2(s3_path(N))
    while page.r < r:
        page = turn_page(propagate_leibniz(page))
    return page


def test_zero_pin_leaves_page():
    page = _page(3)
    pinned = pin_differential(page, DifferentialPin(3, "[S3]x[S3]|u", 0))
    assert pinned.elements == page.elements and pinned.products == page.products
    solved = propagate_leibniz(pinned)
    assert solved.apply_d({solved.index("[S3]x[S3]|u"): 1}) == {}


def test_dead_target():
    spec, _ = loop_e2_product(catalog.model("S2", 8), 8)
    page = init_e2(spec)
    page = pin_differential(page, DifferentialPin(2, "[S2]|x", {"pt|x^2": 1}))
    page = turn_page(propagate_leibniz(page))
    assert (-2, 2) not in page.entries
    # pt|x^2 is dead on E3; pinning onto it is rejected
    page3 = page
    with pytest.raises((DeadTarget, BidegreeMismatch)):
        pin_differential(page3, DifferentialPin(3, "[S2]|x^3", {"pt|x^2": 1}))


def test_acyclic_pair_vanishes():
    spec, e2 = loop_e2_product(catalog.model("S2", 8), 8)
    page = propagate_leibniz(pin_differential(e2, DifferentialPin(2, "[S2]|x", {"pt|x^2": 1})))
    nxt = turn_page(page)
    assert (0, 1) not in nxt.entries and (-2, 2) not in nxt.entries


def test_path_d3_is_forced():
    page = _page(3)
    for pin in PATH_PINS:
        page = pin_differential(page, pin)
    page = propagate_leibniz(page)
    assert not page.undetermined
    c = page.index("[S3]x[S3]|1")
    dc = page.apply_d({c: 1})
    assert dc and {page.elements[i].bidegree for i in dc} == {(0, 2)}


def test_all_zero_pins_give_zero_differentials():
    spec, e2 = loop_e2_product(catalog.model("S3", 12), 12)
    run = run_to_einfty(spec, [], "generators")
    assert run.nonzero_pages == [] and run.collapsed_at == 2
    assert set(run.einfty.entries) == set(run.e2.entries)


def test_s3_without_pins_is_undetermined_at_d3():
    spec, _ = loop_e2_product(catalog.model("S3", 12), 12)
    with pytest.raises(UndeterminedDifferential) as err:
        run_to_einfty(spec, [], "none")
    assert "d_3" in str(err.value)


def test_path_run_collapses_at_four():
    run = run_to_einfty(s3_path(), PATH_PINS)
    assert run.collapsed_at == 4 and run.nonzero_pages == [3]
    ag = associated_graded(run.einfty)
    certified = {d: ls for d, ls in ag.layers.items() if d <= ag.certified_through}
    assert sorted(certified) == [-3, 0]
    assert [ls[0][2] for d, ls in sorted(certified.items())] == ["Q", "Q"]
    assert "Uncertified" in ag.flags[12]


def test_single_column_has_no_flags():
    base = catalog.sphere_intersection(3, QQ)
    spec = FibrationSpec(base, trivial_algebra(QQ), RegradeShift(3, 0), QQ, 6, "column")
    ag = associated_graded(run_to_einfty(spec, [], "generators").einfty)
    assert all("ExtensionAmbiguous" not in f for f in ag.flags.values())


def test_stiefel_string_flags_extensions():
    N = 16
    base_run = run_to_einfty(loop_e2_product(catalog.model("S6", N), N)[0],
                             [DifferentialPin(6, "[S6]|x", {"pt|x^2": 2})], "generators")
    fib_run = run_to_einfty(loop_e2_product(catalog.model("S5", N), N)[0], [], "generators")
    B = associated_graded(base_run.einfty).algebra
    F = associated_graded(fib_run.einfty).algebra
    B = B.relabeled({b.label: b.label.replace("|", ".") for b in B.basis})
    F = F.relabeled({b.label: b.label.replace("|", ".") for b in F.basis})
    spec = FibrationSpec(B, F, RegradeShift(6, 5), ZZ, N, "string", tor_classes=True)
    ag = associated_graded(run_to_einfty(spec, [], "generators").einfty)
    assert ag.ambiguous_degrees()


def test_identity_morphism():
    run = run_to_einfty(s3_path(), PATH_PINS)
    n_base = len(run.e2.spec.base.basis)
    n_fib = len(run.e2.spec.fiber.basis)
    mor = shriek_morphism(run, run, Matrix.identity(n_base), Matrix.identity(n_fib),
                          RegradeShift(0, 0))
    assert not mor.failures and mor.is_identity() and mor.multiplicative


def test_regrade_page():
    e2 = init_e2(s3_path())
    moved = e2.regraded(RegradeShift(1, 2))
    assert {(p + 1, q + 2) for p, q in moved.entries} == set(e2.entries)
    assert moved.products == e2.products


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_random_runs_are_sound(seed):
    for _, run, _ in consistent_runs(seed, 1):
        for page, nxt in zip(run.pages, run.pages[1:]):
            check_d_squared(page)
            check_leibniz(page)
            check_descent(page, nxt)


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6))
def test_turn_page_matches_mod5_enumeration(seed):
    rng = random.Random(seed)
    for _, run, _ in consistent_runs(seed, 1, ring=GF(5)):
        for page, nxt in zip(run.pages, run.pages[1:]):
            bds = sorted(page.entries)
            for p, q in rng.sample(bds, min(4, len(bds))):
                src = (p + page.r, q - page.r + 1)
                if len(page.entries[(p, q)]) > 4 or len(page.entries.get(src, [])) > 4:
                    continue
                assert brute_dim(page, p, q, 5) == len(nxt.entries.get((p, q), []))


@settings(max_examples=15)
@given(st.integers(2, 7), st.sampled_from([ZZ, QQ, GF(3)]))
def test_zero_pins_collapse(m, ring):
    spec, _ = loop_e2_product(catalog.model(f"S{m}", 12, ring), 12)
    run = run_to_einfty(spec, [], "generators")
    assert {bd: len(v) for bd, v in run.einfty.entries.items()} == \
        {bd: len(v) for bd, v in run.e2.entries.items()}


def test_constant_loops_row_is_permanent():
    # the section of the loop fibration forbids differentials out of base (x) 1
    spec, e2 = loop_e2_product(catalog.model("S3xS3", 10, GF(5)), 10)
    assert len(e2.section_classes()) == 4
    pin = DifferentialPin(3, "[S3]xpt|1*1", {"ptxpt|1*u": 1, "ptxpt|u*1": 2})
    with pytest.raises(EngineError):
        run_to_einfty(spec, [pin], "generators")
    # the path fibration over M x M has no such section
    assert init_e2(path_spec(catalog.model("S3", 12), 12)).section_classes() == []
