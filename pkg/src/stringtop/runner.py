"""Dispatch a JobSpec to the engine and collect a Report."""
from __future__ import annotations

import re

from . import catalog
from .chain_verifier import (corpus, is_isomorphism, product_bundle,
                             thom_isomorphism_check, verify_filtration_shift)
from .exact_linalg import get_ring
from .graded_algebra import (RegradeShift, intersection_from_cup, polynomial_algebra,
                             truncated_polynomial_cup)
from .jobspec import (JobSpec, ValidationError, parse_simplices, parse_values,
                      parse_vertex_map)
from .report import Report
from .spectral_engine import (DifferentialPin, FibrationSpec, associated_graded, init_e2,
                              run_to_einfty)
from .string_products import (LoopAlgebraModel, build_diamond_table, check_theorem_c,
                              diagonal_morphism, intersection_morphism, loop_e2_product,
                              path_spec, projection_remark, restricted_product_spec)

EVEN_SPHERE_NOTE = (
    "note: three closed forms circulate for the nonzero degrees of im(I) on "
    "S^{2n}: k = 2ni, k = 2i(2n-1) and k = 2i(n-1); they disagree with each other, "
    "so only the computed degrees below are asserted")


def run_job(job: JobSpec, ring: str | None = None, max_degree: int | None = None) -> Report:
    if ring:
        job.job["ring"] = ring
    if max_degree is not None:
        job.job["max_degree"] = str(max_degree)
    rep = Report(job.name, job.kind)
    handler = {
        "cjy": _run_cjy,
        "path-diamond": _run_path,
        "string": _run_string,
        "restricted": _run_restricted,
        "chain-verify": _run_chains,
    }[job.kind]
    handler(job, rep)
    return rep


# ---------------------------------------------------------------------------
# helpers


def _ring(job: JobSpec):
    try:
        return get_ring(job.ring)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def _model(job: JobSpec, N: int, ring, label: str | None = None) -> LoopAlgebraModel:
    if label is None and job.model:
        m = job.model
        name = m.get("name", "M")
        cup = truncated_polynomial_cup(m["cup"], ring)
        H = intersection_from_cup(cup, m["dim"], name=f"HH({name})", manifold=name)
        P = polynomial_algebra(m["gen"], N, ring, name=f"H(O{name})")
        return LoopAlgebraModel(name, m["dim"], H, P)
    try:
        return catalog.model(label or job.job["catalog"], N, ring)
    except catalog.UnknownModel as exc:
        raise ValidationError(f"unknown catalog model {exc}") from None


def _pins(job: JobSpec, section: str, page) -> list:
    labels = {e.label for e in page.elements}
    out = []
    for p in job.pins.get(section, []):
        src, tgt = job.expand(p.source), job.expand(p.target)
        for lab in list(src) + list(tgt):
            if lab not in labels:
                raise ValidationError(f"line {p.line}: pin references unknown class '{lab}'")
        out.append(DifferentialPin(p.r, src, tgt))
    return out


def _default_mode(job: JobSpec, fallback: str) -> str:
    return job.job.get("default_pins", fallback)


def _page_tables(rep: Report, run, stem: str, title: str):
    for page in run.pages:
        t = rep.table(f"{title} E^{page.r}", ["p", "q", "total", "group", "classes", f"d_{page.r}"])
        for row in page.rows():
            diffs = []
            for i in page.entries[(row["p"], row["q"])]:
                img = page.d.get(i, {}) if page.d else {}
                if img:
                    diffs.append(f"{page.label(i)} -> {page.format(img)}")
            t.add(row["p"], row["q"], row["total"], row["group"], ", ".join(row["labels"]),
                  "; ".join(diffs) or "0")
        rep.figures.append((f"{stem}-E{page.r}", page))


def _assoc_tables(rep: Report, ag, title: str, products: bool = False):
    t = rep.table(f"{title} associated graded", ["degree", "layers", "flags"])
    for d in sorted(ag.layers):
        layers = "; ".join(f"({p},{q}) {g}: {', '.join(labs)}" for p, q, g, labs in ag.layers[d])
        t.add(d, layers, ", ".join(ag.flags.get(d, [])) or "-")
    if products:
        A = ag.algebra
        pt = rep.table(f"{title} products", ["x", "y", "x o y"])
        for i in range(len(A.basis)):
            for j in range(len(A.basis)):
                if A.in_range(A.basis[i].degree + A.basis[j].degree):
                    pt.add(A.basis[i].label, A.basis[j].label, A.format(A.table.get((i, j), {})))


def _image_table(rep: Report, img, title: str = "im(I)"):
    t = rep.table(title, ["degree", "H_k(loops)", "image", "onto", "classes"])
    for row in img.rows():
        t.add(row["degree"], row["fiber"], row["image"], row["onto"], ", ".join(row["labels"]))


def _surjectivity_block(rep: Report, model, run):
    tc = check_theorem_c(model, run)
    rep.text("surjectivity of I versus collapse", tc.lines())
    return tc


# ---------------------------------------------------------------------------
# kinds


def _run_cjy(job: JobSpec, rep: Report):
    ring, N = _ring(job), job.max_degree
    model = _model(job, N, ring)
    spec, e2 = loop_e2_product(model, N)
    run = run_to_einfty(spec, _pins(job, "pins", e2), _default_mode(job, "none"))
    rep.text("summary", [f"model {model.manifold} (dim {model.dim}) over {ring.name}, truncation {N}",
                         f"collapsed at page {run.collapsed_at}",
                         f"pages with nonzero differentials: {run.nonzero_pages or 'none'}"])
    _page_tables(rep, run, f"{rep.job}-cjy", "CJY")
    ag = associated_graded(run.einfty)
    _assoc_tables(rep, ag, "CJY")
    img = intersection_morphism(model, run)
    _image_table(rep, img)
    nz = img.nonzero_degrees()
    lines = [f"im(I) nonzero in degrees: {nz}",
             f"I onto through degree {N}: {img.onto()}"]
    mt = re.match(r"^S(\d+)$", model.manifold)
    if mt and int(mt.group(1)) % 2 == 0:
        lines.append(EVEN_SPHERE_NOTE)
        step = 2 * (int(mt.group(1)) - 1)
        expected = list(range(0, N + 1, step))
        lines.append(f"arithmetic progression of the even fiber generator (step {step}): {expected}")
        lines.append(f"matches computed degrees: {nz == expected}")
    rep.text("intersection morphism", lines)
    _surjectivity_block(rep, model, run)


def _run_path(job: JobSpec, rep: Report):
    ring, N = _ring(job), job.max_degree
    model = _model(job, N, catalog.ZZ)
    D = build_diamond_table(model, catalog.DIAMOND_NAMES, ring)
    order = job.job.get("order", "").split() or None
    grid = D.grid(order)
    t = rep.table("diamond product", grid[0])
    for row in grid[1:]:
        t.add(*row)
    A = D.algebra
    rep.text("diamond product properties", [
        "associative on all basis triples: yes",
        "two-sided unit: " + (A.format(D.unit) if D.unit else "none"),
        "non-commuting pair: " + (" <> ".join(D.noncommuting) if D.noncommuting else "none"),
    ])
    spec = path_spec(model, N, catalog.DIAMOND_NAMES, ring)
    e2 = init_e2(spec)
    run = run_to_einfty(spec, _pins(job, "pins", e2), _default_mode(job, "none"))
    rep.text("summary", [f"path fibration of {model.manifold} over {ring.name}, truncation {N}",
                         f"collapsed at page {run.collapsed_at}",
                         f"E-infinity certified through total degree {N - 1}"])
    _page_tables(rep, run, f"{rep.job}-path", "path")
    ag = associated_graded(run.einfty)
    _assoc_tables(rep, ag, "path", products=True)
    if job.job.get("diagonal", "no") == "yes":
        lmodel = model.with_ring(ring)
        lrun = run_to_einfty(loop_e2_product(lmodel, N)[0], [], "generators")
        mor = diagonal_morphism(lmodel, run, lrun, D)
        rep.text("diagonal morphism to the loop spectral sequence", [
            f"bidegree (-{model.dim}, 0)",
            f"commutes with differentials on every page: {not mor.failures}",
            f"multiplicative: {mor.multiplicative}",
        ] + [f"failure: page {r} at {bd}: {msg}" for r, bd, msg in mor.failures])


def _alg_from_einfty(ag, tag: str):
    mapping = {b.label: b.label.replace("|", ".") for b in ag.algebra.basis}
    return ag.algebra.relabeled(mapping, name=tag)


def _run_string(job: JobSpec, rep: Report):
    ring, N = _ring(job), job.max_degree
    label = job.job.get("catalog")
    if label not in catalog.FIBRATIONS:
        raise ValidationError(f"string jobs need a catalog fibration ({', '.join(catalog.FIBRATIONS)})")
    fib_base, fib_fiber = catalog.FIBRATIONS[label]
    stages = {}
    for stage, name, section in (("base", fib_base, "base-pins"), ("fiber", fib_fiber, "fiber-pins")):
        m = _model(job, N, ring, name)
        spec, e2 = loop_e2_product(m, N)
        run = run_to_einfty(spec, _pins(job, section, e2), "generators")
        stages[stage] = (m, run, associated_graded(run.einfty))
        rep.text(f"loop spectral sequence of {name}", [
            f"collapsed at page {run.collapsed_at}",
            f"pages with nonzero differentials: {run.nonzero_pages or 'none'}"])
        _assoc_tables(rep, stages[stage][2], f"L{name}")
    mb, _, agb = stages["base"]
    mf, _, agf = stages["fiber"]
    B = _alg_from_einfty(agb, f"E_inf(L{fib_base})")
    F = _alg_from_einfty(agf, f"E_inf(L{fib_fiber})")
    B.max_degree = F.max_degree = N
    sspec = FibrationSpec(B, F, RegradeShift(mb.dim, mf.dim), ring, N, f"string {label}",
                          tor_classes=True)
    se2 = init_e2(sspec)
    srun = run_to_einfty(sspec, _pins(job, "string-pins", se2), _default_mode(job, "generators"))
    sag = associated_graded(srun.einfty)
    rep.text("string spectral sequence", [
        f"fibration {fib_fiber} -> {label} -> {fib_base}, shift ({mb.dim},{mf.dim}), truncation {N}",
        f"collapsed at page {srun.collapsed_at}",
        f"pages with nonzero differentials: {srun.nonzero_pages or 'none'}",
        f"ExtensionAmbiguous in total degrees: {sag.ambiguous_degrees() or 'none'}"])
    _assoc_tables(rep, sag, "string")
    rep.figures.append((f"{rep.job}-string-Einf", srun.einfty))
    # the loop spectral sequence of the total space and the intersection morphism
    mx = _model(job, N, ring, label)
    xspec, xe2 = loop_e2_product(mx, N)
    xrun = run_to_einfty(xspec, _pins(job, "total-pins", xe2), "generators")
    rep.text(f"loop spectral sequence of {label}", [
        f"collapsed at page {xrun.collapsed_at}",
        f"pages with nonzero differentials: {xrun.nonzero_pages or 'none'}"])
    img = intersection_morphism(mx, xrun)
    _image_table(rep, img)
    gens = [f"{b.label} (degree {b.degree}" + (f", order {b.order})" if b.order else ")")
            for b in mx.pontryagin.basis if mx.pontryagin.index[b.label] in mx.pontryagin.generators]
    rep.text("intersection morphism", [
        f"I onto through degree {N}: {img.onto()}",
        f"im(I) = H_*(loops on {label}) generated by: " + ", ".join(gens) if img.onto() else
        "im(I) is a proper subgroup",
    ])
    _surjectivity_block(rep, mx, xrun)


def _run_restricted(job: JobSpec, rep: Report):
    ring, N = _ring(job), job.max_degree
    label = job.job.get("catalog", "")
    mt = re.match(r"^S(\d+)xS(\d+)$", label)
    if not mt:
        raise ValidationError("restricted jobs need a product catalog label S<a>xS<b>")
    a, b = int(mt.group(1)), int(mt.group(2))
    Nm, Um = catalog.sphere(a, N, ring), catalog.sphere(b, N, ring)
    M = _model(job, N, ring)
    H = M.intersection
    hN, hU = Nm.intersection, Um.intersection
    nb = len(hU.basis)
    cut = H.index[f"{hN.basis[hN.unit].label}x{hU.basis[Um.point].label}"]
    i_shriek = {}
    for z in range(len(H.basis)):
        img = {}
        for k, c in H.basis_product(z, cut).items():
            ka, _ = divmod(k, nb)
            img[ka] = img.get(ka, 0) + c
        i_shriek[z] = img
    spec = restricted_product_spec(M, hN, i_shriek, a, N, Nm.manifold)
    e2 = init_e2(spec)
    run = run_to_einfty(spec, _pins(job, "pins", e2), _default_mode(job, "generators"))
    rep.text("summary", [f"loops of {label} based on {Nm.manifold}, truncation {N}",
                         f"collapsed at page {run.collapsed_at}",
                         f"subalgebra i_!(HH_*(M)) (x) H_*(loops) spanned by {len(spec.subalgebra)} classes"])
    _page_tables(rep, run, f"{rep.job}-restricted", "restricted")
    _assoc_tables(rep, associated_graded(run.einfty), "restricted")
    mism = projection_remark(Nm, Um, N)
    rep.text("projection check: p_* o i_! against the projection onto the first factor", [
        f"mismatches: {len(mism)}"] + [f"mismatch at {z}: {l} vs {r}" for z, l, r in mism])
    if mism:
        rep.fail("projection check failed")


def _run_chains(job: JobSpec, rep: Report):
    models = []
    ring = _ring(job) if "ring" in job.job else None
    try:
        models += corpus(job.simplicial or [], ring) if job.simplicial else []
    except KeyError as exc:
        raise ValidationError(str(exc)) from None
    for name, b in job.bundles.items():
        models.append(product_bundle(
            name, parse_simplices(b["base"]), parse_simplices(b["fiber"]), b["embed"],
            parse_simplices(b["tube"]), parse_simplices(b["boundary"]), parse_values(b["thom"]),
            parse_vertex_map(b["retract"]), ring or get_ring("Z")))
    t = rep.table("filtration shift", ["model", "ring", "simplices", "nonzero images", "k_B", "k_X",
                                      "min drop", "boundary sign", "Thom iso", "result"])
    for d in models:
        r = verify_filtration_shift(d)
        th = thom_isomorphism_check(d)
        thom_ok = all(is_isomorphism(M, d.ring) for M in th.values())
        ok = r.passed and thom_ok
        t.add(d.name, d.ring.name, r.checked, r.nonzero, d.k_B, d.k_X, r.min_drop,
              r.chain_map_sign, thom_ok, "pass" if ok else "FAIL")
        if not ok:
            rep.fail(f"{d.name}: " + "; ".join(r.lines()[1:]) if not r.passed else f"{d.name}: Thom map not invertible")
