"""
Loop, path and restricted products built on the spectral engine.

The models here are E2-level: an intersection algebra for the base, a
Pontryagin algebra for the loop-space fiber, and the spectral sequence that
the engine runs on them.  Everything about the loop homology itself is read
off the E-infinity page, with extension problems left flagged.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .exact_linalg import Ring, group_str
from .graded_algebra import (BasisElement, GradedAlgebra, RegradeShift, AlgebraError, tensor)
from .spectral_engine import (AssociatedGraded, EngineError, FibrationSpec,
                              NotACycle, RunResult, SSMorphism, init_e2, shriek_morphism)


class AssociativityFailure(EngineError):
    pass


class EquivalenceViolation(EngineError):
    pass


# ---------------------------------------------------------------------------
# loop algebra models


@dataclass
class LoopAlgebraModel:
    """E2 data of the free loop fibration of an m-manifold M."""

    manifold: str
    dim: int
    intersection: GradedAlgebra
    pontryagin: GradedAlgebra
    tor_classes: bool = False

    def __post_init__(self):
        H = self.intersection
        if H.unit is None or H.basis[H.unit].degree != 0:
            raise AlgebraError(f"[{self.manifold}] must be a unit in degree 0")
        if self.pontryagin.unit is None or self.pontryagin.basis[self.pontryagin.unit].degree != 0:
            raise AlgebraError("Pontryagin algebra needs a unit in degree 0")
        if self.point is None:
            raise AlgebraError(f"no point class in degree {-self.dim}")

    @property
    def ring(self) -> Ring:
        return self.intersection.ring

    @property
    def point(self) -> int | None:
        free = [i for i, b in enumerate(self.intersection.basis)
                if b.degree == -self.dim and not b.order]
        return free[0] if len(free) == 1 else None

    @property
    def fundamental(self) -> int:
        return self.intersection.unit

    def label(self, base: int, fiber: int) -> str:
        return f"{self.intersection.basis[base].label}|{self.pontryagin.basis[fiber].label}"

    @property
    def point_label(self) -> str:
        return self.label(self.point, self.pontryagin.unit)

    def with_ring(self, ring: Ring) -> "LoopAlgebraModel":
        return LoopAlgebraModel(self.manifold, self.dim, self.intersection.with_ring(ring),
                                self.pontryagin.with_ring(ring), self.tor_classes)


def loop_e2_product(model: LoopAlgebraModel, truncation: int, ring: Ring | None = None):
    """FibrationSpec of the loop fibration and its E2 page (product = tensor product)."""
    ring = ring or model.ring
    spec = FibrationSpec(model.intersection, model.pontryagin, RegradeShift(model.dim, 0),
                         ring, truncation, f"L{model.manifold}", tor_classes=model.tor_classes,
                         base_section=True)  # constant loops
    return spec, init_e2(spec)


# ---------------------------------------------------------------------------
# the diamond product


@dataclass
class DiamondAlgebra:
    """H_{*+m}(M x M) on cross-product classes with the diamond product."""

    manifold: str
    dim: int
    algebra: GradedAlgebra
    pairs: list  # cross basis index -> (left index, right index) in the intersection algebra
    unit: dict | None
    noncommuting: tuple | None
    associative: bool

    def label(self, i: int) -> str:
        return self.algebra.basis[i].label

    def grid(self, order: Sequence[str] | None = None) -> list[list[str]]:
        """Multiplication table: header row then one row per left factor."""
        A = self.algebra
        labels = list(order) if order else [b.label for b in A.basis]
        for lab in labels:
            if lab not in A.index:
                raise KeyError(f"unknown basis label {lab!r}")
        idx = [A.index[lab] for lab in labels]
        out = [["<>"] + labels]
        for i in idx:
            out.append([A.basis[i].label] + [A.format(A.table.get((i, j), {})) for j in idx])
        return out

    def render_grid(self, order: Sequence[str] | None = None, sep: str = " | ") -> str:
        return "\n".join(sep.join(row) for row in self.grid(order)) + "\n"


def _cross_basis(H: GradedAlgebra, m: int, names: Mapping[str, str]):
    basis, pairs = [], []
    for i, a in enumerate(H.basis):
        for j, b in enumerate(H.basis):
            la, lb = names.get(a.label, a.label), names.get(b.label, b.label)
            # H_{*+m}(MxM): intersection degrees |a| + |b| shifted up by m
            basis.append(BasisElement(f"{la}x{lb}", a.degree + b.degree + m,
                                      a.order or b.order))
            pairs.append((i, j))
    return basis, pairs


def diamond_product(x, y, model: LoopAlgebraModel, names: Mapping[str, str] | None = None) -> dict:
    """(a x b) <> (c x d) = (coefficient of the point class in b.c) * (a x d).

    x and y are {cross basis index: coeff} on the basis of _cross_basis (left
    index * n + right index), or labels such as "1x[S3]".
    """
    H = model.intersection
    names = dict(names or {})
    basis, pairs = _cross_basis(H, model.dim, names)
    index = {b.label: k for k, b in enumerate(basis)}
    x = {index[x]: 1} if isinstance(x, str) else x
    y = {index[y]: 1} if isinstance(y, str) else y
    pos = {pr: k for k, pr in enumerate(pairs)}
    pt = model.point
    out = {}
    for s, cs in x.items():
        a, b = pairs[s]
        for t, ct in y.items():
            c, d = pairs[t]
            if H.basis[b].degree + H.basis[c].degree < -model.dim:
                continue
            coeff = H.basis_product(b, c).get(pt, 0)
            if coeff:
                k = pos[(a, d)]
                out[k] = out.get(k, 0) + cs * ct * coeff
    return {k: c for k, c in out.items() if c}


def build_diamond_table(model: LoopAlgebraModel, names: Mapping[str, str] | None = None,
                        ring: Ring | None = None) -> DiamondAlgebra:
    """Full diamond table, with associativity checked and unit/commutativity reported."""
    H = model.intersection if ring is None else model.intersection.with_ring(ring)
    if ring is not None:
        model = LoopAlgebraModel(model.manifold, model.dim, H, model.pontryagin.with_ring(ring))
    names = dict(names or {})
    basis, pairs = _cross_basis(H, model.dim, names)
    n = len(basis)
    table = {}
    for s in range(n):
        for t in range(n):
            v = diamond_product({s: 1}, {t: 1}, model, names)
            if v:
                table[(s, t)] = v
    A = GradedAlgebra(f"<>({model.manifold}x{model.manifold})", basis, table, None, H.ring,
                      None, None, commutative=False, check=False)
    for s in range(n):
        for t in range(n):
            for u in range(n):
                lhs = A.multiply(A.multiply({s: 1}, {t: 1}), {u: 1})
                rhs = A.multiply({s: 1}, A.multiply({t: 1}, {u: 1}))
                if lhs != rhs:
                    raise AssociativityFailure(
                        f"({basis[s].label} <> {basis[t].label}) <> {basis[u].label} differs")
    noncomm = None
    for s in range(n):
        for t in range(s + 1, n):
            if A.table.get((s, t), {}) != A.table.get((t, s), {}):
                noncomm = (basis[s].label, basis[t].label)
                break
        if noncomm:
            break
    return DiamondAlgebra(model.manifold, model.dim, A, pairs, _find_unit(A), noncomm, True)


def _find_unit(A: GradedAlgebra) -> dict | None:
    """A two-sided unit in degree 0 if one exists (solved exactly, not guessed)."""
    from .exact_linalg import Matrix, NoSolution, solve_system

    zero = [i for i, b in enumerate(A.basis) if b.degree == 0]
    n = len(A.basis)
    rows, rhs = [], []
    for x in range(n):
        for side in (0, 1):
            for k in range(n):
                row = []
                for e in zero:
                    prod = A.table.get((e, x) if side == 0 else (x, e), {})
                    row.append(prod.get(k, 0))
                rows.append(row)
                rhs.append(int(k == x))
    if not zero:
        return None
    sol = solve_system(Matrix(rows, len(zero)), rhs, A.ring)
    if sol is NoSolution:
        return None
    return {e: c for e, c in zip(zero, sol.particular) if c}


def path_spec(model: LoopAlgebraModel, truncation: int, names: Mapping[str, str] | None = None,
              ring: Ring | None = None) -> FibrationSpec:
    """Spectral sequence of the path fibration over M x M with the diamond product."""
    ring = ring or model.ring
    D = build_diamond_table(model, names, ring)
    return FibrationSpec(D.algebra, model.pontryagin.with_ring(ring), RegradeShift(model.dim, 0),
                         ring, truncation, f"{model.manifold}^I")


# ---------------------------------------------------------------------------
# the intersection morphism


@dataclass
class ImageOfI:
    """im(I) degree by degree, as a subgroup of the fiber column of E2."""

    degrees: dict  # k -> dict(fiber=str, image=str, onto=bool, labels=list)
    truncation: int
    certified_through: int

    def onto(self, through: int | None = None) -> bool:
        top = self.truncation if through is None else through
        return all(v["onto"] for k, v in self.degrees.items() if k <= top)

    def nonzero_degrees(self) -> list[int]:
        return sorted(k for k, v in self.degrees.items() if v["image"] != "0")

    def rows(self) -> list[dict]:
        return [dict(degree=k, **v) for k, v in sorted(self.degrees.items())]


def intersection_morphism(model: LoopAlgebraModel, run: RunResult) -> ImageOfI:
    """im(I) = permanent cycles of the fundamental-class column of E2.

    That column only emits differentials, so E-infinity there is the
    subgroup of E2 classes that survive every page.
    """
    e2, einf = run.e2, run.einfty
    ring = e2.ring
    N = e2.truncation
    degrees = {}
    for q in range(0, N + 1):
        idxs = e2.entries.get((0, q), [])
        fiber_orders = [e2.elements[i].order for i in idxs]
        fin = einf.entries.get((0, q), [])
        img_orders = [einf.elements[i].order for i in fin]
        onto = True
        for i in idxs:
            try:
                einf.from_e2({i: 1})
            except NotACycle:
                onto = False
                break
        degrees[q] = {
            "fiber": group_str(fiber_orders, ring),
            "image": group_str(img_orders, ring),
            "onto": onto,
            "labels": [einf.label(i).split("|", 1)[-1] if "|" in einf.label(i) else einf.label(i)
                       for i in fin],
        }
    return ImageOfI(degrees, N, N - 1)


def mu_a(model: LoopAlgebraModel, ag: AssociatedGraded, run: RunResult, x) -> tuple:
    """a o x in the E-infinity product, with the flags of the result's degree.

    x is an E-infinity index, label or {index: coeff}.  Returns (element,
    flags); "ExtensionAmbiguous" among the flags means the product is only
    known up to the associated graded.
    """
    einf = run.einfty
    A = ag.algebra
    a = einf.from_e2(einf.e2_vector(model.point_label))
    if isinstance(x, str):
        x = {A.index[x]: 1}
    elif isinstance(x, int):
        x = {x: 1}
    out = einf.multiply(a, x)
    deg = -model.dim + (A.degree(x) or 0) if x else None
    flags = ag.flags.get(deg, []) if deg is not None else []
    return out, list(flags)


# ---------------------------------------------------------------------------
# surjectivity of I versus collapse


@dataclass
class TheoremCReport:
    onto: bool  # (a) I onto within truncation
    collapse: bool  # (b) every d_r vanishes
    no_arrivals: bool  # (c) proxy: nothing arrives on the point-class column
    image: ImageOfI
    witnesses: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.onto == self.collapse == self.no_arrivals

    def lines(self) -> list[str]:
        return [f"(a) I onto within truncation: {self.onto}",
                f"(b) all differentials vanish: {self.collapse}",
                f"(c) no differential arrives on the point column: {self.no_arrivals}",
                f"agreement: {self.agree}"] + [f"witness: {w}" for w in self.witnesses]


def check_theorem_c(model: LoopAlgebraModel, run: RunResult) -> TheoremCReport:
    """Compute the three conditions independently and insist they agree."""
    img = intersection_morphism(model, run)
    onto = img.onto()
    witnesses = []
    collapse = True
    arrivals = False
    for page in run.pages:
        if not page.d:
            continue
        for s, img_s in page.d.items():
            if not img_s:
                continue
            collapse = False
            tgt = page.elements[next(iter(img_s))]
            if tgt.p == -model.dim:
                arrivals = True
                if len(witnesses) < 3:
                    witnesses.append(f"d_{page.r}({page.label(s)}) = {page.format(img_s)}")
    report = TheoremCReport(onto, collapse, not arrivals, img, witnesses)
    if not report.agree:
        raise EquivalenceViolation("; ".join(report.lines()))
    return report


# ---------------------------------------------------------------------------
# restricted products and the projection remark


def restricted_product_spec(model: LoopAlgebraModel, sub: GradedAlgebra, i_shriek: Mapping[int, dict],
                            sub_dim: int, truncation: int, label: str = "N") -> FibrationSpec:
    """E2 for loops of M based on a submanifold N: base HH_*(N), fiber H_*(Omega M).

    ``i_shriek`` maps intersection basis indices of M to vectors of
    HH_*(N).  It must be a degree-preserving algebra map; the subalgebra
    i_!(HH_*(M)) (x) H_*(Omega M) is recorded on the returned spec.
    """
    H = model.intersection
    for j, img in i_shriek.items():
        for k in img:
            if sub.basis[k].degree != H.basis[j].degree:
                raise AlgebraError("i_! must preserve intersection degrees")
    for x in range(len(H.basis)):
        for y in range(len(H.basis)):
            lhs = sub.multiply(i_shriek.get(x, {}), i_shriek.get(y, {}))
            rhs = {}
            for k, c in H.basis_product(x, y).items():
                for t, e in i_shriek.get(k, {}).items():
                    rhs[t] = rhs.get(t, 0) + c * e
            if lhs != sub._normalize(rhs):
                raise AlgebraError("i_! is not multiplicative")
    spec = FibrationSpec(sub, model.pontryagin, RegradeShift(sub_dim, 0), model.ring, truncation,
                         f"L_{label}{model.manifold}", base_section=True)
    spec.subalgebra = [
        {f"{sub.basis[k].label}|{f.label}": c for k, c in i_shriek.get(x, {}).items()}
        for x in range(len(H.basis)) for f in model.pontryagin.basis
        if i_shriek.get(x)
    ]
    return spec


def product_model(N: LoopAlgebraModel, U: LoopAlgebraModel, truncation: int) -> LoopAlgebraModel:
    """Model of N x U: tensor products of intersection and Pontryagin algebras."""
    H = tensor(N.intersection, U.intersection, sep="x", check=False)
    P = tensor(N.pontryagin, U.pontryagin, max_degree=truncation, sep="*", check=False)
    return LoopAlgebraModel(f"{N.manifold}x{U.manifold}", N.dim + U.dim, H, P)


def projection_remark(N: LoopAlgebraModel, U: LoopAlgebraModel, truncation: int) -> list:
    """Compare p_* o i_! with the projection onto the LN factor on every E2 basis element.

    i: N -> N x U is n -> (n, u0).  On E2, i_!(z) = i_*^{-1}(z . ([N] x pt_U))
    on the base and the identity on H_*(Omega M); p_* keeps the base and
    applies the augmentation of H_*(Omega U).  The projection sends
    (x (x) w_N) (x) (y (x) w_U) to x (x) w_N when y (x) w_U = [U] (x) 1 and
    to 0 otherwise.  Returns the list of mismatches (empty when they agree).
    """
    M = product_model(N, U, truncation)
    H, P = M.intersection, M.pontryagin
    hN, hU = N.intersection, U.intersection
    nb = len(hU.basis)
    cut = H.index[f"{hN.basis[hN.unit].label}x{hU.basis[U.point].label}"]
    mismatches = []
    e2N = tensor(hN, N.pontryagin, max_degree=truncation, check=False)
    for z in range(len(H.basis)):
        a, b = divmod(z, nb)
        prod = H.basis_product(z, cut) if H.in_range(H.basis[z].degree + H.basis[cut].degree) else {}
        # i_* : x -> x x pt_U ; invert on the image
        base_img = {}
        for k, c in prod.items():
            ka, kb = divmod(k, nb)
            if kb != U.point:
                raise AlgebraError("z . ([N] x pt) left the image of i_*")
            base_img[ka] = base_img.get(ka, 0) + c
        for w in range(len(P.basis)):
            wN, wU = P.pairs[w]
            if H.basis[z].degree + P.basis[w].degree > truncation:
                continue
            # p_*: augmentation on the Omega U factor
            lhs = {}
            if U.pontryagin.basis[wU].degree == 0 and wU == U.pontryagin.unit:
                for ka, c in base_img.items():
                    lab = f"{hN.basis[ka].label}|{N.pontryagin.basis[wN].label}"
                    if lab in e2N.index:
                        lhs[e2N.index[lab]] = c
            rhs = {}
            if b == hU.unit and wU == U.pontryagin.unit:
                lab = f"{hN.basis[a].label}|{N.pontryagin.basis[wN].label}"
                if lab in e2N.index:
                    rhs[e2N.index[lab]] = 1
            if lhs != rhs:
                mismatches.append((f"{H.basis[z].label}|{P.basis[w].label}",
                                   e2N.format(lhs), e2N.format(rhs)))
    return mismatches


# ---------------------------------------------------------------------------
# diagonal morphism from paths to loops


def diagonal_morphism(model: LoopAlgebraModel, path_run, loop_run, diamond: DiamondAlgebra,
                      raise_on_e2: bool = True) -> SSMorphism:
    """E(Delta_!): (x x y ; w) -> (-1)^{m|x|} (x . y ; w), bidegree (-m, 0).

    |x| is the intersection degree of x.  The sign makes the map commute
    with the differentials of the path spectral sequence.
    """
    H = model.intersection
    if path_run.e2.ring != H.ring:
        H = H.with_ring(path_run.e2.ring)
    m = model.dim
    bmap = {}
    for s, (a, b) in enumerate(diamond.pairs):
        sg = -1 if (m * H.basis[a].degree) % 2 else 1
        if H.in_range(H.basis[a].degree + H.basis[b].degree):
            bmap[s] = {k: sg * c for k, c in H.basis_product(a, b).items()}
    nf = len(model.pontryagin.basis)
    fmap = {j: {j: 1} for j in range(nf)}
    return shriek_morphism(path_run, loop_run, bmap, fmap, RegradeShift(m, 0), raise_on_e2)
