"""
Multiplicative homology spectral sequences with pinned differentials.

A page is a flat list of homogeneous basis elements placed at bidegrees
(p, q).  Each element remembers an E2 representative (its lineage), so pins
and reports can always be phrased in E2 labels.  Differentials are linear
unknowns: pins and the Leibniz rule give linear equations over the
coefficient ring, which are solved exactly.  Anything the equations do not
fix is reported as undetermined instead of being guessed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Mapping, Sequence

from .exact_linalg import (ZZ, FgAbelianGroup, Matrix, NoSolution, Ring, group_str,
                           solve_system, subquotient)
from .graded_algebra import (BasisElement, GradedAlgebra, GradedModuleTable, RegradeShift,
                             sign, tensor)


class EngineError(Exception):
    pass


class BidegreeMismatch(EngineError):
    pass


class DeadTarget(EngineError):
    pass


class DeadSource(EngineError):
    pass


class LeibnizInconsistent(EngineError):
    pass


class DSquareNonzero(EngineError):
    pass


class UndeterminedDifferential(EngineError):
    pass


class MultiplicativityError(EngineError):
    pass


class NotChainMap(EngineError):
    pass


class NotACycle(EngineError):
    pass


# ---------------------------------------------------------------------------
# inputs


@dataclass
class FibrationSpec:
    """Input data of a regraded multiplicative spectral sequence.

    ``base`` is already desuspended (intersection grading) and ``fiber`` is
    in its own grading; E2_{p,q} = base_p (x) fiber_q.  With ``tor_classes``
    the Tor terms of the universal coefficient formula are carried as opaque
    classes whose products are unknown.  With ``base_section`` the fibration
    has a section, so the classes base (x) 1 are permanent cycles.
    """

    base: GradedAlgebra
    fiber: GradedAlgebra
    shift: RegradeShift
    ring: Ring = ZZ
    truncation: int = 12
    label: str = ""
    trivial_action: bool = True
    tor_classes: bool = False
    base_section: bool = False

    def validate(self):
        if not self.trivial_action:
            raise EngineError("only trivial coefficient actions are supported")
        for b in self.base.basis:
            if b.degree < -self.shift.k_B:
                raise EngineError(f"base class {b.label} below the regraded quadrant")
        for f in self.fiber.basis:
            if f.degree < -self.shift.k_F:
                raise EngineError(f"fiber class {f.label} below the regraded quadrant")


@dataclass
class DifferentialPin:
    """d_r(source) = target, both given as {E2 label: coefficient} or a label."""

    r: int
    source: object
    target: object = 0

    def source_dict(self) -> dict:
        return _as_dict(self.source)

    def target_dict(self) -> dict:
        return _as_dict(self.target)


def _as_dict(x) -> dict:
    if x is None or (not isinstance(x, (str, dict)) and x == 0):
        return {}
    if isinstance(x, str):
        return {x: 1}
    return dict(x)


@dataclass
class PageElement:
    label: str
    p: int
    q: int
    order: int
    rep: dict  # E2 index -> coefficient
    opaque: bool = False

    @property
    def total(self) -> int:
        return self.p + self.q

    @property
    def bidegree(self) -> tuple:
        return (self.p, self.q)


# ---------------------------------------------------------------------------
# pages


class BigradedPage:
    """One page E^r of a multiplicative spectral sequence.

    ``products`` maps basis index pairs to sparse vectors; a pair whose total
    degree is in range and involves no opaque class but is missing from the
    table multiplies to zero.  ``d`` maps a source index to its image
    (sparse vector) once the differential is solved.
    """

    def __init__(self, r: int, spec: FibrationSpec, elements: Sequence[PageElement],
                 products: Mapping[tuple, dict], parent: "BigradedPage | None" = None,
                 transition: Mapping[tuple, object] | None = None,
                 generators: Sequence[dict] = ()):
        self.r = r
        self.spec = spec
        self.ring = spec.ring
        self.truncation = spec.truncation
        self.elements = list(elements)
        self.products = dict(products)
        self.parent = parent
        self.transition = dict(transition or {})
        self.generators = list(generators)  # E2 vectors of multiplicative generators
        self.entries: dict[tuple, list[int]] = {}
        for i, e in enumerate(self.elements):
            self.entries.setdefault(e.bidegree, []).append(i)
        self.position = {}
        for idxs in self.entries.values():
            for k, i in enumerate(idxs):
                self.position[i] = k
        self.pins: list[tuple] = []  # (source vector, target vector, pin)
        self.d: dict[int, dict] | None = None
        self.undetermined: list[int] = []
        self.unit_e2: int | None = None  # E2 index of the unit; read through root()
        self.section_e2: list[int] = []  # E2 indices of base (x) 1 when the fibration has a section

    # -- structure ----------------------------------------------------------
    def copy(self) -> "BigradedPage":
        new = BigradedPage(self.r, self.spec, self.elements, self.products, self.parent,
                           self.transition, self.generators)
        new.pins = list(self.pins)
        new.d = None if self.d is None else dict(self.d)
        new.undetermined = list(self.undetermined)
        new.unit_e2 = self.unit_e2
        new.section_e2 = list(self.section_e2)
        return new

    def __len__(self):
        return len(self.elements)

    def label(self, i: int) -> str:
        return self.elements[i].label

    def index(self, label: str) -> int:
        for i, e in enumerate(self.elements):
            if e.label == label:
                return i
        raise KeyError(label)

    def group(self, p: int, q: int) -> FgAbelianGroup:
        orders = [self.elements[i].order for i in self.entries.get((p, q), [])]
        if self.ring.is_field:
            return FgAbelianGroup(len(orders), ())
        return FgAbelianGroup.from_orders(orders)

    def nonzero_bidegrees(self) -> list[tuple]:
        return sorted(self.entries)

    def column_width(self) -> int:
        ps = [p for p, _ in self.entries]
        return max(ps) - min(ps) if ps else 0

    def target_bidegree(self, p: int, q: int) -> tuple:
        return (p - self.r, q + self.r - 1)

    def normalize(self, v: Mapping[int, object]) -> dict:
        out = {}
        for i, c in v.items():
            c = self.ring(c)
            o = self.elements[i].order
            if o:
                c %= o
            if c:
                out[i] = c
        return out

    def known_product(self, i: int, j: int) -> bool:
        a, b = self.elements[i], self.elements[j]
        return (not a.opaque and not b.opaque and a.total + b.total <= self.truncation)

    def product(self, i: int, j: int) -> dict:
        if not self.known_product(i, j):
            raise MultiplicativityError(
                f"product {self.label(i)} * {self.label(j)} is not known on page {self.r}")
        return self.products.get((i, j), {})

    def multiply(self, x: Mapping[int, object], y: Mapping[int, object]) -> dict:
        out = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.product(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return self.normalize(out)

    def apply_d(self, x: Mapping[int, object]) -> dict:
        if self.d is None:
            raise UndeterminedDifferential(f"d_{self.r} has not been solved")
        out = {}
        for i, a in x.items():
            if i in self.undetermined:
                raise UndeterminedDifferential(f"d_{self.r}({self.label(i)}) is undetermined")
            for k, c in self.d.get(i, {}).items():
                out[k] = out.get(k, 0) + a * c
        return self.normalize(out)

    def d_matrix(self, p: int, q: int) -> Matrix:
        """Matrix of d_r from entry (p, q) to its target, in entry coordinates."""
        src = self.entries.get((p, q), [])
        tgt = self.entries.get(self.target_bidegree(p, q), [])
        M = Matrix.zeros(len(tgt), len(src))
        if self.d is None:
            return M
        for j, s in enumerate(src):
            for t, c in self.d.get(s, {}).items():
                M.rows[self.position[t]][j] = c
        return M

    def has_nonzero_differential(self) -> bool:
        return bool(self.d) and any(self.d.values())

    # -- E2 lineage ---------------------------------------------------------
    def e2_index(self, label: str) -> int:
        return self.root().index(label)

    def unit_class(self) -> dict:
        """The multiplicative unit as a vector on this page ({} when there is none)."""
        u = self.root().unit_e2
        return {} if u is None else self.from_e2({u: 1})

    def section_classes(self) -> list[dict]:
        """The classes base (x) 1 on this page, when the fibration has a section."""
        return [self.from_e2({x: 1}) for x in self.root().section_e2]

    def root(self) -> "BigradedPage":
        page = self
        while page.parent is not None:
            page = page.parent
        return page

    def e2_vector(self, spec) -> dict:
        """E2 vector from a label, {label: coeff} or {index: coeff}."""
        root = self.root()
        out = {}
        for k, c in _as_dict(spec).items():
            i = root.index(k) if isinstance(k, str) else k
            out[i] = out.get(i, 0) + c
        return root.normalize(out)

    def from_e2(self, v: Mapping[int, object]) -> dict:
        """Class on this page of an E2 vector; NotACycle if it dies as a source."""
        if self.parent is None:
            return self.normalize(v)
        prev = self.parent.from_e2(v)
        by_entry: dict[tuple, dict] = {}
        for i, c in prev.items():
            by_entry.setdefault(self.parent.elements[i].bidegree, {})[i] = c
        out = {}
        for bd, vec in by_entry.items():
            sq = self.transition.get(bd)
            idxs = self.parent.entries[bd]
            coords = [vec.get(i, 0) for i in idxs]
            if sq is None:
                raise NotACycle(f"no transition data at {bd}")
            try:
                y = sq.coordinates(coords)
            except ValueError:
                raise NotACycle(f"class at {bd} is not a d_{self.parent.r}-cycle") from None
            new_idxs = self.entries.get(bd, [])
            for k, c in zip(new_idxs, y):
                if c:
                    out[k] = c
        return self.normalize(out)

    def to_e2(self, x: Mapping[int, object]) -> dict:
        out = {}
        for i, a in x.items():
            for k, c in self.elements[i].rep.items():
                out[k] = out.get(k, 0) + a * c
        return self.root().normalize(out)

    def format(self, x: Mapping[int, object]) -> str:
        if not x:
            return "0"
        parts = []
        for i in sorted(x):
            c, lab = x[i], self.label(i)
            if c == 1:
                parts.append(lab)
            elif c == -1:
                parts.append(f"-{lab}")
            else:
                parts.append(f"{c}*{lab}")
        return " + ".join(parts).replace("+ -", "- ")

    # -- regrading and serialization -------------------------------------------
    def regraded(self, shift: RegradeShift) -> "BigradedPage":
        """Same page with (p, q) moved to (p - k_B, q - k_F)."""
        els = [PageElement(e.label, e.p - shift.k_B, e.q - shift.k_F, e.order, dict(e.rep),
                           e.opaque) for e in self.elements]
        new = BigradedPage(self.r, self.spec, els, self.products, None, None, self.generators)
        new.d = None if self.d is None else dict(self.d)
        new.undetermined = list(self.undetermined)
        new.unit_e2 = self.unit_e2
        new.section_e2 = list(self.section_e2)
        return new

    def rows(self) -> list[dict]:
        """One record per nonzero bidegree: group, labels, differential matrix."""
        out = []
        for (p, q) in self.nonzero_bidegrees():
            idxs = self.entries[(p, q)]
            tp = self.target_bidegree(p, q)
            M = self.d_matrix(p, q)
            out.append({
                "p": p, "q": q, "total": p + q,
                "group": group_str([self.elements[i].order for i in idxs], self.ring),
                "labels": [self.label(i) for i in idxs],
                "target": tp,
                "d": None if self.d is None or not M.nrows else M.rows,
                "undetermined": [self.label(i) for i in idxs if i in self.undetermined],
            })
        return out

    def __repr__(self):
        return f"<E^{self.r} page: {len(self.elements)} classes in {len(self.entries)} bidegrees>"


# ---------------------------------------------------------------------------
# E2


def _tor_classes(base: GradedAlgebra, fiber: GradedAlgebra, N: int) -> list[PageElement]:
    out = []
    for i, b in enumerate(base.basis):
        for j, f in enumerate(fiber.basis):
            if b.order and f.order and b.degree + f.degree + 1 <= N:
                out.append(PageElement(f"Tor({b.label},{f.label})", b.degree + 1, f.degree,
                                       gcd(b.order, f.order), {}, opaque=True))
    return out


def init_e2(spec: FibrationSpec) -> BigradedPage:
    """E2 = base (x) fiber as a bigraded algebra, all differentials unsolved."""
    spec.validate()
    ring = spec.ring
    base = spec.base if spec.base.ring == ring else spec.base.with_ring(ring)
    fiber = spec.fiber if spec.fiber.ring == ring else spec.fiber.with_ring(ring)
    T = tensor(base, fiber, max_degree=spec.truncation, check=False,
               allow_torsion_pairs=spec.tor_classes)
    elements = []
    for x, (i, j) in enumerate(T.pairs):
        elements.append(PageElement(T.basis[x].label, base.basis[i].degree,
                                    fiber.basis[j].degree, T.basis[x].order, {x: 1}))
    extra = _tor_classes(base, fiber, spec.truncation) if spec.tor_classes and not ring.is_field else []
    n = len(elements)
    for k, e in enumerate(extra):
        e.rep = {n + k: 1}
    elements += extra
    gens = [{g: 1} for g in T.generators] + [{n + k: 1} for k in range(len(extra))]
    page = BigradedPage(2, spec, elements, T.table, generators=gens)
    page.unit_e2 = T.unit
    if spec.base_section and fiber.unit is not None:
        page.section_e2 = [x for x, (_, j) in enumerate(T.pairs) if j == fiber.unit]
    return page


# ---------------------------------------------------------------------------
# pins


def pin_differential(page: BigradedPage, pin: DifferentialPin) -> BigradedPage:
    """Record d_r(source) = target on the page (checked, not yet propagated)."""
    if pin.r != page.r:
        raise BidegreeMismatch(f"pin for d_{pin.r} applied to page {page.r}")
    root = page.root()
    src_e2 = page.e2_vector(pin.source_dict())
    tgt_e2 = page.e2_vector(pin.target_dict())
    if not src_e2:
        raise BidegreeMismatch("pin source is zero")
    bds = {root.elements[i].bidegree for i in src_e2}
    if len(bds) != 1:
        raise BidegreeMismatch("pin source is not homogeneous")
    (p, q), = bds
    tp = (p - page.r, q + page.r - 1)
    for i in tgt_e2:
        if root.elements[i].bidegree != tp:
            e = root.elements[i]
            raise BidegreeMismatch(
                f"d_{page.r} sends ({p},{q}) to {tp}, but {e.label} sits at ({e.p},{e.q})")
    try:
        src = page.from_e2(src_e2)
    except NotACycle as exc:
        raise DeadSource(f"pin source does not survive to page {page.r}: {exc}") from None
    try:
        tgt = page.from_e2(tgt_e2)
    except NotACycle as exc:
        raise DeadTarget(f"pin target does not survive to page {page.r}: {exc}") from None
    if tgt_e2 and not tgt:
        raise DeadTarget(f"pin target {root.format(tgt_e2)} is zero on page {page.r}")
    if not src:
        if tgt:
            raise DeadSource(f"pin source is zero on page {page.r}")
        return page.copy()
    new = page.copy()
    new.pins.append((src, tgt, pin))
    new.d = None
    return new


def default_zero_pins(page: BigradedPage, explicit: Sequence[DifferentialPin]) -> list[DifferentialPin]:
    """d_r = 0 on every multiplicative generator not mentioned by an explicit pin."""
    root = page.root()
    used = set()
    for pin in explicit:
        if pin.r == page.r:
            used.update(page.e2_vector(pin.source_dict()))
    out = []
    for g in page.generators:
        if used & set(g):
            continue
        try:
            cls = page.from_e2(g)
        except NotACycle:
            continue
        if not cls:
            continue
        i = next(iter(g))
        e = root.elements[i]
        out.append(DifferentialPin(page.r, {e.label: g[i]}, 0))
    return out


# ---------------------------------------------------------------------------
# Leibniz propagation


class _System:
    """Sparse linear equations sum c_v x_v = rhs (mod modulus)."""

    def __init__(self, ring: Ring):
        self.ring = ring
        self.rows: list[list] = []  # [coeffs dict, rhs, modulus]

    def add(self, coeffs: dict, rhs, modulus: int):
        self.rows.append([dict(coeffs), rhs, modulus])


def _reduce(ring, x, m):
    x = ring(x)
    return x % m if m else x


def _solve_differentials(page: BigradedPage, variables: list, var_mod: list, system: _System):
    """Unit propagation, then an exact SNF solve of whatever remains.

    Returns (values, undetermined variable set).  Raises LeibnizInconsistent.
    """
    ring = page.ring
    known: dict[int, object] = {}
    rows = system.rows
    changed = True
    while changed:
        changed = False
        live = []
        for coeffs, rhs, m in rows:
            rest = {}
            for v, c in coeffs.items():
                if v in known:
                    rhs = rhs - c * known[v]
                else:
                    c = _reduce(ring, c, m)
                    if c:
                        rest[v] = c
            rhs = _reduce(ring, rhs, m)
            if not rest:
                if rhs:
                    raise LeibnizInconsistent(_describe_row(page, variables, coeffs, rhs, m))
                continue
            if len(rest) == 1:
                (v, c), = rest.items()
                val = _single(ring, c, rhs, m, var_mod[v])
                if val is NoSolution:
                    raise LeibnizInconsistent(_describe_row(page, variables, coeffs, rhs, m))
                if val is not None:
                    known[v] = val
                    changed = True
                    continue
            live.append([rest, rhs, m])
        rows = live
    unknown = sorted({v for coeffs, _, _ in rows for v in coeffs} - set(known))
    free = set(range(len(variables))) - set(known) - set(unknown)
    if unknown:
        col = {v: k for k, v in enumerate(unknown)}
        A = Matrix([[r[0].get(v, 0) for v in unknown] for r in rows], len(unknown))
        b = [r[1] for r in rows]
        moduli = [r[2] for r in rows]
        sol = solve_system(A, b, ring, None if ring.is_field else moduli)
        if sol is NoSolution:
            raise LeibnizInconsistent("pins and the Leibniz rule admit no common solution")
        for v in unknown:
            k = col[v]
            if sol.determined(k, var_mod[v]):
                val = ring(sol.particular[k])
                known[v] = val % var_mod[v] if var_mod[v] else val
            else:
                free.add(v)
    return known, free


def _single(ring, c, rhs, m, vm):
    """Value of x from c*x = rhs (mod m) when it is forced; None if not decided here."""
    if ring.is_field:
        return ring.quo(rhs, c)
    if m == 0 and vm == 0:
        if rhs % c:
            return NoSolution
        return rhs // c
    if m and vm == m and gcd(int(c), m) == 1:
        return (rhs * pow(int(c), -1, m)) % m
    return None


def _describe_row(page, variables, coeffs, rhs, m):
    terms = []
    for v, c in coeffs.items():
        s, t = variables[v]
        terms.append(f"{c}*[d({page.label(s)}) at {page.label(t)}]")
    mod = f" (mod {m})" if m else ""
    return "inconsistent constraint: " + " + ".join(terms) + f" = {rhs}{mod}"


def propagate_leibniz(page: BigradedPage) -> BigradedPage:
    """Solve d_r from the recorded pins and the Leibniz rule.

    Sign convention: d(xy) = d(x) y + (-1)^{|x|} x d(y) with |x| the regraded
    total degree.  Sources whose differential is not forced are listed in
    ``undetermined``.  Raises LeibnizInconsistent or DSquareNonzero.
    """
    new = page.copy()
    ring = page.ring
    els = page.elements
    variables, var_mod, var_of = [], [], {}
    for s, e in enumerate(els):
        for t in page.entries.get(page.target_bidegree(e.p, e.q), []):
            var_of[(s, t)] = len(variables)
            variables.append((s, t))
            var_mod.append(els[t].order if not ring.is_field else 0)
    targets_of = {s: [t for t in page.entries.get(page.target_bidegree(e.p, e.q), [])]
                  for s, e in enumerate(els)}
    system = _System(ring)
    # pins: sum_s v_s d(s) = w
    for src, tgt, _ in page.pins:
        (p, q) = els[next(iter(src))].bidegree
        for t in page.entries.get(page.target_bidegree(p, q), []):
            system.add({var_of[(s, t)]: c for s, c in src.items()}, tgt.get(t, 0),
                       0 if ring.is_field else els[t].order)
    # the unit is a permanent cycle (it comes from the unit map of spectral
    # sequences); Leibniz alone only gives d(1) = 2 d(1)
    for s, c in page.unit_class().items():
        for t in targets_of[s]:
            system.add({var_of[(s, t)]: 1}, 0, 0 if ring.is_field else els[t].order)
    # with a section, every class base (x) 1 is a permanent cycle
    for vec in page.section_classes():
        if not vec:
            continue
        (p, q) = els[next(iter(vec))].bidegree
        for t in page.entries.get(page.target_bidegree(p, q), []):
            system.add({var_of[(s, t)]: c for s, c in vec.items()}, 0,
                       0 if ring.is_field else els[t].order)
    # Leibniz on every pair with known product.  A term d(x) y whose product
    # is unknown (opaque classes) blocks its row until the unknowns it
    # multiplies are solved to zero.
    n = len(els)
    pending = []  # (rows, blocking variables, modulus per target)
    for x in range(n):
        for y in range(n):
            if not page.known_product(x, y):
                continue
            P = els[x].p + els[y].p
            Q = els[x].q + els[y].q
            T = page.entries.get((P - page.r, Q + page.r - 1), [])
            if not T:
                continue
            xy = page.products.get((x, y), {})
            sx = sign(els[x].total)
            rows = {t: {} for t in T}
            blocking = set()
            for e, c in xy.items():
                for t in T:
                    v = var_of[(e, t)]
                    rows[t][v] = rows[t].get(v, 0) + c
            for t1 in targets_of[x]:  # d(x) y
                v = var_of[(x, t1)]
                if not page.known_product(t1, y):
                    blocking.add(v)
                    continue
                for t, c in page.products.get((t1, y), {}).items():
                    rows[t][v] = rows[t].get(v, 0) - c
            for t2 in targets_of[y]:  # x d(y)
                v = var_of[(y, t2)]
                if not page.known_product(x, t2):
                    blocking.add(v)
                    continue
                for t, c in page.products.get((x, t2), {}).items():
                    rows[t][v] = rows[t].get(v, 0) - sx * c
            if blocking:
                pending.append((rows, blocking))
                continue
            for t in T:
                if any(rows[t].values()):
                    system.add(rows[t], 0, 0 if ring.is_field else els[t].order)
    while True:
        known, free = _solve_differentials(page, variables, var_mod, system)
        ready = [item for item in pending
                 if all(v in known and not known[v] for v in item[1])]
        if not ready:
            break
        pending = [item for item in pending if item not in ready]
        for rows, _ in ready:
            for t, row in rows.items():
                if any(row.values()):
                    system.add(row, 0, 0 if ring.is_field else els[t].order)
    d: dict[int, dict] = {s: {} for s in range(n)}
    undetermined = set()
    for v, (s, t) in enumerate(variables):
        if v in free:
            undetermined.add(s)
        elif known.get(v):
            d[s][t] = known[v]
    new.d = {s: new.normalize(vec) for s, vec in d.items()}
    new.undetermined = sorted(undetermined)
    _check_d_squared(new)
    return new


def _check_d_squared(page: BigradedPage):
    for s in range(len(page.elements)):
        if s in page.undetermined:
            continue
        img = page.d.get(s, {})
        if any(t in page.undetermined for t in img):
            continue
        dd = page.apply_d(img) if img else {}
        if dd:
            raise DSquareNonzero(
                f"d_{page.r} d_{page.r}({page.label(s)}) = {page.format(dd)}")


# ---------------------------------------------------------------------------
# turning pages


def _combination_label(page: BigradedPage, idxs: list, vec: list) -> str:
    nz = [(i, c) for i, c in zip(idxs, vec) if c]
    if len(nz) == 1 and nz[0][1] == 1:
        return page.label(nz[0][0])
    return "(" + page.format(dict(nz)) + ")"


def turn_page(page: BigradedPage, check_products: bool = True) -> BigradedPage:
    """E^{r+1} = H(E^r, d_r) with the induced product."""
    if page.d is None:
        raise UndeterminedDifferential(f"d_{page.r} has not been solved")
    if page.undetermined:
        labs = ", ".join(page.label(i) for i in page.undetermined)
        raise UndeterminedDifferential(f"d_{page.r} undetermined on: {labs}")
    ring = page.ring
    new_elements: list[PageElement] = []
    lifts: list[dict] = []
    transition = {}
    for (p, q) in page.nonzero_bidegrees():
        idxs = page.entries[(p, q)]
        src = (p + page.r, q - page.r + 1)
        incoming = page.d_matrix(*src) if src in page.entries else Matrix.zeros(len(idxs), 0)
        tgt = page.target_bidegree(p, q)
        outgoing = page.d_matrix(p, q)
        orders = [page.elements[i].order for i in idxs]
        t_orders = [page.elements[i].order for i in page.entries.get(tgt, [])]
        sq = subquotient(len(idxs), incoming, outgoing, ring, orders, t_orders)
        transition[(p, q)] = sq
        for g, o in zip(sq.generators, sq.orders):
            vec = {i: c for i, c in zip(idxs, g) if c}
            lift_e2 = page.to_e2(vec)
            opaque = any(page.elements[i].opaque for i in vec)
            new_elements.append(PageElement(_combination_label(page, idxs, g), p, q, o,
                                            lift_e2, opaque))
            lifts.append(vec)
    nxt = BigradedPage(page.r + 1, page.spec, new_elements, {}, page, transition,
                       page.generators)
    # induced products
    products = {}
    for a, ea in enumerate(new_elements):
        for b, eb in enumerate(new_elements):
            if not nxt.known_product(a, b):
                continue
            prod = page.multiply(lifts[a], lifts[b])
            if not prod:
                continue
            try:
                cls = _classes_on(nxt, page, prod)
            except NotACycle:
                raise MultiplicativityError(
                    f"product of cycles {ea.label} * {eb.label} is not a cycle") from None
            if cls:
                products[(a, b)] = cls
    nxt.products = products
    if check_products:
        _check_boundaries_absorb(page, nxt, lifts)
    return nxt


def _classes_on(nxt: BigradedPage, page: BigradedPage, vec: dict) -> dict:
    by_entry: dict[tuple, dict] = {}
    for i, c in vec.items():
        by_entry.setdefault(page.elements[i].bidegree, {})[i] = c
    out = {}
    for bd, v in by_entry.items():
        sq = nxt.transition[bd]
        coords = [v.get(i, 0) for i in page.entries[bd]]
        try:
            y = sq.coordinates(coords)
        except ValueError:
            raise NotACycle(str(bd)) from None
        for k, c in zip(nxt.entries.get(bd, []), y):
            if c:
                out[k] = c
    return nxt.normalize(out)


def _check_boundaries_absorb(page: BigradedPage, nxt: BigradedPage, lifts: list):
    boundaries = []
    for s in range(len(page.elements)):
        img = page.d.get(s, {})
        if img:
            boundaries.append(img)
    for a, la in enumerate(lifts):
        for bvec in boundaries:
            bi = next(iter(bvec))
            for left in (True, False):
                ea = nxt.elements[a]
                eb = page.elements[bi]
                if ea.opaque or eb.opaque or ea.total + eb.total > page.truncation:
                    continue
                prod = page.multiply(la, bvec) if left else page.multiply(bvec, la)
                if not prod:
                    continue
                try:
                    cls = _classes_on(nxt, page, prod)
                except NotACycle:
                    raise MultiplicativityError("cycle times boundary is not a cycle") from None
                if cls:
                    raise MultiplicativityError(
                        f"{ea.label} times a boundary is not a boundary on page {nxt.r}")


# ---------------------------------------------------------------------------
# running


@dataclass
class RunResult:
    pages: list
    einfty: BigradedPage
    collapsed_at: int
    nonzero_pages: list = field(default_factory=list)

    @property
    def e2(self) -> BigradedPage:
        return self.pages[0]

    def __iter__(self):
        return iter((self.pages, self.einfty, self.collapsed_at))


def run_to_einfty(spec: FibrationSpec, pins: Sequence[DifferentialPin] = (),
                  default_pins: str = "none", max_pages: int | None = None) -> RunResult:
    """Turn pages until every further differential vanishes for bidegree reasons.

    ``default_pins`` is "none" (only explicit pins) or "generators" (d_r = 0
    on every multiplicative generator not named by an explicit pin).
    """
    if default_pins not in ("none", "generators"):
        raise ValueError(f"unknown default pin mode {default_pins!r}")
    page = init_e2(spec)
    pages = []
    nonzero = []
    limit = max_pages or (page.column_width() + spec.truncation + 3)
    while True:
        width = page.column_width()
        if page.r > width and not any(p.r >= page.r for p in pins):
            break
        if page.r > limit:
            raise EngineError("page limit exceeded")
        explicit = [p for p in pins if p.r == page.r]
        for pin in explicit:
            page = pin_differential(page, pin)
        if default_pins == "generators":
            for pin in default_zero_pins(page, explicit):
                page = pin_differential(page, pin)
        page = propagate_leibniz(page)
        pages.append(page)
        if page.undetermined:
            labs = ", ".join(page.label(i) for i in page.undetermined)
            raise UndeterminedDifferential(f"d_{page.r} undetermined on: {labs}")
        if page.has_nonzero_differential():
            nonzero.append(page.r)
        page = turn_page(page)
    page.d = {i: {} for i in range(len(page.elements))}
    pages.append(page)
    collapsed = (max(nonzero) + 1) if nonzero else 2
    return RunResult(pages, page, collapsed, nonzero)


# ---------------------------------------------------------------------------
# E-infinity


@dataclass
class AssociatedGraded:
    """Total-degree view of an E-infinity page."""

    table: GradedModuleTable
    layers: dict  # total degree -> list of (p, q, group string, labels)
    flags: dict  # total degree -> list of flag strings
    algebra: GradedAlgebra
    certified_through: int

    def ambiguous_degrees(self) -> list[int]:
        return sorted(d for d, f in self.flags.items() if "ExtensionAmbiguous" in f)


def associated_graded(einfty: BigradedPage, relabel: Mapping[str, str] | None = None) -> AssociatedGraded:
    """Collapse E-infinity by total degree; extensions are flagged, never solved."""
    ring = einfty.ring
    N = einfty.truncation
    relabel = dict(relabel or {})
    layers, flags, entries = {}, {}, {}
    for (p, q) in einfty.nonzero_bidegrees():
        idxs = einfty.entries[(p, q)]
        d = p + q
        orders = [einfty.elements[i].order for i in idxs]
        labs = [relabel.get(einfty.label(i), einfty.label(i)) for i in idxs]
        layers.setdefault(d, []).append((p, q, group_str(orders, ring), labs))
        entries.setdefault(d, []).extend(zip(labs, orders))
    for d, ls in layers.items():
        f = []
        if len(ls) > 1:
            f.append("ExtensionAmbiguous")
        elif not ring.is_field and any(einfty.elements[i].order for (p, q, _, _) in ls
                                        for i in einfty.entries[(p, q)]):
            f.append("ExtensionAmbiguous")
        if d >= N:
            f.append("Uncertified")
        if f:
            flags[d] = f
    basis = [BasisElement(relabel.get(e.label, e.label), e.total, e.order if not ring.is_field else 0)
             for e in einfty.elements]
    table = {k: v for k, v in einfty.products.items()}
    unit = None
    u = einfty.root().unit_e2
    if u is not None:
        unit = next((i for i, e in enumerate(einfty.elements) if e.rep == {u: 1}), None)
    labels_seen = set()
    for b in basis:
        if b.label in labels_seen:
            raise EngineError(f"duplicate E-infinity label {b.label}")
        labels_seen.add(b.label)
    alg = GradedAlgebra(f"E_inf({einfty.spec.label})", basis, table, unit, ring, None, N,
                        commutative=False, check=False)
    return AssociatedGraded(GradedModuleTable(entries, N), layers, flags, alg, N - 1)


# ---------------------------------------------------------------------------
# morphisms


def _as_map(M, n_src: int) -> dict:
    """Normalize a base or fiber map to {source index: {target index: coeff}}."""
    if isinstance(M, Matrix):
        return {j: {i: M.rows[i][j] for i in range(M.nrows) if M.rows[i][j]} for j in range(M.ncols)}
    return {j: dict(M.get(j, {})) for j in range(n_src)}


@dataclass
class SSMorphism:
    source: list  # page stack
    target: list
    shift: RegradeShift
    e2_map: dict  # source E2 index -> target E2 vector
    matrices: dict  # (r, (p, q)) -> Matrix into target page r at (p - k_B, q - k_F)
    failures: list
    multiplicative: bool

    def apply(self, r: int, x: Mapping[int, object]) -> dict:
        """Image of a page-r class (source page coordinates) in target page r."""
        src, tgt = self.source[r - 2], self.target[r - 2]
        out = {}
        for i, a in x.items():
            for k, c in _image(src, tgt, self.e2_map, i).items():
                out[k] = out.get(k, 0) + a * c
        return tgt.normalize(out)

    def is_identity(self) -> bool:
        for r, (src, tgt) in enumerate(zip(self.source, self.target), start=2):
            for i in range(len(src.elements)):
                if self.apply(r, {i: 1}) != tgt.normalize({i: 1}):
                    return False
        return True


def _stack(obj) -> list:
    if isinstance(obj, RunResult):
        return obj.pages
    if isinstance(obj, FibrationSpec):
        return [init_e2(obj)]
    if isinstance(obj, BigradedPage):
        return [obj]
    return list(obj)


def shriek_morphism(source, target, base_matrix, fiber_matrix, shift: RegradeShift,
                    raise_on_e2: bool = True) -> SSMorphism:
    """Morphism of spectral sequences induced by base and fiber maps.

    On E2 it is base_matrix (x) fiber_matrix with the Koszul sign
    (-1)^{k_F |a|} for a base class a.  Later pages are handled by restricting
    to cycles; commutation with differentials is checked page by page and
    failures are collected.  A failure on E2 raises NotChainMap.
    """
    S, T = _stack(source), _stack(target)
    s2, t2 = S[0], T[0]
    sspec, tspec = s2.spec, t2.spec
    sb, sf, tb, tf = sspec.base, sspec.fiber, tspec.base, tspec.fiber
    bmap = _as_map(base_matrix, len(sb.basis))
    fmap = _as_map(fiber_matrix, len(sf.basis))
    for j, img in bmap.items():
        for i in img:
            if tb.basis[i].degree != sb.basis[j].degree - shift.k_B:
                raise BidegreeMismatch(f"base map does not have degree -{shift.k_B}")
    for j, img in fmap.items():
        for i in img:
            if tf.basis[i].degree != sf.basis[j].degree - shift.k_F:
                raise BidegreeMismatch(f"fiber map does not have degree -{shift.k_F}")
    s_pairs = _pairs(s2)
    t_pos = {pr: k for k, pr in enumerate(_pairs(t2))}
    e2_map = {}
    for x, pr in enumerate(s_pairs):
        if pr is None:
            continue
        i, j = pr
        out = {}
        sg = sign(shift.k_F * sb.basis[i].degree)
        for a, ca in bmap.get(i, {}).items():
            for b, cb in fmap.get(j, {}).items():
                z = t_pos.get((a, b))
                if z is not None:
                    out[z] = out.get(z, 0) + sg * ca * cb
        e2_map[x] = t2.normalize(out)
    failures = []
    matrices = {}
    for r, (sp, tp) in enumerate(zip(S, T), start=2):
        for (p, q), idxs in sp.entries.items():
            tbd = (p - shift.k_B, q - shift.k_F)
            tidx = tp.entries.get(tbd, [])
            M = Matrix.zeros(len(tidx), len(idxs))
            for col, i in enumerate(idxs):
                try:
                    img = _image(sp, tp, e2_map, i)
                except NotACycle:
                    failures.append((r, (p, q), f"image of {sp.label(i)} is not a cycle"))
                    continue
                for k, c in img.items():
                    M.rows[tp.position[k]][col] = c
                if sp.d is not None and tp.d is not None and not sp.undetermined and not tp.undetermined:
                    lhs = tp.apply_d(img)
                    ds = sp.apply_d({i: 1})
                    rhs = {}
                    for k, c in ds.items():
                        for t, e in _image(sp, tp, e2_map, k).items():
                            rhs[t] = rhs.get(t, 0) + c * e
                    if lhs != tp.normalize(rhs):
                        failures.append((r, (p, q), f"f d != d f on {sp.label(i)}"))
            matrices[(r, (p, q))] = M
    if raise_on_e2 and any(f[0] == 2 for f in failures):
        raise NotChainMap("; ".join(f"E2 {bd}: {msg}" for r, bd, msg in failures if r == 2))
    mult = _is_multiplicative(s2, t2, e2_map)
    return SSMorphism(S, T, shift, e2_map, matrices, failures, mult)


def _pairs(page: BigradedPage) -> list:
    T_pairs = []
    sb, sf = page.spec.base, page.spec.fiber
    bl = {b.label: i for i, b in enumerate(sb.basis)}
    fl = {f.label: i for i, f in enumerate(sf.basis)}
    for e in page.elements:
        if e.opaque:
            T_pairs.append(None)
            continue
        a, _, b = e.label.partition("|")
        T_pairs.append((bl[a], fl[b]))
    return T_pairs


def _image(sp: BigradedPage, tp: BigradedPage, e2_map: dict, i: int) -> dict:
    v = {}
    for k, c in sp.elements[i].rep.items():
        for t, d in e2_map.get(k, {}).items():
            v[t] = v.get(t, 0) + c * d
    return tp.from_e2(tp.root().normalize(v))


def _is_multiplicative(s2: BigradedPage, t2: BigradedPage, e2_map: dict) -> bool:
    n = len(s2.elements)
    for x in range(n):
        for y in range(n):
            if not s2.known_product(x, y):
                continue
            fx, fy = e2_map.get(x, {}), e2_map.get(y, {})
            try:
                lhs = t2.multiply(fx, fy)
            except MultiplicativityError:
                continue
            rhs = {}
            for k, c in s2.products.get((x, y), {}).items():
                for t, d in e2_map.get(k, {}).items():
                    rhs[t] = rhs.get(t, 0) + c * d
            if lhs != t2.normalize(rhs):
                return False
    return True
