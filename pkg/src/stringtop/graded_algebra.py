"""
Truncated graded algebras given by structure constants.

An algebra is a finite list of homogeneous basis elements (each with a degree
and an additive order, 0 meaning free) and a sparse multiplication table.
Degrees may be negative: the intersection algebra of an m-manifold lives in
degrees -m..0.  Everything above ``max_degree`` is absent by contract; asking
for such a product raises DegreeOverflow instead of silently returning 0.

Signs follow the Koszul rule throughout:
(a (x) b)(a' (x) b') = (-1)^{|b||a'|} aa' (x) bb'.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Iterable, Mapping, Sequence

from .exact_linalg import ZZ, Matrix, Ring, smith_normal_form


class AlgebraError(Exception):
    pass


class TorsionKunneth(AlgebraError):
    """Both tensor factors carry Z-torsion in degrees whose Tor term is in range."""


class NotPoincareDuality(AlgebraError):
    pass


class DegreeOverflow(AlgebraError):
    pass


class InvariantViolation(AlgebraError):
    pass


@dataclass(frozen=True)
class BasisElement:
    label: str
    degree: int
    order: int = 0  # additive order; 0 = free


@dataclass(frozen=True)
class RegradeShift:
    k_B: int = 0
    k_F: int = 0

    def __post_init__(self):
        if self.k_B < 0 or self.k_F < 0:
            raise ValueError("regrading shifts are nonnegative")

    @property
    def total(self) -> int:
        return self.k_B + self.k_F

    def __add__(self, other: "RegradeShift") -> "RegradeShift":
        return RegradeShift(self.k_B + other.k_B, self.k_F + other.k_F)


def sign(e: int) -> int:
    return -1 if e % 2 else 1


class GradedAlgebra:
    """A finitely presented, degree-truncated graded algebra.

    Elements are dicts {basis index: coefficient}.  ``generators`` lists the
    basis indices that generate the algebra multiplicatively; it defaults to
    every basis element.
    """

    def __init__(self, name: str, basis: Sequence[BasisElement],
                 table: Mapping[tuple, Mapping[int, object]], unit: int | None = None,
                 ring: Ring = ZZ, generators: Sequence[int] | None = None,
                 max_degree: int | None = None, commutative: bool = True,
                 check: bool = True):
        self.name = name
        self.basis = list(basis)
        self.ring = ring
        self.unit = unit
        self.max_degree = max_degree
        self.commutative = commutative
        self.index = {b.label: i for i, b in enumerate(self.basis)}
        if len(self.index) != len(self.basis):
            raise AlgebraError(f"duplicate basis labels in {name}")
        if ring.is_field and any(b.order for b in self.basis):
            raise AlgebraError("torsion basis elements over a field")
        self.table = {}
        for (i, j), val in table.items():
            v = self._normalize(val)
            if v:
                self.table[(i, j)] = v
        if generators is None:
            generators = [i for i in range(len(self.basis)) if i != unit]
        self.generators = list(generators)
        if check:
            self.validate()

    # -- elements ---------------------------------------------------------
    def _normalize(self, v: Mapping[int, object]) -> dict:
        out = {}
        for k, c in v.items():
            c = self.ring(c)
            o = self.basis[k].order
            if o:
                c %= o
            if c:
                out[k] = c
        return out

    def element(self, spec) -> dict:
        """Build an element from a label, an index, or {label: coeff}."""
        if isinstance(spec, dict):
            out = {}
            for k, c in spec.items():
                i = self.index[k] if isinstance(k, str) else k
                out[i] = out.get(i, 0) + c
            return self._normalize(out)
        if isinstance(spec, str):
            return {self.index[spec]: self.ring(1)}
        return {int(spec): self.ring(1)}

    def degree(self, x: Mapping[int, object]) -> int | None:
        degs = {self.basis[i].degree for i in x}
        if len(degs) > 1:
            raise AlgebraError("element is not homogeneous")
        return degs.pop() if degs else None

    def format(self, x: Mapping[int, object]) -> str:
        if not x:
            return "0"
        parts = []
        for i in sorted(x):
            c = x[i]
            lab = self.basis[i].label
            if c == 1:
                parts.append(lab)
            elif c == -1:
                parts.append(f"-{lab}")
            else:
                parts.append(f"{c}*{lab}")
        return " + ".join(parts).replace("+ -", "- ")

    def add(self, x, y, scale=1) -> dict:
        out = dict(x)
        for k, c in y.items():
            out[k] = out.get(k, 0) + scale * c
        return self._normalize(out)

    def basis_product(self, i: int, j: int) -> dict:
        d = self.basis[i].degree + self.basis[j].degree
        if self.max_degree is not None and d > self.max_degree:
            raise DegreeOverflow(
                f"{self.basis[i].label}*{self.basis[j].label} has degree {d} > {self.max_degree}"
            )
        return self.table.get((i, j), {})

    def multiply(self, x, y) -> dict:
        out = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.basis_product(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return self._normalize(out)

    def in_range(self, degree: int) -> bool:
        return self.max_degree is None or degree <= self.max_degree

    def degrees(self) -> list[int]:
        return sorted({b.degree for b in self.basis})

    def in_degree(self, d: int) -> list[int]:
        return [i for i, b in enumerate(self.basis) if b.degree == d]

    def point_class(self) -> int | None:
        """Index of the lowest-degree free basis element, if unique."""
        free = [i for i, b in enumerate(self.basis) if not b.order]
        if not free:
            return None
        low = min(self.basis[i].degree for i in free)
        cands = [i for i in free if self.basis[i].degree == low]
        return cands[0] if len(cands) == 1 else None

    # -- invariants -------------------------------------------------------
    def pairs_in_range(self):
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                if self.in_range(self.basis[i].degree + self.basis[j].degree):
                    yield i, j

    def check_degrees(self):
        for (i, j), v in self.table.items():
            d = self.basis[i].degree + self.basis[j].degree
            for k in v:
                if self.basis[k].degree != d:
                    raise InvariantViolation(
                        f"{self.name}: product {self.basis[i].label}*{self.basis[j].label} "
                        f"not of degree {d}")

    def check_unit(self):
        if self.unit is None:
            return
        u = self.unit
        if self.basis[u].degree != 0:
            raise InvariantViolation("unit not in degree 0")
        for i in range(len(self.basis)):
            e = {i: self.ring(1)}
            e = self._normalize(e)
            if self.table.get((u, i), {}) != e or self.table.get((i, u), {}) != e:
                raise InvariantViolation(f"{self.name}: unit fails on {self.basis[i].label}")

    def check_commutative(self):
        for i, j in self.pairs_in_range():
            if j < i:
                continue
            s = sign(self.basis[i].degree * self.basis[j].degree)
            a = self.table.get((i, j), {})
            b = self._normalize({k: s * c for k, c in self.table.get((j, i), {}).items()})
            if a != b:
                raise InvariantViolation(
                    f"{self.name}: graded commutativity fails on "
                    f"{self.basis[i].label}, {self.basis[j].label}")

    def check_odd_squares(self):
        if self.ring.characteristic == 2:
            return
        for i in self.generators:
            if self.basis[i].degree % 2 and self.in_range(2 * self.basis[i].degree):
                if self.table.get((i, i)):
                    raise InvariantViolation(f"{self.name}: odd generator {self.basis[i].label} squares nonzero")

    def check_associative(self):
        n = len(self.basis)
        for i in range(n):
            for j in range(n):
                dij = self.basis[i].degree + self.basis[j].degree
                if not self.in_range(dij):
                    continue
                ij = self.table.get((i, j), {})
                for k in range(n):
                    if not self.in_range(dij + self.basis[k].degree):
                        continue
                    left = self.multiply(ij, {k: 1})
                    right = self.multiply({i: 1}, self.table.get((j, k), {}))
                    if left != right:
                        raise InvariantViolation(
                            f"{self.name}: associativity fails on "
                            f"({self.basis[i].label}, {self.basis[j].label}, {self.basis[k].label})")

    def validate(self):
        self.check_degrees()
        self.check_unit()
        if self.commutative:
            self.check_commutative()
            self.check_odd_squares()
        self.check_associative()

    def is_graded_commutative(self) -> bool:
        try:
            self.check_commutative()
        except InvariantViolation:
            return False
        return True

    # -- derived algebras -------------------------------------------------
    def shifted(self, k: int, name: str | None = None) -> "GradedAlgebra":
        """Same algebra with every degree lowered by k.

        Used to desuspend: H_*(M) with k = m gives the grading of H_{*+m}.
        The product is kept as is, so this only makes sense for tables that
        were written for the target grading.
        """
        basis = [BasisElement(b.label, b.degree - k, b.order) for b in self.basis]
        md = None if self.max_degree is None else self.max_degree - k
        return GradedAlgebra(name or self.name, basis, self.table, self.unit, self.ring,
                             self.generators, md, self.commutative, check=False)

    def truncated(self, max_degree: int) -> "GradedAlgebra":
        keep = [i for i, b in enumerate(self.basis) if b.degree <= max_degree]
        return self.restricted(keep, max_degree)

    def restricted(self, keep: Sequence[int], max_degree=None) -> "GradedAlgebra":
        pos = {i: n for n, i in enumerate(keep)}
        table = {}
        for (i, j), v in self.table.items():
            if i in pos and j in pos:
                table[(pos[i], pos[j])] = {pos[k]: c for k, c in v.items() if k in pos}
        gens = [pos[g] for g in self.generators if g in pos]
        md = self.max_degree if max_degree is None else max_degree
        return GradedAlgebra(self.name, [self.basis[i] for i in keep], table,
                             pos.get(self.unit) if self.unit is not None else None,
                             self.ring, gens, md, self.commutative, check=False)

    def with_ring(self, ring: Ring) -> "GradedAlgebra":
        """Change coefficients (torsion-free algebras only for fields)."""
        if ring.is_field:
            if any(b.order for b in self.basis):
                keep = [i for i, b in enumerate(self.basis)
                        if not b.order or (ring.characteristic and b.order % ring.characteristic == 0)]
                if len(keep) != len(self.basis):
                    alg = self.restricted(keep)
                else:
                    alg = self
                basis = [BasisElement(b.label, b.degree, 0) for b in alg.basis]
                return GradedAlgebra(self.name, basis, alg.table, alg.unit, ring,
                                     alg.generators, alg.max_degree, alg.commutative, check=False)
        return GradedAlgebra(self.name, self.basis, self.table, self.unit, ring,
                             self.generators, self.max_degree, self.commutative, check=False)

    def relabeled(self, mapping: Mapping[str, str], name: str | None = None) -> "GradedAlgebra":
        basis = [BasisElement(mapping.get(b.label, b.label), b.degree, b.order) for b in self.basis]
        return GradedAlgebra(name or self.name, basis, self.table, self.unit, self.ring,
                             self.generators, self.max_degree, self.commutative, check=False)

    def __repr__(self):
        return f"GradedAlgebra({self.name!r}, dim={len(self.basis)}, ring={self.ring})"

    def table_grid(self, labels: Sequence[str] | None = None) -> list[list[str]]:
        """Multiplication table as strings: grid[i][j] = b_i * b_j."""
        return [[self.format(self.table.get((i, j), {})) for j in range(len(self.basis))]
                for i in range(len(self.basis))]


# ---------------------------------------------------------------------------
# graded modules (no product)


@dataclass
class GradedModuleTable:
    """degree -> list of (label, order); truncation is the max degree."""

    entries: dict
    truncation: int | None = None

    def group(self, d: int):
        from .exact_linalg import FgAbelianGroup

        return FgAbelianGroup.from_orders([o for _, o in self.entries.get(d, [])])

    @classmethod
    def of(cls, alg: GradedAlgebra) -> "GradedModuleTable":
        ent = {}
        for b in alg.basis:
            ent.setdefault(b.degree, []).append((b.label, b.order))
        return cls(ent, alg.max_degree)


def regrade(obj, shift: RegradeShift):
    """Desuspend an object by a regrading shift.

    Graded modules and algebras move down by k_B + k_F; bigraded pages (any
    object with a ``regraded`` method) move (p, q) to (p - k_B, q - k_F).
    Products are carried unchanged.
    """
    if hasattr(obj, "regraded"):
        return obj.regraded(shift)
    if isinstance(obj, GradedAlgebra):
        return obj.shifted(shift.total)
    if isinstance(obj, GradedModuleTable):
        k = shift.total
        return GradedModuleTable(
            {d - k: list(v) for d, v in obj.entries.items()},
            None if obj.truncation is None else obj.truncation - k,
        )
    raise TypeError(f"cannot regrade {type(obj).__name__}")


# ---------------------------------------------------------------------------
# constructions


def tensor(A: GradedAlgebra, B: GradedAlgebra, max_degree: int | None = None,
           sep: str = "|", name: str | None = None, check: bool = True,
           allow_torsion_pairs: bool = False) -> GradedAlgebra:
    """Tensor product with the Koszul sign (a|b)(a'|b') = (-1)^{|b||a'|} aa'|bb'."""
    if A.ring != B.ring:
        raise AlgebraError("tensor factors over different rings")
    ring = A.ring
    if max_degree is None:
        if A.max_degree is not None and B.max_degree is not None:
            max_degree = A.max_degree + B.max_degree
    pairs, basis = [], []
    for i, a in enumerate(A.basis):
        for j, b in enumerate(B.basis):
            d = a.degree + b.degree
            if max_degree is not None and d > max_degree:
                continue
            if a.order and b.order and not ring.is_field:
                if not allow_torsion_pairs and (max_degree is None or d + 1 <= max_degree):
                    raise TorsionKunneth(
                        f"{a.label} (Z/{a.order}) and {b.label} (Z/{b.order}) both torsion; "
                        f"the Tor term in degree {d + 1} is not modeled")
                order = gcd(a.order, b.order)
            else:
                order = a.order or b.order
            pairs.append((i, j))
            basis.append(BasisElement(f"{a.label}{sep}{b.label}", d, order))
    pos = {p: n for n, p in enumerate(pairs)}
    table = {}
    for x, (i, j) in enumerate(pairs):
        for y, (k, l) in enumerate(pairs):
            d = basis[x].degree + basis[y].degree
            if max_degree is not None and d > max_degree:
                continue
            if A.max_degree is not None and A.basis[i].degree + A.basis[k].degree > A.max_degree:
                continue
            if B.max_degree is not None and B.basis[j].degree + B.basis[l].degree > B.max_degree:
                continue
            ab = A.table.get((i, k))
            bb = B.table.get((j, l))
            if not ab or not bb:
                continue
            s = sign(B.basis[j].degree * A.basis[k].degree)
            out = {}
            for u, cu in ab.items():
                for v, cv in bb.items():
                    z = pos.get((u, v))
                    if z is not None:
                        out[z] = out.get(z, 0) + s * cu * cv
            if out:
                table[(x, y)] = out
    unit = None
    if A.unit is not None and B.unit is not None:
        unit = pos.get((A.unit, B.unit))
    gens = []
    if A.unit is not None and B.unit is not None:
        gens = [pos[(g, B.unit)] for g in A.generators if (g, B.unit) in pos]
        gens += [pos[(A.unit, h)] for h in B.generators if (A.unit, h) in pos]
    else:
        gens = None
    T = GradedAlgebra(name or f"{A.name} (x) {B.name}", basis, table, unit, ring, gens,
                      max_degree, A.commutative and B.commutative, check=check)
    T.pairs = pairs
    return T


def multiply(A: GradedAlgebra, x, y) -> dict:
    """Product of two elements given as labels, indices or coefficient dicts."""
    return A.multiply(A.element(x), A.element(y))


def truncated_polynomial_cup(gens: Iterable[tuple], ring: Ring = ZZ, name: str = "H^*") -> GradedAlgebra:
    """Cohomology ring (x) Z[x_i]/(x_i^{h_i}) from (label, degree, height).

    Height 2 gives the cohomology of a sphere; a product of spheres is the
    tensor product of those factors.
    """
    alg = None
    for label, deg, height in gens:
        if deg % 2 and height > 2:
            raise AlgebraError("odd classes square to zero; height must be 2")
        basis = [BasisElement("1" if e == 0 else (label if e == 1 else f"{label}^{e}"), deg * e)
                 for e in range(height)]
        table = {(a, b): {a + b: 1} for a in range(height) for b in range(height) if a + b < height}
        factor = GradedAlgebra(label, basis, table, 0, ring, generators=[1] if height > 1 else [])
        alg = factor if alg is None else _merge_tensor(alg, factor)
    if alg is None:
        alg = GradedAlgebra(name, [BasisElement("1", 0)], {(0, 0): {0: 1}}, 0, ring)
    alg.name = name
    return alg


def _merge_tensor(A, B):
    T = tensor(A, B, sep="*", check=False)
    # tidy monomial labels: drop unit factors
    mapping = {}
    for b in T.basis:
        parts = [p for p in b.label.split("*") if p != "1"]
        mapping[b.label] = "*".join(parts) if parts else "1"
    return T.relabeled(mapping)


def intersection_from_cup(cup: GradedAlgebra, m: int, labels: Mapping[str, str] | None = None,
                          name: str = "HH_*(M)", manifold: str = "M") -> GradedAlgebra:
    """Intersection algebra from a Poincare-duality cohomology ring.

    A class of cohomological degree k becomes a class of degree -k (that is,
    homological degree m - k, desuspended by m), and the product is the cup
    product transported along this identification.  The unit maps to the
    fundamental class [M] in degree 0 and the top class to the point class
    in degree -m.
    """
    ring = cup.ring
    top = [i for i, b in enumerate(cup.basis) if b.degree == m]
    free_top = [i for i in top if not cup.basis[i].order]
    if len(free_top) != 1 or any(cup.basis[i].degree > m or cup.basis[i].degree < 0 for i in range(len(cup.basis))):
        raise NotPoincareDuality(f"top degree {m} must hold exactly one free class")
    t = free_top[0]
    if cup.unit is None:
        raise NotPoincareDuality("cohomology ring has no unit")
    for k in range(0, m + 1):
        lo = [i for i in cup.in_degree(k) if not cup.basis[i].order]
        hi = [i for i in cup.in_degree(m - k) if not cup.basis[i].order]
        if len(lo) != len(hi):
            raise NotPoincareDuality(f"Betti numbers in degrees {k} and {m - k} differ")
        if not lo:
            continue
        P = Matrix([[cup.table.get((i, j), {}).get(t, 0) for j in hi] for i in lo])
        snf = smith_normal_form(P, ring, track=False)
        diag = snf.diagonal
        if len(diag) != len(lo) or not all(d and ring.is_unit(d) for d in diag):
            raise NotPoincareDuality(f"cup pairing H^{k} x H^{m - k} is not perfect")
    labels = dict(labels or {})
    basis = []
    for i, b in enumerate(cup.basis):
        if i == cup.unit:
            lab = labels.get(b.label, f"[{manifold}]")
        elif i == t:
            lab = labels.get(b.label, "pt")
        else:
            lab = labels.get(b.label, f"D{b.label}")
        basis.append(BasisElement(lab, -b.degree, b.order))
    return GradedAlgebra(name, basis, cup.table, cup.unit, ring, cup.generators, None,
                         commutative=cup.commutative)


def polynomial_algebra(gens: Sequence[tuple], max_degree: int, ring: Ring = ZZ,
                       name: str = "P", unit_label: str = "1") -> GradedAlgebra:
    """Free graded-commutative algebra truncated at max_degree.

    gens are (label, degree) or (label, degree, torsion).  Even generators are
    polynomial, odd ones exterior.  A monomial involving a generator of
    torsion t has additive order t (gcd over its torsion generators), which
    models algebras such as Z[a] (x) Z_2[b] over the integers.
    """
    gens = [tuple(g) + (0,) * (3 - len(g)) for g in gens]
    for _, d, _ in gens:
        if d <= 0:
            raise AlgebraError("polynomial generators need positive degree")
    monos = [()]
    for gi, (lab, d, _) in enumerate(gens):
        new = []
        for mono in monos:
            deg0 = sum(gens[k][1] * e for k, e in enumerate(mono))
            e = 0
            while deg0 + e * d <= max_degree:
                new.append(mono + (e,))
                e += 1
                if d % 2 and e > 1:
                    break
        monos = new
    monos = [m + (0,) * (len(gens) - len(m)) for m in monos]
    monos.sort(key=lambda m: (sum(gens[k][1] * e for k, e in enumerate(m)), tuple(-e for e in m)))

    def label(m):
        parts = []
        for (lab, _, _), e in zip(gens, m):
            if e == 1:
                parts.append(lab)
            elif e > 1:
                parts.append(f"{lab}^{e}")
        return "*".join(parts) if parts else unit_label

    def order(m):
        o = 0
        for (_, _, t), e in zip(gens, m):
            if e and t:
                o = gcd(o, t) if o else t
        return o

    basis = [BasisElement(label(m), sum(gens[k][1] * e for k, e in enumerate(m)), order(m))
             for m in monos]
    pos = {m: i for i, m in enumerate(monos)}
    table = {}
    for i, a in enumerate(monos):
        for j, b in enumerate(monos):
            c = tuple(x + y for x, y in zip(a, b))
            if c not in pos:
                continue
            # sign from moving odd generators of b past odd generators of a
            s = 0
            for k, eb in enumerate(b):
                if eb and gens[k][1] % 2:
                    s += sum(ea for l, ea in enumerate(a) if l > k and gens[l][1] % 2)
            if any(e > 1 for k, e in enumerate(c) if gens[k][1] % 2):
                continue
            table[(i, j)] = {pos[c]: sign(s)}
    gen_idx = [pos[tuple(int(k == g) for k in range(len(gens)))] for g in range(len(gens))
               if tuple(int(k == g) for k in range(len(gens))) in pos]
    return GradedAlgebra(name, basis, table, pos[(0,) * len(gens)], ring, gen_idx,
                         max_degree, commutative=True)


def tensor_algebra_one(label: str, degree: int, max_degree: int, ring: Ring = ZZ,
                       name: str = "T", unit_label: str = "1") -> GradedAlgebra:
    """T(x) on a single generator: basis x^k with x^i x^j = x^{i+j}, no signs.

    For odd degree this is not graded-commutative (it is the Pontryagin
    algebra of the loops on an even sphere).
    """
    if degree <= 0:
        raise AlgebraError("generator degree must be positive")
    n = max_degree // degree
    basis = [BasisElement(unit_label if k == 0 else (label if k == 1 else f"{label}^{k}"), k * degree)
             for k in range(n + 1)]
    table = {(i, j): {i + j: 1} for i in range(n + 1) for j in range(n + 1) if i + j <= n}
    return GradedAlgebra(name, basis, table, 0, ring, [1] if n >= 1 else [], max_degree,
                         commutative=not degree % 2 or n < 2)


def trivial_algebra(ring: Ring = ZZ, label: str = "1", name: str = "k") -> GradedAlgebra:
    return GradedAlgebra(name, [BasisElement(label, 0)], {(0, 0): {0: 1}}, 0, ring, [], None)
