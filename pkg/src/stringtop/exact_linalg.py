"""
Exact linear algebra over the coefficient rings Z, Q and Z/p.

Everything here works on plain Python integers (or Fractions over Q), so
intermediate entries never overflow.  The central routine is a Smith normal
form with deterministic pivoting; homology, subquotients of presented modules
and affine solving are all built on top of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence


class LinalgError(Exception):
    pass


class CompositionNotZero(LinalgError):
    """Raised when d_out . d_in does not vanish."""


# ---------------------------------------------------------------------------
# coefficient rings


class Ring:
    name = "?"
    is_field = False
    characteristic = 0

    def __call__(self, x):
        raise NotImplementedError

    def is_unit(self, x) -> bool:
        raise NotImplementedError

    def inv(self, x):
        raise NotImplementedError

    def quo(self, a, b):
        """Euclidean quotient: a - quo(a, b) * b is smaller than b."""
        raise NotImplementedError

    def size(self, x) -> int:
        raise NotImplementedError

    def divides(self, a, b) -> bool:
        """True when a divides b."""
        if not a:
            return not b
        return not (b - self.quo(b, a) * a)

    def __repr__(self):
        return self.name

    def __eq__(self, other):
        return isinstance(other, Ring) and other.name == self.name

    def __hash__(self):
        return hash(self.name)


class IntegerRing(Ring):
    name = "Z"

    def __call__(self, x):
        if isinstance(x, Fraction):
            if x.denominator != 1:
                raise ValueError(f"{x} is not an integer")
            return int(x.numerator)
        return int(x)

    def is_unit(self, x):
        return x in (1, -1)

    def inv(self, x):
        if x not in (1, -1):
            raise ZeroDivisionError(f"{x} is not invertible in Z")
        return x

    def quo(self, a, b):
        return a // b

    def size(self, x):
        return abs(x)


class RationalField(Ring):
    name = "Q"
    is_field = True

    def __call__(self, x):
        return Fraction(x)

    def is_unit(self, x):
        return x != 0

    def inv(self, x):
        return 1 / Fraction(x)

    def quo(self, a, b):
        return Fraction(a) / b

    def size(self, x):
        return 1 if x else 0


class PrimeField(Ring):
    is_field = True

    def __init__(self, p: int):
        if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            raise ValueError(f"Z/{p} is not a prime field")
        self.p = p
        self.characteristic = p
        self.name = f"Z/{p}"

    def __call__(self, x):
        if isinstance(x, Fraction):
            return (x.numerator * pow(x.denominator, -1, self.p)) % self.p
        return int(x) % self.p

    def is_unit(self, x):
        return x % self.p != 0

    def inv(self, x):
        return pow(x, -1, self.p)

    def quo(self, a, b):
        return (a * pow(b, -1, self.p)) % self.p

    def size(self, x):
        return 1 if x % self.p else 0


ZZ = IntegerRing()
QQ = RationalField()
_FIELDS = {}


def GF(p: int) -> PrimeField:
    if p not in _FIELDS:
        _FIELDS[p] = PrimeField(p)
    return _FIELDS[p]


def get_ring(name: str) -> Ring:
    """Parse 'Z', 'Q', 'Z/5', 'Z5' or 'F5'."""
    s = name.strip().upper().replace("ℤ", "Z").replace("ℚ", "Q")
    if s in ("Z", "ZZ"):
        return ZZ
    if s in ("Q", "QQ"):
        return QQ
    for prefix in ("Z/", "ZMOD", "F", "GF", "Z"):
        if s.startswith(prefix) and s[len(prefix):].isdigit():
            return GF(int(s[len(prefix):]))
    raise ValueError(f"unknown coefficient ring {name!r}")


# ---------------------------------------------------------------------------
# matrices


class Matrix:
    """Dense matrix of exact scalars with an explicit shape.

    Empty matrices keep their shape, which matters for chain complexes with
    zero-dimensional groups.
    """

    __slots__ = ("nrows", "ncols", "rows")

    def __init__(self, rows: Sequence[Sequence] = (), ncols: int | None = None):
        self.rows = [list(r) for r in rows]
        self.nrows = len(self.rows)
        if ncols is None:
            ncols = len(self.rows[0]) if self.rows else 0
        self.ncols = ncols
        for r in self.rows:
            if len(r) != ncols:
                raise ValueError("ragged matrix")

    @classmethod
    def zeros(cls, m: int, n: int) -> "Matrix":
        return cls([[0] * n for _ in range(m)], n)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence], nrows: int) -> "Matrix":
        return cls([[c[i] for c in cols] for i in range(nrows)], len(cols))

    @classmethod
    def diagonal(cls, entries: Sequence, m: int | None = None, n: int | None = None):
        m = len(entries) if m is None else m
        n = len(entries) if n is None else n
        out = cls.zeros(m, n)
        for i, e in enumerate(entries):
            out.rows[i][i] = e
        return out

    @property
    def shape(self):
        return self.nrows, self.ncols

    def copy(self) -> "Matrix":
        return Matrix(self.rows, self.ncols)

    def column(self, j: int) -> list:
        return [r[j] for r in self.rows]

    def columns(self) -> list[list]:
        return [self.column(j) for j in range(self.ncols)]

    def transpose(self) -> "Matrix":
        return Matrix.from_columns(self.rows, self.ncols)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
            cols = other.columns()
            return Matrix(
                [[sum(a * b for a, b in zip(r, c) if a and b) for c in cols] for r in self.rows],
                other.ncols,
            )
        v = list(other)
        if len(v) != self.ncols:
            raise ValueError("shape mismatch in matrix-vector product")
        return [sum(a * b for a, b in zip(r, v) if a and b) for r in self.rows]

    def map(self, f) -> "Matrix":
        return Matrix([[f(x) for x in r] for r in self.rows], self.ncols)

    def is_zero(self) -> bool:
        return all(not x for r in self.rows for x in r)

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.shape == other.shape and self.rows == other.rows

    def __repr__(self):
        return f"Matrix({self.rows!r}, ncols={self.ncols})"


IntMatrix = Matrix


def hstack(a: Matrix, b: Matrix) -> Matrix:
    if a.nrows != b.nrows:
        raise ValueError("row mismatch")
    return Matrix([ra + rb for ra, rb in zip(a.rows, b.rows)], a.ncols + b.ncols)


# ---------------------------------------------------------------------------
# finitely generated abelian groups


@dataclass(frozen=True)
class FgAbelianGroup:
    free_rank: int = 0
    torsion: tuple = ()

    def __post_init__(self):
        tors = tuple(int(t) for t in self.torsion)
        if any(t < 2 for t in tors):
            raise ValueError("torsion coefficients must be >= 2")
        for a, b in zip(tors, tors[1:]):
            if b % a:
                raise ValueError("torsion coefficients must form a divisibility chain")
        object.__setattr__(self, "torsion", tors)

    @classmethod
    def from_orders(cls, orders: Iterable[int]) -> "FgAbelianGroup":
        """Group Z^a + sum Z/t from per-generator orders (0 = infinite).

        Orders need not be in divisibility order; the invariant factors are
        recomputed.
        """
        orders = [abs(int(o)) for o in orders]
        free = sum(1 for o in orders if o == 0)
        tors = [o for o in orders if o > 1]
        return cls(free, tuple(invariant_factors(tors)))

    @property
    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    @property
    def rank(self) -> int:
        """Number of cyclic summands."""
        return self.free_rank + len(self.torsion)

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


def invariant_factors(orders: Sequence[int]) -> list[int]:
    """Invariant factors of a direct sum of finite cyclic groups."""
    if not orders:
        return []
    snf = smith_normal_form(Matrix.diagonal(list(orders)), ZZ, track=False)
    return [d for d in snf.diagonal if d > 1]


def group_str(orders: Sequence[int], ring: Ring) -> str:
    """Describe a module from per-generator orders over the given ring."""
    if ring.is_field:
        n = len(orders)
        base = ring.name
        return "0" if n == 0 else (base if n == 1 else f"{base}^{n}")
    return str(FgAbelianGroup.from_orders(orders))


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithDecomposition:
    U: Matrix
    D: Matrix
    V: Matrix
    Uinv: Matrix | None = None

    @property
    def diagonal(self) -> list:
        return [self.D.rows[i][i] for i in range(min(self.D.shape))]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)

    def __iter__(self):
        return iter((self.U, self.D, self.V))


class _Tracker:
    """Accumulates elementary operations applied during reduction."""

    def __init__(self, m, n, track, track_inverse, rhs):
        self.U = [[int(i == j) for j in range(m)] for i in range(m)] if track else None
        self.Uinv = [[int(i == j) for j in range(m)] for i in range(m)] if track_inverse else None
        self.V = [[int(i == j) for j in range(n)] for i in range(n)] if track else None
        self.rhs = rhs

    def row_addmul(self, i, t, q, ring):
        # row_i -= q * row_t
        if self.U is not None:
            ri, rt = self.U[i], self.U[t]
            for k, x in enumerate(rt):
                if x:
                    ri[k] = _red(ring, ri[k] - q * x)
        if self.Uinv is not None:
            for r in self.Uinv:
                if r[i]:
                    r[t] = _red(ring, r[t] + q * r[i])
        if self.rhs is not None and self.rhs[t]:
            self.rhs[i] = _red(ring, self.rhs[i] - q * self.rhs[t])

    def row_swap(self, i, t):
        if i == t:
            return
        if self.U is not None:
            self.U[i], self.U[t] = self.U[t], self.U[i]
        if self.Uinv is not None:
            for r in self.Uinv:
                r[i], r[t] = r[t], r[i]
        if self.rhs is not None:
            self.rhs[i], self.rhs[t] = self.rhs[t], self.rhs[i]

    def row_scale(self, t, c, ring):
        if self.U is not None:
            self.U[t] = [_red(ring, c * x) for x in self.U[t]]
        if self.Uinv is not None:
            ci = ring.inv(c)
            for r in self.Uinv:
                r[t] = _red(ring, r[t] * ci)
        if self.rhs is not None:
            self.rhs[t] = _red(ring, c * self.rhs[t])

    def col_addmul(self, j, t, q, ring):
        # col_j -= q * col_t
        if self.V is not None:
            for r in self.V:
                if r[t]:
                    r[j] = _red(ring, r[j] - q * r[t])

    def col_swap(self, j, t):
        if self.V is not None and j != t:
            for r in self.V:
                r[j], r[t] = r[t], r[j]


def _red(ring, x):
    if ring.characteristic:
        return x % ring.characteristic
    return x


def _snf_inplace(D, m, n, ring, tr: _Tracker):
    t = 0
    while t < min(m, n):
        # smallest-size nonzero pivot in the trailing block, lowest index on ties
        best = None
        for i in range(t, m):
            row = D[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    s = ring.size(x)
                    if best is None or s < best[0]:
                        best = (s, i, j)
                        if s == 1:
                            break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, pi, pj = best
        _swap_rows(D, pi, t)
        tr.row_swap(pi, t)
        _swap_cols(D, pj, t)
        tr.col_swap(pj, t)
        while True:
            piv = D[t][t]
            clean = True
            for i in range(t + 1, m):
                x = D[i][t]
                if x:
                    q = ring.quo(x, piv)
                    _row_addmul(D, i, t, q, ring, t)
                    tr.row_addmul(i, t, q, ring)
                    if D[i][t]:
                        clean = False
            for j in range(t + 1, n):
                x = D[t][j]
                if x:
                    q = ring.quo(x, piv)
                    for i in range(t, m):
                        if D[i][t]:
                            D[i][j] = _red(ring, D[i][j] - q * D[i][t])
                    tr.col_addmul(j, t, q, ring)
                    if D[t][j]:
                        clean = False
            if not clean:
                # move the smallest leftover of row/column t into the pivot
                cand = [(ring.size(D[i][t]), 0, i) for i in range(t + 1, m) if D[i][t]]
                cand += [(ring.size(D[t][j]), 1, j) for j in range(t + 1, n) if D[t][j]]
                s, kind, k = min(cand)
                if s < ring.size(D[t][t]):
                    if kind == 0:
                        _swap_rows(D, k, t)
                        tr.row_swap(k, t)
                    else:
                        _swap_cols(D, k, t)
                        tr.col_swap(k, t)
                continue
            if ring.is_field:
                break
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if D[i][j] and D[i][j] % piv:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            # row_t += row_bad, then reduce again
            _row_addmul(D, t, bad, -1, ring, 0)
            tr.row_addmul(t, bad, -1, ring)
        piv = D[t][t]
        if ring.is_field and piv != 1:
            c = ring.inv(piv)
            D[t] = [_red(ring, c * x) for x in D[t]]
            tr.row_scale(t, c, ring)
        elif not ring.is_field and piv < 0:
            D[t] = [-x for x in D[t]]
            tr.row_scale(t, -1, ring)
        t += 1


def _swap_rows(D, i, t):
    if i != t:
        D[i], D[t] = D[t], D[i]


def _swap_cols(D, j, t):
    if j != t:
        for r in D:
            r[j], r[t] = r[t], r[j]


def _row_addmul(D, i, t, q, ring, start):
    ri, rt = D[i], D[t]
    for k in range(start, len(rt)):
        x = rt[k]
        if x:
            ri[k] = _red(ring, ri[k] - q * x)


def smith_normal_form(A: Matrix, ring: Ring = ZZ, track: bool = True,
                      track_inverse: bool = False) -> SmithDecomposition:
    """Smith normal form U.A.V = D over a Euclidean coefficient ring.

    Pivots are chosen deterministically (smallest size, then lowest row and
    column index), so equal inputs give equal decompositions.  Over a field
    the nonzero diagonal entries are normalized to 1.
    """
    m, n = A.shape
    D = [[ring(x) for x in r] for r in A.rows]
    tr = _Tracker(m, n, track, track_inverse, None)
    _snf_inplace(D, m, n, ring, tr)
    ident_m, ident_n = Matrix.identity(m), Matrix.identity(n)
    return SmithDecomposition(
        Matrix(tr.U, m) if track else ident_m,
        Matrix(D, n),
        Matrix(tr.V, n) if track else ident_n,
        Matrix(tr.Uinv, m) if track_inverse else None,
    )


def rank(A: Matrix, ring: Ring = QQ) -> int:
    return smith_normal_form(A, ring, track=False).rank


def is_smith_form(D: Matrix, ring: Ring = ZZ) -> bool:
    m, n = D.shape
    for i in range(m):
        for j in range(n):
            if i != j and D.rows[i][j]:
                return False
    diag = [D.rows[i][i] for i in range(min(m, n))]
    seen_zero = False
    for a, b in zip(diag, diag[1:] + [None]):
        if not ring.is_field and a < 0:
            return False
        if a == 0:
            seen_zero = True
        elif seen_zero:
            return False
        if b is not None and a and b and not ring.divides(a, b):
            return False
    return True


# ---------------------------------------------------------------------------
# solving


class _NoSolution:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NoSolution = _NoSolution()


@dataclass
class AffineSolution:
    """All solutions x0 + span(kernel) of a linear system."""

    particular: list
    kernel: list  # list of vectors

    def determined(self, i: int, modulus: int = 0) -> bool:
        if modulus:
            return all(v[i] % modulus == 0 for v in self.kernel)
        return all(not v[i] for v in self.kernel)


def solve_system(A: Matrix, b: Sequence, ring: Ring = ZZ, moduli: Sequence[int] | None = None):
    """Solve A.x = b, with row i only required to hold modulo moduli[i].

    Returns an AffineSolution over the ring (slack variables for the modular
    rows are eliminated from the answer) or NoSolution.
    """
    m, n = A.shape
    rows = [[ring(x) for x in r] for r in A.rows]
    extra = 0
    if moduli is not None and not ring.is_field:
        mod_rows = [i for i, t in enumerate(moduli) if t]
        extra = len(mod_rows)
        for r in rows:
            r.extend([0] * extra)
        for k, i in enumerate(mod_rows):
            rows[i][n + k] = moduli[i]
    N = n + extra
    rhs = [ring(x) for x in b]
    tr = _Tracker(m, N, False, False, rhs)
    tr.V = [[int(i == j) for j in range(N)] for i in range(N)]
    _snf_inplace(rows, m, N, ring, tr)
    V = tr.V
    y = [0] * N
    k = min(m, N)
    r = 0
    for i in range(k):
        d = rows[i][i]
        if not d:
            break
        if not ring.divides(d, rhs[i]):
            return NoSolution
        y[i] = ring.quo(rhs[i], d)
        r += 1
    if any(rhs[i] for i in range(r, m)):
        return NoSolution
    x = [_red(ring, sum(V[j][i] * y[i] for i in range(r) if y[i])) for j in range(n)]
    kernel = [[V[j][i] for j in range(n)] for i in range(r, N)]
    kernel = [v for v in kernel if any(v)]
    return AffineSolution(x, kernel)


def solve_in_image(A: Matrix, b: Sequence, ring: Ring = ZZ):
    """Some x with A.x = b over the ring, or NoSolution."""
    sol = solve_system(A, b, ring)
    if sol is NoSolution:
        return NoSolution
    return sol.particular


def kernel_basis(A: Matrix, ring: Ring = ZZ) -> list[list]:
    """A basis of {x : A.x = 0} (saturated over Z)."""
    snf = smith_normal_form(A, ring)
    r = snf.rank
    return [snf.V.column(j) for j in range(r, A.ncols)]


# ---------------------------------------------------------------------------
# sublattices and subquotients


class Lattice:
    """Submodule of R^n spanned by given vectors, with coordinates."""

    def __init__(self, n: int, gens: Sequence[Sequence], ring: Ring = ZZ):
        self.n = n
        self.ring = ring
        gens = [list(g) for g in gens if any(g)]
        S = Matrix.from_columns(gens, n) if gens else Matrix.zeros(n, 0)
        snf = smith_normal_form(S, ring, track=True, track_inverse=True)
        self._U = snf.U
        self._diag = snf.diagonal[: snf.rank]
        Uinv = snf.Uinv
        self.basis = [
            [_red(ring, d * x) for x in Uinv.column(l)] for l, d in enumerate(self._diag)
        ]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def coordinates(self, x: Sequence):
        """Coordinates of x in self.basis, or None when x is not in the lattice."""
        y = self._U @ [self.ring(v) for v in x]
        y = [_red(self.ring, v) for v in y]
        out = []
        for l, d in enumerate(self._diag):
            if not self.ring.divides(d, y[l]):
                return None
            out.append(self.ring.quo(y[l], d))
        if any(y[l] for l in range(len(self._diag), len(y))):
            return None
        return out

    def contains(self, x) -> bool:
        return self.coordinates(x) is not None


@dataclass
class Subquotient:
    """H = K / N for a kernel K and image N inside R^n / relations.

    generators are vectors of R^n (cycle representatives); orders give the
    order of each generator in H (0 means infinite / free).
    """

    ring: Ring
    n: int
    generators: list
    orders: list
    _kernel: Lattice = field(repr=False)
    _U: Matrix = field(repr=False)
    _keep: list = field(repr=False)
    _all_diag: list = field(repr=False)

    @property
    def group(self) -> FgAbelianGroup:
        if self.ring.is_field:
            return FgAbelianGroup(len(self.generators), ())
        return FgAbelianGroup.from_orders(self.orders)

    @property
    def basis_lift(self) -> list:
        return self.generators

    def __iter__(self):
        return iter((self.group, self.basis_lift))

    def is_cycle(self, z: Sequence) -> bool:
        return self._kernel.contains(z)

    def coordinates(self, z: Sequence):
        """Coordinates of the class of a cycle z in terms of the generators.

        Torsion coordinates are reduced modulo their order.  Raises
        ValueError when z is not a cycle.
        """
        kc = self._kernel.coordinates(z)
        if kc is None:
            raise ValueError("vector is not a cycle")
        y = self._U @ kc
        out = []
        for l, o in zip(self._keep, self.orders):
            v = _red(self.ring, y[l])
            if o:
                v %= o
            out.append(v)
        return out

    def is_boundary(self, z) -> bool:
        return self.is_cycle(z) and not any(self.coordinates(z))


def subquotient(n: int, incoming: Matrix, outgoing: Matrix, ring: Ring = ZZ,
                orders: Sequence[int] | None = None,
                target_orders: Sequence[int] | None = None) -> Subquotient:
    """Homology at the middle of A --incoming--> M --outgoing--> C.

    M = R^n / (orders[i] e_i) and C has per-coordinate orders target_orders
    (0 = free).  Over a field all orders must be 0.
    """
    orders = list(orders) if orders is not None else [0] * n
    c = outgoing.nrows
    target_orders = list(target_orders) if target_orders is not None else [0] * c
    if incoming.nrows != n or outgoing.ncols != n:
        raise ValueError("shape mismatch in subquotient")
    # well-definedness: outgoing o incoming == 0 modulo target relations
    comp = outgoing @ incoming
    for i, row in enumerate(comp.rows):
        t = target_orders[i]
        for x in row:
            x = _red(ring, x)
            if (x % t if t else x):
                raise CompositionNotZero("outgoing o incoming is not zero")
    # kernel of outgoing modulo target relations
    tors_cols = [i for i, t in enumerate(target_orders) if t]
    G = Matrix(
        [list(r) + [target_orders[i] if i == k else 0 for k in tors_cols]
         for i, r in enumerate(outgoing.rows)],
        n + len(tors_cols),
    )
    gens = [v[:n] for v in kernel_basis(G, ring)] if c else [
        [int(i == j) for i in range(n)] for j in range(n)
    ]
    rel = [[orders[i] if i == j else 0 for i in range(n)] for j in range(n) if orders[j]]
    K = Lattice(n, gens + rel, ring)
    # image generators in kernel coordinates
    img = [incoming.column(j) for j in range(incoming.ncols)] + rel
    Y_cols = []
    for v in img:
        kc = K.coordinates(v)
        if kc is None:
            raise CompositionNotZero("image is not contained in the kernel")
        Y_cols.append(kc)
    k = K.rank
    Y = Matrix.from_columns(Y_cols, k) if Y_cols else Matrix.zeros(k, 0)
    snf = smith_normal_form(Y, ring, track=True, track_inverse=True)
    diag = snf.diagonal + [0] * (k - min(Y.shape))
    keep, ords, gens_out = [], [], []
    Kb = Matrix.from_columns(K.basis, n) if K.basis else Matrix.zeros(n, 0)
    for l in range(k):
        d = diag[l] if l < len(diag) else 0
        if d and ring.is_unit(d):
            continue
        keep.append(l)
        ords.append(0 if not d else int(d))
        col = snf.Uinv.column(l)
        gens_out.append([_red(ring, x) for x in (Kb @ col)])
    return Subquotient(ring, n, gens_out, ords, K, snf.U, keep, diag)


def homology_at(d_in: Matrix, d_out: Matrix, ring: Ring = ZZ) -> Subquotient:
    """ker(d_out) / im(d_in) for free modules.

    The result unpacks as (group, basis_lift) and also carries a
    coordinates() map from cycles to the chosen generators.
    """
    if d_in.nrows != d_out.ncols:
        raise ValueError("d_in and d_out are not composable")
    comp = d_out @ d_in
    if any(_red(ring, x) for r in comp.rows for x in r):
        raise CompositionNotZero("d_out . d_in != 0")
    return subquotient(d_in.nrows, d_in, d_out, ring)


def brute_force_homology_dim(d_in: Matrix, d_out: Matrix, p: int) -> int:
    """dim ker/im over Z/p by enumerating all vectors (tiny inputs only)."""
    from itertools import product

    n = d_in.nrows
    ker = 0
    vecs = list(product(range(p), repeat=n))
    for v in vecs:
        if all(x % p == 0 for x in d_out @ list(v)):
            ker += 1
    img = set()
    for w in product(range(p), repeat=d_in.ncols):
        img.add(tuple(x % p for x in d_in @ list(w)))
    # |ker| = p^a, |im| = p^b
    import math

    a = round(math.log(ker, p))
    b = round(math.log(len(img), p))
    return a - b


def content(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g
