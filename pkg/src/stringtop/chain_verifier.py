"""
Desk-scale chain-level checks of the filtration shift of a shriek map.

Simplices are vertex tuples.  A tuple with a repeated consecutive vertex is
degenerate and vanishes in normalized chains; faces delete one vertex.  This
covers ordered simplicial complexes and their products (chains in the
product order), which is all the corpus needs.

A shriek map is modelled by explicit tube data: a subcomplex T of the
ambient space, its boundary subcomplex, a relative Thom cocycle on (T, dT)
and a vertex retraction of T onto the submanifold.  The chain map is

    collapse onto (T, dT)  ->  cap with the Thom cocycle  ->  retract.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exact_linalg import ZZ, GF, Matrix, Ring, subquotient


class ChainError(Exception):
    pass


class MissingTubeData(ChainError):
    pass


class SimplicialIdentityError(ChainError):
    pass


# ---------------------------------------------------------------------------
# simplices and chains


def face(s: tuple, i: int) -> tuple:
    return s[:i] + s[i + 1:]


def is_degenerate(s: tuple) -> bool:
    return any(s[i] == s[i + 1] for i in range(len(s) - 1))


def dedupe(s: tuple) -> tuple:
    """Nondegenerate core: drop consecutive repeats."""
    out = []
    for v in s:
        if not out or out[-1] != v:
            out.append(v)
    return tuple(out)


def normalize(chain: Mapping[tuple, object], ring: Ring = ZZ) -> dict:
    out = {}
    for s, c in chain.items():
        if is_degenerate(s):
            continue
        c = ring(c)
        if c:
            out[s] = c
    return out


def add_chains(a, b, ring: Ring = ZZ, scale=1) -> dict:
    out = dict(a)
    for s, c in b.items():
        out[s] = out.get(s, 0) + scale * c
    return normalize(out, ring)


def boundary(chain: Mapping[tuple, object], ring: Ring = ZZ) -> dict:
    out = {}
    for s, c in chain.items():
        if len(s) < 2:
            continue
        for i in range(len(s)):
            f = face(s, i)
            out[f] = out.get(f, 0) + (-1) ** i * c
    return normalize(out, ring)


def push_forward(chain: Mapping[tuple, object], vmap: Mapping, ring: Ring = ZZ) -> dict:
    out = {}
    for s, c in chain.items():
        t = tuple(vmap[v] for v in s)
        out[t] = out.get(t, 0) + c
    return normalize(out, ring)


class SimplicialSet:
    """Finite simplicial set given by its nondegenerate simplices.

    Closure under faces is checked on construction; with simplices stored as
    vertex tuples the simplicial identities then hold automatically.
    """

    def __init__(self, simplices: Iterable[tuple], name: str = "", check: bool = True):
        self.name = name
        self.simplices = sorted({tuple(s) for s in simplices}, key=lambda s: (len(s), [str(v) for v in s]))
        self._set = set(self.simplices)
        if check:
            for s in self.simplices:
                if is_degenerate(s):
                    raise SimplicialIdentityError(f"{s} is degenerate")
                if len(set(s)) != len(s):
                    raise SimplicialIdentityError(f"{s} repeats a vertex")
                if len(s) > 1:
                    for i in range(len(s)):
                        if face(s, i) not in self._set:
                            raise SimplicialIdentityError(f"face {face(s, i)} of {s} is missing")

    @classmethod
    def from_facets(cls, facets: Iterable[Sequence], name: str = "") -> "SimplicialSet":
        out = set()
        for f in facets:
            f = tuple(f)
            for k in range(1, len(f) + 1):
                out.update(combinations(f, k))
        return cls(out, name)

    @classmethod
    def product(cls, A: "SimplicialSet", B: "SimplicialSet", name: str = "") -> "SimplicialSet":
        """Product: strictly increasing chains of vertex pairs (lattice paths)."""
        out = set()
        for a in A.facets():
            for b in B.facets():
                for path in _lattice_paths(len(a) - 1, len(b) - 1):
                    verts = tuple((a[i], b[j]) for i, j in path)
                    for k in range(1, len(verts) + 1):
                        out.update(combinations(verts, k))
        return cls(out, name or f"{A.name}x{B.name}")

    def facets(self) -> list[tuple]:
        out = []
        for s in self.simplices:
            if not any(len(t) == len(s) + 1 and set(s) <= set(t) and _is_subsequence(s, t)
                       for t in self.simplices):
                out.append(s)
        return out

    def __contains__(self, s) -> bool:
        return tuple(s) in self._set

    def __len__(self):
        return len(self.simplices)

    @property
    def dim(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def of_dim(self, n: int) -> list[tuple]:
        return [s for s in self.simplices if len(s) == n + 1]

    def vertices(self) -> list:
        return [s[0] for s in self.of_dim(0)]

    def subcomplex(self, facets: Iterable[Sequence], name: str = "") -> "SimplicialSet":
        sub = SimplicialSet.from_facets(facets, name)
        for s in sub.simplices:
            if s not in self:
                raise ChainError(f"{s} is not a simplex of {self.name}")
        return sub

    def boundary_matrix(self, n: int, ring: Ring = ZZ, rows=None, cols=None) -> Matrix:
        rows = self.of_dim(n - 1) if rows is None else rows
        cols = self.of_dim(n) if cols is None else cols
        pos = {s: i for i, s in enumerate(rows)}
        M = Matrix.zeros(len(rows), len(cols))
        for j, s in enumerate(cols):
            for f, c in boundary({s: 1}, ring).items():
                if f in pos:
                    M.rows[pos[f]][j] = c
        return M


def _is_subsequence(s, t) -> bool:
    it = iter(t)
    return all(v in it for v in s)


def _lattice_paths(a: int, b: int):
    """Monotone staircase paths from (0,0) to (a,b)."""
    if a == 0 and b == 0:
        yield [(0, 0)]
        return
    if a > 0:
        for p in _lattice_paths(a - 1, b):
            yield p + [(a, b)]
    if b > 0:
        for p in _lattice_paths(a, b - 1):
            yield p + [(a, b)]


# ---------------------------------------------------------------------------
# filtration


def serre_filtration(s: tuple, proj: Mapping) -> int:
    """Least p with proj(s) = Sigma o (i_0..i_q) for a p-simplex Sigma.

    For an order-preserving vertex map the factorizations are through the
    nondegenerate core of the projected tuple, so p = (#core vertices) - 1.
    """
    image = tuple(proj[v] for v in s)
    return len(dedupe(image)) - 1


def chain_filtration(chain: Mapping[tuple, object], proj: Mapping) -> int:
    return max((serre_filtration(s, proj) for s in chain), default=-1)


@dataclass
class FilteredChain:
    chain: dict
    levels: dict  # simplex -> filtration level

    @property
    def level(self) -> int:
        return max(self.levels.values(), default=-1)

    @property
    def degree(self) -> int | None:
        dims = {len(s) - 1 for s in self.chain}
        return dims.pop() if len(dims) == 1 else None


# ---------------------------------------------------------------------------
# cochains and cap products


@dataclass
class ThomCochain:
    """A k-cochain given by its values on k-simplices (zero elsewhere)."""

    k: int
    values: dict
    ring: Ring = ZZ
    allow_degenerate: bool = False

    def __post_init__(self):
        self.values = {tuple(s): self.ring(c) for s, c in self.values.items() if self.ring(c)}
        for s in self.values:
            if len(s) != self.k + 1:
                raise ChainError(f"{s} is not a {self.k}-simplex")
        if not self.allow_degenerate and not self.vanishes_on_degenerates:
            raise ChainError("Thom cochain must vanish on degenerate simplices")

    @property
    def vanishes_on_degenerates(self) -> bool:
        return not any(is_degenerate(s) for s in self.values)

    def __call__(self, s: tuple):
        return self.values.get(tuple(s), 0)

    def coboundary_on(self, s: tuple):
        return sum((-1) ** i * self(face(s, i)) for i in range(len(s)))

    @classmethod
    def pullback(cls, tau: "ThomCochain", proj: Mapping, simplices: Iterable[tuple]) -> "ThomCochain":
        vals = {}
        for s in simplices:
            if len(s) == tau.k + 1:
                c = tau(tuple(proj[v] for v in s))
                if c:
                    vals[s] = c
        return cls(tau.k, vals, tau.ring)


def cap_product(tau: ThomCochain, chain: Mapping[tuple, object], ring: Ring | None = None,
                signed: bool = True) -> dict:
    """Back-face cap: tau cap s = e * tau(s_{n-k}..s_n) * (s_0..s_{n-k}).

    With ``signed`` the sign e is (-1)^{nk}, which gives
    d(tau cap c) = (-1)^k tau cap dc for a cocycle tau; without it e = 1
    and the boundary formula holds with sign +1.
    """
    ring = ring or tau.ring
    k = tau.k
    out = {}
    for s, c in chain.items():
        n = len(s) - 1
        if n < k:
            continue
        v = tau(s[n - k:])
        if not v:
            continue
        e = (-1) ** (n * k) if signed else 1
        front = s[: n - k + 1]
        out[front] = out.get(front, 0) + e * v * c
    return normalize(out, ring)


# ---------------------------------------------------------------------------
# tube data and the chain-level shriek map


@dataclass
class TubeData:
    """Combinatorial stand-in for a tubular neighbourhood of X in X'."""

    ambient: SimplicialSet  # X'
    sub: SimplicialSet  # X
    tube: SimplicialSet  # T, a subcomplex of X'
    tube_boundary: SimplicialSet  # dT, a subcomplex of T
    thom: ThomCochain  # relative cocycle on (T, dT)
    retraction: dict  # vertex map T -> X
    ambient_proj: dict  # vertex map X' -> B'
    sub_proj: dict  # vertex map X -> B
    k_B: int
    k_X: int
    ring: Ring = ZZ
    name: str = ""

    def validate(self):
        if self.thom.k != self.k_X:
            raise ChainError(f"Thom cochain degree {self.thom.k} != codimension {self.k_X}")
        for s in self.tube.simplices:
            if s not in self.ambient:
                raise MissingTubeData(f"tube simplex {s} is not in the ambient space")
        for s in self.tube_boundary.simplices:
            if s not in self.tube:
                raise MissingTubeData(f"boundary simplex {s} is not in the tube")
        # the collapse onto T/dT is a chain map: outside simplices meet T only in dT
        for s in self.ambient.simplices:
            if s in self.tube or len(s) < 2:
                continue
            for i in range(len(s)):
                f = face(s, i)
                if f in self.tube and f not in self.tube_boundary:
                    raise MissingTubeData(f"{s} leaves the tube through {f}, not through its boundary")
        for s in self.tube.simplices:
            for v in s:
                if v not in self.retraction:
                    raise MissingTubeData(f"retraction undefined on vertex {v}")
            img = dedupe(tuple(self.retraction[v] for v in s))
            if img not in self.sub:
                raise MissingTubeData(f"retraction of {s} is not a simplex of the submanifold")
        for s in self.tube_boundary.simplices:
            if len(s) == self.k_X + 1 and self.thom(s):
                raise ChainError(f"Thom cochain is nonzero on boundary simplex {s}")
        for s in self.tube.of_dim(self.k_X + 1):
            if s not in self.tube_boundary and self.ring(self.thom.coboundary_on(s)):
                raise ChainError(f"Thom cochain is not a cocycle on {s}")
        return self


def collapse(chain: Mapping[tuple, object], data: TubeData) -> dict:
    """Thom collapse followed by C(T/dT) -> C(T, dT): keep simplices of T not in dT."""
    return normalize({s: c for s, c in chain.items()
                      if s in data.tube and s not in data.tube_boundary}, data.ring)


def chain_shriek(chain: Mapping[tuple, object], data: TubeData | None, signed: bool = True) -> FilteredChain:
    if data is None:
        raise MissingTubeData("no tube data supplied")
    capped = cap_product(data.thom, collapse(chain, data), data.ring, signed)
    out = push_forward(capped, data.retraction, data.ring)
    return FilteredChain(out, {s: serre_filtration(s, data.sub_proj) for s in out})


# ---------------------------------------------------------------------------
# verification


@dataclass
class FiltrationReport:
    name: str
    k_B: int
    k_X: int
    checked: int = 0
    nonzero: int = 0
    failures: list = field(default_factory=list)
    chain_map_sign: int | None = None
    chain_map_failures: list = field(default_factory=list)
    min_drop: int | None = None

    @property
    def passed(self) -> bool:
        return not self.failures and not self.chain_map_failures

    def lines(self) -> list[str]:
        status = "PASS" if self.passed else "FAIL"
        out = [f"{self.name}: {status} ({self.checked} simplices, {self.nonzero} nonzero images, "
               f"k_B={self.k_B}, k_X={self.k_X}, min filtration drop={self.min_drop}, "
               f"boundary sign={self.chain_map_sign})"]
        out += [f"  counterexample: {f}" for f in self.failures[:10]]
        out += [f"  not a chain map: {f}" for f in self.chain_map_failures[:10]]
        return out


def verify_filtration_shift(data: TubeData, signed: bool = True) -> FiltrationReport:
    """Check every simplex of X' against the shift (-k_B, -k_X).

    The filtration of a chain is the maximum over its simplices and the map
    is linear, so the basis simplices exhaust all chains.
    """
    data.validate()
    rep = FiltrationReport(data.name, data.k_B, data.k_X)
    expected = (-1) ** data.k_X if signed else 1
    for s in data.ambient.simplices:
        rep.checked += 1
        lvl = serre_filtration(s, data.ambient_proj)
        img = chain_shriek({s: 1}, data, signed)
        if img.chain:
            rep.nonzero += 1
        for t, tl in img.levels.items():
            if len(t) - 1 != len(s) - 1 - data.k_X:
                rep.failures.append(f"{s} -> {t}: degree drop {len(s) - len(t)} != {data.k_X}")
            if tl > lvl - data.k_B:
                rep.failures.append(f"{s} (level {lvl}) -> {t} (level {tl})")
            drop = lvl - tl
            rep.min_drop = drop if rep.min_drop is None else min(rep.min_drop, drop)
        lhs = boundary(img.chain, data.ring)
        rhs = chain_shriek(boundary({s: 1}, data.ring), data, signed).chain
        if lhs != normalize({t: expected * c for t, c in rhs.items()}, data.ring):
            rep.chain_map_failures.append(f"{s}: d f_! = {lhs}, f_! d = {rhs}")
    rep.chain_map_sign = expected
    return rep


def relative_homology(X: SimplicialSet, A: SimplicialSet | None, ring: Ring = ZZ) -> dict:
    """H_n(X, A) for every n, as Subquotients on the relative simplices."""
    out = {}
    rel = {n: [s for s in X.of_dim(n) if A is None or s not in A] for n in range(X.dim + 2)}
    rel[-1] = []
    for n in range(X.dim + 1):
        d_out = X.boundary_matrix(n, ring, rel[n - 1], rel[n]) if n > 0 else Matrix.zeros(0, len(rel[n]))
        d_in = X.boundary_matrix(n + 1, ring, rel[n], rel[n + 1])
        out[n] = (rel[n], subquotient(len(rel[n]), d_in, d_out, ring))
    return out


def thom_isomorphism_check(data: TubeData, signed: bool = True) -> dict:
    """Matrix of H_n(T, dT) -> H_{n-k}(X) induced by cap-and-retract, per n.

    For genuine tube data these are the Thom isomorphisms: each matrix is
    square and invertible over the ring.
    """
    ring = data.ring
    HT = relative_homology(data.tube, data.tube_boundary, ring)
    HX = relative_homology(data.sub, None, ring)
    out = {}
    for n, (cells, sq) in HT.items():
        m = n - data.k_X
        if m < 0:
            if sq.generators:
                out[n] = None
            continue
        tcells, tsq = HX.get(m, ([], None))
        cols = []
        for g in sq.generators:
            chain = {s: c for s, c in zip(cells, g) if c}
            img = chain_shriek(chain, data, signed).chain
            vec = [img.get(s, 0) for s in tcells]
            cols.append(tsq.coordinates(vec))
        out[n] = Matrix.from_columns(cols, len(tsq.generators)) if cols else Matrix.zeros(len(tsq.generators), 0)
    return out


def is_isomorphism(M: Matrix | None, ring: Ring = ZZ) -> bool:
    if M is None or M.nrows != M.ncols:
        return False
    if M.nrows == 0:
        return True
    from .exact_linalg import smith_normal_form

    snf = smith_normal_form(M, ring, track=False)
    return snf.rank == M.nrows and all(ring.is_unit(d) for d in snf.diagonal[: M.nrows])


# ---------------------------------------------------------------------------
# corpus


def product_bundle(name: str, base_facets, fiber_facets, embed: str, tube_facets, boundary_facets,
                   thom: Mapping[tuple, object], retraction: Mapping, ring: Ring = ZZ) -> TubeData:
    """Tube data for an embedding of a product bundle B x F induced from one factor.

    With ``embed="base"`` the tube, boundary, Thom cocycle and retraction are
    given in the base B' (the cocycle is pulled back
    along the projection); with ``embed="fiber"`` they live in the fiber F'
    and the base is untouched (second case, k_B = 0).
    """
    B = SimplicialSet.from_facets(base_facets, "B")
    F = SimplicialSet.from_facets(fiber_facets, "F")
    X1 = SimplicialSet.product(B, F, name)
    if embed == "base":
        factor = B
    elif embed == "fiber":
        factor = F
    else:
        raise ChainError(f"embed must be 'base' or 'fiber', not {embed!r}")
    T0 = factor.subcomplex(tube_facets, "T")
    dT0 = factor.subcomplex(boundary_facets, "dT") if boundary_facets else SimplicialSet([], "dT")
    tau0 = ThomCochain(len(next(iter(thom))) - 1, dict(thom), ring)
    k = tau0.k
    # the submanifold of the factor is the image of the retraction
    sub0 = SimplicialSet({dedupe(tuple(retraction[v] for v in s)) for s in T0.simplices}, "N")
    if embed == "base":
        T = SimplicialSet.product(T0, F)
        dT = SimplicialSet.product(dT0, F) if dT0.simplices else SimplicialSet([])
        X = SimplicialSet.product(sub0, F)
        tau = ThomCochain.pullback(tau0, {v: v[0] for s in T.simplices for v in s}, T.simplices)
        ret = {v: (retraction[v[0]], v[1]) for s in T.simplices for v in s}
        sub_proj = {v: v[0] for s in X.simplices for v in s}
        k_B = k
    else:
        T = SimplicialSet.product(B, T0)
        dT = SimplicialSet.product(B, dT0) if dT0.simplices else SimplicialSet([])
        X = SimplicialSet.product(B, sub0)
        tau = ThomCochain.pullback(tau0, {v: v[1] for s in T.simplices for v in s}, T.simplices)
        ret = {v: (v[0], retraction[v[1]]) for s in T.simplices for v in s}
        sub_proj = {v: v[0] for s in X.simplices for v in s}
        k_B = 0
    amb_proj = {v: v[0] for s in X1.simplices for v in s}
    return TubeData(X1, X, T, dT, tau, ret, amb_proj, sub_proj, k_B, k, ring, name).validate()


def interval_point(ring: Ring = ZZ) -> TubeData:
    """Base path 0-1-2, point 1 embedded, fiber an edge: first case with k_B = 1."""
    return product_bundle("interval-point x edge", [(0, 1), (1, 2)], [("a", "b")], "base",
                          [(0, 1), (1, 2)], [(0,), (2,)], {(0, 1): 1},
                          {0: 1, 1: 1, 2: 1}, ring)


def star_point(ring: Ring = ZZ) -> TubeData:
    """Base: cone on a square (a 2-disk), its cone point embedded; fiber an edge; k_B = 2."""
    tri = [("c", "l0", "l1"), ("c", "l1", "l2"), ("c", "l2", "l3"), ("c", "l0", "l3")]
    link = [("l0", "l1"), ("l1", "l2"), ("l2", "l3"), ("l0", "l3")]
    ret = {v: "c" for v in ("c", "l0", "l1", "l2", "l3")}
    return product_bundle("disk-point x edge", tri, [("a", "b")], "base", tri, link,
                          {("c", "l0", "l1"): 1}, ret, ring)


def fiber_point(ring: Ring = ZZ) -> TubeData:
    """Base an edge, fiber path a-b-c with b embedded: second case, k_B = 0, k_F = 1."""
    return product_bundle("edge x fiber-point", [(0, 1)], [("a", "b"), ("b", "c")], "fiber",
                          [("a", "b"), ("b", "c")], [("a",), ("c",)], {("a", "b"): 1},
                          {"a": "b", "b": "b", "c": "b"}, ring)


def sphere_point(ring: Ring = ZZ) -> TubeData:
    """A point in the boundary of the 3-simplex (a 2-sphere over itself)."""
    S = SimplicialSet.from_facets([(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)], "dD3")
    T = S.subcomplex([(0, 1, 2), (0, 1, 3), (0, 2, 3)], "star")
    dT = S.subcomplex([(1, 2), (1, 3), (2, 3)], "link")
    X = SimplicialSet([(0,)], "pt")
    tau = ThomCochain(2, {(0, 1, 3): 1}, ring)
    ident = {v: v for v in range(4)}
    return TubeData(S, X, T, dT, tau, {v: 0 for v in range(4)}, ident, {0: 0}, 2, 2, ring,
                    "point in sphere").validate()


def twisted_cover_point(ring: Ring | None = None) -> TubeData:
    """Connected double cover of a triangle circle, fiber over vertex 0 embedded, mod 2.

    Hexagon vertices h0..h5 lie over i mod 3; the vertex order is chosen so
    the covering map is order preserving on every edge.
    """
    ring = ring or GF(2)
    edges = [("h0", "h1"), ("h1", "h2"), ("h3", "h2"), ("h3", "h4"), ("h4", "h5"), ("h0", "h5")]
    Xp = SimplicialSet.from_facets(edges, "hexagon")
    over = {f"h{i}": i % 3 for i in range(6)}
    T = Xp.subcomplex([("h0", "h1"), ("h3", "h4"), ("h0", "h5"), ("h3", "h2")], "tube")
    dT = Xp.subcomplex([("h1",), ("h4",), ("h5",), ("h2",)], "dtube")
    X = SimplicialSet([("h0",), ("h3",)], "fiber")
    tau_base = ThomCochain(1, {(0, 1): 1}, ring)
    tau = ThomCochain.pullback(tau_base, over, T.simplices)
    ret = {"h0": "h0", "h1": "h0", "h5": "h0", "h3": "h3", "h4": "h3", "h2": "h3"}
    return TubeData(Xp, X, T, dT, tau, ret, over, {"h0": 0, "h3": 0}, 1, 1, ring,
                    "twisted double cover").validate()


CORPUS = {
    "interval-point": interval_point,
    "disk-point": star_point,
    "fiber-point": fiber_point,
    "sphere-point": sphere_point,
    "twisted-cover": twisted_cover_point,
}


def corpus(names: Sequence[str] | None = None, ring: Ring | None = None) -> list[TubeData]:
    out = []
    for n in names or CORPUS:
        if n not in CORPUS:
            raise KeyError(f"unknown corpus model {n!r}")
        out.append(CORPUS[n](ring) if ring is not None else CORPUS[n]())
    return out
