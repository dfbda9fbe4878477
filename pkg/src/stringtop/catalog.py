"""Named manifold models: intersection algebra plus loop-space Pontryagin algebra."""
from __future__ import annotations

import re
from dataclasses import dataclass

from .exact_linalg import ZZ, Ring
from .graded_algebra import (BasisElement, GradedAlgebra, intersection_from_cup,
                             polynomial_algebra, tensor_algebra_one, trivial_algebra,
                             truncated_polynomial_cup)
from .spectral_engine import DifferentialPin
from .string_products import LoopAlgebraModel, product_model


class UnknownModel(KeyError):
    pass


def sphere_intersection(m: int, ring: Ring = ZZ) -> GradedAlgebra:
    """HH_*(S^m): [S^m] in degree 0 and the point class pt in degree -m."""
    cup = truncated_polynomial_cup([("x", m, 2)], ring)
    return intersection_from_cup(cup, m, {"1": f"[S{m}]", "x": "pt"},
                                 name=f"HH(S{m})", manifold=f"S{m}")


def sphere_loops(m: int, truncation: int, ring: Ring = ZZ) -> GradedAlgebra:
    """H_*(Omega S^m) = T(x_{m-1}); polynomial on u when m is odd."""
    if m < 2:
        raise ValueError("spheres of dimension >= 2 only")
    if m % 2:
        return polynomial_algebra([("u", m - 1)], truncation, ring, name=f"H(OS{m})")
    return tensor_algebra_one("x", m - 1, truncation, ring, name=f"H(OS{m})")


def sphere(m: int, truncation: int = 12, ring: Ring = ZZ) -> LoopAlgebraModel:
    return LoopAlgebraModel(f"S{m}", m, sphere_intersection(m, ring), sphere_loops(m, truncation, ring))


def point(truncation: int = 12, ring: Ring = ZZ) -> LoopAlgebraModel:
    H = GradedAlgebra("HH(pt)", [BasisElement("[pt]", 0)], {(0, 0): {0: 1}}, 0, ring)
    return LoopAlgebraModel("pt", 0, H, trivial_algebra(ring))


def stiefel_v2r7_intersection(ring: Ring = ZZ) -> GradedAlgebra:
    """HH_*(SO(7)/SO(5)): Z in degrees 0 and -11, Z/2 in degree -6 (homological 5)."""
    basis = [BasisElement("[X]", 0), BasisElement("t", -6, 2), BasisElement("pt", -11)]
    table = {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (0, 2): {2: 1}, (2, 0): {2: 1}}
    return GradedAlgebra("HH(V2R7)", basis, table, 0, ring)


def stiefel_v2r7_loops(truncation: int, ring: Ring = ZZ) -> GradedAlgebra:
    """H_*(Omega SO(7)/SO(5)) = Z[a] (x) Z_2[b], |a| = 10, |b| = 4."""
    return polynomial_algebra([("a", 10), ("b", 4, 2)], truncation, ring, name="H(OV2R7)")


def stiefel_v2r7(truncation: int = 24, ring: Ring = ZZ) -> LoopAlgebraModel:
    return LoopAlgebraModel("V2R7", 11, stiefel_v2r7_intersection(ring),
                            stiefel_v2r7_loops(truncation, ring), tor_classes=True)


_SPHERE = re.compile(r"^S(\d+)$")
_PRODUCT = re.compile(r"^S(\d+)xS(\d+)$")

NAMES = ("pt", "S<n>", "S<a>xS<b>", "V2R7")
DIAMOND_NAMES = {"pt": "1"}
# total space -> (base, fiber) of the sphere bundles the string jobs know about
FIBRATIONS = {"V2R7": ("S6", "S5")}


def model(name: str, truncation: int = 12, ring: Ring = ZZ) -> LoopAlgebraModel:
    """Look up a model by name: pt, S<n>, S<a>xS<b> or V2R7."""
    if name == "pt":
        return point(truncation, ring)
    if name == "V2R7":
        return stiefel_v2r7(truncation, ring)
    mt = _SPHERE.match(name)
    if mt:
        return sphere(int(mt.group(1)), truncation, ring)
    mt = _PRODUCT.match(name)
    if mt:
        a, b = int(mt.group(1)), int(mt.group(2))
        return product_model(sphere(a, truncation, ring), sphere(b, truncation, ring), truncation)
    raise UnknownModel(name)


def describe(name: str, truncation: int = 12, ring: Ring = ZZ) -> list[str]:
    mod = model(name, truncation, ring)
    lines = [f"model {mod.manifold}: dimension {mod.dim}, ring {ring.name}"]
    for label, alg in (("intersection", mod.intersection), ("loops", mod.pontryagin)):
        parts = []
        for b in alg.basis:
            t = f"/{b.order}" if b.order else ""
            parts.append(f"{b.label}[{b.degree}{t}]")
        lines.append(f"  {label}: " + " ".join(parts))
    return lines


@dataclass
class CatalogEntry:
    label: str
    model: LoopAlgebraModel
    default_pins: list  # [(r, source, target)] in E2 labels of the loop spectral sequence
    note: str


_ENTRIES = (
    ("pt", [], "a point: every structure is trivial"),
    ("S2", [(2, "[S2]|x", {"pt|x^2": 2})], "even sphere; the pin is the rational d2 on the odd tower"),
    ("S3", [], "odd sphere; loops Z[u], |u| = 2"),
    ("S5", [], "odd sphere; loops Z[u], |u| = 4"),
    ("S6", [(6, "[S6]|x", {"pt|x^2": 2})], "even sphere; base of the V2R7 fibration"),
    ("S3xS3", [], "product of odd spheres; carries the diamond product example"),
    ("V2R7", [], "SO(7)/SO(5), fibration S5 -> V2R7 -> S6; loops Z[a] (x) Z_2[b]"),
)


def catalog_list(truncation: int = 12, ring: Ring = ZZ) -> list[CatalogEntry]:
    """The shipped entries; S<n> and S<a>xS<b> also resolve for any n, a, b through model()."""
    return [CatalogEntry(label, model(label, truncation, ring),
                         [DifferentialPin(r, s, t) for r, s, t in pins], note)
            for label, pins, note in _ENTRIES]
