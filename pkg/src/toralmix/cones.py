"""Symmetric planar cones and the cone property of a matrix family.

A :class:`Cone` is the closed set ``{+-(a*u1 + b*u2) : a, b >= 0}`` spanned by
two integer rays.  Everything that decides membership is exact: integer rays
are handled with integer cross products, and eigendirections (which have
irrational slopes) are handled as surds ``x + y*sqrt(D)``.

Shared boundaries between an expansion cone and a contraction cone are
allowed (the quadrant pair needs this).  Partition questions are then resolved
by testing the contraction cone first; its complement is the strict one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Integral, Rational
from typing import Sequence

from .errors import (
    CapExceeded,
    ConeNotInvariant,
    ConesOverlap,
    EigendirectionOnBoundary,
    NoContraction,
    NoExpansion,
    NotSignDefinite,
    ToralError,
)
from .lattice import J, Automorphism, IntMatrix, MatrixFamily, is_square


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def surd_sign(x, y, D: int) -> int:
    """Exact sign of ``x + y*sqrt(D)`` for rational x, y and integer D >= 0."""
    sx, sy = _sign(x), _sign(y)
    if sy == 0 or D == 0:
        return sx
    if sx == 0 or sx == sy:
        return sy if sx == 0 else sx
    lhs, rhs = x * x, y * y * D
    if lhs > rhs:
        return sx
    if lhs < rhs:
        return sy
    return 0


def cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def norm_sq(v):
    return v[0] * v[0] + v[1] * v[1]


def _is_exact(v) -> bool:
    return all(isinstance(c, (Integral, Rational)) for c in v)


def _primitive(v: tuple[int, int]) -> tuple[int, int]:
    g = math.gcd(v[0], v[1])
    return (v[0] // g, v[1] // g)


def _upper(v) -> bool:
    return v[0] > 0 or (v[0] == 0 and v[1] > 0)


def as_float_unit(v) -> tuple[float, float]:
    """Unit vector along ``v``; works for integers of any size."""
    x, y = v
    if _is_exact(v):
        big = max(abs(x), abs(y))
        if big == 0:
            raise ToralError("zero vector has no direction")
        fx, fy = float(Fraction(x) / big), float(Fraction(y) / big)
    else:
        fx, fy = float(x), float(y)
    r = math.hypot(fx, fy)
    return (fx / r, fy / r)


def angle_between(u, v) -> float:
    """Angle in [0, pi] between two vectors, safe for huge integer entries."""
    c, d = cross(u, v), dot(u, v)
    if d == 0:
        return math.pi / 2
    t = abs(float(Fraction(c) / Fraction(d))) if _is_exact((c, d)) else abs(c / d)
    a = math.atan(t)
    return a if d > 0 else math.pi - a


def line_sine(u, v) -> float:
    """|sin| of the angle between the lines spanned by ``u`` and ``v``."""
    a = angle_between(u, v)
    return math.sin(a)


@dataclass(frozen=True)
class Cone:
    """Closed symmetric sector spanned by two integer rays.

    Rays are stored primitive and ordered so that ``cross(u1, u2) > 0``; the
    positive half of the sector is then the counterclockwise arc from ``u1``
    to ``u2``.  Two cones compare equal iff they are the same set.
    """

    u1: tuple[int, int]
    u2: tuple[int, int]

    def __post_init__(self):
        u1 = tuple(int(c) for c in self.u1)
        u2 = tuple(int(c) for c in self.u2)
        if u1 == (0, 0) or u2 == (0, 0):
            raise ToralError("cone rays must be nonzero")
        c = cross(u1, u2)
        if c == 0:
            raise ToralError(f"cone rays {u1}, {u2} are parallel")
        if c < 0:
            u1, u2 = u2, u1
        if not _upper(u1):
            u1, u2 = (-u1[0], -u1[1]), (-u2[0], -u2[1])
        object.__setattr__(self, "u1", _primitive(u1))
        object.__setattr__(self, "u2", _primitive(u2))

    @property
    def rays(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return (self.u1, self.u2)

    def coefficient_signs(self, v) -> tuple[int, int]:
        """Signs of (a, b) in ``v = a*u1 + b*u2``."""
        return _sign(cross(v, self.u2)), _sign(cross(self.u1, v))

    def surd_coefficient_signs(self, v, D: int) -> tuple[int, int]:
        """Same as :meth:`coefficient_signs` for ``v`` given as surd pairs."""
        (x0, y0), (x1, y1) = v
        u1, u2 = self.u1, self.u2
        sa = surd_sign(x0 * u2[1] - x1 * u2[0], y0 * u2[1] - y1 * u2[0], D)
        sb = surd_sign(u1[0] * x1 - u1[1] * x0, u1[0] * y1 - u1[1] * y0, D)
        return sa, sb

    def contains(self, v) -> bool:
        return contains(self, v)

    def strictly_contains(self, v) -> bool:
        sa, sb = self.coefficient_signs(v)
        return sa * sb == 1

    def opening(self) -> float:
        return angle_between(self.u1, self.u2)

    def midline(self) -> tuple[float, float]:
        a, b = as_float_unit(self.u1), as_float_unit(self.u2)
        return as_float_unit((a[0] + b[0], a[1] + b[1]))

    def contains_sector(self, other: "Cone") -> bool:
        """Whether ``other`` is a subset of this cone."""
        s = self.coefficient_signs(other.u1) + self.coefficient_signs(other.u2)
        return all(x >= 0 for x in s) or all(x <= 0 for x in s)

    def shares_ray_with(self, other: "Cone") -> bool:
        return any(cross(u, v) == 0 for u in self.rays for v in other.rays)

    def __repr__(self) -> str:
        return f"Cone({self.u1}, {self.u2})"


def contains(cone: Cone, v) -> bool:
    """Closed-sector membership; the zero vector counts as inside."""
    sa, sb = cone.coefficient_signs(v)
    return sa * sb >= 0


def map_cone(m: IntMatrix | Automorphism, cone: Cone) -> Cone:
    if isinstance(m, Automorphism):
        m = m.entries
    return Cone(m.apply(cone.u1), m.apply(cone.u2))


def interiors_overlap(E: Cone, C: Cone) -> tuple[int, int] | None:
    """A direction lying strictly inside both cones, or None."""
    for u in E.rays:
        if C.strictly_contains(u):
            return u
    for u in C.rays:
        if E.strictly_contains(u):
            return u
    for mid in (_primitive((E.u1[0] + E.u2[0], E.u1[1] + E.u2[1])),
                _primitive((C.u1[0] + C.u2[0], C.u1[1] + C.u2[1]))):
        if E.strictly_contains(mid) and C.strictly_contains(mid):
            return mid
    return None


@dataclass(frozen=True)
class ConeAnalysis:
    """Rates and constants attached to a verified (E, C) pair.

    Squared rates are exact :class:`~fractions.Fraction` values when the
    extremum sits on a rational ray, floats otherwise.
    """

    lambda_E_sq: Fraction | float
    lambda_C_inv_sq: Fraction | float
    mu: tuple[float, ...]
    clauses: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    shared_boundary: bool = False
    M: int | None = None
    C_const: float | None = None
    K: float | None = None

    @property
    def lambda_E(self) -> float:
        return math.sqrt(self.lambda_E_sq)

    @property
    def lambda_C(self) -> float:
        return 1.0 / math.sqrt(self.lambda_C_inv_sq)

    @property
    def lam_sq(self) -> Fraction | float:
        """Square of ``lambda = max(lambda_C, 1/lambda_E)``."""
        a, b = self.lambda_C_inv_sq, self.lambda_E_sq
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return max(1 / a, 1 / b)
        return max(1.0 / float(a), 1.0 / float(b))

    @property
    def lam(self) -> float:
        return math.sqrt(self.lam_sq)

    @property
    def rho(self) -> float:
        return -0.5 * math.log(self.lam_sq)

    @property
    def passed(self) -> bool:
        return bool(self.clauses) and all(self.clauses.values())

    def c(self, beta: float) -> float:
        """Envelope prefactor ``1 + 2 C^{-beta}``."""
        if self.C_const is None:
            raise ToralError("escape data not computed; call analyze_cones")
        return 1.0 + 2.0 * self.C_const ** (-beta)


def min_stretch_sq(m: IntMatrix, cone: Cone):
    """``min |m x|^2 / |x|^2`` over the closed sector, with its argmin.

    The Rayleigh quotient of ``m^T m`` on an arc is extremal at the arc ends or
    at an eigenvector of ``m^T m``; only the smaller eigenvector can lower the
    minimum, and its membership is decided exactly.
    """
    best, arg = None, None
    for u in cone.rays:
        val = Fraction(norm_sq(m.apply(u)), norm_sq(u))
        if best is None or val < best:
            best, arg = val, u
    p = m.a * m.a + m.c * m.c
    s = m.b * m.b + m.d * m.d
    r = m.a * m.b + m.c * m.d
    disc = (p - s) ** 2 + 4 * r * r
    if r == 0:
        cands = [((1, 0), Fraction(p)), ((0, 1), Fraction(s))]
        vec, val = min(cands, key=lambda t: t[1])
        if contains(cone, vec) and val < best:
            best, arg = val, vec
        return best, arg
    # eigenvector (2r, (s - p) - sqrt(disc)) for eigenvalue (p + s - sqrt(disc)) / 2
    surd_vec = ((2 * r, 0), (s - p, -1))
    if is_square(disc):
        root = math.isqrt(disc)
        vec = (2 * r, s - p - root)
        sa, sb = cone.coefficient_signs(vec)
        val = Fraction(p + s - root, 2)
        if sa * sb >= 0 and val < best:
            best, arg = val, vec
        return best, arg
    sa, sb = cone.surd_coefficient_signs(surd_vec, disc)
    if sa * sb >= 0:
        val = (p + s - math.sqrt(disc)) / 2.0
        if val < best:
            best = val
            arg = (2.0 * r, (s - p) - math.sqrt(disc))
    return best, arg


def eigendirection_strictly_inside(A: Automorphism, cone: Cone, which: str) -> bool:
    eig = A.eigen
    sa, sb = cone.surd_coefficient_signs(eig.direction_surd(which), eig.discriminant)
    return sa * sb == 1


def verify_cone_property(family: MatrixFamily, E: Cone, C: Cone, strict: bool = True) -> ConeAnalysis:
    """Check every clause of the cone property for ``family`` with cones (E, C).

    Returns a :class:`ConeAnalysis` holding exact squared rates and a
    pass/fail entry per clause.  With ``strict=True`` the first failing clause
    is raised with its witness.
    """
    clauses, witnesses = {}, {}
    failures = []

    def record(name, ok, exc, msg, witness=None):
        clauses[name] = ok
        if not ok:
            witnesses[name] = witness
            failures.append(exc(msg, witness=witness))

    ov = interiors_overlap(E, C)
    record("disjoint", ov is None, ConesOverlap, f"interiors of E and C share direction {ov}", ov)

    lam_E_sq, lam_C_inv_sq = None, None
    arg_E, arg_C = None, None
    for i, A in enumerate(family.members):
        img = map_cone(A, E)
        ok = E.contains_sector(img)
        if not ok and clauses.get("E_invariant", True):
            bad = next((u for u in E.rays if not contains(E, A.entries.apply(u))), E.u1)
            record("E_invariant", False, ConeNotInvariant,
                   f"A_{i} maps E outside itself (ray {bad} -> {A.entries.apply(bad)})",
                   {"member": i, "ray": bad, "image": A.entries.apply(bad)})
        val, arg = min_stretch_sq(A.entries, E)
        if lam_E_sq is None or val < lam_E_sq:
            lam_E_sq, arg_E = val, {"member": i, "direction": arg}

        inv = A.entries.inverse()
        img = map_cone(inv, C)
        ok = C.contains_sector(img)
        if not ok and clauses.get("C_invariant", True):
            bad = next((u for u in C.rays if not contains(C, inv.apply(u))), C.u1)
            record("C_invariant", False, ConeNotInvariant,
                   f"A_{i}^-1 maps C outside itself (ray {bad} -> {inv.apply(bad)})",
                   {"member": i, "ray": bad, "image": inv.apply(bad)})
        val, arg = min_stretch_sq(inv, C)
        if lam_C_inv_sq is None or val < lam_C_inv_sq:
            lam_C_inv_sq, arg_C = val, {"member": i, "direction": arg}

        if not eigendirection_strictly_inside(A, E, "u") and clauses.get("E_eigen", True):
            record("E_eigen", False, EigendirectionOnBoundary,
                   f"unstable direction of A_{i} is not interior to E", {"member": i, "slope": A.eigen.slope_u})
        if not eigendirection_strictly_inside(A, C, "s") and clauses.get("C_eigen", True):
            record("C_eigen", False, EigendirectionOnBoundary,
                   f"stable direction of A_{i} is not interior to C", {"member": i, "slope": A.eigen.slope_s})

    clauses.setdefault("E_invariant", True)
    clauses.setdefault("C_invariant", True)
    clauses.setdefault("E_eigen", True)
    clauses.setdefault("C_eigen", True)
    record("E_expansion", lam_E_sq > 1, NoExpansion, f"lambda_E^2 = {lam_E_sq} <= 1", arg_E)
    record("C_contraction", lam_C_inv_sq > 1, NoContraction, f"lambda_C^-2 = {lam_C_inv_sq} <= 1", arg_C)

    if strict and failures:
        raise failures[0]
    return ConeAnalysis(
        lambda_E_sq=lam_E_sq,
        lambda_C_inv_sq=lam_C_inv_sq,
        mu=tuple(abs(A.eigen.lambda_s) for A in family.members),
        clauses=clauses,
        witnesses={"E_rate": arg_E, "C_rate": arg_C, **witnesses},
        shared_boundary=E.shares_ray_with(C),
    )


QUADRANTS_13 = Cone((1, 0), (0, 1))
QUADRANTS_24 = Cone((0, 1), (-1, 0))


def default_quadrant_cones(family: MatrixFamily) -> tuple[Cone, Cone]:
    """I+III as expansion cone and the closed complement II+IV as contraction cone.

    Valid when every member is sign definite (all entries > 0 or all < 0).
    """
    for i, A in enumerate(family.members):
        entries = (A.entries.a, A.entries.b, A.entries.c, A.entries.d)
        if not (all(x > 0 for x in entries) or all(x < 0 for x in entries)):
            raise NotSignDefinite(f"member {i} = {A} has mixed-sign entries", witness=i)
    return QUADRANTS_13, QUADRANTS_24


def tilde_cones(E: Cone, C: Cone) -> tuple[Cone, Cone]:
    """Cones for the tilde family: rotate both sectors by J."""
    return map_cone(J, E), map_cone(J, C)


def gap_sectors(E: Cone, C: Cone) -> list[Cone]:
    """Closures of the components of the complement of E and C."""
    gaps = []
    for start, end in ((E.u2, C.u1), (C.u2, E.u1)):
        c = cross(start, end)
        if c == 0:
            continue
        if c < 0:
            end = (-end[0], -end[1])
        gaps.append(Cone(start, end))
    return gaps


def escape_data(family: MatrixFamily, E: Cone, C: Cone, lam: float, cap: int = 64,
                budget: int = 1 << 16) -> tuple[int, float]:
    """Escape time M and the a-priori constant C for the cone gap.

    M is the least n such that every length-n word maps each gap sector into
    E.  Sectors are propagated exactly, word by word; a branch stops as soon
    as its sector lands in E.  ``budget`` bounds the number of live sectors at
    any depth.
    """
    M = 0
    for gap in gap_sectors(E, C):
        frontier = {gap}
        depth = 0
        while frontier:
            depth += 1
            if depth > cap:
                raise CapExceeded(f"gap sector {gap} not absorbed into E within {cap} steps", witness=gap)
            nxt = set()
            for sector in frontier:
                for A in family.members:
                    img = map_cone(A, sector)
                    if not E.contains_sector(img):
                        nxt.add(img)
            if len(nxt) > budget:
                raise CapExceeded(f"{len(nxt)} live sectors at depth {depth} exceed budget {budget}", witness=gap)
            frontier = nxt
        M = max(M, depth)
    if M == 0:
        return 0, 1.0
    mu_min = min(abs(A.eigen.lambda_s) for A in family.members)
    C_const = (lam * mu_min) ** M
    if not C_const < 1.0:
        raise ToralError(f"a-priori constant {C_const} is not below 1")
    return M, C_const


def transversality_constant(E: Cone, C: Cone) -> float:
    """Smallest K with |y| <= K|x| and |x| <= K|x+y| whenever x, x+y in C, y in E.

    Returns ``math.inf`` when the closures share a ray.  The supremum is taken
    over boundary configurations and the few interior directions where the
    extremal sine switches branch.
    """
    if E.shares_ray_with(C):
        return math.inf
    c_rays = [as_float_unit(u) for u in C.rays]
    opening = C.opening()
    s_C = math.sin(opening) if opening <= math.pi / 2 else 1.0

    def sin_to(e, u):
        return abs(cross(e, u))

    m = min(sin_to(as_float_unit(e), c) for e in E.rays for c in c_rays)
    k1 = s_C / m

    # |x|/|x+y| for y along e: best x hugs the nearest C ray, x+y sweeps all of C
    e1, e2 = (as_float_unit(u) for u in E.rays)
    cands = [e1, e2]
    for c in c_rays:
        cands.append((-c[1], c[0]))
    bis = (c_rays[0][0] + c_rays[1][0], c_rays[0][1] + c_rays[1][1])
    cands.append(bis)
    cands.append((-bis[1], bis[0]))

    def in_E(e):
        sa = _sign_f(cross(e, e2))
        sb = _sign_f(cross(e1, e))
        return sa * sb >= 0

    k2 = 0.0
    for e in cands:
        if not in_E(e):
            continue
        e = as_float_unit(e)
        perp = (-e[1], e[0])
        sa, sb = _sign_f(cross(perp, c_rays[1])), _sign_f(cross(c_rays[0], perp))
        num = 1.0 if sa * sb >= 0 else max(sin_to(e, c) for c in c_rays)
        den = min(sin_to(e, c) for c in c_rays)
        k2 = max(k2, num / den)
    k = max(1.0, k1, k2)
    # round outward so downstream exact comparisons are conservative
    return k * (1 + 4e-15)


def _sign_f(x: float, tol: float = 1e-15) -> int:
    return 0 if abs(x) <= tol else (1 if x > 0 else -1)


def analyze_cones(family: MatrixFamily, E: Cone, C: Cone, cap: int = 64) -> ConeAnalysis:
    """Full analysis: cone-property clauses, escape data (M, C) and K."""
    a = verify_cone_property(family, E, C, strict=True)
    M, C_const = escape_data(family, E, C, a.lam, cap=cap)
    return replace(a, M=M, C_const=C_const, K=transversality_constant(E, C))
