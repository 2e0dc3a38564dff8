"""Exact 2x2 integer matrix algebra for hyperbolic toral automorphisms.

Entries are Python ints, so products over long words never overflow.  Eigen
quantities are kept as (trace, discriminant) pairs; floats and high precision
values are derived from them on demand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import mpmath

from .errors import NotHyperbolic, NotUnimodular, ToralError


@dataclass(frozen=True)
class IntMatrix:
    """Row-major 2x2 integer matrix ``[[a, b], [c, d]]``."""

    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, rows) -> "IntMatrix":
        (a, b), (c, d) = rows
        for x in (a, b, c, d):
            if isinstance(x, bool) or int(x) != x:
                raise ToralError(f"matrix entries must be integers, got {x!r}")
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def identity(cls) -> "IntMatrix":
        return cls(1, 0, 0, 1)

    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def T(self) -> "IntMatrix":
        return IntMatrix(self.a, self.c, self.b, self.d)

    def adjugate(self) -> "IntMatrix":
        return IntMatrix(self.d, -self.b, -self.c, self.a)

    def inverse(self) -> "IntMatrix":
        """Exact inverse; only defined for det = +-1."""
        det = self.det
        if det == 1:
            return self.adjugate()
        if det == -1:
            return IntMatrix(-self.d, self.b, self.c, -self.a)
        raise NotUnimodular(f"det = {det}, integer inverse does not exist")

    def tilde(self) -> "IntMatrix":
        """(M^T)^{-1} by integer adjugate."""
        return self.T.inverse()

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            return IntMatrix(
                self.a * other.a + self.b * other.c,
                self.a * other.b + self.b * other.d,
                self.c * other.a + self.d * other.c,
                self.c * other.b + self.d * other.d,
            )
        x, y = other
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(-self.a, -self.b, -self.c, -self.d)

    def apply(self, v):
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def to_array(self, dtype=float):
        import numpy as np

        return np.array(self.rows(), dtype=dtype)

    def __repr__(self) -> str:
        return f"IntMatrix([[{self.a}, {self.b}], [{self.c}, {self.d}]])"


J = IntMatrix(0, 1, -1, 0)
J_INV = IntMatrix(0, -1, 1, 0)


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class Automorphism:
    """A validated hyperbolic toral automorphism with det = +1."""

    entries: IntMatrix
    trace: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "trace", self.entries.trace)

    @property
    def discriminant(self) -> int:
        return self.trace * self.trace - 4

    def __matmul__(self, other):
        if isinstance(other, Automorphism):
            return self.entries @ other.entries
        return self.entries @ other

    def inverse(self) -> "Automorphism":
        return Automorphism(self.entries.inverse())

    def tilde(self) -> "Automorphism":
        return tilde(self)

    @cached_property
    def eigen(self) -> "EigenData":
        return eigen_data(self)

    def __repr__(self) -> str:
        m = self.entries
        return f"Automorphism([[{m.a}, {m.b}], [{m.c}, {m.d}]])"


def validate_automorphism(m) -> Automorphism:
    """Check det = +1 and |trace| > 2 and wrap ``m`` as an :class:`Automorphism`.

    Accepts an :class:`IntMatrix` or anything ``IntMatrix.of`` understands
    (nested 2x2 sequences).
    """
    if not isinstance(m, IntMatrix):
        m = IntMatrix.of(m)
    if m.det != 1:
        raise NotUnimodular(f"det = {m.det}, need +1", witness=m)
    if abs(m.trace) <= 2:
        raise NotHyperbolic(f"|trace| = {abs(m.trace)} <= 2", witness=m)
    disc = m.trace ** 2 - 4
    if is_square(disc):
        # unreachable for |t| > 2: t^2 - 4 lies strictly between (|t|-1)^2 and t^2
        raise NotHyperbolic(f"discriminant {disc} is a perfect square", witness=m)
    return Automorphism(m)


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues, eigendirections and slopes of an automorphism.

    Exact content is ``(a, b, trace, discriminant)``: the eigenvalues are
    ``(t +- sign(t) sqrt(D)) / 2`` and the eigenvector for eigenvalue ``l`` is
    ``(1, (l - a) / b)``.
    """

    a: int
    b: int
    trace: int
    discriminant: int
    lambda_u: float
    lambda_s: float
    e_u: tuple[float, float]
    e_s: tuple[float, float]
    slope_u: float
    slope_s: float

    @property
    def sign(self) -> int:
        return 1 if self.trace > 0 else -1

    def eigenvalue_mp(self, which: str = "u", prec: int = 128):
        """Eigenvalue at ``prec`` bits."""
        with mpmath.workprec(prec):
            root = mpmath.sqrt(self.discriminant)
            s = self.sign if which == "u" else -self.sign
            return (self.trace + s * root) / 2

    def slope_mp(self, which: str = "u", prec: int = 128):
        """Slope ``(lambda - a) / b`` of the eigendirection at ``prec`` bits."""
        with mpmath.workprec(prec):
            return (self.eigenvalue_mp(which, prec) - self.a) / self.b

    def direction_surd(self, which: str = "u"):
        """Eigendirection as two surds ``x + y*sqrt(D)`` with integer x, y.

        Returns ``((x0, y0), (x1, y1))``, a vector parallel to ``(b, lambda - a)``
        scaled by 2 so everything stays integral.
        """
        s = self.sign if which == "u" else -self.sign
        return (2 * self.b, 0), (self.trace - 2 * self.a, s)


def eigen_data(A: Automorphism) -> EigenData:
    m = A.entries
    t, disc = A.trace, A.discriminant
    root = math.sqrt(disc)
    sgn = 1.0 if t > 0 else -1.0
    # the larger-magnitude root is computed directly, the other as its reciprocal
    lam_u = (t + sgn * root) / 2.0
    lam_s = 1.0 / lam_u
    slope_u = (lam_u - m.a) / m.b
    slope_s = (lam_s - m.a) / m.b
    return EigenData(
        a=m.a,
        b=m.b,
        trace=t,
        discriminant=disc,
        lambda_u=lam_u,
        lambda_s=lam_s,
        e_u=(1.0, slope_u),
        e_s=(1.0, slope_s),
        slope_u=slope_u,
        slope_s=slope_s,
    )


def tilde(A: Automorphism) -> Automorphism:
    """``(A^T)^{-1}``, checked against ``J A J^{-1}``."""
    t = A.entries.tilde()
    if t != J @ A.entries @ J_INV:
        raise AssertionError("tilde identity (A^T)^-1 = J A J^-1 failed")
    return Automorphism(t)


class Word(tuple):
    """A finite truncation ``(w(0), ..., w(n-1))`` of a symbol sequence."""

    def __new__(cls, indices: Iterable[int] = ()):
        return super().__new__(cls, (int(i) for i in indices))

    def shift(self, k: int = 1) -> "Word":
        return Word(self[k:])

    def config(self, depth: int) -> tuple[int, ...]:
        """The first ``depth`` symbols, i.e. the cylinder this word lies in."""
        if len(self) < depth:
            raise ToralError(f"word of length {len(self)} shorter than depth {depth}")
        return tuple(self[:depth])

    def __repr__(self) -> str:
        return f"Word({tuple(self)!r})"


@dataclass(frozen=True)
class MatrixFamily:
    """Ordered automorphisms ``A_0, ..., A_{k-1}`` with selection probabilities."""

    members: tuple[Automorphism, ...]
    probs: tuple[float, ...]

    def __init__(self, members: Sequence, probs: Sequence[float] | None = None):
        members = tuple(m if isinstance(m, Automorphism) else validate_automorphism(m) for m in members)
        if len(members) < 2:
            raise ToralError("a family needs at least two members")
        if probs is None:
            probs = (1.0 / len(members),) * len(members)
        probs = tuple(float(p) for p in probs)
        check_probs(probs, len(members))
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "probs", probs)

    def __len__(self) -> int:
        return len(self.members)

    def __getitem__(self, i) -> Automorphism:
        return self.members[i]

    def with_probs(self, probs) -> "MatrixFamily":
        return MatrixFamily(self.members, probs)

    def tilde(self) -> "MatrixFamily":
        return MatrixFamily([tilde(m) for m in self.members], self.probs)

    def inverse(self) -> "MatrixFamily":
        return MatrixFamily([m.inverse() for m in self.members], self.probs)

    def check_word(self, w: Sequence[int]) -> None:
        k = len(self.members)
        for i in w:
            if not 0 <= i < k:
                raise ToralError(f"word index {i} out of range for family of size {k}")


def check_probs(probs: Sequence[float], k: int | None = None) -> None:
    if k is not None and len(probs) != k:
        raise ToralError(f"expected {k} probabilities, got {len(probs)}")
    if any(not (0.0 <= p <= 1.0) or math.isnan(p) for p in probs):
        raise ToralError(f"probabilities must lie in [0, 1]: {probs}")
    if abs(math.fsum(probs) - 1.0) > 1e-15:
        raise ToralError(f"probabilities must sum to 1: {probs}")


def word_product(family: MatrixFamily, w: Sequence[int]) -> tuple[IntMatrix, IntMatrix]:
    """Exact ``A_w^n = A_{w(n-1)} ... A_{w(0)}`` and its tilde ``((A_w^n)^T)^{-1}``."""
    family.check_word(w)
    fwd = IntMatrix.identity()
    for i in w:
        fwd = family.members[i].entries @ fwd
    return fwd, fwd.tilde()


def prefix_products(family: MatrixFamily, w: Sequence[int]) -> list[IntMatrix]:
    """``[A_w^0, A_w^1, ..., A_w^n]``."""
    family.check_word(w)
    out = [IntMatrix.identity()]
    for i in w:
        out.append(family.members[i].entries @ out[-1])
    return out
