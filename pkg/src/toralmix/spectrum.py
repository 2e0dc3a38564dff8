"""Lyapunov exponents, the Oseledets limit matrix, and random stable lines."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cones import Cone
from .errors import EmptyIntersection, ToralError
from .lattice import J, MatrixFamily, prefix_products, word_product
from .random_model import sample_words, uniforms

_INIT_STREAM = 1 << 20


@dataclass
class SpectrumEstimate:
    """Top exponent estimate in nats per step, with its sampling error."""

    chi_top: float
    stderr: float
    n_steps: int
    trials: int
    per_trial: np.ndarray = field(repr=False)

    @property
    def chi_bottom(self) -> float:
        return -self.chi_top

    def agrees_with(self, other: "SpectrumEstimate", k: float = 3.0) -> bool:
        return abs(self.chi_top - other.chi_top) <= k * math.hypot(self.stderr, other.stderr)


def estimate_top_exponent(family: MatrixFamily, probs: Sequence[float] | None = None, n: int = 10_000,
                          trials: int = 32, seed: int = 0) -> SpectrumEstimate:
    """Average ``(1/n) ln |A_w^n x|`` over independent words and start vectors.

    Each trial pushes a random unit vector through its own word and
    renormalizes after every step, accumulating the log stretch.
    """
    if n < 1 or trials < 1:
        raise ToralError("need n >= 1 and trials >= 1")
    probs = family.probs if probs is None else tuple(probs)
    mats = np.stack([m.entries.to_array() for m in family.members])
    words = sample_words(probs, n, trials, seed)
    v = _initial_vectors(family, trials, seed)
    log_sum = np.zeros(trials)
    for k in range(n):
        m = mats[words[:, k]]
        v = np.einsum("tij,tj->ti", m, v)
        r = np.hypot(v[:, 0], v[:, 1])
        log_sum += np.log(r)
        v /= r[:, None]
    per_trial = log_sum / n
    stderr = float(np.std(per_trial, ddof=1) / math.sqrt(trials)) if trials > 1 else float("nan")
    return SpectrumEstimate(float(np.mean(per_trial)), stderr, n, trials, per_trial)


def _initial_vectors(family: MatrixFamily, trials: int, seed: int) -> np.ndarray:
    # stable eigendirections of the members are the only lines we can name in
    # advance; a start vector within 1e-9 of one is redrawn
    bad = [math.atan(m.eigen.slope_s) % math.pi for m in family.members]
    angles = np.empty(trials)
    for t in range(trials):
        pos = 0
        while True:
            th = uniforms(seed, _INIT_STREAM + t, pos, 1)[0] * 2.0 * math.pi
            if all(min(abs(th % math.pi - b), math.pi - abs(th % math.pi - b)) > 1e-9 for b in bad):
                break
            pos += 1
        angles[t] = th
    return np.column_stack([np.cos(angles), np.sin(angles)])


@dataclass
class LimitMatrix:
    """``((A^n)^T A^n)^{1/2n}`` and its tilde counterpart for one word."""

    matrix: np.ndarray
    exponents: tuple[float, float]
    eigenvectors: np.ndarray
    tilde_matrix: np.ndarray
    tilde_consistent: bool

    @property
    def eigenvalues(self) -> tuple[float, float]:
        return (math.exp(self.exponents[0]), math.exp(self.exponents[1]))


def _sym_power(p: int, r: int, s: int, power: float):
    """``S^power`` for the symmetric det-1 integer matrix ``S = [[p, r], [r, s]]``.

    Works on logs: the eigenvalues are ``t/2 +- sqrt(t^2/4 - 1)`` with
    ``t = p + s``, and the small one is the reciprocal of the large one.
    """
    t = p + s
    log_big = math.log(t) - math.log(2.0) + math.log1p(math.sqrt(1.0 - float(Fraction(4, t * t))))
    # eigenvector of the large eigenvalue: angle = atan2(2r, p - s) / 2
    num, den = 2 * r, p - s
    if num == 0 and den == 0:
        theta = 0.0
    else:
        big = max(abs(num), abs(den))
        theta = 0.5 * math.atan2(float(Fraction(num, big)), float(Fraction(den, big)))
    v_big = np.array([math.cos(theta), math.sin(theta)])
    v_small = np.array([-v_big[1], v_big[0]])
    hi, lo = log_big * power, -log_big * power
    mat = math.exp(hi) * np.outer(v_big, v_big) + math.exp(lo) * np.outer(v_small, v_small)
    return mat, (lo, hi), np.column_stack([v_small, v_big])


def estimate_limit_matrix(family: MatrixFamily, w: Sequence[int], tol: float = 1e-9) -> LimitMatrix:
    """Finite-n Oseledets matrix from the exact integer product of ``w``.

    Also builds the same matrix from the tilde product and records whether it
    equals ``J L J^{-1}`` within ``tol``.
    """
    if len(w) < 1:
        raise ToralError("word length must be at least 1")
    fwd, tld = word_product(family, w)
    power = 1.0 / (2 * len(w))
    s = fwd.T @ fwd
    mat, exps, vecs = _sym_power(s.a, s.b, s.d, power)
    st = tld.T @ tld
    tmat, _, _ = _sym_power(st.a, st.b, st.d, power)
    j = J.to_array()
    expected = j @ mat @ j.T
    ok = bool(np.allclose(tmat, expected, rtol=tol, atol=tol))
    return LimitMatrix(mat, exps, vecs, tmat, ok)


def stable_direction(family: MatrixFamily, w: Sequence[int], C: Cone) -> tuple[np.ndarray, float]:
    """Nested preimages ``(A_w^k)^{-1} C`` of the contraction cone, k = 0..len(w).

    Returns the unit midline of the final sector and its angular width.
    """
    sector = C
    for P in prefix_products(family, w)[1:]:
        inv = P.inverse()
        sector = _intersect(sector, Cone(inv.apply(C.u1), inv.apply(C.u2)))
    return np.array(sector.midline()), sector.opening()


def _intersect(S: Cone, T: Cone) -> Cone:
    if S.contains_sector(T):
        return T
    if T.contains_sector(S):
        return S
    inside_T = [u for u in S.rays if T.strictly_contains(u)]
    inside_S = [u for u in T.rays if S.strictly_contains(u)]
    if len(inside_T) == 1 and len(inside_S) == 1:
        u, v = inside_T[0], inside_S[0]
        # u is a ray of S, so it sits in the positive half; put v there too
        if S.coefficient_signs(v)[0] < 0:
            v = (-v[0], -v[1])
        return Cone(u, v)
    raise EmptyIntersection(f"sectors {S} and {T} have no common interior", witness=(S, T))
