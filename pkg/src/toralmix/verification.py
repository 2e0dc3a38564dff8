"""Desk-scale sweeps over lattice orbits ``A~_w^n q``.

Bounds are checked on squared norms.  Orbits are carried as int64 arrays
when the entries provably fit, otherwise as Python ints.  A float comparison
filters out the clear cases and every near tie is re-decided exactly, with
the irrational constants rounded outward.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .cones import Cone, ConeAnalysis, contains
from .errors import CapExceeded, NotInCone, ToralError, WordTooShort, ZeroVector
from .lattice import EigenData, IntMatrix, MatrixFamily
from .random_model import sample_words

_TIE = 1e-9


@dataclass(frozen=True)
class Violation:
    omega_id: int | str
    q: tuple
    n: int
    lhs: float
    rhs: float
    kind: str


@dataclass
class SweepReport:
    """Outcome of a sweep; ``passed`` iff there are no violations."""

    name: str
    checks_total: int = 0
    violations: list[Violation] = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    elapsed: float = 0.0
    # violations counted but not kept as witnesses
    unrecorded: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations and not self.unrecorded

    @property
    def violation_count(self) -> int:
        return len(self.violations) + self.unrecorded

    def summary(self, max_witnesses: int = 20) -> dict:
        """JSON-ready digest; leaves out timing so reruns are byte identical."""
        return {
            "name": self.name,
            "checks_total": self.checks_total,
            "violations": self.violation_count,
            "passed": self.passed,
            "constants": self.constants,
            "witnesses": [
                {"omega_id": v.omega_id, "q": list(v.q), "n": v.n, "lhs": v.lhs, "rhs": v.rhs, "kind": v.kind}
                for v in self.violations[:max_witnesses]
            ],
        }


def _as_fraction_down(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(float(x)) * Fraction(1 - 10**-12)


def _as_fraction_up(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(float(x)) * Fraction(1 + 10**-12)


def contraction_time(tilde_family: MatrixFamily, w: Sequence[int], q, C: Cone, lam: float,
                     cap: int | None = None) -> int:
    """Last n with ``A~_w^n q`` in C; the next iterate lies in the strict complement."""
    q = (int(q[0]), int(q[1]))
    if q == (0, 0):
        raise ZeroVector("contraction time undefined for q = 0")
    if not contains(C, q):
        raise NotInCone(f"{q} is not in the contraction cone {C}", witness=q)
    bound = math.ceil(0.5 * math.log(q[0] ** 2 + q[1] ** 2) / -math.log(lam)) + 2
    cap = bound if cap is None else cap
    if cap < bound:
        raise ToralError(f"cap {cap} below the a-priori bound {bound}")
    mats = [m.entries for m in tilde_family.members]
    v, N = q, 0
    while True:
        if N >= len(w):
            raise WordTooShort(f"orbit of {q} still in C after {len(w)} symbols")
        v = mats[w[N]].apply(v)
        if not contains(C, v):
            return N
        N += 1
        if N > cap:
            raise CapExceeded(f"orbit of {q} stays in C beyond {cap} steps", witness=q)


def lattice_ball(R: float) -> np.ndarray:
    """All integer q with ``0 < |q| <= R``, in lexicographic order."""
    r = int(math.floor(R))
    xs = np.arange(-r, r + 1)
    g1, g2 = np.meshgrid(xs, xs, indexing="ij")
    pts = np.column_stack([g1.ravel(), g2.ravel()])
    n2 = (pts ** 2).sum(axis=1)
    keep = (n2 > 0) & (n2 <= R * R)
    return pts[keep].astype(np.int64)


def _orbits(mats: list[IntMatrix], word: Sequence[int], Q: np.ndarray, steps: int) -> np.ndarray:
    """``V[n] = A~_w^n Q`` for n = 0..steps, shape (steps + 1, m, 2)."""
    growth = max(max(abs(m.a) + abs(m.b), abs(m.c) + abs(m.d)) for m in mats)
    qmax = int(np.abs(Q).max()) if len(Q) else 0
    # components must fit int64; squared norms are formed separately
    exact_int = qmax * float(growth) ** steps < 2.0**62
    dtype = np.int64 if exact_int else object
    arr = [np.array([[m.a, m.b], [m.c, m.d]], dtype=dtype) for m in mats]
    V = np.empty((steps + 1, len(Q), 2), dtype=dtype)
    V[0] = Q.astype(dtype)
    for n in range(steps):
        V[n + 1] = V[n] @ arr[word[n]].T
    return V


def _in_cone(C: Cone, V: np.ndarray) -> np.ndarray:
    (a1, b1), (a2, b2) = C.u1, C.u2
    sa = np.sign(V[..., 0] * b2 - V[..., 1] * a2)
    sb = np.sign(a1 * V[..., 1] - b1 * V[..., 0])
    return (sa * sb >= 0).astype(bool)


def _norm2f(V: np.ndarray) -> np.ndarray:
    Vf = V.astype(float)
    return Vf[..., 0] ** 2 + Vf[..., 1] ** 2


def _norm2_exact(v) -> int:
    x, y = int(v[0]), int(v[1])
    return x * x + y * y


def _sweep_setup(tilde_family: MatrixFamily, C: Cone, lam: float, R: float, n_max: int,
                 omega_samples: int, seed: int, probs):
    Q = lattice_ball(R)
    n_bound = math.ceil(math.log(R) / -math.log(lam)) + 2 if R > 1 else 2
    steps = max(n_max, n_bound)
    probs = tilde_family.probs if probs is None else tuple(probs)
    words = sample_words(probs, steps, omega_samples, seed)
    mats = [m.entries for m in tilde_family.members]
    return Q, steps, words, mats


def _contraction_times(V: np.ndarray, inC: np.ndarray, C: Cone) -> np.ndarray:
    """N(q) per start point (-1 for q outside C, large if C is never left)."""
    steps = V.shape[0] - 1
    N = np.full(V.shape[1], -1, dtype=np.int64)
    alive = inC.copy()
    for n in range(1, steps + 1):
        still = _in_cone(C, V[n])
        leaving = alive & ~still
        N[leaving] = n - 1
        alive &= still
    N[alive] = steps + 1
    return N


_MAX_WITNESSES = 200  # per word; further violations are only counted


def _lemma1_word(omega_id, word, Q, mats, C, lam_sq, C_sq, n_max, steps):
    V = _orbits(mats, word, Q, steps)
    q2 = [_norm2_exact(q) for q in Q]
    inC = _in_cone(C, Q)
    N = _contraction_times(V, inC, C)
    lam_sq_f = float(lam_sq)
    C_sq_f = float(C_sq)
    lam_sq_x, lam_inv_sq_x = _as_fraction_up(lam_sq), 1 / _as_fraction_up(lam_sq)
    C_sq_x = _as_fraction_down(C_sq)
    viol: list[Violation] = []
    checks = unrecorded = 0
    max_witnesses = _MAX_WITNESSES

    # contraction time bound: lambda^{-2N} <= |q|^2
    for idx in np.nonzero(inC)[0]:
        checks += 1
        n_q = int(N[idx])
        if n_q > steps:
            viol.append(Violation(omega_id, tuple(int(c) for c in Q[idx]), steps, float(n_q), float("nan"),
                                  "contraction_time_cap"))
            continue
        if lam_inv_sq_x ** n_q > q2[idx]:
            if len(viol) >= max_witnesses:
                unrecorded += 1
                continue
            viol.append(Violation(omega_id, tuple(int(c) for c in Q[idx]), n_q,
                                  float(n_q), 0.5 * math.log(float(q2[idx])) / -math.log(math.sqrt(lam_sq_f)),
                                  "contraction_time_bound"))

    q2f = _norm2f(Q)
    for n in range(n_max + 1):
        v2f = _norm2f(V[n])
        s1 = inC & (N >= n)
        s2 = inC & (N < n)
        s3 = ~inC
        # partition of the punctured ball: pairwise disjoint, covering
        checks += 1
        if (s1 & s2).any() or (s1 & s3).any() or (s2 & s3).any() or not (s1 | s2 | s3).all():
            viol.append(Violation(omega_id, (), n, 0.0, 0.0, "partition"))

        specs = (
            (s1, np.ones_like(q2f), lambda i: Fraction(1), "i_lower"),
            (s1, lam_sq_f ** n * q2f, lambda i: -(lam_sq_x ** n * q2[i]), "i_upper"),
            (s2, C_sq_f * lam_sq_f ** (-n) / q2f, lambda i: C_sq_x * lam_inv_sq_x ** n / q2[i], "ii"),
            (s3, C_sq_f * lam_sq_f ** (-n) * q2f, lambda i: C_sq_x * lam_inv_sq_x ** n * q2[i], "iii"),
        )
        for mask, rhs_f, rhs_x, kind in specs:
            checks += int(mask.sum())
            if kind == "i_upper":
                # upper bound: |v|^2 <= rhs
                bad = mask & (v2f > rhs_f * (1 - _TIE))
            else:
                bad = mask & (v2f < rhs_f * (1 + _TIE))
            # clear failures skip the exact re-check; only near-ties need it
            if kind == "i_upper":
                sure = mask & (v2f > rhs_f * (1 + _TIE))
            else:
                sure = mask & (v2f < rhs_f * (1 - _TIE))
            failed = set(np.nonzero(sure)[0].tolist())
            for idx in np.nonzero(bad & ~sure)[0]:
                lhs = _norm2_exact(V[n][idx])
                r = rhs_x(idx)
                if not (lhs <= -r if kind == "i_upper" else lhs >= r):
                    failed.add(int(idx))
            for idx in sorted(failed):
                if len(viol) >= max_witnesses:
                    unrecorded += 1
                    continue
                lhs = _norm2_exact(V[n][idx])
                r = rhs_x(idx)
                viol.append(Violation(omega_id, tuple(int(c) for c in Q[idx]), n,
                                      math.sqrt(float(lhs)), math.sqrt(float(abs(r))), kind))
    return checks, viol, unrecorded


def verify_lemma_bounds(tilde_family: MatrixFamily, E: Cone, C: Cone, analysis: ConeAnalysis, R: float = 50,
                        n_max: int = 25, omega_samples: int = 50, seed: int = 0, probs=None,
                        threads: int = 1, corrupt: dict | None = None) -> SweepReport:
    """Sweep the complementary orbit bounds over a punctured ball of radius R.

    For each sampled word and each n <= n_max, with ``lam = max(lambda_C,
    1/lambda_E)`` and C the a-priori constant:

    * q in C, n <= N(q):  ``1 <= |A~^n q| <= lam^n |q|``
    * q in C, n > N(q):   ``|A~^n q| >= C lam^{-n} / |q|``
    * q outside C:        ``|A~^n q| >= C lam^{-n} |q|``

    plus ``N(q) <= ln|q| / ln(1/lam)`` and the exact three-way partition.
    ``corrupt`` scales constants (``{"lam": 0.5}``, ``{"C_const": 2}``,
    ``{"M": 0.5}``) for the falsifiability self-test.
    """
    t0 = time.perf_counter()
    lam_sq = analysis.lam_sq
    M, C_const = analysis.M, analysis.C_const
    if M is None or C_const is None:
        raise ToralError("analysis lacks escape data; use analyze_cones")
    C_sq = Fraction(1) if C_const == 1.0 else C_const ** 2
    corrupt = corrupt or {}
    if "lam" in corrupt:
        lam_sq = lam_sq * (Fraction(corrupt["lam"]) ** 2 if isinstance(lam_sq, Fraction) else corrupt["lam"] ** 2)
    if "M" in corrupt:
        M = int(M * corrupt["M"])
        mu_min = min(analysis.mu)
        C_sq = Fraction(1) if M == 0 else (float(lam_sq) * mu_min ** 2) ** M
    if "C_const" in corrupt:
        C_sq = C_sq * (Fraction(corrupt["C_const"]) ** 2 if isinstance(C_sq, Fraction) else corrupt["C_const"] ** 2)
    lam = math.sqrt(float(lam_sq))
    Q, steps, words, mats = _sweep_setup(tilde_family, C, min(lam, analysis.lam), R, n_max,
                                         omega_samples, seed, probs)

    def job(i):
        return _lemma1_word(i, words[i].tolist(), Q, mats, C, lam_sq, C_sq, n_max, steps)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, range(omega_samples)))
    report = SweepReport("orbit_bounds")
    for checks, viol, unrecorded in results:
        report.checks_total += checks
        report.violations.extend(viol)
        report.unrecorded += unrecorded
    report.violations.sort(key=lambda v: (v.omega_id, v.q, v.n, v.kind))
    report.constants = {
        "lambda": lam,
        "C_const": math.sqrt(float(C_sq)),
        "M": M,
        "R": R,
        "n_max": n_max,
        "omega_samples": omega_samples,
        "points": int(len(Q)),
    }
    report.elapsed = time.perf_counter() - t0
    return report


class Lemma2Constant(NamedTuple):
    value: float
    witness: dict


def _lemma2_word(omega_id, word, Q, mats, C, rate, n_max, steps):
    V = _orbits(mats, word, Q, steps)
    inC = _in_cone(C, Q)
    N = _contraction_times(V, inC, C)
    log_q = 0.5 * np.log(_norm2f(Q))
    best, wit = math.inf, None
    for n in range(n_max + 1):
        log_v = 0.5 * np.log(_norm2f(V[n]))
        s1 = inC & (N >= n)
        s2 = inC & (N < n)
        s3 = ~inC
        ratio = np.full(len(Q), math.inf)
        ratio[s1] = (log_q - n * rate - log_v)[s1]
        ratio[s2] = (log_v + log_q - n * rate)[s2]
        ratio[s3] = (log_v - n * rate - log_q)[s3]
        i = int(np.argmin(ratio))
        if ratio[i] < best:
            kind = "i" if s1[i] else ("ii" if s2[i] else "iii")
            best = float(ratio[i])
            wit = {"omega_id": omega_id, "q": [int(c) for c in Q[i]], "n": n, "kind": kind}
    return best, wit


def estimate_lemma2_constant(tilde_family: MatrixFamily, E: Cone, C: Cone, chi: float, eps: float,
                             R: float = 50, n_max: int = 25, omega_samples: int = 50, seed: int = 0,
                             probs=None, threads: int = 1, lam: float | None = None) -> Lemma2Constant:
    """Empirical infimum of the constant in the Lyapunov-rate orbit bounds.

    Each (q, n) in the sweep gives an upper bound on C(eps) by rearranging
    its inequality with ``exp(n (chi - eps))``; the smallest is returned with
    its witness.  This is an empirical value, not a certificate.
    """
    if not 0 < eps < chi:
        raise ToralError(f"need 0 < eps < chi, got eps={eps}, chi={chi}")
    rate = chi - eps
    lam = math.exp(-rate) if lam is None else lam
    Q, steps, words, mats = _sweep_setup(tilde_family, C, lam, R, n_max, omega_samples, seed, probs)

    def job(i):
        return _lemma2_word(i, words[i].tolist(), Q, mats, C, rate, n_max, steps)

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(job, range(omega_samples)))
    best, wit = min(results, key=lambda t: (t[0], t[1]["omega_id"]))
    return Lemma2Constant(math.exp(best), wit)


def verify_product_hyperbolicity(family: MatrixFamily, L: int) -> SweepReport:
    """Check ``|trace| > 2`` for every product over words of length exactly L."""
    if L < 0:
        raise ToralError("L must be nonnegative")
    t0 = time.perf_counter()
    report = SweepReport("product_hyperbolicity", constants={"L": L, "words": len(family) ** L if L else 0})
    if L == 0:
        return report
    mats = [m.entries for m in family.members]

    def walk(prefix: tuple, P: IntMatrix):
        if len(prefix) == L:
            report.checks_total += 1
            if abs(P.trace) <= 2:
                report.violations.append(Violation("".join(map(str, prefix)), prefix, L, float(abs(P.trace)), 2.0,
                                                   "trace"))
            return
        for i, m in enumerate(mats):
            walk(prefix + (i,), m @ P)

    walk((), IntMatrix.identity())
    report.elapsed = time.perf_counter() - t0
    return report


class DiophantineResult(NamedTuple):
    value: float
    q1: int
    q2: int


def diophantine_sweep(slope, eps: float = 0.0, Q: int = 1000, prec: int = 128,
                      which: str = "u") -> DiophantineResult:
    """``min_{1 <= q1 <= Q} |alpha - q2/q1| q1^(2 + eps)`` with q2 the nearest integer to ``q1 alpha``.

    ``slope`` is an :class:`EigenData` (its ``which`` eigendirection slope is
    evaluated at ``prec`` bits from the exact trace and discriminant) or a
    number.
    """
    if Q < 1:
        raise ToralError("Q must be at least 1")
    with mpmath.workprec(prec):
        alpha = slope.slope_mp(which, prec) if isinstance(slope, EigenData) else mpmath.mpf(slope)
        best = None
        for q1 in range(1, Q + 1):
            q2 = int(mpmath.nint(q1 * alpha))
            val = abs(alpha - mpmath.mpf(q2) / q1) * mpmath.mpf(q1) ** (2 + eps)
            if best is None or val < best[0]:
                best = (val, q1, q2)
    return DiophantineResult(float(best[0]), best[1], best[2])
