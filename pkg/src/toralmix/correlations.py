"""Correlation functions of trig observables along a fixed word.

The Fourier side is exact: frequencies are pushed through the tilde matrices
with integer arithmetic, one symbol at a time (``q_{n+1} = A~_{w(n)} q_n``),
and only coefficient lookups involve complex numbers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .cones import ConeAnalysis
from .errors import AliasingRisk, ToralError, WordTooShort
from .lattice import IntMatrix, MatrixFamily, check_probs, word_product
from .observables import TrigObservable, check_beta

MAX_GRID = 4096


def _tilde_entries(family: MatrixFamily) -> list[IntMatrix]:
    return [m.entries.tilde() for m in family.members]


def _check_len(w, need: int, what: str):
    if len(w) < need:
        raise WordTooShort(f"word of length {len(w)} too short for {what} (need {need})")


def correlation_exact_series(family: MatrixFamily, w: Sequence[int], f: TrigObservable,
                             g: TrigObservable, n_max: int, skew: bool = False) -> list[complex]:
    """``C(w, n)`` for n = 0..n_max from the Fourier representation.

    With ``skew=True`` the coefficients of ``f`` are read on the shifted word
    ``tau^n w`` (the skew-product correlation).
    """
    family.check_word(w)
    need = n_max + f.depth if skew else max(n_max, f.depth)
    _check_len(w, max(need, g.depth), "correlation")
    tl = _tilde_entries(family)
    g_sup = [(q, c) for q, c in g.support(g.config_of(w)).items() if q != (0, 0)]
    f_fixed = None if skew else f.support(f.config_of(w))
    vecs = [q for q, _ in g_sup]
    out = []
    for n in range(n_max + 1):
        f_sup = f.support(tuple(w[n:n + f.depth])) if skew else f_fixed
        total = 0j
        if f_sup:
            for v, (_, c) in zip(vecs, g_sup):
                fc = f_sup.get((-v[0], -v[1]))
                if fc is not None:
                    total += fc * c
        out.append(total)
        if n < n_max:
            m = tl[w[n]]
            vecs = [m.apply(v) for v in vecs]
    return out


def correlation_exact(family: MatrixFamily, w: Sequence[int], f: TrigObservable, g: TrigObservable,
                      n: int) -> complex:
    """``sum_{q != 0} f^(w, -A~_w^n q) g^(w, q)``."""
    _check_len(w, n, "n steps")
    return correlation_exact_series(family, w, f, g, n)[-1]


def correlation_skew(family: MatrixFamily, w: Sequence[int], f: TrigObservable, g: TrigObservable,
                     n: int) -> complex:
    """Skew-product correlation: ``f`` is read on ``tau^n w``."""
    return correlation_exact_series(family, w, f, g, n, skew=True)[-1]


def quadrature_bandwidth(family: MatrixFamily, w: Sequence[int], f: TrigObservable,
                         g: TrigObservable, n: int, skew: bool = False) -> int:
    """Largest frequency component of ``f(A_w^n x) g(x)``, computed exactly."""
    fwd, _ = word_product(family, w[:n])
    cfg_f = tuple(w[n:n + f.depth]) if skew else f.config_of(w)
    bw_f = 0
    for p in f.support(cfg_f):
        k = fwd.T.apply(p)
        bw_f = max(bw_f, abs(k[0]), abs(k[1]))
    bw_g = max((max(abs(q[0]), abs(q[1])) for q in g.support(g.config_of(w))), default=0)
    return bw_f + bw_g


def correlation_quadrature(family: MatrixFamily, w: Sequence[int], f: TrigObservable, g: TrigObservable,
                           n: int, grid: int | None = None, skew: bool = False) -> complex:
    """Average of ``f(A_w^n x) g(x)`` over the uniform grid, minus the mean product.

    Grid points ``2 pi j / N`` map to grid points under integer matrices, so
    the orbit of every node is computed exactly as ``A_w^n j mod N``.  The
    grid must exceed the combined bandwidth or high frequencies alias.
    """
    _check_len(w, max(n + f.depth if skew else max(n, f.depth), g.depth), "quadrature")
    family.check_word(w)
    bw = quadrature_bandwidth(family, w, f, g, n, skew)
    N = bw + 1 if grid is None else int(grid)
    if N <= bw:
        raise AliasingRisk(f"grid {N} does not exceed bandwidth {bw}", witness=bw)
    if N > MAX_GRID:
        raise ToralError(f"alias-free grid {N} exceeds the {MAX_GRID} limit")
    fwd, _ = word_product(family, w[:n])
    cfg_f = tuple(w[n:n + f.depth]) if skew else f.config_of(w)
    cfg_g = g.config_of(w)
    a, b, c, d = (x % N for x in (fwd.a, fwd.b, fwd.c, fwd.d))
    j1, j2 = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    i1 = (a * j1 + b * j2) % N
    i2 = (c * j1 + d * j2) % N
    F = f.grid_values(cfg_f, N)[i1, i2]
    G = g.grid_values(cfg_g, N)
    integral = (F * G).mean()
    return complex(integral - f.coefficient((0, 0), cfg_f) * g.coefficient((0, 0), cfg_g))


def _word_prob(word, probs) -> float:
    return math.prod(probs[s] for s in word)


def correlation_skew_mean(family: MatrixFamily, probs: Sequence[float], f: TrigObservable,
                          g: TrigObservable, n: int) -> complex:
    """Exact expectation over words of the skew-product correlation.

    Computes ``(P x m)(f o Phi^n . g) - (P x m)(f) (P x m)(g)``.  Frequencies
    are propagated as a probability-weighted dictionary, merging equal lattice
    points, so the cost grows with the number of distinct ``A~_w^n q``.
    """
    probs = tuple(float(p) for p in probs)
    check_probs(probs, len(family))
    tl = _tilde_entries(family)
    alphabet = [i for i, p in enumerate(probs) if p > 0]
    f_bar = f.averaged(probs)
    g_bar = g.averaged(probs)
    total = 0j

    if g.depth <= n:
        for cfg_g in itertools.product(alphabet, repeat=g.depth):
            pg = _word_prob(cfg_g, probs)
            for q, cq in g.support(cfg_g).items():
                v = q
                for s in cfg_g:
                    v = tl[s].apply(v)
                dist = {v: pg * cq}
                for _ in range(g.depth, n):
                    nxt: dict = {}
                    for u, wt in dist.items():
                        for s in alphabet:
                            u2 = tl[s].apply(u)
                            nxt[u2] = nxt.get(u2, 0) + wt * probs[s]
                    dist = nxt
                for u, wt in dist.items():
                    fc = f_bar.get((-u[0], -u[1]))
                    if fc is not None:
                        total += wt * fc
    else:
        L = max(g.depth, n + f.depth)
        for word in itertools.product(alphabet, repeat=L):
            pw = _word_prob(word, probs)
            f_sup = f.support(tuple(word[n:n + f.depth]))
            for q, cq in g.support(tuple(word[:g.depth])).items():
                v = q
                for s in word[:n]:
                    v = tl[s].apply(v)
                fc = f_sup.get((-v[0], -v[1]))
                if fc is not None:
                    total += pw * fc * cq
    return total - f_bar.get((0, 0), 0j) * g_bar.get((0, 0), 0j)


def decay_envelope(analysis: ConeAnalysis, f: TrigObservable, g: TrigObservable, beta: float,
                   n: int) -> float:
    """``(1 + 2 C^{-beta}) |f| |g| exp(-rho beta n)`` with ``rho = -ln lambda``."""
    beta = check_beta(beta)
    return analysis.c(beta) * f.bnorm(beta) * g.bnorm(beta) * math.exp(-analysis.rho * beta * n)


def decay_envelope_lyapunov(chi: float, eps: float, C_eps: float, f: TrigObservable, g: TrigObservable,
                            beta: float, n: int, *, c: float) -> float:
    """Envelope with the Lyapunov rate: ``c |f| |g| C(eps)^{-beta} exp(-(chi - eps) beta n)``."""
    beta = check_beta(beta)
    if not 0 < eps < chi:
        raise ToralError(f"need 0 < eps < chi, got eps={eps}, chi={chi}")
    return c * f.bnorm(beta) * g.bnorm(beta) * C_eps ** (-beta) * math.exp(-(chi - eps) * beta * n)


class DecayFit(NamedTuple):
    slope: float
    n_used: int


def fit_decay_rate(series) -> DecayFit:
    """Least-squares slope of ``ln|C(n)|`` against n, skipping exact zeros."""
    values = series.values if isinstance(series, CorrelationSeries) else list(series)
    ns = [n for n, v in enumerate(values) if v != 0]
    if len(ns) < 2:
        raise ToralError(f"need at least two nonzero correlations, have {len(ns)}")
    y = [math.log(abs(values[n])) for n in ns]
    slope = float(np.polyfit(ns, y, 1)[0])
    return DecayFit(slope, len(ns))


@dataclass
class CorrelationSeries:
    """Correlations ``C(w, n)``, n = 0..n_max, with their envelopes."""

    omega_id: str
    method: str
    values: list[complex]
    envelope: list[float] = field(default_factory=list)
    envelope_lyapunov: list[float | None] = field(default_factory=list)

    @property
    def abs(self) -> list[float]:
        return [abs(v) for v in self.values]

    def violations(self) -> list[int]:
        """Indices n where ``|C(n)|`` exceeds the envelope."""
        return [n for n, (v, e) in enumerate(zip(self.values, self.envelope)) if abs(v) > e]

    def rows(self):
        for n, v in enumerate(self.values):
            env = self.envelope[n] if self.envelope else None
            lyap = self.envelope_lyapunov[n] if self.envelope_lyapunov else None
            yield n, v, env, lyap


def correlation_series(family: MatrixFamily, w: Sequence[int], f: TrigObservable, g: TrigObservable,
                       n_max: int, analysis: ConeAnalysis | None = None, beta: float | None = None,
                       skew: bool = False, omega_id: str = "", lyapunov: tuple | None = None) -> CorrelationSeries:
    """Exact series plus envelopes; ``lyapunov = (chi, eps, C_eps)`` adds the refined one."""
    values = correlation_exact_series(family, w, f, g, n_max, skew=skew)
    beta = f.beta if beta is None else beta
    env, lyap = [], []
    if analysis is not None:
        env = [decay_envelope(analysis, f, g, beta, n) for n in range(n_max + 1)]
        if lyapunov is not None:
            chi, eps, C_eps = lyapunov
            c = analysis.c(beta)
            lyap = [decay_envelope_lyapunov(chi, eps, C_eps, f, g, beta, n, c=c) for n in range(n_max + 1)]
    return CorrelationSeries(omega_id, "skew" if skew else "fourier", values, env, lyap)
