"""Trigonometric-polynomial observables with finite cylinder dependence.

An observable is ``f(w, x) = sum_q c(q, cfg(w)) exp(i q.x)`` where ``cfg(w)``
is the first ``depth`` symbols of the word.  Depth 0 means no dependence on
the word at all.
"""
from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ToralError, WordTooShort

Freq = tuple[int, int]
Config = tuple[int, ...]


def check_beta(beta: float) -> float:
    beta = float(beta)
    if not 0.0 < beta <= 1.0:
        raise ToralError(f"Hoelder exponent must lie in (0, 1], got {beta}")
    return beta


@dataclass(frozen=True)
class TrigObservable:
    """Finite Fourier support keyed by ``(q, cfg)``.

    ``coeffs[(q, cfg)]`` is the coefficient of ``exp(i q.x)`` on words whose
    first ``depth`` symbols are ``cfg``.  Missing keys are zero.
    """

    coeffs: Mapping[tuple[Freq, Config], complex]
    depth: int = 0
    beta: float = 1.0
    _by_cfg: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean = {}
        for (q, cfg), c in self.coeffs.items():
            q = (int(q[0]), int(q[1]))
            cfg = tuple(int(s) for s in cfg)
            if len(cfg) != self.depth:
                raise ToralError(f"configuration {cfg} does not have depth {self.depth}")
            c = complex(c)
            if c != 0:
                clean[(q, cfg)] = clean.get((q, cfg), 0) + c
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "beta", check_beta(self.beta))
        by_cfg: dict[Config, dict[Freq, complex]] = {}
        for (q, cfg), c in clean.items():
            by_cfg.setdefault(cfg, {})[q] = c
        object.__setattr__(self, "_by_cfg", by_cfg)

    @classmethod
    def from_modes(cls, modes: Mapping[Freq, complex], beta: float = 1.0) -> "TrigObservable":
        """An observable that ignores the word."""
        return cls({(q, ()): c for q, c in modes.items()}, 0, beta)

    @classmethod
    def mode(cls, q: Freq, coeff: complex = 1.0, beta: float = 1.0) -> "TrigObservable":
        return cls.from_modes({tuple(q): coeff}, beta)

    @classmethod
    def from_cylinder(cls, cylinder, modes: Mapping[Freq, complex], beta: float = 1.0) -> "TrigObservable":
        """Product of a cylinder function of the word and a trig polynomial of x."""
        coeffs = {}
        for cfg, v in cylinder.table.items():
            for q, c in modes.items():
                coeffs[(tuple(q), cfg)] = v * c
        return cls(coeffs, cylinder.depth, beta)

    def configs(self) -> list[Config]:
        return sorted(self._by_cfg)

    def support(self, cfg: Config = ()) -> dict[Freq, complex]:
        """The Fourier coefficients on the cylinder ``cfg`` (empty when absent)."""
        return self._by_cfg.get(tuple(cfg), {})

    def coefficient(self, q: Freq, cfg: Config = ()) -> complex:
        return self.support(cfg).get(tuple(q), 0j)

    def config_of(self, w: Sequence[int]) -> Config:
        if len(w) < self.depth:
            raise WordTooShort(f"word of length {len(w)} is shorter than depth {self.depth}")
        return tuple(w[: self.depth])

    def bnorm(self, beta: float | None = None) -> float:
        """``sup_cfg sum_q |c(q, cfg)| |q|^beta`` with Euclidean |q|."""
        beta = self.beta if beta is None else check_beta(beta)
        best = 0.0
        for sup in self._by_cfg.values():
            total = math.fsum(abs(c) * math.hypot(*q) ** beta for q, c in sup.items() if q != (0, 0))
            best = max(best, total)
        return best

    def evaluate(self, w: Sequence[int], x) -> complex:
        sup = self.support(self.config_of(w))
        x1, x2 = float(x[0]), float(x[1])
        return sum((c * cmath.exp(1j * (q[0] * x1 + q[1] * x2)) for q, c in sup.items()), 0j)

    def mean(self, w: Sequence[int] = ()) -> complex:
        """Integral over the torus: the zero-frequency coefficient."""
        return self.coefficient((0, 0), self.config_of(w))

    def bandwidth(self) -> int:
        """Largest absolute frequency component over the whole support."""
        return max((max(abs(q[0]), abs(q[1])) for (q, _) in self.coeffs), default=0)

    def is_real(self) -> bool:
        for (q, cfg), c in self.coeffs.items():
            if abs(self.coefficient((-q[0], -q[1]), cfg) - c.conjugate()) > 0:
                return False
        return True

    def averaged(self, probs: Sequence[float]) -> dict[Freq, complex]:
        """Coefficients averaged over the cylinder configurations."""
        out: dict[Freq, complex] = {}
        for cfg, sup in self._by_cfg.items():
            w = math.prod(probs[s] for s in cfg)
            if w == 0:
                continue
            for q, c in sup.items():
                out[q] = out.get(q, 0j) + w * c
        return out

    def __add__(self, other: "TrigObservable") -> "TrigObservable":
        if self.depth != other.depth:
            raise ToralError("can only add observables of equal depth")
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0) + c
        return TrigObservable(coeffs, self.depth, self.beta)

    def scale(self, s: complex) -> "TrigObservable":
        return TrigObservable({k: s * c for k, c in self.coeffs.items()}, self.depth, self.beta)

    def grid_values(self, cfg: Config, N: int) -> np.ndarray:
        """Values on the uniform N x N grid ``x = 2 pi (j1, j2) / N``."""
        j = np.arange(N)
        out = np.zeros((N, N), dtype=complex)
        for q, c in self.support(cfg).items():
            # integer phases reduced mod N keep the exponentials exact to rounding
            e1 = np.exp(2j * np.pi * ((q[0] * j) % N) / N)
            e2 = np.exp(2j * np.pi * ((q[1] * j) % N) / N)
            out += c * np.outer(e1, e2)
        return out


def evaluate(f: TrigObservable, w: Sequence[int], x) -> complex:
    return f.evaluate(w, x)


def mean(f: TrigObservable, w: Sequence[int] = ()) -> complex:
    return f.mean(w)


def bnorm(f: TrigObservable, beta: float | None = None) -> float:
    return f.bnorm(beta)


def random_observable(rng: np.random.Generator, n_modes: int = 4, radius: int = 3, depth: int = 0,
                      alphabet: int = 2, beta: float = 1.0, real: bool = False) -> TrigObservable:
    """A random trig polynomial with frequencies in the box ``|q_i| <= radius``."""
    coeffs = {}
    cfgs = list(itertools.product(range(alphabet), repeat=depth))
    for cfg in cfgs:
        for _ in range(n_modes):
            q = tuple(int(v) for v in rng.integers(-radius, radius + 1, size=2))
            c = complex(rng.normal(), rng.normal())
            coeffs[(q, cfg)] = coeffs.get((q, cfg), 0) + c
            if real:
                mq = (-q[0], -q[1])
                coeffs[(mq, cfg)] = coeffs.get((mq, cfg), 0) + c.conjugate()
    if real:
        for (q, cfg) in list(coeffs):
            if q == (0, 0):
                coeffs[(q, cfg)] = complex(coeffs[(q, cfg)].real, 0.0)
    return TrigObservable(coeffs, depth, beta)
