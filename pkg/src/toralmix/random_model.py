"""Symbol sequences, the skew product, and cylinder functions on sequence space.

Randomness is counter based: symbol ``n`` of a stream is a pure function of
``(seed, stream, n)``.  This is what makes sweeps reproducible regardless of
how work is split between workers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ToralError
from .lattice import MatrixFamily, Word, check_probs

TWO_PI = 2.0 * math.pi


def _stream_key(seed: int, stream: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)])
    return ss.generate_state(2, dtype=np.uint64)


def uniforms(seed: int, stream: int, position: int, length: int) -> np.ndarray:
    """Uniform doubles in [0, 1) for positions ``position .. position+length-1``.

    Philox is a counter-based generator: block ``b`` of four 64-bit outputs
    depends only on the key and on ``b``.
    """
    if length <= 0:
        return np.empty(0)
    block, offset = divmod(int(position), 4)
    bg = np.random.Philox(key=_stream_key(seed, stream), counter=block)
    raw = bg.random_raw(length + offset)[offset:]
    return (raw >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def symbols_from_uniforms(u: np.ndarray, probs: Sequence[float]) -> np.ndarray:
    """Inverse-CDF map; symbol 0 is drawn with probability ``probs[0]``."""
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    out = np.searchsorted(cdf, u, side="right")
    # a symbol with zero probability must never be drawn
    return np.minimum(out, len(probs) - 1)


@dataclass(frozen=True)
class OmegaStream:
    """An infinite i.i.d. symbol sequence, materialized lazily by position."""

    seed: int
    probs: tuple[float, ...]
    stream: int = 0
    position: int = 0

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        check_probs(self.probs)

    def word(self, length: int, position: int | None = None) -> Word:
        pos = self.position if position is None else position
        u = uniforms(self.seed, self.stream, pos, length)
        return Word(symbols_from_uniforms(u, self.probs).tolist())

    def advance(self, k: int = 1) -> "OmegaStream":
        """The shifted sequence ``tau^k omega``."""
        return OmegaStream(self.seed, self.probs, self.stream, self.position + k)

    def sample(self, index: int) -> "OmegaStream":
        """An independent sequence, the ``index``-th draw for this seed."""
        return OmegaStream(self.seed, self.probs, index, 0)


def sample_word(probs: Sequence[float], n: int, seed: int, stream: int = 0) -> Word:
    """An i.i.d. word of length ``n``; index 0 is drawn with probability ``probs[0]``.

    A scalar ``probs`` is read as ``p`` for a two-symbol alphabet.
    """
    if n < 0:
        raise ToralError("word length must be nonnegative")
    if np.isscalar(probs):
        probs = (float(probs), 1.0 - float(probs))
    return OmegaStream(seed, tuple(probs), stream).word(n)


def sample_words(probs: Sequence[float], n: int, count: int, seed: int) -> np.ndarray:
    """``count`` independent words as a (count, n) integer array."""
    if np.isscalar(probs):
        probs = (float(probs), 1.0 - float(probs))
    out = np.empty((count, n), dtype=np.int64)
    for t in range(count):
        out[t] = symbols_from_uniforms(uniforms(seed, t, 0, n), probs)
    return out


def skew_orbit(family: MatrixFamily, w: Sequence[int], x0) -> np.ndarray:
    """Torus orbit ``x_{n+1} = A_{w(n)} x_n mod 2 pi``, shape (len(w) + 1, 2)."""
    family.check_word(w)
    mats = [m.entries.to_array() for m in family.members]
    out = np.empty((len(w) + 1, 2))
    out[0] = np.mod(np.asarray(x0, dtype=float), TWO_PI)
    for n, i in enumerate(w):
        out[n + 1] = np.mod(mats[i] @ out[n], TWO_PI)
    return out


def sigma_value(subset: Iterable[int], w: Sequence[int], p: float) -> float:
    """Orthonormal basis function ``sigma_S(w) = prod_{i in S} sigma_i(w)``.

    ``sigma_i`` is ``sqrt(p/(1-p))`` when ``w(i) = 1`` and ``-sqrt((1-p)/p)``
    when ``w(i) = 0``.
    """
    if not 0.0 < p < 1.0:
        raise ToralError(f"sigma basis needs p in (0, 1), got {p}")
    up, down = math.sqrt(p / (1.0 - p)), -math.sqrt((1.0 - p) / p)
    val = 1.0
    for i in subset:
        if not 0 <= i < len(w):
            raise ToralError(f"index {i} outside word of length {len(w)}")
        val *= up if w[i] == 1 else down
    return val


@dataclass(frozen=True)
class CylinderFunction:
    """A function of the first ``depth`` symbols, tabulated on every configuration."""

    depth: int
    table: Mapping[tuple[int, ...], complex]
    alphabet: int = 2

    def __post_init__(self):
        table = {tuple(k): complex(v) for k, v in self.table.items()}
        expected = set(itertools.product(range(self.alphabet), repeat=self.depth))
        if set(table) != expected:
            raise ToralError(f"table must cover all {self.alphabet}**{self.depth} configurations")
        object.__setattr__(self, "table", table)

    def __call__(self, w: Sequence[int]) -> complex:
        if len(w) < self.depth:
            raise ToralError("word shorter than cylinder depth")
        return self.table[tuple(w[: self.depth])]

    @classmethod
    def sigma(cls, subset: Iterable[int], p: float) -> "CylinderFunction":
        subset = sorted(set(subset))
        depth = subset[-1] + 1 if subset else 0
        table = {cfg: sigma_value(subset, cfg, p) for cfg in itertools.product((0, 1), repeat=depth)}
        return cls(depth, table)

    def expectation(self, probs: Sequence[float]) -> complex:
        total = 0j
        for cfg, v in self.table.items():
            total += math.prod(probs[i] for i in cfg) * v
        return total
