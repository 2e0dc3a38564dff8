import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toralmix.cones import QUADRANTS_13, QUADRANTS_24, analyze_cones
from toralmix.correlations import (correlation_exact, correlation_exact_series, correlation_quadrature,
                                   correlation_series, correlation_skew, correlation_skew_mean, decay_envelope,
                                   decay_envelope_lyapunov, fit_decay_rate, quadrature_bandwidth)
from toralmix.errors import AliasingRisk, ToralError, WordTooShort
from toralmix.lattice import MatrixFamily
from toralmix.observables import TrigObservable, random_observable
from toralmix.random_model import sample_word

from conftest import A, B

ALL_A = (0,) * 12
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def tilde_quadrant_analysis():
    fam = MatrixFamily([A, B])
    return analyze_cones(fam.tilde(), QUADRANTS_24, QUADRANTS_13)


def test_single_mode_series(family, single_modes):
    f, g = single_modes
    series = correlation_exact_series(family, ALL_A, f, g, 10)
    assert series[2] == 1
    assert all(v == 0 for n, v in enumerate(series) if n != 2)


def test_empty_and_constant_observables(family, single_modes):
    f, g = single_modes
    empty = TrigObservable({})
    const = TrigObservable.from_modes({(0, 0): 3.0})
    assert all(v == 0 for v in correlation_exact_series(family, ALL_A, f, empty, 8))
    assert all(v == 0 for v in correlation_exact_series(family, ALL_A, const, g, 8))


def test_word_too_short(family, single_modes):
    f, g = single_modes
    with pytest.raises(WordTooShort):
        correlation_exact(family, (0, 0), f, g, 3)
    with pytest.raises(WordTooShort):
        correlation_skew(family, (0, 0), TrigObservable({((1, 0), (0,)): 1.0}, depth=1), g, 2)


@pytest.mark.parametrize("n", range(5))
def test_quadrature_matches_exact(family, single_modes, n):
    f, g = single_modes
    assert abs(correlation_quadrature(family, ALL_A, f, g, n) - correlation_exact(family, ALL_A, f, g, n)) < 1e-9


def test_quadrature_constant_f(family, single_modes):
    const = TrigObservable.from_modes({(0, 0): 3.0})
    assert abs(correlation_quadrature(family, ALL_A, const, single_modes[1], 3)) < 1e-12


def test_quadrature_small_grid_raises(family, single_modes):
    f, g = single_modes
    bw = quadrature_bandwidth(family, ALL_A, f, g, 3)
    assert bw == 3
    with pytest.raises(AliasingRisk):
        correlation_quadrature(family, ALL_A, f, g, 3, grid=bw)
    with pytest.raises(AliasingRisk):
        correlation_quadrature(family, ALL_A, f, g, 5, grid=4)


def test_skew_equals_exact_for_word_independent(family):
    rng = np.random.default_rng(0)
    f, g = random_observable(rng), random_observable(rng)
    w = sample_word(0.5, 12, seed=1)
    for n in range(8):
        assert correlation_skew(family, w, f, g, n) == correlation_exact(family, w, f, g, n)


def test_skew_mean_quarter(family, single_modes):
    f, g = single_modes
    assert correlation_skew_mean(family, (0.5, 0.5), f, g, 2) == 0.25


def test_skew_mean_four_word_enumeration(family, single_modes):
    f, g = single_modes
    total = sum(0.25 * correlation_exact(family, w, f, g, 2) for w in itertools.product((0, 1), repeat=2))
    assert total == 0.25


def test_skew_mean_point_mass(family, single_modes):
    f, g = single_modes
    for n in range(8):
        assert correlation_skew_mean(family, (1.0, 0.0), f, g, n) == correlation_exact(family, ALL_A, f, g, n)


def skew_mean_oracle(family, probs, f, g, n):
    L = max(g.depth, n + f.depth)
    total = 0j
    for w in itertools.product(range(len(probs)), repeat=L):
        pw = math.prod(probs[s] for s in w)
        zero = f.coefficient((0, 0), w[n:n + f.depth]) * g.coefficient((0, 0), w[:g.depth])
        total += pw * (correlation_skew(family, w, f, g, n) + zero)
    fbar = f.averaged(probs).get((0, 0), 0)
    gbar = g.averaged(probs).get((0, 0), 0)
    return total - fbar * gbar


@pytest.mark.parametrize("n", [0, 1, 2, 3, 5, 8, 10])
@pytest.mark.parametrize("depths", [(0, 0), (1, 1), (2, 0), (0, 2)])
def test_skew_mean_matches_enumeration(family, n, depths):
    rng = np.random.default_rng(100 * n + 10 * depths[0] + depths[1])
    f = random_observable(rng, depth=depths[0], radius=4, n_modes=4) + TrigObservable(
        {((0, 0), cfg): 0.5 + i for i, cfg in enumerate(itertools.product((0, 1), repeat=depths[0]))}, depths[0])
    g = random_observable(rng, depth=depths[1], radius=4, n_modes=4)
    probs = (0.3, 0.7)
    got = correlation_skew_mean(family, probs, f, g, n)
    want = skew_mean_oracle(family, probs, f, g, n)
    assert abs(got - want) < 1e-12 * max(1.0, abs(want))


def test_envelope_single_mode(tilde_quadrant_analysis, single_modes):
    f, g = single_modes
    a = tilde_quadrant_analysis
    assert decay_envelope(a, f, g, 1.0, 2) == pytest.approx(3 * math.sqrt(13) / 2, rel=1e-14)
    assert decay_envelope(a, f, g, 1.0, 2) == pytest.approx(5.4083, abs=1e-4)
    for n in range(12):
        assert decay_envelope(a, f, g, 1.0, n) == pytest.approx(3 * math.sqrt(13) * 2 ** (-n / 2), rel=1e-13)


def test_envelope_at_zero_dominates(family, tilde_quadrant_analysis):
    rng = np.random.default_rng(5)
    for _ in range(20):
        f, g = random_observable(rng), random_observable(rng)
        w = sample_word(0.5, 1, seed=int(rng.integers(1 << 30)))
        c0 = correlation_exact(family, w, f, g, 0)
        assert abs(c0) <= decay_envelope(tilde_quadrant_analysis, f, g, 1.0, 0)


def test_lyapunov_envelope_guard(single_modes):
    f, g = single_modes
    with pytest.raises(ToralError):
        decay_envelope_lyapunov(0.9, 0.9, 0.3, f, g, 1.0, 3, c=3.0)


@given(seeds, st.integers(0, 6))
@settings(max_examples=60, deadline=None)
def test_oracle_equivalence(seed, n):
    fam = MatrixFamily([A, B])
    rng = np.random.default_rng(seed)
    f = random_observable(rng, radius=3, n_modes=3)
    g = random_observable(rng, radius=3, n_modes=3)
    w = sample_word(0.5, 6, seed=seed)
    assert abs(correlation_quadrature(fam, w, f, g, n) - correlation_exact(fam, w, f, g, n)) <= 1e-9


@given(seeds)
@settings(max_examples=40)
def test_real_observables_real_correlations(seed):
    fam = MatrixFamily([A, B])
    rng = np.random.default_rng(seed)
    f = random_observable(rng, real=True)
    g = random_observable(rng, real=True)
    w = sample_word(0.5, 15, seed=seed)
    for v in correlation_exact_series(fam, w, f, g, 15):
        assert abs(v.imag) <= 1e-12


@given(seeds, st.sampled_from([0.5, 1.0]))
@settings(max_examples=30, deadline=None)
def test_envelope_soundness(seed, beta):
    fam = MatrixFamily([A, B])
    a = analyze_cones(fam.tilde(), QUADRANTS_24, QUADRANTS_13)
    rng = np.random.default_rng(seed)
    f = random_observable(rng, radius=5, n_modes=6, beta=beta)
    g = random_observable(rng, radius=5, n_modes=6, beta=beta)
    w = sample_word(0.5, 40, seed=seed)
    s = correlation_series(fam, w, f, g, 40, analysis=a, beta=beta)
    assert s.violations() == []


def test_fit_decay_rate():
    series = [math.exp(-0.3 * n) * (1 + 0j) for n in range(20)]
    fit = fit_decay_rate(series)
    assert fit.slope == pytest.approx(-0.3, abs=1e-12)
    assert fit.n_used == 20
    sparse = [0, 1, 0, 0, 0.5, 0]
    assert fit_decay_rate(sparse).n_used == 2
    with pytest.raises(ToralError):
        fit_decay_rate([0, 1, 0])


def test_series_rows(family, tilde_quadrant_analysis, single_modes):
    f, g = single_modes
    s = correlation_series(family, ALL_A, f, g, 10, analysis=tilde_quadrant_analysis, omega_id="all-A")
    rows = list(s.rows())
    assert rows[2][1] == 1 and rows[2][2] == pytest.approx(5.4083, abs=1e-4)
    assert all(abs(a - abs(v)) <= 1e-15 for a, v in zip(s.abs, s.values))
    assert all(e >= 0 for e in s.envelope)
