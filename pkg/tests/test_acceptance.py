"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a PASS/FAIL line that is printed in the terminal summary.
"""
import itertools
import json
import math
import time
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from toralmix.cli import main
from toralmix.cones import QUADRANTS_13, QUADRANTS_24, analyze_cones, verify_cone_property
from toralmix.correlations import correlation_exact, correlation_exact_series, correlation_quadrature, \
    correlation_skew_mean, decay_envelope
from toralmix.lattice import MatrixFamily
from toralmix.observables import TrigObservable, random_observable
from toralmix.random_model import sample_word, sample_words
from toralmix.spectrum import estimate_top_exponent
from toralmix.verification import diophantine_sweep, estimate_lemma2_constant, verify_lemma_bounds, \
    verify_product_hyperbolicity

from conftest import ACCEPTANCE, A, B

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "example.json"
LN_PHI_SQ = math.log((3 + math.sqrt(5)) / 2)


@contextmanager
def criterion(num, label, limit=None):
    t0 = time.perf_counter()
    info = {"detail": ""}
    try:
        yield info
        secs = time.perf_counter() - t0
        if limit is not None:
            assert secs < limit, f"runtime {secs:.2f} s exceeds {limit} s"
    except BaseException as exc:
        secs = time.perf_counter() - t0
        ACCEPTANCE[num] = ("FAIL", label, secs, info["detail"] or str(exc).splitlines()[0][:100])
        raise
    ACCEPTANCE[num] = ("PASS", label, secs, info["detail"])


@pytest.fixture(scope="module")
def fam():
    return MatrixFamily([A, B])


@pytest.fixture(scope="module")
def tilde_quadrants(fam):
    T = fam.tilde()
    return T, QUADRANTS_24, QUADRANTS_13, analyze_cones(T, QUADRANTS_24, QUADRANTS_13)


@pytest.fixture(scope="module")
def chi_hat(fam):
    return estimate_top_exponent(fam, n=10_000, trials=64, seed=0).chi_top


def test_01_cone_rates_exact(fam):
    with criterion(1, "cone rates exact", limit=1.0) as info:
        a = verify_cone_property(fam, QUADRANTS_13, QUADRANTS_24)
        assert a.lambda_E_sq == Fraction(2) and isinstance(a.lambda_E_sq, Fraction)
        assert a.lambda_C_inv_sq == Fraction(2) and isinstance(a.lambda_C_inv_sq, Fraction)
        assert abs(a.lambda_E ** 2 - 2) <= 1e-12 and abs(a.lambda_C ** -2 - 2) <= 1e-12
        info["detail"] = f"lambda_E^2 = {a.lambda_E_sq}, lambda_C^-2 = {a.lambda_C_inv_sq}"


def test_02_deterministic_lyapunov():
    with criterion(2, "deterministic Lyapunov", limit=1.0) as info:
        est = estimate_top_exponent(MatrixFamily([A, A]), n=10_000, trials=32, seed=0)
        err = abs(est.chi_top - LN_PHI_SQ)
        info["detail"] = f"chi = {est.chi_top:.6f}, |err| = {err:.1e}"
        assert err < 1e-3


def test_03_random_lyapunov_bounds(fam):
    with criterion(3, "random Lyapunov bounds", limit=10.0) as info:
        a = estimate_top_exponent(fam, n=10_000, trials=64, seed=0)
        b = estimate_top_exponent(fam, n=10_000, trials=64, seed=1)
        info["detail"] = f"chi = {a.chi_top:.5f} +- {a.stderr:.1e}, {b.chi_top:.5f} +- {b.stderr:.1e}"
        assert 0.3466 <= a.chi_top <= 0.9624 and 0.3466 <= b.chi_top <= 0.9624
        assert a.agrees_with(b, k=3)


def test_04_tilde_exponents(fam):
    with criterion(4, "tilde-exponent equality") as info:
        a = estimate_top_exponent(fam, n=10_000, trials=64, seed=0)
        b = estimate_top_exponent(fam.tilde(), n=10_000, trials=64, seed=2)
        gap = abs(a.chi_top - b.chi_top) / math.hypot(a.stderr, b.stderr)
        info["detail"] = f"difference = {gap:.2f} combined stderr"
        assert a.agrees_with(b, k=3)


def test_05_fourier_quadrature_equivalence(fam):
    with criterion(5, "Fourier/quadrature oracle equivalence", limit=30.0) as info:
        rng = np.random.default_rng(2024)
        worst = 0.0
        for i in range(100):
            f = random_observable(rng, radius=3, n_modes=4)
            g = random_observable(rng, radius=3, n_modes=4)
            n = int(rng.integers(0, 7))
            w = sample_word(0.5, 6, seed=i)
            worst = max(worst, abs(correlation_quadrature(fam, w, f, g, n) - correlation_exact(fam, w, f, g, n)))
        info["detail"] = f"max discrepancy {worst:.1e}"
        assert worst <= 1e-9


def test_06_single_mode_exactness(fam):
    with criterion(6, "single-mode correlation exactness"):
        f, g = TrigObservable.mode((-2, 3)), TrigObservable.mode((1, 0))
        series = correlation_exact_series(fam, (0,) * 10, f, g, 10)
        assert series[2] == 1
        assert all(series[n] == 0 for n in range(11) if n != 2)


def test_07_skew_mean_exactness(fam):
    with criterion(7, "skew-mean exactness") as info:
        f, g = TrigObservable.mode((-2, 3)), TrigObservable.mode((1, 0))
        got = correlation_skew_mean(fam, (0.5, 0.5), f, g, 2)
        enum = sum(0.25 * correlation_exact(fam, w, f, g, 2) for w in itertools.product((0, 1), repeat=2))
        info["detail"] = f"value {got}"
        assert got == 0.25 and enum == 0.25


def test_08_envelope_sweep(fam, tilde_quadrants):
    with criterion(8, "decay envelope sweep", limit=60.0) as info:
        a = tilde_quadrants[3]
        words = sample_words((0.5, 0.5), 40, 200, seed=8)
        rng = np.random.default_rng(8)
        violations, checks = 0, 0
        for k in range(20):
            beta = (0.5, 1.0)[k % 2]
            f = random_observable(rng, radius=5, n_modes=6, beta=beta)
            g = random_observable(rng, radius=5, n_modes=6, beta=beta)
            env = [decay_envelope(a, f, g, beta, n) for n in range(41)]
            for w in words:
                vals = correlation_exact_series(fam, w.tolist(), f, g, 40)
                checks += len(vals)
                violations += sum(abs(v) > e for v, e in zip(vals, env))
        info["detail"] = f"{checks} checks, {violations} violations"
        assert violations == 0


def test_09_lemma1_sweep(tilde_quadrants):
    with criterion(9, "orbit bound sweep", limit=60.0) as info:
        T, Et, Ct, a = tilde_quadrants
        r = verify_lemma_bounds(T, Et, Ct, a, R=50, n_max=25, omega_samples=50, seed=0)
        info["detail"] = f"{r.checks_total} checks, {r.violation_count} violations"
        assert r.passed


def test_10_falsifiability(tilde_quadrants):
    with criterion(10, "falsifiability self-test") as info:
        T, Et, Ct, a = tilde_quadrants
        r = verify_lemma_bounds(T, Et, Ct, a, R=50, n_max=25, omega_samples=50, seed=0, corrupt={"lam": 0.5})
        v = r.violations[0] if r.violations else None
        info["detail"] = f"{r.violation_count} violations, first {v.kind} at q={v.q}, n={v.n}" if v else ""
        assert r.violation_count >= 1 and not r.passed


def test_11_product_hyperbolicity(fam):
    with criterion(11, "product hyperbolicity") as info:
        r = verify_product_hyperbolicity(fam, 12)
        info["detail"] = f"{r.checks_total} words"
        assert r.passed and r.checks_total == 4096


def test_12_lemma2_constant(tilde_quadrants, chi_hat):
    with criterion(12, "Lyapunov-rate constant") as info:
        T, Et, Ct, _ = tilde_quadrants
        vals = [estimate_lemma2_constant(T, Et, Ct, chi_hat, f * chi_hat, R=50, n_max=25, omega_samples=50,
                                         seed=0).value for f in (0.02, 0.05, 0.1)]
        info["detail"] = "C(eps) = " + ", ".join(f"{v:.4f}" for v in vals)
        assert vals[1] > 0
        assert vals[0] <= vals[1] <= vals[2]


@pytest.mark.xfail(strict=True, reason="the minimum over 1 <= q1 <= 1000 is attained at q1 = 1 "
                                       "(|alpha - 1| = 0.381966), below the expected [0.44, 0.45]")
def test_13_diophantine_sweep():
    with criterion(13, "Diophantine sweep") as info:
        r = diophantine_sweep(0.6180340, 0.0, 1000)
        info["detail"] = f"min {r.value:.6f} at q1 = {r.q1}"
        assert 0.44 <= r.value <= 0.45


def test_14_cli_determinism(tmp_path):
    with criterion(14, "CLI determinism") as info:
        outs = []
        for threads in (1, 8):
            out = tmp_path / f"t{threads}"
            for command in ("analyze", "correlate", "verify"):
                main([command, "--config", str(EXAMPLE_CONFIG), "--out", str(out), "--threads", str(threads)])
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        info["detail"] = ", ".join(names)
        assert names == ["analyze.json", "correlate.csv", "correlate.json", "verify.json"]
        for name in names:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
