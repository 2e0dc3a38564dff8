"""Correlations of trigonometric observables along a word, and their envelopes.

Run: python3 notebooks/03_correlations.py
"""
import numpy as np

from toralmix import (MatrixFamily, TrigObservable, analyze_cones, correlation_exact, correlation_quadrature,
                      correlation_series, correlation_skew_mean, default_quadrant_cones, fit_decay_rate,
                      random_observable, sample_word, tilde_cones)

A = [[2, 1], [1, 1]]
B = [[1, 1], [1, 2]]
fam = MatrixFamily([A, B])
Et, Ct = tilde_cones(*default_quadrant_cones(fam))
analysis = analyze_cones(fam.tilde(), Et, Ct)

# a single mode is carried exactly: (-2, 3) lands on (1, 0) after two A steps
f, g = TrigObservable.mode((-2, 3)), TrigObservable.mode((1, 0))
s = correlation_series(fam, (0,) * 10, f, g, 10, analysis=analysis, omega_id="all-A")
for n, value, env, _ in list(s.rows())[:4]:
    print(f"n={n}: |corr| = {abs(value):.3f}, envelope {env:.4f}")
print("mean over words at n=2:", correlation_skew_mean(fam, (0.5, 0.5), f, g, 2))

# the Fourier side agrees with grid quadrature
rng = np.random.default_rng(7)
f, g = random_observable(rng, radius=3, n_modes=4), random_observable(rng, radius=3, n_modes=4)
w = sample_word((0.5, 0.5), 6, seed=7)
for n in range(4):
    print(f"n={n}: exact {correlation_exact(fam, w, f, g, n):.6f}, "
          f"quadrature {correlation_quadrature(fam, w, f, g, n):.6f}")

# denser random observables: nonzero only while some pushed-forward mode of f
# still meets the (finite) support of g, and always inside the envelope
f = random_observable(rng, radius=6, n_modes=80, real=True)
g = random_observable(rng, radius=6, n_modes=80, real=True)
s = correlation_series(fam, sample_word((0.5, 0.5), 40, seed=8), f, g, 40, analysis=analysis)
print("\nenvelope violations:", s.violations())
for n, value, env, _ in s.rows():
    if value != 0:
        print(f"n={n}: |corr| = {abs(value):.3e} <= {env:.3e}")
fit = fit_decay_rate(s.values)
print(f"log-decay slope over the nonzero terms {fit.slope:.3f} per step (envelope rate {-analysis.rho:.3f})")
