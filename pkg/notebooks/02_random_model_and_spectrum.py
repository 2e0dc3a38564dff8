"""Bernoulli words, skew-product orbits and the top Lyapunov exponent.

Run: python3 notebooks/02_random_model_and_spectrum.py
"""
import math

import numpy as np

from toralmix import (MatrixFamily, default_quadrant_cones, estimate_limit_matrix, estimate_top_exponent,
                      sample_word, sample_words, sigma_value, skew_orbit, stable_direction)

A = [[2, 1], [1, 1]]
B = [[1, 1], [1, 2]]
fam = MatrixFamily([A, B])

w = sample_word((0.5, 0.5), 20, seed=0)
print("word:", "".join(map(str, w)))
print("same seed, same word:", tuple(w) == tuple(sample_word((0.5, 0.5), 20, seed=0)))
print("batch of 4 words:\n", sample_words((0.3, 0.7), 12, 4, seed=1))

orbit = skew_orbit(fam, w[:5], (0.1, 0.2))
print("\nfirst five points of the fibre orbit:\n", np.round(orbit, 6))
print("centred cylinder sigma_{0} on the word:", sigma_value({0}, w, 0.5))

# deterministic check: the all-A family gives ln(phi^2)
est = estimate_top_exponent(MatrixFamily([A, A]), n=10_000, trials=32, seed=0)
print(f"\nall-A exponent {est.chi_top:.6f} vs ln(phi^2) = {math.log((3 + math.sqrt(5)) / 2):.6f}")

for seed in (0, 1):
    est = estimate_top_exponent(fam, n=10_000, trials=64, seed=seed)
    print(f"seed {seed}: chi = {est.chi_top:.5f} +- {est.stderr:.1e}")
tilde_est = estimate_top_exponent(fam.tilde(), n=10_000, trials=64, seed=2)
print(f"tilde family: chi = {tilde_est.chi_top:.5f} +- {tilde_est.stderr:.1e}")

L = estimate_limit_matrix(fam, sample_word((0.5, 0.5), 60, seed=3))
print("\nlimit matrix exponents:", tuple(round(x, 5) for x in L.exponents),
      " tilde consistent:", L.tilde_consistent)

_, C = default_quadrant_cones(fam)
v, width = stable_direction(fam, sample_word((0.5, 0.5), 30, seed=3), C)
print(f"stable direction {np.round(v, 8)}, sector width {width:.2e}")
