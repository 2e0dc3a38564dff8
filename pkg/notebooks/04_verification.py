"""Desk-scale sweeps of the orbit bounds, and what a broken constant looks like.

Run: python3 notebooks/04_verification.py
"""
from toralmix import (MatrixFamily, analyze_cones, contraction_time, default_quadrant_cones, diophantine_sweep,
                      estimate_lemma2_constant, estimate_top_exponent, tilde_cones, verify_lemma_bounds)

A = [[2, 1], [1, 1]]
B = [[1, 1], [1, 2]]
fam = MatrixFamily([A, B])
T = fam.tilde()
Et, Ct = tilde_cones(*default_quadrant_cones(fam))
a = analyze_cones(T, Et, Ct)

print("contraction time of (1, 1) along all-A:", contraction_time(T, (0,) * 10, (1, 1), Ct, a.lam))

r = verify_lemma_bounds(T, Et, Ct, a, R=50, n_max=25, omega_samples=50, seed=0)
print(f"\nsweep: {r.checks_total} checks, {r.violation_count} violations, {r.elapsed:.1f} s")

# halving lambda must break the bounds, or the sweep proves nothing
bad = verify_lemma_bounds(T, Et, Ct, a, R=20, n_max=15, omega_samples=10, seed=0, corrupt={"lam": 0.5})
v = bad.violations[0]
print(f"corrupted: {bad.violation_count} violations, e.g. {v.kind} at q={v.q}, n={v.n}: "
      f"{v.lhs:.3f} vs {v.rhs:.3f}")

chi = estimate_top_exponent(fam, n=10_000, trials=64, seed=0).chi_top
for frac in (0.02, 0.05, 0.1):
    c = estimate_lemma2_constant(T, Et, Ct, chi, frac * chi, R=50, n_max=25, omega_samples=50, seed=0)
    print(f"eps = {frac:.2f} chi: empirical constant {c.value:.4f}")

d = diophantine_sweep(fam.members[0].eigen, 0.0, 1000)
print(f"\nmin q1^2 |alpha - q2/q1| over q1 <= 1000: {d.value:.6f} at q1 = {d.q1}")
# the q1 = 1 term dominates; along Fibonacci denominators the error tends to 1/sqrt 5
alpha = fam.members[0].eigen.slope_u
for q1 in (3, 8, 21, 55, 144, 377, 987):
    print(f"q1 = {q1:4d}: q1^2 |alpha - q2/q1| = {q1 * abs(q1 * alpha - round(q1 * alpha)):.6f}")
