"""Exact lattice arithmetic and the cone property for the pair (A, B).

Run: python3 notebooks/01_lattice_and_cones.py
"""
from toralmix import (MatrixFamily, analyze_cones, default_quadrant_cones, tilde_cones, verify_cone_property,
                      verify_product_hyperbolicity)

A = [[2, 1], [1, 1]]
B = [[1, 1], [1, 2]]
fam = MatrixFamily([A, B])

for name, m in zip("AB", fam.members):
    e = m.eigen
    print(f"{name}: trace {e.trace}, discriminant {e.discriminant}, "
          f"lambda_u = {e.lambda_u:.6f}, slope_u = {e.slope_u:.6f}")
    print(f"   tilde = {m.tilde().entries.rows()}")

# quadrants: E = I u III expands, C = II u IV contracts
E, C = default_quadrant_cones(fam)
a = verify_cone_property(fam, E, C)
print("\nexpansion cone", E, " contraction cone", C)
print(f"lambda_E^2 = {a.lambda_E_sq} (exact), lambda_C^-2 = {a.lambda_C_inv_sq} (exact)")

# the tilde family swaps the roles of the cones
T = fam.tilde()
Et, Ct = tilde_cones(E, C)
ta = analyze_cones(T, Et, Ct)
print(f"\ntilde family: lambda = {ta.lam:.6f}, M = {ta.M}, C = {ta.C_const}, K = {ta.K}")
print(f"decay rate rho = {ta.rho:.6f}, c(beta=1) = {ta.c(1.0):.6f}")

r = verify_product_hyperbolicity(fam, 12)
print(f"\nall {r.checks_total} words of length 12 hyperbolic: {r.passed}")

# a matrix and its inverse cannot share cones
bad = MatrixFamily([A, [[1, -1], [-1, 2]]])
r = verify_product_hyperbolicity(bad, 2)
print("{A, A^-1}: first non-hyperbolic product", r.violations[0].omega_id)
