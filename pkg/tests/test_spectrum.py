import math

import numpy as np
import pytest

from toralmix.cones import QUADRANTS_24, Cone, verify_cone_property
from toralmix.errors import EmptyIntersection, ToralError
from toralmix.lattice import MatrixFamily, word_product
from toralmix.random_model import sample_word
from toralmix.spectrum import _intersect, estimate_limit_matrix, estimate_top_exponent, stable_direction

from conftest import A

LN_PHI_SQ = math.log((3 + math.sqrt(5)) / 2)


def test_deterministic_exponent(cat_family):
    est = estimate_top_exponent(cat_family, n=10_000, trials=32, seed=0)
    assert abs(est.chi_top - LN_PHI_SQ) < 1e-3
    assert est.chi_bottom == -est.chi_top


def test_random_exponent_within_cone_bounds(family):
    est = estimate_top_exponent(family, n=2000, trials=16, seed=1)
    assert math.log(math.sqrt(2)) <= est.chi_top <= LN_PHI_SQ
    a = verify_cone_property(family, *((Cone((1, 0), (0, 1)), QUADRANTS_24)))
    lower = math.log(max(1 / a.lambda_C, a.lambda_E))
    assert est.chi_top >= lower - 3 * est.stderr


def test_seed_reproducible(family):
    a = estimate_top_exponent(family, n=500, trials=4, seed=9)
    b = estimate_top_exponent(family, n=500, trials=4, seed=9)
    assert a.chi_top == b.chi_top
    assert np.array_equal(a.per_trial, b.per_trial)


def test_single_trial_has_no_stderr(family):
    est = estimate_top_exponent(family, n=100, trials=1)
    assert math.isnan(est.stderr)


def test_bad_parameters(family):
    with pytest.raises(ToralError):
        estimate_top_exponent(family, n=0)
    with pytest.raises(ToralError):
        estimate_top_exponent(family, trials=0)


def test_non_cone_family_reports_only():
    fam = MatrixFamily([A, [[1, -1], [-1, 2]]])
    est = estimate_top_exponent(fam, n=1000, trials=4)
    assert math.isfinite(est.chi_top) and est.chi_top >= 0


def test_limit_matrix_single_step(family):
    L = estimate_limit_matrix(family, (0,))
    lo, hi = sorted(L.eigenvalues)
    assert hi == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-9)
    assert lo == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-9)
    # ((A^T A))^{1/2} squared gives back A^T A
    assert np.allclose(L.matrix @ L.matrix, [[5, 3], [3, 2]], atol=1e-9)


def test_limit_matrix_cat_word(family):
    L = estimate_limit_matrix(family, (0,) * 50)
    lo, hi = sorted(L.eigenvalues)
    assert hi == pytest.approx(2.6180340, abs=1e-6)
    assert lo == pytest.approx(0.3819660, abs=1e-6)
    assert L.tilde_consistent


@pytest.mark.parametrize("n", [1, 7, 30, 60])
def test_limit_matrix_determinant(family, n):
    w = sample_word(0.5, n, seed=n)
    L = estimate_limit_matrix(family, w)
    assert abs(np.linalg.det(L.matrix) - 1) < 1e-6
    assert L.tilde_consistent
    lt = np.linalg.eigvalsh(L.tilde_matrix)
    assert np.allclose(sorted(lt), sorted(L.eigenvalues), rtol=1e-9)


def test_limit_matrix_long_word_no_overflow(family):
    w = sample_word(0.5, 3000, seed=0)
    L = estimate_limit_matrix(family, w)
    assert all(math.isfinite(x) for x in L.exponents)
    assert L.exponents[0] == pytest.approx(-L.exponents[1])


def test_limit_matrix_needs_a_symbol(family):
    with pytest.raises(ToralError):
        estimate_limit_matrix(family, ())


def test_tilde_exponents_agree(family):
    a = estimate_top_exponent(family, n=3000, trials=32, seed=0)
    b = estimate_top_exponent(family.tilde(), n=3000, trials=32, seed=1)
    assert a.agrees_with(b)


def test_stable_direction_deterministic(cat_family):
    v, width = stable_direction(cat_family, (0,) * 15, QUADRANTS_24)
    e_s = np.array([1.0, (1 - math.sqrt(5)) / 2 - 1])
    e_s /= np.linalg.norm(e_s)
    assert min(np.linalg.norm(v - e_s), np.linalg.norm(v + e_s)) < 1e-6
    assert width < 1e-6


def test_stable_direction_depth_zero(cat_family):
    v, width = stable_direction(cat_family, (), QUADRANTS_24)
    assert width == pytest.approx(QUADRANTS_24.opening())
    assert np.allclose(v, QUADRANTS_24.midline())


def test_stable_direction_widths_shrink(family):
    w = sample_word(0.5, 20, seed=4)
    widths = [stable_direction(family, w[:k], QUADRANTS_24)[1] for k in range(len(w) + 1)]
    assert all(b <= a for a, b in zip(widths, widths[1:]))


def test_stable_direction_contracts(family):
    w = sample_word(0.5, 12, seed=2)
    v, _ = stable_direction(family, w, QUADRANTS_24)
    lam_C = 1 / math.sqrt(2)
    for n in range(1, len(w) + 1):
        fwd, _ = word_product(family, w[:n])
        assert np.linalg.norm(fwd.to_array() @ v) <= (lam_C + 1e-9) ** n * np.linalg.norm(v)


def test_empty_intersection():
    with pytest.raises(EmptyIntersection):
        _intersect(Cone((1, 0), (1, 1)), Cone((-1, 1), (0, 1)))
