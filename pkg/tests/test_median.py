from math import comb

import numpy as np
import pytest
import statsmodels.api as sm

from conftest import make_iv_data
from estimators.combinations import CombinationEstimates
from selection.median import (adaptive_weights, alpha_plugin, asymptotic_fraction_limit,
                              initial_estimate, marginal_median, qualified_majority_min)
from utils.errors import DataValidationError, NumericalError


@pytest.mark.parametrize('J, P, expected', [(20, 2, 15), (20, 3, 17), (38, 2, 28), (10, 1, 6),
                                            (100, 3, 80)])
def test_qualified_majority_goldens(J, P, expected):
    assert qualified_majority_min(J, P) == expected


def test_qualified_majority_is_smallest_majority():
    for J in range(2, 15):
        for P in range(1, J + 1):
            g = qualified_majority_min(J, P)
            assert 2 * comb(g, P) > comb(J, P)
            assert g == P or 2 * comb(g - 1, P) <= comb(J, P)
        assert qualified_majority_min(J, 1) == J // 2 + 1


def test_qualified_majority_bad_input():
    with pytest.raises(DataValidationError):
        qualified_majority_min(3, 4)


def test_fraction_limit():
    assert asymptotic_fraction_limit(2) == pytest.approx(0.707107, abs=1e-6)
    assert asymptotic_fraction_limit(1) == 0.5


def _combos(betas):
    betas = np.asarray(betas, dtype=float)
    return CombinationEstimates(combos=tuple((j,) for j in range(len(betas))),
                                betas=betas, ses=np.ones_like(betas), vce='robust')


def test_median_skips_non_finite_rows():
    assert marginal_median(_combos([[1.0], [3.0], [np.nan], [2.0], [10.0]]))[0] == 2.5


def test_median_is_taken_per_column():
    np.testing.assert_allclose(marginal_median(_combos([[1, 9], [2, 7], [3, 8]])), [2, 8])


def test_median_needs_a_finite_row():
    with pytest.raises(NumericalError):
        marginal_median(_combos([[np.nan], [np.inf]]))


def test_alpha_plugin_matches_weighted_least_squares():
    d = make_iv_data(weights=True, controls=2, seed=12)
    beta_m = np.array([0.9])
    ref = sm.WLS(d.y - d.X @ beta_m, np.hstack([d.Z, d.W]), weights=d.weights).fit()
    np.testing.assert_allclose(alpha_plugin(d, beta_m), ref.params[:d.J], rtol=1e-8, atol=1e-10)


def test_initial_estimate_on_toy(toy):
    est = initial_estimate(toy)
    assert est.beta_m[0] == pytest.approx(0.0, abs=1e-10)
    np.testing.assert_allclose(est.alpha_m, [0, 0, 0, 1, 1], atol=1e-8)
    assert est.n_combos_used == 5


def test_adaptive_weights_floor():
    w, floored = adaptive_weights(np.array([0.0, 0.5, -2.0]), exponent=1.0, floor=1e-12)
    np.testing.assert_allclose(w, [1e12, 2.0, 0.5])
    assert floored == (0,)
    w2, _ = adaptive_weights(np.array([0.5, -2.0]), exponent=2.0)
    np.testing.assert_allclose(w2, [4.0, 0.25])
