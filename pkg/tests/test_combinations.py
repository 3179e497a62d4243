import numpy as np
import pytest

from conftest import make_iv_data
from core.types import Dataset
from estimators import fit_2sls, just_identified
from utils.errors import CombinationLimitError, DataValidationError
from utils.linalg import lstsq


def _noiseless(n=200, seed=1):
    rng = np.random.default_rng(seed)
    Z = rng.uniform(size=(n, 4))
    X = Z @ np.array([[1.0], [0.5], [2.0], [1.5]]) + rng.normal(size=(n, 1))
    alpha = np.array([0.0, 0.0, 0.4, -1.0])
    y = 0.7 * X[:, 0] + Z @ alpha
    return Dataset(y=y, X=X, Z=Z, W=np.ones((n, 1))), alpha


def test_noiseless_estimates_are_effect_plus_ratio():
    d, alpha = _noiseless()
    ce = just_identified(d, vce='homoskedastic')
    gamma_hat = lstsq(np.hstack([d.Z, d.W]), d.X)[:4, 0]
    np.testing.assert_allclose(ce.betas[:, 0], 0.7 + alpha / gamma_hat, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(ce.betas[:2, 0], 0.7, atol=1e-10)


@pytest.mark.parametrize('others', ['control', 'exclude'])
def test_each_combination_equals_just_identified_2sls(iv_data, others):
    ce = just_identified(iv_data, others=others)
    for row, (j,) in enumerate(ce.combos):
        controls = [k for k in range(iv_data.J) if k != j] if others == 'control' else []
        fit = fit_2sls(iv_data, (j,), controls)
        assert ce.betas[row, 0] == pytest.approx(fit.beta[0], rel=1e-9)


def test_control_mode_standard_errors_match_2sls(iv_data):
    ce = just_identified(iv_data, vce='robust')
    fit = fit_2sls(iv_data, (3,), (0, 1, 2, 4, 5), vce='robust')
    assert ce.ses[3, 0] == pytest.approx(fit.beta_se[0], rel=1e-8)


def test_combinations_in_lexicographic_order():
    d = make_iv_data(J=4, P=2, seed=2)
    ce = just_identified(d)
    assert ce.combos == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert ce.betas.shape == (6, 2)
    assert ce.n_used == 6


def test_combination_cap():
    d = make_iv_data(J=4, P=2, seed=2)
    with pytest.raises(CombinationLimitError) as info:
        just_identified(d, cap=5)
    assert info.value.details() == {'count': 6, 'cap': 5}


def test_unknown_mode(iv_data):
    with pytest.raises(DataValidationError):
        just_identified(iv_data, others='drop')
