import numpy as np
import pytest
from sklearn.linear_model import Lasso

from conftest import make_iv_data
from core.types import Dataset
from estimators import fit_2sls
from selection import SelectorFactory
from selection.alasso import (AdaptiveLassoSelector, alasso_beta, alasso_path, alasso_select,
                              project_instruments)
from utils.errors import SelectionExhaustedError, UndefinedTestError


def _regression(n=200, J=5, seed=0):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n, J))
    y = Z @ np.array([1.5, -0.8, 0.0, 0.4, 0.0]) + rng.normal(size=n)
    return Z, y


def test_projection_removes_fitted_regressors_and_controls():
    d = make_iv_data(P=2, controls=2, seed=1)
    proj = project_instruments(d)
    np.testing.assert_allclose(proj.x_hat.T @ proj.Z_tilde, 0.0, atol=1e-8)
    np.testing.assert_allclose(d.W.T @ proj.Z_tilde, 0.0, atol=1e-8)
    np.testing.assert_allclose(proj.x_hat.T @ proj.y_tilde, 0.0, atol=1e-8)
    assert proj.rank == d.J - d.P
    assert np.linalg.matrix_rank(proj.Z_tilde) == proj.rank


def test_path_matches_coordinate_descent_lasso():
    Z, y = _regression()
    w = np.array([0.5, 1.0, 3.0, 2.0, 1.5])
    path = alasso_path(Z, y, w)
    n = Z.shape[0]
    lams = path.lambdas
    for lam in np.linspace(lams[0], lams[-1], 15)[1:-1]:
        lasso = Lasso(alpha=lam / n, fit_intercept=False, tol=1e-12, max_iter=1000000)
        lasso.fit(Z / w, y)
        np.testing.assert_allclose(path.coef_at(lam), lasso.coef_ / w, atol=1e-6)


def test_path_starts_empty_and_ends_at_least_squares():
    Z, y = _regression()
    path = alasso_path(Z, y, np.ones(5))
    assert path.steps[0].active == ()
    np.testing.assert_allclose(path.steps[0].coef, 0.0)
    assert path.lambdas[-1] == pytest.approx(0.0, abs=1e-10)
    ols, *_ = np.linalg.lstsq(Z, y, rcond=None)
    np.testing.assert_allclose(path.steps[-1].coef, ols, atol=1e-8)
    assert all(a >= b for a, b in zip(path.lambdas, path.lambdas[1:]))


def test_first_knot_is_largest_weighted_correlation():
    Z, y = _regression()
    w = np.array([1.0, 1.0, 1.0, 1.0, 1.0])
    path = alasso_path(Z, y, w)
    assert path.lambdas[0] == pytest.approx(np.abs(Z.T @ y).max(), rel=1e-10)


def test_small_weight_enters_first():
    Z, y = _regression()
    path = alasso_path(Z, y, np.array([1.0, 1.0, 1.0, 1e-3, 1.0]))
    assert path.active_sets[1] == (3,)


def test_path_truncated_at_rank():
    Z, y = _regression()
    path = alasso_path(Z, y, np.ones(5), rank=2)
    assert len(path.active_sets[-1]) == 2
    assert all(len(a) <= 2 for a in path.active_sets)


def test_weights_must_be_positive():
    Z, y = _regression()
    with pytest.raises(ValueError):
        alasso_path(Z, y, np.array([1.0, 0.0, 1.0, 1.0, 1.0]))


def test_toy_selection(toy):
    result = AdaptiveLassoSelector(test='hs').select(toy)
    assert result.invalid_names == ['D', 'E']
    assert result.threshold == pytest.approx(0.0152, abs=5e-5)
    assert result.path[0].invalid == ()
    assert result.path[result.stopped_at].p_value > result.threshold
    assert result.diagnostics['floored_alpha'] == [1, 2, 3]
    assert result.diagnostics['initial']['beta_m'][0] == pytest.approx(0.0, abs=1e-10)


def test_toy_selection_with_anderson_rubin(toy):
    assert alasso_select(toy, test='ar').invalid_names == ['D', 'E']


def test_beta_without_invalid_shares_is_2sls(iv_data):
    beta = alasso_beta(iv_data, np.zeros(iv_data.J))
    assert beta[0] == pytest.approx(fit_2sls(iv_data, range(iv_data.J)).beta[0], rel=1e-9)


def test_strict_level_exhausts_path(iv_data):
    selector = SelectorFactory.create_selector('alasso', threshold=0.9999999, psif=2.0)
    with pytest.raises(SelectionExhaustedError) as info:
        selector.select(iv_data)
    details = info.value.details()
    assert details['path']
    assert any('cim' in a for a in details['advice'])


def test_just_identified_model_cannot_be_tested():
    rng = np.random.default_rng(0)
    z = rng.normal(size=50)
    d = Dataset(y=rng.normal(size=50), X=(z + rng.normal(size=50))[:, None], Z=z[:, None])
    with pytest.raises(UndefinedTestError):
        alasso_select(d)


def test_two_regressors_recover_invalid_shares():
    d = make_iv_data(n=3000, J=8, P=2, alpha=[2.0, -1.5, 0, 0, 0, 0, 0, 0], seed=21)
    result = alasso_select(d, vce='homoskedastic')
    assert set(result.invalid_set) == {0, 1}
    assert len(result.diagnostics['beta_ad']) == 2
