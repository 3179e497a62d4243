import numpy as np
import pandas as pd
import pytest
import statsmodels.api as sm
from scipy.optimize import minimize_scalar
from statsmodels.sandbox.regression.gmm import IV2SLS

from conftest import make_iv_data
from core.types import Dataset, ShiftShareInputs
from estimators import (EstimatorFactory, IVDesign, first_stage_strength, fit_2sls, fit_liml,
                        fit_ssiv, liml_kappa)
from utils.errors import DataValidationError, UnderidentifiedError
from utils.linalg import project, residualize


def _statsmodels_iv(d, valid, invalid=()):
    y, X, Z, W = d.scaled()
    C = np.hstack([Z[:, list(invalid)], W])
    return IV2SLS(y, np.hstack([X, C]), np.hstack([Z[:, list(valid)], C])).fit()


class TestTwoStageLeastSquares:
    def test_matches_statsmodels(self, iv_data):
        fit = fit_2sls(iv_data, (0, 1, 2, 3, 4), (5,), vce='homoskedastic')
        ref = _statsmodels_iv(iv_data, (0, 1, 2, 3, 4), (5,))
        np.testing.assert_allclose(fit.params, ref.params, rtol=1e-8, atol=1e-10)
        assert fit.n_invalid == 1
        assert fit.param_names == ('x1', 'z6', 'w1')

    def test_homoskedastic_variance_divides_by_n(self, iv_data):
        fit = fit_2sls(iv_data, range(6), vce='homoskedastic')
        ref = _statsmodels_iv(iv_data, range(6))
        k = len(fit.params)
        np.testing.assert_allclose(fit.se, ref.bse * np.sqrt((iv_data.n - k) / iv_data.n), rtol=1e-8)

    def test_fitted_regressors_orthogonal_to_residuals(self, iv_data):
        fit = fit_2sls(iv_data, (0, 1, 2, 3), (4, 5))
        design = IVDesign.build(iv_data, (0, 1, 2, 3), (4, 5))
        resid = design.y - design.R @ fit.params
        fitted = project(design.Q, design.R)
        np.testing.assert_allclose(fitted.T @ resid, 0.0, atol=1e-8)

    def test_just_identified_instrument_orthogonal_to_residuals(self, iv_data):
        fit = fit_2sls(iv_data, (2,), (0, 1, 3, 4, 5))
        design = IVDesign.build(iv_data, (2,), (0, 1, 3, 4, 5))
        resid = design.y - design.R @ fit.params
        np.testing.assert_allclose(design.Q.T @ resid, 0.0, atol=1e-8)

    def test_robust_variance_is_hc0_sandwich(self, iv_data):
        fit = fit_2sls(iv_data, range(6), vce='robust')
        design = IVDesign.build(iv_data, range(6))
        A = project(design.Q, design.R)
        resid = design.y - design.R @ fit.params
        bread = np.linalg.inv(A.T @ design.R)
        scores = A * resid[:, None]
        np.testing.assert_allclose(fit.vcov, bread @ scores.T @ scores @ bread.T, rtol=1e-8)

    def test_cluster_variance_sums_scores_within_clusters(self):
        d = make_iv_data(n=400, clusters=25, seed=4)
        fit = fit_2sls(d, range(6), vce='cluster')
        design = IVDesign.build(d, range(6))
        A = project(design.Q, design.R)
        resid = design.y - design.R @ fit.params
        sums = pd.DataFrame(A * resid[:, None]).groupby(d.clusters).sum().to_numpy()
        G = sums.shape[0]
        bread = np.linalg.inv(A.T @ design.R)
        expected = G / (G - 1) * bread @ sums.T @ sums @ bread.T
        np.testing.assert_allclose(fit.vcov, expected, rtol=1e-8)
        assert fit.n_clusters == G

    def test_duplicated_rows_within_clusters(self):
        d = make_iv_data(n=300, clusters=20, seed=9)
        twice = Dataset(y=np.repeat(d.y, 2), X=np.repeat(d.X, 2, axis=0),
                        Z=np.repeat(d.Z, 2, axis=0), W=np.repeat(d.W, 2, axis=0),
                        clusters=np.repeat(d.clusters, 2))
        for vce, ratio in (('cluster', 1.0), ('robust', np.sqrt(0.5)),
                           ('homoskedastic', np.sqrt(0.5))):
            once, dup = fit_2sls(d, range(6), vce=vce), fit_2sls(twice, range(6), vce=vce)
            np.testing.assert_allclose(dup.params, once.params, rtol=1e-9)
            np.testing.assert_allclose(dup.se, once.se * ratio, rtol=1e-8)

    def test_weights_scale_every_block(self):
        d = make_iv_data(weights=True, controls=2, seed=5)
        fit = fit_2sls(d, range(6))
        s = np.sqrt(d.weight_vector)
        ref = IV2SLS(d.y * s, np.hstack([d.X, d.W]) * s[:, None],
                     np.hstack([d.Z, d.W]) * s[:, None]).fit()
        np.testing.assert_allclose(fit.params, ref.params, rtol=1e-8)

    def test_recovers_effect_when_invalid_shares_are_controlled(self):
        d = make_iv_data(n=5000, alpha=[0.8, 0.6, 0, 0, 0, 0], seed=2)
        naive = fit_2sls(d, range(6))
        oracle = fit_2sls(d, (2, 3, 4, 5), (0, 1))
        assert abs(oracle.beta[0] - 1.0) < 0.05
        assert abs(naive.beta[0] - 1.0) > abs(oracle.beta[0] - 1.0)
        np.testing.assert_allclose(oracle.alpha, [0.8, 0.6], atol=0.1)

    def test_underidentified(self, iv_data):
        with pytest.raises(UnderidentifiedError):
            fit_2sls(iv_data, (), range(6))

    def test_overlapping_sets_rejected(self, iv_data):
        with pytest.raises(DataValidationError, match='相交'):
            fit_2sls(iv_data, (0, 1, 2), (2, 3))

    def test_to_dict_names_sets(self, iv_data):
        doc = fit_2sls(iv_data, (0, 1, 2, 3), (4, 5)).to_dict(iv_data.z_names)
        assert doc['invalid_names'] == ['z5', 'z6']
        assert doc['invalid_index'] == [5, 6]
        assert doc['first_stage']['kind'] == 'robust_F'


class TestLiml:
    def test_equals_2sls_when_just_identified(self, iv_data):
        liml = fit_liml(iv_data, (1,), (0, 2, 3, 4, 5))
        tsls = fit_2sls(iv_data, (1,), (0, 2, 3, 4, 5))
        assert liml.kappa == 1.0
        np.testing.assert_allclose(liml.params, tsls.params, rtol=1e-10)

    def test_kappa_minimizes_variance_ratio(self):
        d = make_iv_data(n=300, alpha=[0.3, 0, 0, 0, 0, 0], seed=8)
        fit = fit_liml(d, range(6), vce='homoskedastic')
        design = IVDesign.build(d, range(6))

        def ratio(b):
            r = design.y - design.X[:, 0] * b
            rc = residualize(design.controls, r)
            rq = residualize(design.Q, r)
            return (rc @ rc) / (rq @ rq)

        tsls = fit_2sls(d, range(6)).beta[0]
        best = minimize_scalar(ratio, bounds=(tsls - 2, tsls + 2), method='bounded',
                               options={'xatol': 1e-12})
        assert fit.kappa >= 1.0
        assert fit.kappa == pytest.approx(best.fun, rel=1e-8)
        assert fit.beta[0] == pytest.approx(best.x, abs=1e-6)

    def test_kappa_at_least_one(self, iv_data):
        assert liml_kappa(IVDesign.build(iv_data, range(6))) >= 1.0


class TestFirstStage:
    def test_homoskedastic_f_matches_nested_ols(self, iv_data):
        stat = first_stage_strength(iv_data, (0, 1, 2, 3), (4, 5), vce='homoskedastic')
        C = np.hstack([iv_data.Z[:, [4, 5]], iv_data.W])
        full = sm.OLS(iv_data.X[:, 0], np.hstack([iv_data.Z[:, :4], C])).fit()
        restricted = sm.OLS(iv_data.X[:, 0], C).fit()
        f_value, _, df_diff = full.compare_f_test(restricted)
        assert stat.kind == 'F'
        assert float(stat) == pytest.approx(f_value, rel=1e-8)
        assert stat.df_num == df_diff == 4

    def test_multiple_regressors_use_cragg_donald(self):
        d = make_iv_data(P=2, J=6, seed=3)
        stat = first_stage_strength(d, range(6), vce='robust')
        assert stat.kind == 'cragg_donald'
        assert float(stat) > 0

    def test_perfect_first_stage_is_capped(self):
        rng = np.random.default_rng(0)
        Z = rng.normal(size=(50, 3))
        d = Dataset(y=rng.normal(size=50), X=Z @ np.ones((3, 1)), Z=Z, W=np.ones((50, 1)))
        stat = first_stage_strength(d, range(3), vce='homoskedastic', cap=1e8)
        assert stat.capped
        assert float(stat) == 1e8


class TestShiftShareIV:
    def _setup(self, n=300, J=4, seed=6):
        rng = np.random.default_rng(seed)
        Z = rng.uniform(0, 1.0 / J, size=(n, J))
        g = rng.normal(size=J)
        s = Z @ g
        x = 2.0 * s + Z[:, 0] + rng.normal(size=n)
        y = 0.5 * x + 0.7 * Z[:, 3] + rng.normal(size=n)
        names = tuple(f"c{j}" for j in range(J))
        locations = [f"l{i}" for i in range(n)]
        shares = pd.DataFrame({'location': np.repeat(locations, J), 'class': list(names) * n,
                               'share': Z.reshape(-1)})
        shifts = pd.DataFrame({'class': list(names), 'period': 1, 'shift': g})
        d = Dataset(y=y, X=x[:, None], Z=Z, W=np.ones((n, 1)), z_names=names,
                    ids=pd.DataFrame({'loc': locations}))
        return d, ShiftShareInputs(shares=shares, shifts=shifts), g

    def test_aggregated_instrument_matches_manual_iv(self):
        d, ss, g = self._setup()
        fit = fit_ssiv(d, ss, (0, 1, 2), (3,), vce='homoskedastic', location='loc')
        s = d.Z[:, :3] @ g[:3]
        C = np.column_stack([d.Z[:, 3], d.W])
        ref = IV2SLS(d.y, np.column_stack([d.X, C]), np.column_stack([s, C])).fit()
        np.testing.assert_allclose(fit.params, ref.params, rtol=1e-8)
        assert fit.estimator == 'ssiv'

    def test_requires_location_ids(self):
        d, ss, _ = self._setup()
        bare = Dataset(y=d.y, X=d.X, Z=d.Z, W=d.W, z_names=d.z_names)
        with pytest.raises(DataValidationError):
            fit_ssiv(bare, ss, (0, 1, 2), (3,))


class TestEstimatorFactory:
    def test_creates_supported_estimators(self):
        assert EstimatorFactory.create_estimator('TSLS').name == 'tsls'
        assert EstimatorFactory.create_estimator('liml', vce='cluster').vce == 'cluster'
        assert EstimatorFactory.is_supported_type('ssiv')

    def test_unknown_estimator(self):
        with pytest.raises(ValueError, match='不支持的估计量'):
            EstimatorFactory.create_estimator('gmm')

    def test_ssiv_needs_inputs(self):
        with pytest.raises(ValueError, match='shift_share'):
            EstimatorFactory.create_estimator('ssiv', vce='robust')

    def test_unknown_vce(self):
        with pytest.raises(DataValidationError):
            EstimatorFactory.create_estimator('tsls', vce='hc3')
