import numpy as np
import pytest

from conftest import make_toy_frame, toy_dataset
from core.types import Dataset
from estimators import fit_2sls, just_identified
from selection import SelectorFactory
from utils.errors import ShiftShareError


@pytest.mark.parametrize('method', ['alasso', 'cim'])
def test_toy_selection_with_sampled_errors(method):
    selector = SelectorFactory.create_selector(method, test='hs', vce='homoskedastic')
    hits = covered = 0
    for seed in range(20):
        d = toy_dataset(make_toy_frame(seed=seed, exact=False))
        try:
            result = selector.select(d)
        except ShiftShareError:
            continue
        if result.invalid_names == ['D', 'E']:
            hits += 1
            fit = fit_2sls(d, result.valid_set, result.invalid_set, vce='homoskedastic')
            covered += abs(fit.beta[0]) <= 2 * fit.beta_se[0]
    assert hits >= 18
    assert covered >= hits - 3


def _permuted(d: Dataset, order):
    return Dataset(y=d.y, X=d.X, Z=d.Z[:, order], W=d.W, x_names=d.x_names,
                   z_names=tuple(d.z_names[j] for j in order), w_names=d.w_names)


@pytest.mark.parametrize('method', ['alasso', 'cim'])
@pytest.mark.parametrize('order', [[4, 3, 2, 1, 0], [3, 0, 4, 1, 2]])
def test_selected_set_ignores_column_order(toy, method, order):
    selector = SelectorFactory.create_selector(method, test='hs', vce='homoskedastic')
    result = selector.select(_permuted(toy, order))
    assert sorted(result.invalid_names) == ['D', 'E']


def test_combination_estimates_follow_column_order(toy):
    order = [3, 0, 4, 1, 2]
    base = just_identified(toy, vce='homoskedastic')
    moved = just_identified(_permuted(toy, order), vce='homoskedastic')
    np.testing.assert_allclose(moved.betas[:, 0], base.betas[order, 0], rtol=1e-9, atol=1e-9)
