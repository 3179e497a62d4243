"""无效份额选择

过度识别检验、初始一致估计，以及自适应 Lasso 和置信区间法两种选择器。
"""

from .alasso import (AdaptiveLassoSelector, LassoPath, LassoStep, alasso_beta, alasso_path,
                     alasso_select, project_instruments)
from .base import BaseSelector, Candidate
from .cim import CimSelector, IntervalSet, build_intervals, cim_select, largest_group, psi_breakpoints
from .factory import SelectorFactory
from .median import (InitialEstimate, adaptive_weights, alpha_plugin, asymptotic_fraction_limit,
                     initial_estimate, marginal_median, qualified_majority_min)
from .overid import TestOutcome, anderson_rubin, hansen_sargan, run_test, testing_threshold

__all__ = [
    'AdaptiveLassoSelector', 'LassoPath', 'LassoStep', 'alasso_beta', 'alasso_path',
    'alasso_select', 'project_instruments',
    'BaseSelector', 'Candidate',
    'CimSelector', 'IntervalSet', 'build_intervals', 'cim_select', 'largest_group',
    'psi_breakpoints',
    'SelectorFactory',
    'InitialEstimate', 'adaptive_weights', 'alpha_plugin', 'asymptotic_fraction_limit',
    'initial_estimate', 'marginal_median', 'qualified_majority_min',
    'TestOutcome', 'anderson_rubin', 'hansen_sargan', 'run_test', 'testing_threshold',
]
