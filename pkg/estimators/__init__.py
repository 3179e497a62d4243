"""点估计量、协方差与第一阶段诊断"""

from .base import BaseIVEstimator, IVDesign, kclass_solve
from .combinations import CombinationEstimates, just_identified
from .covariance import vcov
from .diagnostics import FirstStageStat, first_stage_strength
from .factory import EstimatorFactory
from .liml import LimitedInformationML, fit_liml, liml_kappa
from .ssiv import ShiftShareIV, fit_ssiv
from .tsls import TwoStageLeastSquares, fit_2sls

__all__ = [
    'BaseIVEstimator', 'IVDesign', 'kclass_solve',
    'CombinationEstimates', 'just_identified',
    'vcov', 'FirstStageStat', 'first_stage_strength',
    'EstimatorFactory',
    'LimitedInformationML', 'fit_liml', 'liml_kappa',
    'ShiftShareIV', 'fit_ssiv',
    'TwoStageLeastSquares', 'fit_2sls',
]
