"""移位份额 IV 无效份额选择工具包"""

__version__ = '1.0.0'
__author__ = 'UNKNOWN'
__description__ = '移位份额工具变量的无效份额选择、选择后估计与蒙特卡洛实验'


from .core import Dataset, SelectionResult, EstimateResult, load_dataset, build_ssiv
from .estimators import EstimatorFactory, fit_2sls, fit_liml, fit_ssiv
from .selection import SelectorFactory, alasso_select, cim_select, testing_threshold
from .simulation import run_cell, sweep
from .utils import setup_logger
from .config import ESTIMATION_CONFIG, IO_CONFIG, LOG_CONFIG, SIMULATION_CONFIG

__all__ = [
    'Dataset', 'SelectionResult', 'EstimateResult', 'load_dataset', 'build_ssiv',
    'EstimatorFactory', 'fit_2sls', 'fit_liml', 'fit_ssiv',
    'SelectorFactory', 'alasso_select', 'cim_select', 'testing_threshold',
    'run_cell', 'sweep',
    'setup_logger',
    'ESTIMATION_CONFIG', 'IO_CONFIG', 'LOG_CONFIG', 'SIMULATION_CONFIG',
]
