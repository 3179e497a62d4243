"""蒙特卡洛数据生成与实验"""

from .dgp import (generate, late_plurality_config, majority_config, multi_regressor_config,
                  plurality_config)
from .harness import CSV_COLUMNS, SUPPORTED_DESIGNS, CellMetrics, run_cell, sweep

__all__ = [
    'generate', 'late_plurality_config', 'majority_config', 'multi_regressor_config',
    'plurality_config',
    'CSV_COLUMNS', 'SUPPORTED_DESIGNS', 'CellMetrics', 'run_cell', 'sweep',
]
