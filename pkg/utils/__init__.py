"""工具模块

提供日志配置、异常类型、线性代数和结果文件读写等工具函数。
"""

from .errors import (
    ShiftShareError,
    DataValidationError,
    MissingColumnError,
    NonFiniteValueError,
    RankDeficiencyError,
    PanelGapError,
    MissingShiftError,
    KeyMismatchError,
    CombinationLimitError,
    UnderidentifiedError,
    CollinearityError,
    UndefinedTestError,
    UnsupportedModelError,
    NumericalError,
    SelectionExhaustedError,
)
from .logger import setup_logger, temporary_level

__all__ = [
    'setup_logger', 'temporary_level',
    'ShiftShareError', 'DataValidationError', 'MissingColumnError', 'NonFiniteValueError',
    'RankDeficiencyError', 'PanelGapError', 'MissingShiftError', 'KeyMismatchError',
    'CombinationLimitError', 'UnderidentifiedError', 'CollinearityError',
    'UndefinedTestError', 'UnsupportedModelError', 'NumericalError',
    'SelectionExhaustedError',
]
