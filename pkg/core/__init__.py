"""领域类型与数据变换"""

from .types import (
    Dataset,
    DgpConfig,
    EstimateResult,
    PathStep,
    SelectionResult,
    ShiftShareInputs,
    as_index_set,
)
from .dataset import first_difference, load_dataset, serialize_dataset
from .shift_share import build_ssiv, load_shift_share

__all__ = [
    'Dataset', 'DgpConfig', 'EstimateResult', 'PathStep', 'SelectionResult', 'ShiftShareInputs',
    'as_index_set', 'first_difference', 'load_dataset', 'serialize_dataset',
    'build_ssiv', 'load_shift_share',
]
