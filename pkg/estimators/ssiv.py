import dataclasses
import logging
from typing import Optional, Sequence

import numpy as np

from core.shift_share import align_to_rows, build_ssiv
from core.types import Dataset, EstimateResult, ShiftShareInputs
from estimators.base import BaseIVEstimator, IVDesign
from utils.errors import DataValidationError, UnderidentifiedError

logger = logging.getLogger(__name__)


class ShiftShareIV(BaseIVEstimator):
    """调整后的移位份额 IV 估计量

    只用有效类别构造一个聚合工具变量，无效份额作为控制变量，恰好识别。
    """

    name = 'ssiv'

    def __init__(self, shift_share: ShiftShareInputs, vce: Optional[str] = None,
                 location: str = 'location', period: Optional[str] = None,
                 class_labels: Optional[Sequence[str]] = None,
                 first_stage_cap: Optional[float] = None):
        """
        Args:
            shift_share: 份额和冲击
            vce: 协方差类型
            location: 数据集 ids 中的地区列
            period: 数据集 ids 中的时期列，单时期数据可以为空
            class_labels: 每个份额列对应的类别标签，缺省为份额列名
        """
        super().__init__(vce, first_stage_cap)
        self.shift_share = shift_share
        self.location = location
        self.period = period
        self.class_labels = tuple(str(c) for c in class_labels) if class_labels else None

    def instrument(self, d: Dataset, valid: Sequence[int]) -> np.ndarray:
        """按数据行对齐的聚合工具变量（未加权）"""
        if d.ids is None:
            raise DataValidationError("构造移位份额工具变量需要数据集中的地区标识列")
        labels = self.class_labels or d.z_names
        if len(labels) != d.J:
            raise DataValidationError(f"类别标签个数 {len(labels)} 与份额列数 {d.J} 不一致")
        series = build_ssiv(self.shift_share, [labels[j] for j in valid])
        return align_to_rows(series, d.ids, self.location, self.period)

    def design(self, d: Dataset, valid: Sequence[int], invalid: Sequence[int]) -> IVDesign:
        base = IVDesign.build(d, valid, invalid)
        if base.P > 1:
            raise UnderidentifiedError(1, base.P)
        s = self.instrument(d, base.valid)
        if d.weights is not None:
            s = s * np.sqrt(d.weight_vector)
        return dataclasses.replace(base, instruments=s[:, None], instrument_names=('ssiv',))

    def estimate_kappa(self, design: IVDesign) -> float:
        return 1.0


def fit_ssiv(d: Dataset, ss: ShiftShareInputs, valid: Sequence[int],
             invalid_as_controls: Sequence[int] = (), vce: Optional[str] = None,
             location: str = 'location', period: Optional[str] = None,
             class_labels: Optional[Sequence[str]] = None) -> EstimateResult:
    """用有效类别构造的移位份额工具变量做恰好识别 IV"""
    estimator = ShiftShareIV(ss, vce=vce, location=location, period=period,
                             class_labels=class_labels)
    return estimator.fit(d, valid, invalid_as_controls)
