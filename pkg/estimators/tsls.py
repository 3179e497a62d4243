from typing import Optional, Sequence

from core.types import Dataset, EstimateResult
from estimators.base import BaseIVEstimator, IVDesign


class TwoStageLeastSquares(BaseIVEstimator):
    """两阶段最小二乘，κ = 1"""

    name = 'tsls'

    def estimate_kappa(self, design: IVDesign) -> float:
        return 1.0


def fit_2sls(d: Dataset, valid: Sequence[int], invalid_as_controls: Sequence[int] = (),
             vce: Optional[str] = None) -> EstimateResult:
    """用有效份额作工具变量、无效份额作控制变量的 2SLS

    Args:
        d: 数据集
        valid: 有效工具变量下标
        invalid_as_controls: 作为外生控制变量进入结构方程的份额下标
        vce: 协方差类型，缺省使用配置

    Returns:
        EstimateResult: 估计结果
    """
    return TwoStageLeastSquares(vce).fit(d, valid, invalid_as_controls)
