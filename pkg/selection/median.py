"""初始一致估计

恰好识别估计的（边际）中位数、α 的代入估计以及合格多数条件的组合计算。
"""

import logging
from dataclasses import dataclass
from math import comb
from typing import Any, Dict, Optional, Tuple

import numpy as np

from config import ESTIMATION_CONFIG
from core.types import Dataset
from estimators.combinations import CombinationEstimates, just_identified
from utils.errors import DataValidationError, NumericalError
from utils.linalg import lstsq

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitialEstimate:
    beta_m: np.ndarray
    alpha_m: np.ndarray
    n_combos_used: int
    dropped_combos: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'beta_m': self.beta_m.tolist(),
            'alpha_m': self.alpha_m.tolist(),
            'n_combos_used': self.n_combos_used,
            'dropped_combos': self.dropped_combos,
        }


def marginal_median(ce: CombinationEstimates) -> np.ndarray:
    """逐维中位数，只用全部有限的行；偶数个时取中间两个次序统计量的中点

    Raises:
        NumericalError: 没有有限行
    """
    mask = ce.finite_mask
    if not mask.any():
        raise NumericalError("全部恰好识别估计都无效，无法计算中位数", {'rows': len(ce.combos)})
    return np.median(ce.betas[mask], axis=0)


def alpha_plugin(d: Dataset, beta_m: np.ndarray) -> np.ndarray:
    """α_m：(y - X β_m) 对 [Z, W] 加权最小二乘中 Z 的系数"""
    beta_m = np.asarray(beta_m, dtype=float).reshape(-1)
    if beta_m.shape[0] != d.P:
        raise DataValidationError(f"beta_m 长度 {beta_m.shape[0]} 与处理变量个数 {d.P} 不一致")
    y, X, Z, W = d.scaled()
    coef = lstsq(np.hstack([Z, W]), y - X @ beta_m)
    return coef[:d.J]


def initial_estimate(d: Dataset, vce: Optional[str] = None,
                     ce: Optional[CombinationEstimates] = None) -> InitialEstimate:
    """计算 β_m 和 α_m，可复用已有的组合估计"""
    if ce is None:
        ce = just_identified(d, vce)
    beta_m = marginal_median(ce)
    alpha_m = alpha_plugin(d, beta_m)
    return InitialEstimate(beta_m=beta_m, alpha_m=alpha_m,
                           n_combos_used=ce.n_used, dropped_combos=ce.dropped)


def adaptive_weights(alpha_m: np.ndarray, exponent: Optional[float] = None,
                     floor: Optional[float] = None) -> Tuple[np.ndarray, Tuple[int, ...]]:
    """自适应权重 1/|α_m,j|^v，|α_m,j| 低于下限时按下限计算

    Returns:
        tuple: (权重, 被截断的下标)
    """
    exponent = ESTIMATION_CONFIG['alasso_exponent'] if exponent is None else exponent
    floor = ESTIMATION_CONFIG['alpha_floor'] if floor is None else floor
    magnitude = np.abs(np.asarray(alpha_m, dtype=float))
    floored = tuple(int(j) for j in np.flatnonzero(magnitude < floor))
    if floored:
        logger.warning(f"α_m 中 {len(floored)} 个分量绝对值低于 {floor:g}，已截断: {floored}")
    return 1.0 / np.maximum(magnitude, floor) ** exponent, floored


def qualified_majority_min(J: int, P: int) -> int:
    """初始估计一致所需的最少有效工具变量个数：最小的 g 使 C(g,P)/C(J,P) > 0.5

    Raises:
        DataValidationError: P > J 或 P < 1
    """
    if P < 1:
        raise DataValidationError(f"处理变量个数 P={P} 必须至少为 1")
    if P > J:
        raise DataValidationError(f"处理变量个数 P={P} 大于工具变量个数 J={J}")
    total = comb(J, P)
    for g in range(P, J + 1):
        if 2 * comb(g, P) > total:
            return g
    return J


def asymptotic_fraction_limit(P: int = 2) -> float:
    """J 趋于无穷时有效工具变量比例的下限 0.5^(1/P)"""
    if P < 1:
        raise DataValidationError(f"处理变量个数 P={P} 必须至少为 1")
    return 0.5 ** (1.0 / P)
