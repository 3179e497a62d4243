"""第一阶段强度诊断

P = 1 时为排除工具变量的 F 统计量（稳健/聚类时为 Wald/L），
P > 1 时为 Cragg-Donald 最小特征值统计量。
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
import scipy.linalg

from config import ESTIMATION_CONFIG
from core.types import Dataset
from estimators.base import IVDesign
from estimators.covariance import check_vce, meat
from utils.linalg import lstsq, residualize, symmetrize

logger = logging.getLogger(__name__)

PERFECT_FIT_TOL = 1e-20


@dataclass(frozen=True)
class FirstStageStat:
    value: float
    kind: str
    capped: bool = False
    df_num: int = 0
    df_den: int = 0

    def __float__(self) -> float:
        return float(self.value)

    def to_dict(self) -> Dict[str, Any]:
        return {'value': float(self.value), 'kind': self.kind, 'capped': self.capped,
                'df_num': self.df_num, 'df_den': self.df_den}


def first_stage_from_design(design: IVDesign, vce: str, cap: Optional[float] = None) -> FirstStageStat:
    cap = cap or ESTIMATION_CONFIG['first_stage_cap']
    vce = check_vce(vce)
    Xt = residualize(design.controls, design.X)
    Zt = residualize(design.controls, design.instruments)
    n, L = Zt.shape
    P = Xt.shape[1]
    df_den = n - L - design.controls.shape[1]

    pi = lstsq(Zt, Xt)
    fitted = Zt @ pi
    V = Xt - fitted
    explained = symmetrize(fitted.T @ fitted)
    rss = symmetrize(V.T @ V)
    tss = np.diag(Xt.T @ Xt)

    def capped(kind: str) -> FirstStageStat:
        logger.warning(f"第一阶段近乎完全拟合，{kind} 统计量截断为 {cap:g}")
        return FirstStageStat(cap, kind, True, L, df_den)

    if P == 1:
        kind = 'F' if vce == 'homoskedastic' else f"{vce}_F"
        if rss[0, 0] <= PERFECT_FIT_TOL * max(tss[0], 1e-300):
            return capped(kind)
        if vce == 'homoskedastic':
            value = (explained[0, 0] / L) / (rss[0, 0] / df_den)
        else:
            bread = scipy.linalg.inv(symmetrize(Zt.T @ Zt))
            middle, _ = meat(Zt, V[:, 0], vce, design.clusters)
            vpi = symmetrize(bread @ middle @ bread)
            coef = pi[:, 0]
            try:
                value = float(coef @ scipy.linalg.solve(vpi, coef, assume_a='sym')) / L
            except (np.linalg.LinAlgError, ValueError):
                return capped(kind)
    else:
        kind = 'cragg_donald'
        if np.any(np.diag(rss) <= PERFECT_FIT_TOL * np.maximum(tss, 1e-300)):
            return capped(kind)
        sigma = rss / df_den
        try:
            value = float(scipy.linalg.eigh(explained, sigma, eigvals_only=True).min()) / L
        except (np.linalg.LinAlgError, ValueError):
            return capped(kind)

    if not np.isfinite(value) or value > cap:
        return capped(kind)
    return FirstStageStat(float(value), kind, False, L, df_den)


def first_stage_strength(d: Dataset, valid: Sequence[int], invalid_as_controls: Sequence[int] = (),
                         vce: Optional[str] = None, cap: Optional[float] = None) -> FirstStageStat:
    """排除工具变量的第一阶段强度

    Args:
        d: 数据集
        valid: 排除工具变量下标
        invalid_as_controls: 作为控制变量的份额下标
        vce: 协方差类型，决定 P = 1 时的 F 形式
        cap: 统计量上限，完全拟合时返回上限并标记

    Returns:
        FirstStageStat: 可以直接 float() 的统计量
    """
    design = IVDesign.build(d, valid, invalid_as_controls)
    return first_stage_from_design(design, vce or ESTIMATION_CONFIG['vce'], cap)
