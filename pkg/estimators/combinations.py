"""恰好识别组合估计

对每个大小为 P 的工具变量子集 S 做恰好识别 IV。缺省 (control) 时其余份额作为外生控制变量，
此时 β_S = γ̂_S^{-1} Γ̂_S，Γ̂ 与 γ̂ 分别为 y 与 X 对全部份额（及 W）的约化式系数，
可以一次分解后对全部组合复用；exclude 时其余份额完全不进入模型。
"""

import itertools
import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from config import ESTIMATION_CONFIG
from core.types import Dataset, IndexSet
from estimators.covariance import check_vce, meat
from utils.errors import CombinationLimitError, DataValidationError, NumericalError
from utils.linalg import residualize, symmetrize

logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
OTHERS_MODES = ('control', 'exclude')


@dataclass(frozen=True)
class CombinationEstimates:
    """按字典序排列的全部恰好识别估计

    无法估计的组合对应行为 NaN，不参与中位数。
    """

    combos: Tuple[IndexSet, ...]
    betas: np.ndarray
    ses: np.ndarray
    vce: str
    others: str = 'control'
    dropped: int = 0

    @property
    def P(self) -> int:
        return self.betas.shape[1]

    @property
    def finite_mask(self) -> np.ndarray:
        return np.isfinite(self.betas).all(axis=1)

    @property
    def n_used(self) -> int:
        return int(self.finite_mask.sum())


def just_identified(d: Dataset, vce: Optional[str] = None, cap: Optional[int] = None,
                    others: Optional[str] = None) -> CombinationEstimates:
    """全部 C(J, P) 个恰好识别估计

    Args:
        d: 数据集
        vce: 标准误的协方差类型
        cap: 组合个数上限
        others: 组合之外的份额 'control'（作为控制变量）或 'exclude'（剔除）

    Returns:
        CombinationEstimates: 估计与标准误

    Raises:
        CombinationLimitError: 组合数超过上限
        NumericalError: 超过一半的组合第一阶段秩亏
    """
    vce = check_vce(vce or ESTIMATION_CONFIG['vce'])
    cap = cap or ESTIMATION_CONFIG['combination_cap']
    others = others or ESTIMATION_CONFIG['just_identified_others']
    if others not in OTHERS_MODES:
        raise DataValidationError(f"不支持的组合模式: {others}. 支持: {', '.join(OTHERS_MODES)}")

    total = comb(d.J, d.P)
    if total > cap:
        raise CombinationLimitError(total, cap)

    y, X, Z, W = d.scaled()
    clusters = d.cluster_ids
    ry = residualize(W, y)
    rX = residualize(W, X)
    rZ = residualize(W, Z)

    if others == 'control':
        A = scipy.linalg.inv(symmetrize(rZ.T @ rZ))
        G = rZ @ A
        Gamma = G.T @ ry
        gamma = G.T @ rX
        ey = ry - rZ @ Gamma
        eX = rX - rZ @ gamma

    combos = tuple(itertools.combinations(range(d.J), d.P))
    betas = np.full((total, d.P), np.nan)
    ses = np.full((total, d.P), np.nan)
    dropped = []
    for row, S in enumerate(combos):
        cols = list(S)
        if others == 'control':
            inst = G[:, cols]
            gS = gamma[cols, :]
            target = Gamma[cols]
        else:
            inst = rZ[:, cols]
            gS = inst.T @ rX
            target = inst.T @ ry
        if not np.isfinite(gS).all() or np.linalg.cond(gS) > COND_LIMIT:
            dropped.append(S)
            continue
        b = np.linalg.solve(gS, target)
        resid = (ey - eX @ b) if others == 'control' else (ry - rX @ b)
        middle, _ = meat(inst, resid, vce, clusters)
        g_inv = np.linalg.inv(gS)
        cov = symmetrize(g_inv @ middle @ g_inv.T)
        betas[row] = b
        ses[row] = np.sqrt(np.clip(np.diag(cov), 0.0, None))

    if dropped:
        shown = ', '.join('(' + ','.join(d.names_of(S)) + ')' for S in dropped[:10])
        logger.warning(f"{len(dropped)}/{total} 个组合第一阶段秩亏，已标记为无效: {shown}")
        if len(dropped) > total / 2:
            raise NumericalError(
                f"{len(dropped)}/{total} 个恰好识别组合第一阶段秩亏，超过一半",
                {'dropped': len(dropped), 'total': total},
            )

    betas.setflags(write=False)
    ses.setflags(write=False)
    return CombinationEstimates(combos=combos, betas=betas, ses=ses, vce=vce,
                                others=others, dropped=len(dropped))
