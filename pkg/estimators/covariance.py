"""三明治协方差估计

homoskedastic: σ² = e'e/n
robust: HC0
cluster: CR0，乘以 G/(G-1)
"""

import logging
from typing import Optional, Tuple

import numpy as np

from config import SUPPORTED_VCE
from utils.errors import DataValidationError
from utils.linalg import symmetrize

logger = logging.getLogger(__name__)


def check_vce(vce: str) -> str:
    vce = vce.lower().strip()
    if vce not in SUPPORTED_VCE:
        raise DataValidationError(
            f"不支持的协方差类型: {vce}. 支持的类型: {', '.join(SUPPORTED_VCE)}"
        )
    return vce


def meat(basis: np.ndarray, resid: np.ndarray, vce: str,
         clusters: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Optional[int]]:
    """三明治中间项 Σ s_i s_i'，s_i = basis_i · e_i

    Returns:
        tuple: (中间项, 聚类个数；非聚类时为 None)
    """
    n = basis.shape[0]
    if vce == 'homoskedastic':
        sigma2 = float(resid @ resid) / n
        return sigma2 * (basis.T @ basis), None
    scores = basis * resid[:, None]
    if vce == 'robust':
        return scores.T @ scores, None
    if clusters is None:
        clusters = np.arange(n)
    codes, G = _codes(clusters)
    sums = np.zeros((G, basis.shape[1]))
    np.add.at(sums, codes, scores)
    factor = G / (G - 1) if G > 1 else 1.0
    return factor * (sums.T @ sums), G


def _codes(clusters: np.ndarray) -> Tuple[np.ndarray, int]:
    uniques, codes = np.unique(clusters, return_inverse=True)
    return codes.reshape(-1), len(uniques)


def vcov(basis: np.ndarray, resid: np.ndarray, bread: np.ndarray, vce: str,
         clusters: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Optional[int]]:
    """三明治协方差 bread · meat · bread'

    Args:
        basis: 得分的设计部分，2SLS 为第一阶段拟合值 [X̂, 外生变量]
        resid: 结构方程残差
        bread: (basis'R)^{-1}
        vce: 协方差类型
        clusters: 聚类编码，仅 cluster 类型使用

    Returns:
        tuple: (对称化后的协方差矩阵, 聚类个数)
    """
    vce = check_vce(vce)
    middle, G = meat(basis, resid, vce, clusters)
    k = basis.shape[1]
    if G is not None and G <= k:
        logger.warning(f"聚类个数 {G} 不超过参数个数 {k}，聚类稳健标准误可能不可靠")
    return symmetrize(bread @ middle @ bread.T), G
