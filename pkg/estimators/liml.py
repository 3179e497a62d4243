import logging
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from core.types import Dataset, EstimateResult
from estimators.base import BaseIVEstimator, IVDesign
from utils.errors import NumericalError
from utils.linalg import residualize, symmetrize

logger = logging.getLogger(__name__)

KAPPA_FLOOR_TOL = 1e-12


def liml_kappa(design: IVDesign) -> float:
    """LIML 的 κ：广义对称特征问题 (Ȳ'M_C Ȳ) v = κ (Ȳ'M_Q Ȳ) v 的最小特征值

    Ȳ = [y, X]。恰好识别时 κ 恰为 1；与 1 相差不足 1e-12 时取 1。

    Raises:
        NumericalError: 特征问题求解失败
    """
    if design.L == design.P:
        return 1.0
    Ybar = np.column_stack([design.y, design.X])
    MC = residualize(design.controls, Ybar)
    MQ = residualize(design.Q, Ybar)
    a = symmetrize(MC.T @ MC)
    b = symmetrize(MQ.T @ MQ)
    try:
        eigvals = scipy.linalg.eigh(a, b, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        diagnostics = {'cond_a': float(np.linalg.cond(a)), 'cond_b': float(np.linalg.cond(b))}
        logger.error(f"LIML 特征问题求解失败: {e}, 条件数 {diagnostics}")
        raise NumericalError(f"LIML 特征问题求解失败: {e}", diagnostics) from None
    kappa = float(eigvals.min())
    if kappa < 1.0 + KAPPA_FLOOR_TOL:
        if kappa < 1.0 - 1e-10:
            logger.warning(f"LIML κ={kappa:.12g} 小于 1，按 1 处理")
        kappa = 1.0
    return kappa


class LimitedInformationML(BaseIVEstimator):
    """有限信息最大似然（k 类）"""

    name = 'liml'

    def estimate_kappa(self, design: IVDesign) -> float:
        return liml_kappa(design)


def fit_liml(d: Dataset, valid: Sequence[int], invalid_as_controls: Sequence[int] = (),
             vce: Optional[str] = None) -> EstimateResult:
    """LIML 估计，参数含义同 fit_2sls"""
    return LimitedInformationML(vce).fit(d, valid, invalid_as_controls)
