"""过度识别检验与向下检验的显著性水平"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
import scipy.linalg
import scipy.stats

from config import ESTIMATION_CONFIG
from core.types import Dataset
from estimators.base import IVDesign, kclass_solve
from estimators.covariance import check_vce
from estimators.liml import liml_kappa
from utils.errors import DataValidationError, UndefinedTestError
from utils.linalg import project, symmetrize

logger = logging.getLogger(__name__)

SUPPORTED_TESTS = ('hs', 'ar')


@dataclass(frozen=True)
class TestOutcome:
    """检验结果，p 值取自 χ²(df) 上尾"""

    __test__ = False

    stat: float
    df: int
    p_value: float
    test: str
    vce: str = 'homoskedastic'

    def to_dict(self) -> Dict[str, Any]:
        return {'stat': self.stat, 'df': self.df, 'p_value': self.p_value,
                'test': self.test, 'vce': self.vce}


def _overid_design(d: Dataset, valid: Sequence[int], invalid: Sequence[int]) -> IVDesign:
    design = IVDesign.build(d, valid, invalid)
    if design.L <= design.P:
        raise UndefinedTestError(design.L, design.P)
    return design


def _outcome(stat: float, df: int, test: str, vce: str) -> TestOutcome:
    stat = max(float(stat), 0.0)
    return TestOutcome(stat=stat, df=df, p_value=float(scipy.stats.chi2.sf(stat, df)),
                       test=test, vce=vce)


def hansen_sargan(d: Dataset, valid: Sequence[int], invalid_as_controls: Sequence[int] = (),
                  vce: Optional[str] = None) -> TestOutcome:
    """Hansen-Sargan 过度识别检验

    homoskedastic 时为 Sargan 统计量 n·e'P_Q e / e'e（e 为 2SLS 残差）；
    robust/cluster 时为两步有效 GMM 的 Hansen J，权重矩阵为第一步残差的得分协方差的逆。

    Raises:
        UndefinedTestError: 有效工具变量不多于内生变量
    """
    vce = check_vce(vce or ESTIMATION_CONFIG['vce'])
    design = _overid_design(d, valid, invalid_as_controls)
    df = design.L - design.P
    n = design.n
    Q, R, y = design.Q, design.R, design.y

    coef, _, _ = kclass_solve(design, 1.0)
    e = y - R @ coef

    if vce == 'homoskedastic':
        ee = float(e @ e)
        if ee == 0.0:
            return _outcome(0.0, df, 'hs', vce)
        fitted = project(Q, e)
        return _outcome(n * float(fitted @ fitted) / ee, df, 'hs', vce)

    scores = Q * e[:, None]
    if vce == 'cluster':
        codes = design.clusters
        sums = np.zeros((int(codes.max()) + 1, Q.shape[1]))
        np.add.at(sums, codes, scores)
        S = sums.T @ sums / n
    else:
        S = scores.T @ scores / n
    Wmat = scipy.linalg.pinvh(symmetrize(S))

    QR = Q.T @ R / n
    Qy = Q.T @ y / n
    lhs = symmetrize(QR.T @ Wmat @ QR)
    coef2 = scipy.linalg.solve(lhs, QR.T @ Wmat @ Qy, assume_a='sym')
    gbar = Q.T @ (y - R @ coef2) / n
    return _outcome(n * float(gbar @ Wmat @ gbar), df, 'hs', vce)


def anderson_rubin(d: Dataset, valid: Sequence[int],
                   invalid_as_controls: Sequence[int] = ()) -> TestOutcome:
    """Anderson-Rubin 形式的过度识别检验

    统计量为 (n - L)(κ - 1)，κ 为 LIML 特征值，L 为全部工具变量（含外生控制变量）个数。
    κ = 1 时统计量为 0、p 值为 1。
    """
    design = _overid_design(d, valid, invalid_as_controls)
    kappa = liml_kappa(design)
    n_instruments = design.L + design.controls.shape[1]
    stat = (design.n - n_instruments) * (kappa - 1.0)
    return _outcome(stat, design.L - design.P, 'ar', 'homoskedastic')


def run_test(d: Dataset, test: str, valid: Sequence[int], invalid_as_controls: Sequence[int] = (),
             vce: Optional[str] = None) -> TestOutcome:
    """按名称调用检验，向下检验程序使用"""
    test = test.lower().strip()
    if test == 'hs':
        return hansen_sargan(d, valid, invalid_as_controls, vce)
    if test == 'ar':
        return anderson_rubin(d, valid, invalid_as_controls)
    raise DataValidationError(f"不支持的检验: {test}. 支持的检验: {', '.join(SUPPORTED_TESTS)}")


def testing_threshold(n: int, c: float = 0.1, override: Optional[float] = None) -> float:
    """向下检验的显著性水平 c / ln(n)，给出 override 时直接使用

    Raises:
        DataValidationError: n <= 1、c <= 0 或 override 不在 (0, 1) 内
    """
    if override is not None:
        if not 0.0 < override < 1.0:
            raise DataValidationError(f"显著性水平必须在 (0, 1) 内: {override}")
        return float(override)
    if n <= 1:
        raise DataValidationError(f"样本量 n={n} 必须大于 1")
    if c <= 0:
        raise DataValidationError(f"常数 c={c} 必须为正")
    return float(c / np.log(n))
