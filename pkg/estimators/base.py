import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import ESTIMATION_CONFIG
from core.types import Dataset, EstimateResult, IndexSet, as_index_set
from estimators.covariance import check_vce, vcov
from utils.errors import CollinearityError, DataValidationError, UnderidentifiedError
from utils.linalg import dependent_columns, residualize, symmetrize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IVDesign:
    """一次 IV 估计的设计矩阵（已按权重缩放）

    结构方程为 y = X β + C δ + u，C = [Z_invalid, W]；
    排除工具变量为 instruments，全部工具变量为 Q = [instruments, C]。
    """

    y: np.ndarray
    X: np.ndarray
    instruments: np.ndarray
    controls: np.ndarray
    clusters: np.ndarray
    x_names: Tuple[str, ...]
    instrument_names: Tuple[str, ...]
    control_names: Tuple[str, ...]
    valid: IndexSet
    invalid: IndexSet

    @classmethod
    def build(cls, d: Dataset, valid: Sequence[int], invalid: Sequence[int] = ()) -> 'IVDesign':
        """从数据集和 (有效, 无效) 下标构造设计

        Raises:
            DataValidationError: 下标越界或两集合相交
            UnderidentifiedError: 有效工具变量少于内生变量
        """
        valid, invalid = as_index_set(valid), as_index_set(invalid)
        check_partition(d, valid, invalid)
        y, X, Z, W = d.scaled()
        return cls(
            y=y,
            X=X,
            instruments=Z[:, list(valid)],
            controls=np.hstack([Z[:, list(invalid)], W]),
            clusters=d.cluster_ids,
            x_names=d.x_names,
            instrument_names=tuple(d.names_of(valid)),
            control_names=tuple(d.names_of(invalid)) + d.w_names,
            valid=valid,
            invalid=invalid,
        )

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def P(self) -> int:
        return self.X.shape[1]

    @property
    def L(self) -> int:
        return self.instruments.shape[1]

    @property
    def R(self) -> np.ndarray:
        return np.hstack([self.X, self.controls])

    @property
    def Q(self) -> np.ndarray:
        return np.hstack([self.instruments, self.controls])

    @property
    def param_names(self) -> Tuple[str, ...]:
        return self.x_names + self.control_names


def check_partition(d: Dataset, valid: IndexSet, invalid: IndexSet) -> None:
    for j in valid + invalid:
        if not 0 <= j < d.J:
            raise DataValidationError(f"工具变量下标 {j} 超出范围 0..{d.J - 1}")
    overlap = set(valid) & set(invalid)
    if overlap:
        raise DataValidationError(f"有效集与无效集相交: {', '.join(d.names_of(sorted(overlap)))}")
    if len(valid) < d.P:
        raise UnderidentifiedError(len(valid), d.P)


def kclass_solve(design: IVDesign, kappa: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """k 类估计 (A'R)^{-1} A'y，A = R - κ M_Q R

    Returns:
        tuple: (系数, A, (A'R)^{-1})

    Raises:
        CollinearityError: A 的列线性相关
    """
    R = design.R
    A = R - kappa * residualize(design.Q, R)
    dependent = dependent_columns(A)
    if dependent:
        names = [design.param_names[j] for j in dependent]
        raise CollinearityError(names)
    AR = symmetrize(A.T @ R)
    try:
        bread = scipy.linalg.inv(AR)
        coef = scipy.linalg.solve(AR, A.T @ design.y, assume_a='sym')
    except (np.linalg.LinAlgError, ValueError):
        raise CollinearityError(list(design.param_names)) from None
    return coef, A, bread


class BaseIVEstimator(ABC):
    """IV 估计量抽象类

    子类给出 κ；fit 为统一流程：构造设计、k 类求解、协方差和第一阶段诊断。
    """

    name = 'base'

    def __init__(self, vce: Optional[str] = None, first_stage_cap: Optional[float] = None):
        self.vce = check_vce(vce or ESTIMATION_CONFIG['vce'])
        self.first_stage_cap = first_stage_cap or ESTIMATION_CONFIG['first_stage_cap']

    def design(self, d: Dataset, valid: Sequence[int], invalid: Sequence[int]) -> IVDesign:
        return IVDesign.build(d, valid, invalid)

    @abstractmethod
    def estimate_kappa(self, design: IVDesign) -> float:
        """k 类参数（子类实现）"""
        pass

    def fit(self, d: Dataset, valid: Sequence[int], invalid: Sequence[int] = ()) -> EstimateResult:
        from estimators.diagnostics import first_stage_from_design

        design = self.design(d, valid, invalid)
        kappa = self.estimate_kappa(design)
        coef, A, bread = kclass_solve(design, kappa)
        resid = design.y - design.R @ coef
        cov, n_clusters = vcov(A, resid, bread, self.vce, design.clusters)
        first_stage = first_stage_from_design(design, self.vce, self.first_stage_cap)
        logger.debug(f"{self.name} 估计完成: 有效 {len(design.valid)} 个, "
                     f"无效 {len(design.invalid)} 个, κ={kappa:.6g}")
        return EstimateResult(
            params=coef,
            vcov=cov,
            param_names=design.param_names,
            n_endog=design.P,
            n_invalid=len(design.invalid),
            estimator=self.name,
            vce=self.vce,
            valid=design.valid,
            invalid=design.invalid,
            n=design.n,
            first_stage=first_stage,
            kappa=float(kappa),
            n_clusters=n_clusters,
        )
