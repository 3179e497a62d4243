"""自适应 Lasso 无效份额选择

在 Z̃ = M_[x̂, W] Z 上求加权 Lasso 路径（LARS-lasso），沿路径对逐步增大的无效集做向下检验。
惩罚项为 λ Σ_j |α_j| / |α_m,j|^v，目标函数为 ½‖ỹ - Z̃α‖² + 惩罚项。
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from sklearn.linear_model import lars_path

from config import ESTIMATION_CONFIG
from core.types import Dataset, IndexSet, SelectionResult
from estimators.combinations import just_identified
from selection.base import BaseSelector, Candidate
from selection.median import (InitialEstimate, adaptive_weights, initial_estimate,
                              qualified_majority_min)
from utils.errors import DataValidationError, UndefinedTestError
from utils.linalg import RANK_TOL, dependent_columns, lstsq, project, residualize

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectedInstruments:
    Z_tilde: np.ndarray
    y_tilde: np.ndarray
    x_hat: np.ndarray
    rank: int


def project_instruments(d: Dataset) -> ProjectedInstruments:
    """x̂ = P_[Z, W] X，Z̃ 与 ỹ 为 Z、y 扣除 [x̂, W] 投影后的残差（均已按权重缩放）

    与 W 线性相关的 x̂ 列（第一阶段无信息）被丢弃，Z̃ 的秩为 J 减去保留的列数。
    """
    y, X, Z, W = d.scaled()
    x_hat = project(np.hstack([Z, W]), X)

    # W 在前，x̂ 中落在 W 列空间内的列会被识别出来
    dependent = [j - d.K for j in dependent_columns(np.hstack([W, x_hat])) if j >= d.K]
    if dependent:
        logger.warning(f"x̂ 第 {dependent} 列与控制变量共线，投影时忽略")
    keep = [p for p in range(d.P) if p not in dependent]
    basis = np.hstack([x_hat[:, keep], W])

    return ProjectedInstruments(
        Z_tilde=residualize(basis, Z),
        y_tilde=residualize(basis, y),
        x_hat=x_hat,
        rank=d.J - len(keep),
    )


@dataclass(frozen=True)
class LassoStep:
    """路径节点：lam 处的系数，active 为 lam 以上相邻区间上的非零系数下标"""

    lam: float
    active: IndexSet
    coef: np.ndarray


@dataclass(frozen=True)
class LassoPath:
    steps: Tuple[LassoStep, ...]
    weights: np.ndarray

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([s.lam for s in self.steps])

    @property
    def active_sets(self) -> List[IndexSet]:
        return [s.active for s in self.steps]

    def coef_at(self, lam: float) -> np.ndarray:
        """任意 λ 处的系数，节点之间线性插值，超出范围时取端点"""
        lams = self.lambdas[::-1]
        coefs = np.vstack([s.coef for s in self.steps])[::-1]
        return np.array([np.interp(lam, lams, coefs[:, j]) for j in range(coefs.shape[1])])


def _support(coef: np.ndarray, scale: float) -> IndexSet:
    return tuple(int(j) for j in np.flatnonzero(np.abs(coef) > RANK_TOL * scale))


def alasso_path(Z_tilde: np.ndarray, y: np.ndarray, weights_adaptive: np.ndarray,
                rank: Optional[int] = None) -> LassoPath:
    """加权 LARS-lasso 路径

    列按 1/w_j 缩放后求普通 Lasso 路径，再把系数除以 w_j 还原。sklearn 的 alpha
    对应 λ/n，这里返回的 λ 已乘回 n。

    Args:
        Z_tilde: 投影后的工具变量矩阵
        y: 被解释变量（与 Z_tilde 同样投影后）
        weights_adaptive: 自适应权重，必须有限且为正
        rank: Z_tilde 的秩，路径在活跃集达到该大小时截断

    Returns:
        LassoPath: 从空集开始、λ 单调不增的节点序列
    """
    weights = np.asarray(weights_adaptive, dtype=float).reshape(-1)
    n, J = Z_tilde.shape
    if weights.shape[0] != J:
        raise DataValidationError(f"权重长度 {weights.shape[0]} 与工具变量个数 {J} 不一致")
    if not (np.isfinite(weights).all() and (weights > 0).all()):
        raise DataValidationError("自适应权重必须有限且为正")
    rank = J if rank is None else rank

    scaled = Z_tilde / weights[None, :]
    corr = np.abs(scaled.T @ y)
    top = np.flatnonzero(corr >= corr.max() * (1 - 1e-10)) if corr.size else []
    if len(top) > 1:
        logger.warning(f"第一个进入的变量存在并列 {list(top)}，按最小下标 {top[0]} 处理")

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always')
        alphas, _, coefs = lars_path(scaled, y, method='lasso', return_path=True)
    for w in caught:
        logger.debug(f"lars_path: {w.message}")

    coefs = coefs / weights[:, None]
    scale = max(float(np.abs(coefs).max()), 1.0)
    steps = [LassoStep(lam=float(alphas[0]) * n, active=(), coef=coefs[:, 0].copy())]
    for k in range(1, len(alphas)):
        segment = (coefs[:, k - 1] + coefs[:, k]) / 2
        active = _support(segment, scale)
        entered = set(active) - set(steps[-1].active)
        if len(entered) > 1:
            logger.warning(f"λ={alphas[k] * n:.6g} 处同时进入 {sorted(entered)}")
        steps.append(LassoStep(lam=float(alphas[k]) * n, active=active, coef=coefs[:, k].copy()))
        if len(active) >= rank:
            break

    logger.debug(f"Lasso 路径共 {len(steps)} 个节点，最终活跃集 {steps[-1].active}")
    return LassoPath(steps=tuple(steps), weights=weights)


def alasso_beta(d: Dataset, alpha_ad: np.ndarray) -> np.ndarray:
    """β_ad = (x̂'x̂)^{-1} x̂'(y - Z α_ad)，W 先被扣除"""
    alpha_ad = np.asarray(alpha_ad, dtype=float).reshape(-1)
    if alpha_ad.shape[0] != d.J:
        raise DataValidationError(f"alpha_ad 长度 {alpha_ad.shape[0]} 与工具变量个数 {d.J} 不一致")
    y, X, Z, W = d.scaled()
    x_hat = project(np.hstack([Z, W]), X)
    return lstsq(residualize(W, x_hat), residualize(W, y - Z @ alpha_ad))


class AdaptiveLassoSelector(BaseSelector):
    """自适应 Lasso 选择器，P > 1 时用逐维中位数作为初始估计"""

    method = 'alasso'

    def __init__(self, test: str = 'hs', threshold: Optional[float] = None,
                 c: Optional[float] = None, vce: Optional[str] = None,
                 exponent: Optional[float] = None, alpha_floor: Optional[float] = None):
        super().__init__(test, threshold, c, vce)
        self.exponent = ESTIMATION_CONFIG['alasso_exponent'] if exponent is None else exponent
        self.alpha_floor = ESTIMATION_CONFIG['alpha_floor'] if alpha_floor is None else alpha_floor
        self._initial: Optional[InitialEstimate] = None
        self._path: Optional[LassoPath] = None
        self._floored: Tuple[int, ...] = ()

    def candidate_models(self, d: Dataset) -> List[Candidate]:
        if d.J <= d.P:
            raise UndefinedTestError(d.J, d.P)
        if d.P > 1:
            g = qualified_majority_min(d.J, d.P)
            logger.warning(f"P={d.P}, J={d.J}: 初始估计一致要求至少 {g} 个有效份额，"
                           f"即至多 {d.J - g} 个无效份额")

        ce = just_identified(d, self.vce)
        self._initial = initial_estimate(d, self.vce, ce)
        weights, self._floored = adaptive_weights(self._initial.alpha_m, self.exponent,
                                                  self.alpha_floor)
        logger.info(f"初始估计 β_m={np.round(self._initial.beta_m, 6).tolist()}，"
                    f"使用 {self._initial.n_combos_used} 个组合")

        proj = project_instruments(d)
        self._path = alasso_path(proj.Z_tilde, proj.y_tilde, weights, rank=proj.rank)
        return [Candidate(step.lam, step.active) for step in self._path.steps]

    def diagnostics(self, d: Dataset, chosen: Candidate) -> Dict[str, Any]:
        if self._initial is None or self._path is None:
            return {}
        alpha_ad = self._path.coef_at(chosen.tuning)
        return {
            'initial': self._initial.to_dict(),
            'alpha_ad': alpha_ad.tolist(),
            'beta_ad': alasso_beta(d, alpha_ad).tolist(),
            'floored_alpha': [j + 1 for j in self._floored],
            'exponent': self.exponent,
            'path_knots': len(self._path.steps),
        }

    def exhaustion_advice(self) -> Tuple[str, ...]:
        return ('多数假设可能不成立，可改用 cim 方法',
                '或通过 --siglevel / --c 调整显著性水平')


def alasso_select(d: Dataset, test: str = 'hs', threshold: Optional[float] = None,
                  **options: Any) -> SelectionResult:
    return AdaptiveLassoSelector(test=test, threshold=threshold, **options).select(d)
