"""蒙特卡洛数据生成

模型为 X = Zγ + ε，y = Xβ₀ + Zα + u，(u, ε) 联合正态。
随机数使用 numpy 的 PCG64 生成器 (default_rng)，正态变量由其标准正态抽样经 Cholesky 因子变换得到。
"""

import logging
from typing import Any, Optional, Sequence

import numpy as np

from config import SIMULATION_CONFIG
from core.types import Dataset, DgpConfig
from utils.errors import DataValidationError

logger = logging.getLogger(__name__)

MAJORITY_ALPHA = (0.2, 0.2, 0.2, 0, 0, 0, 0, 0, 0, 0)
PLURALITY_ALPHA = (0.1, 0.1, 0.2, 0.2, 0.3, 0.3, 0, 0, 0, 0)
SINGLE_COV = ((1.0, 0.5), (0.5, 1.0))

# (组大小, 恰好识别估计的概率极限)
LATE_GROUPS = ((6, 0.0), (2, 2.0), (1, 3.0), (3, 1.0), (4, 6.0), (2, -2.0), (2, -5.0))


def generate(cfg: DgpConfig, seed: Any = None) -> Dataset:
    """按配置生成一个数据集

    Args:
        cfg: 数据生成参数
        seed: 覆盖 cfg.seed 的种子，可以是整数或 numpy.random.SeedSequence

    Returns:
        Dataset: 没有截距和控制变量的数据集
    """
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    upper = DgpConfig.Z_LAWS[cfg.z_law]
    Z = rng.uniform(0.0, upper, size=(cfg.n, cfg.J))
    chol = np.linalg.cholesky(cfg.error_cov)
    errors = rng.standard_normal((cfg.n, cfg.P + 1)) @ chol.T
    u, eps = errors[:, 0], errors[:, 1:]

    X = Z @ cfg.gamma + eps
    y = X @ cfg.beta0 + Z @ cfg.alpha + u
    return Dataset(
        y=y, X=X, Z=Z,
        x_names=tuple(f"x{p + 1}" for p in range(cfg.P)),
        z_names=tuple(f"z{j + 1}" for j in range(cfg.J)),
    )


def _single_config(design: str, alpha: Sequence[float], n: int, gamma: float,
                   alpha_scale: float, seed: int, z_law: Optional[str]) -> DgpConfig:
    alpha_vec = np.asarray(alpha, dtype=float) * alpha_scale
    J = alpha_vec.shape[0]
    return DgpConfig(
        n=n, J=J, P=1,
        gamma=np.full((J, 1), gamma),
        alpha=alpha_vec,
        beta0=np.zeros(1),
        error_cov=np.array(SINGLE_COV),
        z_law=z_law or SIMULATION_CONFIG['z_law'],
        seed=seed,
        design=design,
    )


def majority_config(n: int, gamma: float = 0.6, alpha_scale: float = 1.0,
                    seed: int = 0, z_law: Optional[str] = None) -> DgpConfig:
    """前三个份额无效 (α=0.2)，其余七个有效

    z_law 缺省取 SIMULATION_CONFIG['z_law']。在 uniform(0,0.1) 下检验功效很低，
    n 到几千时向下检验仍常在空集处停止；uniform(0,1) 下选择器在 n=20000 时与 oracle 一致。
    """
    return _single_config('majority', MAJORITY_ALPHA, n, gamma, alpha_scale, seed, z_law)


def plurality_config(n: int, gamma: float = 0.6, alpha_scale: float = 1.0,
                     seed: int = 0, z_law: Optional[str] = None) -> DgpConfig:
    """六个无效份额分三组 (0.1, 0.2, 0.3)，四个有效份额构成最大的一组"""
    return _single_config('plurality', PLURALITY_ALPHA, n, gamma, alpha_scale, seed, z_law)


def multi_gamma(P: int, J: int = 20) -> np.ndarray:
    """多内生变量设计的第一阶段系数矩阵 (J, P)"""
    if P == 1:
        return np.ones((J, 1))
    if not 2 <= P <= 3:
        raise DataValidationError(f"多内生变量设计只支持 P=1..3，当前 P={P}")
    rising = 0.05 * np.arange(1, J + 1)
    columns = [rising, rising[::-1]]
    if P == 3:
        columns.append(np.resize([0.05, 0.1, 0.15, 0.2], J))
    return np.column_stack(columns)


def multi_error_cov(P: int) -> np.ndarray:
    """u ~ N(0, 0.25)，ε_p = e_p + 0.5u，e_p ~ N(0, 1) 相互独立"""
    loading = np.concatenate([[1.0], np.full(P, 0.5)])
    cov = 0.25 * np.outer(loading, loading)
    cov[1:, 1:] += np.eye(P)
    return cov


def multi_regressor_config(P: int, n_invalid: int, n: Optional[int] = None,
                           J: Optional[int] = None, seed: int = 0) -> DgpConfig:
    """前 n_invalid 个份额无效，α = (1, 2, ..., n_invalid, 0, ...)"""
    n = n or SIMULATION_CONFIG['multi_n']
    J = J or SIMULATION_CONFIG['multi_J']
    if not 0 <= n_invalid <= J - P:
        raise DataValidationError(f"无效份额个数 {n_invalid} 必须在 0..{J - P} 之间")
    alpha = np.zeros(J)
    alpha[:n_invalid] = np.arange(1, n_invalid + 1)
    return DgpConfig(
        n=n, J=J, P=P,
        gamma=multi_gamma(P, J),
        alpha=alpha,
        beta0=np.zeros(P),
        error_cov=multi_error_cov(P),
        z_law='uniform(0,1)',
        seed=seed,
        design='multi_regressor',
    )


def late_plurality_config(n: int, gamma: float = 0.6, seed: int = 0) -> DgpConfig:
    """20 个份额分七组，各组恰好识别估计分别收敛到 0, 2, 3, 1, 6, -2, -5

    第一组（六个份额）是最大的一组，其余各组视为无效。
    """
    limits = np.concatenate([np.full(size, value) for size, value in LATE_GROUPS])
    J = limits.shape[0]
    return DgpConfig(
        n=n, J=J, P=1,
        gamma=np.full((J, 1), gamma),
        alpha=limits * gamma,
        beta0=np.zeros(1),
        error_cov=np.array(SINGLE_COV),
        z_law='uniform(0,1)',
        seed=seed,
        design='late_plurality',
    )
