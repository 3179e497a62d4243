"""线性代数工具

投影、残差化与列相关性检查，供估计量和选择程序共用。
"""

from typing import List

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10


def lstsq(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """最小二乘系数，A 没有列时返回全零"""
    if A.shape[1] == 0:
        return np.zeros((0,) + B.shape[1:])
    coef, *_ = scipy.linalg.lstsq(A, B, lapack_driver='gelsy', check_finite=False)
    return coef


def project(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """B 在 A 列空间上的投影 P_A B"""
    if A.shape[1] == 0:
        return np.zeros_like(B, dtype=float)
    return A @ lstsq(A, B)


def residualize(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """B 对 A 回归的残差 M_A B"""
    if A.shape[1] == 0:
        return np.array(B, dtype=float, copy=True)
    return B - A @ lstsq(A, B)


def dependent_columns(M: np.ndarray, tol: float = RANK_TOL) -> List[int]:
    """返回与前面各列线性相关的列下标

    Householder QR 中 |R_jj| 等于第 j 列扣除前 j 列投影后的残差范数，
    相对列范数低于 tol 即视为相关。
    """
    if M.shape[1] == 0:
        return []
    norms = np.linalg.norm(M, axis=0)
    R = scipy.linalg.qr(M, mode='r', check_finite=False)[0]
    diag = np.abs(np.diag(R))
    dependent = []
    for j in range(M.shape[1]):
        if norms[j] == 0.0 or j >= diag.shape[0] or diag[j] <= tol * norms[j]:
            dependent.append(j)
    return dependent


def symmetrize(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2
