"""领域数据类型

Dataset、ShiftShareInputs、SelectionResult、EstimateResult 与 DgpConfig。
所有类型构造后不可变，数组设为只读，可以在并行任务之间直接共享。
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from utils.errors import (
    DataValidationError,
    KeyMismatchError,
    NonFiniteValueError,
    RankDeficiencyError,
)
from utils.linalg import dependent_columns

logger = logging.getLogger(__name__)

IndexSet = Tuple[int, ...]


def _frozen(a: Any, ndim: int, n: Optional[int] = None) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if ndim == 1:
        arr = arr.reshape(-1)
    elif arr.size == 0 and n is not None:
        arr = arr.reshape(n, 0)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr.setflags(write=False)
    return arr


def as_index_set(indices: Any) -> IndexSet:
    """规范化下标集合为升序元组"""
    if indices is None:
        return ()
    return tuple(sorted({int(i) for i in indices}))


@dataclass(frozen=True)
class Dataset:
    """估计所需的全部数据

    Attributes:
        y: 结果变量 (n,)
        X: 内生处理变量 (n, P)
        Z: 候选工具变量 (n, J)，列顺序即标准下标顺序
        W: 外生控制变量 (n, K)，可以为空
        weights: 分析权重，缺省为全 1
        clusters: 聚类标识，缺省为每行一个聚类
        ids: 行标识（单位、时期等），用于差分和移位份额工具变量对齐
    """

    y: np.ndarray
    X: np.ndarray
    Z: np.ndarray
    W: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    clusters: Optional[np.ndarray] = None
    y_name: str = 'y'
    x_names: Tuple[str, ...] = ()
    z_names: Tuple[str, ...] = ()
    w_names: Tuple[str, ...] = ()
    ids: Optional[pd.DataFrame] = None

    def __post_init__(self):
        y = _frozen(self.y, 1)
        n = y.shape[0]
        X = _frozen(self.X, 2)
        Z = _frozen(self.Z, 2)
        W = _frozen(self.W if self.W is not None else np.empty((n, 0)), 2, n)
        object.__setattr__(self, 'y', y)
        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Z', Z)
        object.__setattr__(self, 'W', W)

        for name, arr in (('X', X), ('Z', Z), ('W', W)):
            if arr.shape[0] != n:
                raise DataValidationError(f"{name} 的行数 {arr.shape[0]} 与 y 的长度 {n} 不一致")

        P, J, K = X.shape[1], Z.shape[1], W.shape[1]
        object.__setattr__(self, 'x_names', self._names(self.x_names, P, 'x'))
        object.__setattr__(self, 'z_names', self._names(self.z_names, J, 'z'))
        object.__setattr__(self, 'w_names', self._names(self.w_names, K, 'w'))

        if P < 1 or J < 1:
            raise DataValidationError(f"至少需要一个处理变量和一个工具变量 (P={P}, J={J})")
        if J < P:
            raise DataValidationError(f"工具变量个数 J={J} 少于处理变量个数 P={P}")
        if n <= P + J + K:
            raise DataValidationError(f"样本量 n={n} 必须大于 P+J+K={P + J + K}")

        self._check_finite(y, X, Z, W)

        if self.weights is not None:
            w = _frozen(self.weights, 1)
            if w.shape[0] != n:
                raise DataValidationError(f"权重长度 {w.shape[0]} 与样本量 {n} 不一致")
            bad = np.flatnonzero(~np.isfinite(w) | (w <= 0))
            if bad.size:
                raise DataValidationError(f"第 {bad[0] + 1} 行的权重必须为正的有限值")
            object.__setattr__(self, 'weights', w)

        if self.clusters is not None:
            c = np.array(self.clusters, copy=True).reshape(-1)
            if c.shape[0] != n:
                raise DataValidationError(f"聚类标识长度 {c.shape[0]} 与样本量 {n} 不一致")
            c.setflags(write=False)
            object.__setattr__(self, 'clusters', c)

        if self.ids is not None:
            if len(self.ids) != n:
                raise DataValidationError(f"行标识表长度 {len(self.ids)} 与样本量 {n} 不一致")
            object.__setattr__(self, 'ids', self.ids.reset_index(drop=True).copy())

        self._check_rank()

    @staticmethod
    def _names(names: Sequence[str], count: int, prefix: str) -> Tuple[str, ...]:
        names = tuple(str(s) for s in names)
        if not names:
            return tuple(f"{prefix}{i + 1}" for i in range(count))
        if len(names) != count:
            raise DataValidationError(f"{prefix} 列名个数 {len(names)} 与列数 {count} 不一致")
        return names

    def _check_finite(self, y, X, Z, W) -> None:
        blocks = [((y[:, None]), (self.y_name,)), (X, self.x_names),
                  (Z, self.z_names), (W, self.w_names)]
        for arr, names in blocks:
            bad = ~np.isfinite(arr)
            if bad.any():
                row, col = np.argwhere(bad)[0]
                raise NonFiniteValueError(int(row), names[col])

    def _check_rank(self) -> None:
        # W 在前，常数份额列会被识别为与截距共线
        stacked = np.hstack([self.W, self.Z])
        dependent = dependent_columns(stacked)
        if dependent:
            j = dependent[0]
            names = self.w_names + self.z_names
            if j >= self.K:
                raise RankDeficiencyError(j - self.K, names[j])
            raise RankDeficiencyError(j, names[j], what='控制变量矩阵')

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def P(self) -> int:
        return self.X.shape[1]

    @property
    def J(self) -> int:
        return self.Z.shape[1]

    @property
    def K(self) -> int:
        return self.W.shape[1]

    @property
    def weight_vector(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.n)
        return self.weights / self.weights.mean()

    @property
    def cluster_ids(self) -> np.ndarray:
        """聚类编码 0..G-1，缺省时每行单独成类"""
        if self.clusters is None:
            return np.arange(self.n)
        return pd.factorize(pd.Series(self.clusters), sort=True)[0]

    def scaled(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """按 sqrt(权重) 缩放后的 (y, X, Z, W)，无权重时返回原数组"""
        if self.weights is None:
            return self.y, self.X, self.Z, self.W
        s = np.sqrt(self.weight_vector)
        return self.y * s, self.X * s[:, None], self.Z * s[:, None], self.W * s[:, None]

    def names_of(self, indices: Sequence[int]) -> List[str]:
        return [self.z_names[j] for j in indices]

    def indices_of(self, names: Sequence[str]) -> IndexSet:
        lookup = {name: j for j, name in enumerate(self.z_names)}
        missing = [name for name in names if name not in lookup]
        if missing:
            raise KeyMismatchError(missing, what='工具变量列名')
        return as_index_set(lookup[name] for name in names)

    def complement(self, indices: Sequence[int]) -> IndexSet:
        chosen = set(indices)
        return tuple(j for j in range(self.J) if j not in chosen)


@dataclass(frozen=True)
class ShiftShareInputs:
    """移位份额工具变量的原始输入

    shares 为长表 (location, class, share)，shifts 为长表 (class, period, shift)。
    剔除部分类别后份额之和可以小于 1，不做重新归一化。
    """

    shares: pd.DataFrame
    shifts: pd.DataFrame
    locations: Tuple[Any, ...] = ()
    classes: Tuple[str, ...] = ()

    def __post_init__(self):
        shares = self.shares[['location', 'class', 'share']].copy()
        shifts = self.shifts[['class', 'period', 'shift']].copy()
        shares['class'] = shares['class'].astype(str)
        shifts['class'] = shifts['class'].astype(str)
        shares['share'] = pd.to_numeric(shares['share'], errors='coerce')
        shifts['shift'] = pd.to_numeric(shifts['shift'], errors='coerce')

        if not np.isfinite(shares['share'].to_numpy()).all():
            row = int(np.flatnonzero(~np.isfinite(shares['share'].to_numpy()))[0])
            raise NonFiniteValueError(row, 'share')
        if (shares['share'] < 0).any():
            raise DataValidationError("份额必须非负")
        sums = shares.groupby('location', sort=False)['share'].sum()
        over = sums[sums > 1 + 1e-8]
        if len(over):
            raise DataValidationError(
                f"以下地区的份额之和超过 1: {', '.join(str(v) for v in over.index[:10])}"
            )
        if shares.duplicated(['location', 'class']).any():
            raise DataValidationError("份额表中存在重复的 (location, class)")
        if shifts.duplicated(['class', 'period']).any():
            raise DataValidationError("冲击表中存在重复的 (class, period)")

        locations = tuple(self.locations) or tuple(pd.unique(shares['location']))
        classes = tuple(str(c) for c in self.classes) or tuple(pd.unique(shares['class']))
        object.__setattr__(self, 'shares', shares)
        object.__setattr__(self, 'shifts', shifts)
        object.__setattr__(self, 'locations', locations)
        object.__setattr__(self, 'classes', classes)

    @property
    def periods(self) -> Tuple[Any, ...]:
        return tuple(sorted(pd.unique(self.shifts['period'])))


@dataclass(frozen=True)
class PathStep:
    """选择路径上的一次检验"""

    tuning: float
    invalid: IndexSet
    stat: float
    df: int
    p_value: float

    def to_dict(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            'tuning': float(self.tuning),
            'invalid_index': [j + 1 for j in self.invalid],
            'stat': float(self.stat),
            'df': int(self.df),
            'p_value': float(self.p_value),
        }
        if names is not None:
            doc['invalid_names'] = [names[j] for j in self.invalid]
        return doc

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> 'PathStep':
        return cls(tuning=float(doc['tuning']),
                   invalid=as_index_set(j - 1 for j in doc['invalid_index']),
                   stat=float(doc['stat']), df=int(doc['df']), p_value=float(doc['p_value']))


@dataclass(frozen=True)
class SelectionResult:
    """无效份额选择结果

    下标在内存中从 0 开始，JSON 中按 1..J 输出并同时给出列名。
    """

    valid_set: IndexSet
    invalid_set: IndexSet
    path: Tuple[PathStep, ...]
    method: str
    test: str
    threshold: float
    stopped_at: int
    z_names: Tuple[str, ...]
    n_endog: int
    vce: str = 'robust'
    untested: Tuple[Tuple[float, IndexSet], ...] = ()
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        valid, invalid = as_index_set(self.valid_set), as_index_set(self.invalid_set)
        object.__setattr__(self, 'valid_set', valid)
        object.__setattr__(self, 'invalid_set', invalid)
        object.__setattr__(self, 'path', tuple(self.path))
        J = len(self.z_names)
        if set(valid) & set(invalid):
            raise DataValidationError("有效集与无效集相交")
        if set(valid) | set(invalid) != set(range(J)):
            raise DataValidationError("有效集与无效集的并集必须覆盖全部工具变量")
        if len(valid) < self.n_endog + 1:
            raise DataValidationError(
                f"停止时有效工具变量 {len(valid)} 个，至少需要 {self.n_endog + 1} 个"
            )
        sizes = [len(step.invalid) for step in self.path]
        if any(b < a for a, b in zip(sizes, sizes[1:])):
            raise DataValidationError("路径上的无效集大小必须单调不减")
        if not 0 <= self.stopped_at < max(len(self.path), 1):
            raise DataValidationError(f"停止位置 {self.stopped_at} 超出路径范围")

    @property
    def valid_names(self) -> List[str]:
        return [self.z_names[j] for j in self.valid_set]

    @property
    def invalid_names(self) -> List[str]:
        return [self.z_names[j] for j in self.invalid_set]

    def to_dict(self) -> Dict[str, Any]:
        names = list(self.z_names)
        return {
            'method': self.method,
            'test': self.test,
            'vce': self.vce,
            'threshold': float(self.threshold),
            'n_endog': self.n_endog,
            'instruments': names,
            'valid': {'index': [j + 1 for j in self.valid_set], 'names': self.valid_names},
            'invalid': {'index': [j + 1 for j in self.invalid_set], 'names': self.invalid_names},
            'stopped_at': self.stopped_at,
            'path': [step.to_dict(names) for step in self.path],
            'untested': [
                {'tuning': float(t), 'invalid_index': [j + 1 for j in inv],
                 'invalid_names': [names[j] for j in inv]}
                for t, inv in self.untested
            ],
            'diagnostics': self.diagnostics,
        }

    @classmethod
    def from_dict(cls, doc: Dict[str, Any]) -> 'SelectionResult':
        return cls(
            valid_set=as_index_set(j - 1 for j in doc['valid']['index']),
            invalid_set=as_index_set(j - 1 for j in doc['invalid']['index']),
            path=tuple(PathStep.from_dict(s) for s in doc['path']),
            method=doc['method'],
            test=doc['test'],
            threshold=float(doc['threshold']),
            stopped_at=int(doc['stopped_at']),
            z_names=tuple(doc['instruments']),
            n_endog=int(doc['n_endog']),
            vce=doc.get('vce', 'robust'),
            untested=tuple((float(u['tuning']), as_index_set(j - 1 for j in u['invalid_index']))
                           for u in doc.get('untested', [])),
            diagnostics=dict(doc.get('diagnostics', {})),
        )


@dataclass(frozen=True)
class EstimateResult:
    """单个估计量的结果

    参数顺序为 (X, 无效份额, W)，vcov 为对应的方阵。
    """

    params: np.ndarray
    vcov: np.ndarray
    param_names: Tuple[str, ...]
    n_endog: int
    n_invalid: int
    estimator: str
    vce: str
    valid: IndexSet
    invalid: IndexSet
    n: int
    first_stage: Any = None
    kappa: Optional[float] = None
    n_clusters: Optional[int] = None
    labels: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        params = _frozen(self.params, 1)
        vcov = np.array(self.vcov, dtype=float, copy=True)
        k = params.shape[0]
        if vcov.shape != (k, k):
            raise DataValidationError(f"协方差矩阵维度 {vcov.shape} 与参数个数 {k} 不一致")
        if not np.allclose(vcov, vcov.T, rtol=1e-10, atol=1e-14 * max(np.abs(vcov).max(), 1.0)):
            raise DataValidationError("协方差矩阵不对称")
        vcov.setflags(write=False)
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'vcov', vcov)
        object.__setattr__(self, 'valid', as_index_set(self.valid))
        object.__setattr__(self, 'invalid', as_index_set(self.invalid))

    @property
    def beta(self) -> np.ndarray:
        return self.params[:self.n_endog]

    @property
    def alpha(self) -> np.ndarray:
        return self.params[self.n_endog:self.n_endog + self.n_invalid]

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.vcov), 0.0, None))

    @property
    def beta_se(self) -> np.ndarray:
        return self.se[:self.n_endog]

    @property
    def first_stage_F(self) -> float:
        return float(self.first_stage) if self.first_stage is not None else float('nan')

    def to_dict(self, z_names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        doc: Dict[str, Any] = {
            'estimator': self.estimator,
            'vce': self.vce,
            'n': self.n,
            'param_names': list(self.param_names),
            'beta': self.beta.tolist(),
            'beta_se': self.beta_se.tolist(),
            'alpha': self.alpha.tolist(),
            'params': self.params.tolist(),
            'se': self.se.tolist(),
            'vcov': self.vcov.tolist(),
            'valid_index': [j + 1 for j in self.valid],
            'invalid_index': [j + 1 for j in self.invalid],
            'first_stage': (self.first_stage.to_dict()
                            if hasattr(self.first_stage, 'to_dict') else self.first_stage),
            'kappa': self.kappa,
            'n_clusters': self.n_clusters,
            'covariance_note': 'HC0/CR0 sandwich, cluster factor G/(G-1), no leverage correction',
        }
        if z_names is not None:
            doc['valid_names'] = [z_names[j] for j in self.valid]
            doc['invalid_names'] = [z_names[j] for j in self.invalid]
        doc.update(self.labels)
        return doc


@dataclass(frozen=True)
class DgpConfig:
    """蒙特卡洛数据生成参数

    误差向量按 (u, ε_1..ε_P) 排列，error_cov 为其 (P+1) 阶协方差矩阵。
    """

    n: int
    J: int
    P: int
    gamma: np.ndarray
    alpha: np.ndarray
    beta0: np.ndarray
    error_cov: np.ndarray
    z_law: str = 'uniform(0,0.1)'
    seed: int = 0
    design: str = 'custom'

    Z_LAWS = {'uniform(0,0.1)': 0.1, 'uniform(0,1)': 1.0}

    def __post_init__(self):
        gamma = _frozen(self.gamma, 2)
        alpha = _frozen(self.alpha, 1)
        beta0 = _frozen(self.beta0, 1)
        cov = _frozen(self.error_cov, 2)
        if gamma.shape != (self.J, self.P):
            raise DataValidationError(f"gamma 维度应为 ({self.J}, {self.P})，实际为 {gamma.shape}")
        if alpha.shape != (self.J,) or beta0.shape != (self.P,):
            raise DataValidationError("alpha 或 beta0 的长度与 J、P 不一致")
        if cov.shape != (self.P + 1, self.P + 1) or not np.allclose(cov, cov.T):
            raise DataValidationError("误差协方差矩阵必须是 (P+1) 阶对称矩阵")
        try:
            np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise DataValidationError("误差协方差矩阵必须正定") from None
        if self.z_law not in self.Z_LAWS:
            raise DataValidationError(
                f"不支持的工具变量分布: {self.z_law}. 支持: {', '.join(self.Z_LAWS)}"
            )
        object.__setattr__(self, 'gamma', gamma)
        object.__setattr__(self, 'alpha', alpha)
        object.__setattr__(self, 'beta0', beta0)
        object.__setattr__(self, 'error_cov', cov)

    @property
    def true_invalid(self) -> IndexSet:
        return tuple(int(j) for j in np.flatnonzero(self.alpha != 0))

    @property
    def true_valid(self) -> IndexSet:
        return tuple(int(j) for j in np.flatnonzero(self.alpha == 0))
