"""测试公共夹具

代码使用根目录绝对导入 (from config import ...)，这里把仓库根目录加入 sys.path。
"""

import os
import sys
from pathlib import Path

os.environ.setdefault('SSIV_LOG_FILE', '')
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
import pytest  # noqa: E402

from core.types import Dataset  # noqa: E402
from utils.linalg import residualize  # noqa: E402

TOY_N = 722
TOY_NAMES = ('A', 'B', 'C', 'D', 'E')


def make_toy_frame(seed: int = 7, exact: bool = True) -> pd.DataFrame:
    """五个份额的示例数据：A、B、C 有效，D、E 直接影响结果 (α=1)

    γ=2，β=0，D、E 的恰好识别估计收敛到 0.5。
    exact=True 时结构误差对 [1, Z] 残差化，oracle 模型的矩条件在样本中精确成立；
    exact=False 时误差直接取自 N(0, Σ)。
    """
    rng = np.random.default_rng(seed)
    Z = rng.uniform(0.0, 1.0, size=(TOY_N, 5))
    errors = rng.multivariate_normal([0.0, 0.0], [[1.0, 0.5], [0.5, 1.0]], size=TOY_N)
    u = errors[:, 0]
    if exact:
        u = residualize(np.column_stack([np.ones(TOY_N), Z]), u)
    x = Z @ np.full(5, 2.0) + errors[:, 1]
    y = Z @ np.array([0.0, 0.0, 0.0, 1.0, 1.0]) + u
    frame = pd.DataFrame(Z, columns=list(TOY_NAMES))
    frame.insert(0, 'x', x)
    frame.insert(0, 'y', y)
    return frame


def toy_dataset(frame: pd.DataFrame) -> Dataset:
    return Dataset(
        y=frame['y'].to_numpy(),
        X=frame[['x']].to_numpy(),
        Z=frame[list(TOY_NAMES)].to_numpy(),
        W=np.ones((len(frame), 1)),
        x_names=('x',),
        z_names=TOY_NAMES,
        w_names=('_cons',),
    )


def make_iv_data(n: int = 500, J: int = 6, P: int = 1, alpha=None, seed: int = 0,
                 controls: int = 1, weights: bool = False, clusters: int = 0) -> Dataset:
    """一般的随机 IV 数据集，β₀ = 1"""
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n, J))
    W = np.column_stack([np.ones(n)] + [rng.normal(size=n) for _ in range(controls - 1)])
    gamma = rng.uniform(0.5, 1.5, size=(J, P))
    alpha = np.zeros(J) if alpha is None else np.asarray(alpha, dtype=float)
    u = rng.normal(size=n)
    X = Z @ gamma + 0.5 * u[:, None] + rng.normal(size=(n, P))
    y = X @ np.ones(P) + Z @ alpha + W @ rng.normal(size=W.shape[1]) + u
    return Dataset(
        y=y, X=X, Z=Z, W=W,
        weights=rng.uniform(0.5, 2.0, size=n) if weights else None,
        clusters=rng.integers(0, clusters, size=n) if clusters else None,
    )


@pytest.fixture(scope='session')
def toy_frame() -> pd.DataFrame:
    return make_toy_frame()


@pytest.fixture(scope='session')
def toy(toy_frame) -> Dataset:
    return toy_dataset(toy_frame)


@pytest.fixture
def iv_data() -> Dataset:
    return make_iv_data()


@pytest.fixture
def toy_csv(tmp_path, toy_frame) -> Path:
    path = tmp_path / 'toy.csv'
    toy_frame.to_csv(path, index=False, float_format='%.17g')
    return path
