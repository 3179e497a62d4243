"""数据集读取与变换

从分隔文本或 DataFrame 按列角色构造 Dataset，并提供一阶差分和序列化。
"""

import io
import logging
import re
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import ESTIMATION_CONFIG, IO_CONFIG
from core.types import Dataset
from utils.errors import (
    DataValidationError,
    MissingColumnError,
    NonFiniteValueError,
    PanelGapError,
)

logger = logging.getLogger(__name__)

CONSTANT_NAME = '_cons'
WEIGHT_COLUMN = '_weight'
CLUSTER_COLUMN = '_cluster'

TableLike = Union[str, Path, io.StringIO, pd.DataFrame]


def read_table(table: TableLike, delimiter: Optional[str] = None) -> pd.DataFrame:
    """读取带表头的分隔文本，浮点数按 round_trip 精度解析"""
    if isinstance(table, pd.DataFrame):
        return table.copy()
    sep = delimiter or IO_CONFIG['delimiter']
    return pd.read_csv(table, sep=sep, encoding=IO_CONFIG['encoding'],
                       float_precision='round_trip')


def resolve_stub(columns: Sequence[str], stub: str) -> List[str]:
    """按名称前缀解析工具变量列

    形如 stub1, stub2, ..., stub10 的列按数字后缀排序；没有数字后缀时保持文件中的顺序。
    """
    pattern = re.compile(re.escape(stub) + r'(\d+)$')
    numbered = [(int(m.group(1)), c) for c in columns if (m := pattern.match(c))]
    if numbered:
        return [c for _, c in sorted(numbered)]
    matched = [c for c in columns if c.startswith(stub) and c != stub]
    if not matched:
        raise MissingColumnError(f"{stub}*", columns)
    return matched


def _as_list(value: Any) -> List[str]:
    if value is None:
        return []
    if isinstance(value, str):
        return [value]
    return list(value)


def _numeric(df: pd.DataFrame, columns: Sequence[str]) -> np.ndarray:
    if not columns:
        return np.empty((len(df), 0))
    block = df[list(columns)].apply(pd.to_numeric, errors='coerce').to_numpy(dtype=float)
    bad = ~np.isfinite(block)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise NonFiniteValueError(int(row), columns[col])
    return block


def load_dataset(table: TableLike, roles: Dict[str, Any],
                 delimiter: Optional[str] = None,
                 constant: Optional[bool] = None,
                 demean_by: Optional[str] = None) -> Dataset:
    """按列角色读取数据集

    Args:
        table: 文件路径或 DataFrame
        roles: 列角色映射，键包括 y、x、z 或 z_stub、controls、weights、cluster、ids
        delimiter: 分隔符，缺省为逗号
        constant: 是否在控制变量中加入截距，缺省使用配置
        demean_by: 按该列分组去均值（含工具变量），此时不再加入截距

    Returns:
        Dataset: 满足全部不变量的数据集

    Raises:
        MissingColumnError: 角色引用的列不存在
        NonFiniteValueError: 存在非有限值
        RankDeficiencyError: 工具变量矩阵不满列秩
    """
    df = read_table(table, delimiter)
    columns = [str(c) for c in df.columns]
    df.columns = columns

    y_col = roles.get('y')
    if not isinstance(y_col, str):
        raise DataValidationError("roles 必须恰好指定一个结果变量列 'y'")
    x_cols = _as_list(roles.get('x'))
    if not x_cols:
        raise DataValidationError("roles 至少需要一个处理变量列 'x'")
    z_cols = _as_list(roles.get('z'))
    if not z_cols and roles.get('z_stub'):
        z_cols = resolve_stub(columns, roles['z_stub'])
    if not z_cols:
        raise DataValidationError("roles 至少需要一个工具变量列 'z' 或前缀 'z_stub'")
    w_cols = _as_list(roles.get('controls'))
    weight_col = roles.get('weights')
    cluster_col = roles.get('cluster')
    id_cols = _as_list(roles.get('ids'))

    referenced = [y_col] + x_cols + z_cols + w_cols + id_cols
    referenced += [c for c in (weight_col, cluster_col, demean_by) if c]
    for col in referenced:
        if col not in df.columns:
            raise MissingColumnError(col, columns)

    y = _numeric(df, [y_col])[:, 0]
    X = _numeric(df, x_cols)
    Z = _numeric(df, z_cols)
    W = _numeric(df, w_cols)
    weights = _numeric(df, [weight_col])[:, 0] if weight_col else None

    clusters = None
    if cluster_col:
        labels = df[cluster_col]
        if labels.isna().any():
            raise NonFiniteValueError(int(np.flatnonzero(labels.isna().to_numpy())[0]), cluster_col)
        clusters = labels.to_numpy()

    if constant is None:
        constant = ESTIMATION_CONFIG['add_constant']

    if demean_by:
        groups = df[demean_by]
        y, X, Z, W = (_demean(block, groups) for block in (y, X, Z, W))
        if constant:
            logger.info(f"按 {demean_by} 组内去均值后不再加入截距")
        constant = False

    w_names = list(w_cols)
    if constant:
        W = np.hstack([np.ones((len(df), 1)), W])
        w_names = [CONSTANT_NAME] + w_names

    ids = df[id_cols].copy() if id_cols else None

    d = Dataset(y=y, X=X, Z=Z, W=W, weights=weights, clusters=clusters,
                y_name=y_col, x_names=tuple(x_cols), z_names=tuple(z_cols),
                w_names=tuple(w_names), ids=ids)
    logger.info(f"读取数据集: n={d.n}, P={d.P}, J={d.J}, K={d.K}")
    return d


def _demean(block: np.ndarray, groups: pd.Series) -> np.ndarray:
    if np.size(block) == 0:
        return block
    frame = pd.DataFrame(np.asarray(block).reshape(len(groups), -1))
    means = frame.groupby(groups.to_numpy()).transform('mean').to_numpy()
    out = frame.to_numpy() - means
    return out.reshape(np.shape(block))


def dataset_roles(d: Dataset) -> Dict[str, Any]:
    """serialize_dataset 输出对应的列角色"""
    roles: Dict[str, Any] = {
        'y': d.y_name,
        'x': list(d.x_names),
        'z': list(d.z_names),
        'controls': [c for c in d.w_names if c != CONSTANT_NAME],
    }
    if d.weights is not None:
        roles['weights'] = WEIGHT_COLUMN
    if d.clusters is not None:
        roles['cluster'] = CLUSTER_COLUMN
    if d.ids is not None:
        roles['ids'] = list(d.ids.columns)
    return roles


def serialize_dataset(d: Dataset, path: Optional[Union[str, Path]] = None) -> Tuple[str, Dict[str, Any]]:
    """把数据集写成分隔文本

    浮点数以 17 位有效数字输出，配合 round_trip 解析可逐位还原。
    截距列不写出，重新读取时由 constant 参数决定。

    Returns:
        tuple: (文本内容, 重新读取用的列角色)
    """
    frame = pd.DataFrame({d.y_name: d.y})
    for j, name in enumerate(d.x_names):
        frame[name] = d.X[:, j]
    for j, name in enumerate(d.z_names):
        frame[name] = d.Z[:, j]
    for j, name in enumerate(d.w_names):
        if name != CONSTANT_NAME:
            frame[name] = d.W[:, j]
    if d.weights is not None:
        frame[WEIGHT_COLUMN] = d.weights
    if d.clusters is not None:
        frame[CLUSTER_COLUMN] = d.clusters
    if d.ids is not None:
        for col in d.ids.columns:
            frame[col] = d.ids[col].to_numpy()

    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, sep=IO_CONFIG['delimiter'], float_format='%.17g',
                 lineterminator='\n')
    text = buffer.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding=IO_CONFIG['encoding'])
    return text, dataset_roles(d)


def first_difference(panel: Dataset, unit: str, time: str) -> Dataset:
    """对面板数据做一阶差分

    y、X 取相邻时期之差；Z、W、权重和聚类取后一时期的值。
    时期网格为全样本出现过的时期，单位的时期必须在网格上连续。

    Raises:
        MissingColumnError: ids 中没有 unit 或 time 列
        PanelGapError: 存在时期缺口的单位
    """
    if panel.ids is None:
        raise MissingColumnError(unit, [])
    for col in (unit, time):
        if col not in panel.ids.columns:
            raise MissingColumnError(col, list(panel.ids.columns))

    ids = panel.ids
    grid = sorted(pd.unique(ids[time]))
    position = {t: k for k, t in enumerate(grid)}

    earlier: List[int] = []
    later: List[int] = []
    gaps: List[Any] = []
    singles: List[Any] = []
    for key, rows in ids.groupby(unit, sort=False).groups.items():
        rows = np.asarray(rows)
        order = rows[np.argsort([position[t] for t in ids.loc[rows, time]], kind='stable')]
        steps = np.diff([position[t] for t in ids.loc[order, time]])
        if len(order) == 1:
            singles.append(key)
            continue
        if (steps != 1).any():
            gaps.append(key)
            continue
        earlier.extend(order[:-1])
        later.extend(order[1:])

    if gaps:
        raise PanelGapError(gaps)
    if singles:
        logger.warning(f"{len(singles)} 个单位只有一个时期，不产生差分观测: "
                       f"{', '.join(str(u) for u in singles[:10])}")

    prev, post = np.asarray(earlier, dtype=int), np.asarray(later, dtype=int)
    new_ids = ids.iloc[post].reset_index(drop=True)
    new_ids[f"{time}_base"] = ids[time].to_numpy()[prev]
    return Dataset(
        y=panel.y[post] - panel.y[prev],
        X=panel.X[post] - panel.X[prev],
        Z=panel.Z[post],
        W=panel.W[post],
        weights=panel.weights[post] if panel.weights is not None else None,
        clusters=panel.clusters[post] if panel.clusters is not None else None,
        y_name=panel.y_name, x_names=panel.x_names, z_names=panel.z_names,
        w_names=panel.w_names, ids=new_ids,
    )
