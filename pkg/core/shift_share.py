"""移位份额工具变量构造"""

import logging
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from core.dataset import read_table
from core.types import ShiftShareInputs
from utils.errors import DataValidationError, KeyMismatchError, MissingColumnError, MissingShiftError

logger = logging.getLogger(__name__)


def load_shift_share(shares: Any, shifts: Any,
                     location: str = 'location', cls: str = 'class', share: str = 'share',
                     period: str = 'period', shift: str = 'shift',
                     delimiter: Optional[str] = None) -> ShiftShareInputs:
    """读取份额表和冲击表

    Args:
        shares: 份额长表，列为 (location, class, share)
        shifts: 冲击长表，列为 (class, period, shift)
        location, cls, share, period, shift: 对应的列名

    Returns:
        ShiftShareInputs: 校验过的输入
    """
    share_df = read_table(shares, delimiter)
    shift_df = read_table(shifts, delimiter)
    for col in (location, cls, share):
        if col not in share_df.columns:
            raise MissingColumnError(col, list(share_df.columns))
    for col in (cls, period, shift):
        if col not in shift_df.columns:
            raise MissingColumnError(col, list(shift_df.columns))

    share_df = share_df.rename(columns={location: 'location', cls: 'class', share: 'share'})
    shift_df = shift_df.rename(columns={cls: 'class', period: 'period', shift: 'shift'})
    inputs = ShiftShareInputs(shares=share_df, shifts=shift_df)
    logger.info(f"读取份额表: {len(inputs.locations)} 个地区, {len(inputs.classes)} 个类别, "
                f"{len(inputs.periods)} 个时期")
    return inputs


def build_ssiv(inputs: ShiftShareInputs, valid_set: Iterable[str],
               periods: Optional[Sequence[Any]] = None) -> pd.Series:
    """构造限定在有效类别上的移位份额工具变量

    s_lt = Σ_{j∈valid} z_jl · g_jt，地区缺少某类别份额时按 0 计。

    Args:
        inputs: 份额和冲击
        valid_set: 有效类别标签
        periods: 需要构造的时期，缺省为冲击表中的全部时期

    Returns:
        pd.Series: 以 (location, period) 为索引，按地区、时期顺序排列

    Raises:
        DataValidationError: 有效集为空
        KeyMismatchError: 类别不在份额表中
        MissingShiftError: 冲击表缺少 (类别, 时期)
    """
    classes = [str(c) for c in valid_set]
    if not classes:
        raise DataValidationError("有效类别集合为空，无法构造移位份额工具变量")
    unknown = [c for c in classes if c not in inputs.classes]
    if unknown:
        raise KeyMismatchError(unknown, what='类别')

    periods = list(periods) if periods is not None else list(inputs.periods)

    shifts = inputs.shifts[inputs.shifts['class'].isin(classes)]
    lookup: Dict[tuple, float] = {(c, t): g for c, t, g in
                                  shifts[['class', 'period', 'shift']].itertuples(index=False)}
    G = np.empty((len(classes), len(periods)))
    for i, c in enumerate(classes):
        for k, t in enumerate(periods):
            value = lookup.get((c, t))
            if value is None or not np.isfinite(value):
                raise MissingShiftError(c, t)
            G[i, k] = value

    shares = inputs.shares[inputs.shares['class'].isin(classes)]
    S = (shares.pivot(index='location', columns='class', values='share')
         .reindex(index=list(inputs.locations), columns=classes)
         .fillna(0.0)
         .to_numpy())

    values = S @ G
    index = pd.MultiIndex.from_product([list(inputs.locations), periods],
                                       names=['location', 'period'])
    return pd.Series(values.reshape(-1), index=index, name='ssiv')


def _key(value: Any) -> str:
    """地区/时期键的规范形式：整数值的浮点数 (1.0) 与整数 (1) 视为同一个键"""
    if isinstance(value, str):
        return value.strip()
    if pd.api.types.is_number(value) and not isinstance(value, bool):
        number = float(value)
        if number.is_integer():
            return str(int(number))
        return repr(number)
    return str(value)


def align_to_rows(instrument: pd.Series, ids: pd.DataFrame, location: str,
                  period: Optional[str] = None) -> np.ndarray:
    """按数据集的 (location, period) 行标识取出工具变量

    period 为空时要求工具变量只有一个时期。

    Raises:
        KeyMismatchError: 数据行在工具变量中找不到对应的键
    """
    if location not in ids.columns:
        raise MissingColumnError(location, list(ids.columns))
    periods = instrument.index.get_level_values('period').unique()
    if period is None:
        if len(periods) != 1:
            raise DataValidationError("未指定时期列，但工具变量覆盖多个时期")
        keys = [(loc, periods[0]) for loc in ids[location]]
    else:
        if period not in ids.columns:
            raise MissingColumnError(period, list(ids.columns))
        keys = list(zip(ids[location], ids[period]))

    table = {(_key(loc), _key(t)): v for (loc, t), v in instrument.items()}
    values = np.empty(len(keys))
    unmatched = []
    for i, (loc, t) in enumerate(keys):
        value = table.get((_key(loc), _key(t)))
        if value is None:
            unmatched.append((loc, t))
        else:
            values[i] = value
    if unmatched:
        raise KeyMismatchError(unmatched, what='(地区, 时期) 键')
    return values
