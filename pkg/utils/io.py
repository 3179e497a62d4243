"""结果文件读写

单次运行结果写为 JSON，模拟结果写为 CSV。CSV 首行以注释形式记录运行配置。
"""

import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import pandas as pd

from config import IO_CONFIG

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def to_builtin(obj: Any) -> Any:
    """把 numpy 类型转换成 json 可序列化的内置类型"""
    if isinstance(obj, dict):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def dumps(doc: Dict[str, Any]) -> str:
    return json.dumps(to_builtin(doc), ensure_ascii=False, indent=2)


def write_json(doc: Dict[str, Any], path: Optional[PathLike]) -> None:
    """写 JSON 文档，path 为空或 '-' 时写到标准输出"""
    text = dumps(doc)
    if path is None or str(path) == '-':
        sys.stdout.write(text + '\n')
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + '\n', encoding=IO_CONFIG['encoding'])
    logger.info(f"结果已写入 {out}")


def read_json(path: PathLike) -> Dict[str, Any]:
    with open(path, 'r', encoding=IO_CONFIG['encoding']) as f:
        return json.load(f)


def write_csv(df: pd.DataFrame, path: Optional[PathLike],
              run_config: Optional[Dict[str, Any]] = None) -> None:
    """写 CSV，run_config 以 '# run_config=' 注释行写在表头之前"""
    header = ''
    if run_config is not None:
        header = '# run_config=' + json.dumps(to_builtin(run_config), ensure_ascii=False,
                                              sort_keys=True) + '\n'
    body = df.to_csv(index=False, float_format='%.17g', lineterminator='\n')
    if path is None or str(path) == '-':
        sys.stdout.write(header + body)
        return
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, 'w', encoding=IO_CONFIG['encoding'], newline='') as f:
        f.write(header + body)
    logger.info(f"结果已写入 {out}")


def read_result_csv(path: PathLike) -> pd.DataFrame:
    """读取本工具写出的 CSV（跳过注释行）"""
    return pd.read_csv(path, comment='#', encoding=IO_CONFIG['encoding'])
