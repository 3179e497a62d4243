"""日志配置工具模块

控制台日志写到标准错误，标准输出只留给结果 JSON。模拟实验中每次重复都会
触发选择器的警告，`temporary_level` 用来在批量重复期间压低这些记录器。
"""

import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Union

from config import LOG_CONFIG

# 逐次重复时会刷屏的记录器
NOISY_LOGGERS = ('selection', 'estimators', 'core')


def _level(value: Union[str, int]) -> int:
    if isinstance(value, int):
        return value
    level = logging.getLevelName(value.upper())
    if not isinstance(level, int):
        raise ValueError(f"未知的日志级别: {value}")
    return level


def _handlers(log_file: str, level: int, formatter: logging.Formatter) -> List[logging.Handler]:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))
    for handler in handlers:
        handler.setLevel(level)
        handler.setFormatter(formatter)
    return handlers


def setup_logger(name: Optional[str] = None,
                 log_file: Optional[str] = None,
                 log_level: Optional[str] = None,
                 log_format: Optional[str] = None) -> logging.Logger:
    """设置日志记录器

    Args:
        name: 记录器名称，默认为根记录器（各模块的 `logging.getLogger(__name__)` 都会传到这里）
        log_file: 日志文件，None 时取 LOG_CONFIG['file']，空字符串表示只写标准错误
        log_level: 日志级别
        log_format: 日志格式

    Returns:
        logging.Logger: 配置好的记录器；已经配置过时原样返回
    """
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = _level(log_level or LOG_CONFIG['level'])
    formatter = logging.Formatter(log_format or LOG_CONFIG['format'])
    logger.setLevel(level)
    for handler in _handlers(LOG_CONFIG['file'] if log_file is None else log_file, level, formatter):
        logger.addHandler(handler)

    # sklearn/joblib 的调试输出与结果无关
    for lib in ('sklearn', 'joblib', 'matplotlib'):
        logging.getLogger(lib).setLevel(max(level, logging.WARNING))
    return logger


@contextmanager
def temporary_level(level: Union[str, int], names: Iterable[str] = NOISY_LOGGERS) -> Iterator[None]:
    """在 with 块内把指定记录器的级别调到 level，退出时恢复"""
    loggers = [logging.getLogger(n) for n in names]
    saved = [lg.level for lg in loggers]
    target = _level(level)
    for lg in loggers:
        lg.setLevel(target)
    try:
        yield
    finally:
        for lg, old in zip(loggers, saved):
            lg.setLevel(old)
