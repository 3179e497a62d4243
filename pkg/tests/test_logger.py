import logging
import sys

import pytest

from utils.logger import setup_logger, temporary_level


def test_console_goes_to_stderr_without_file():
    logger = setup_logger('ssiv_test_console', log_file='', log_level='warning')
    assert logger.level == logging.WARNING
    assert len(logger.handlers) == 1
    assert logger.handlers[0].stream is sys.stderr


def test_file_handler_and_idempotent(tmp_path):
    path = tmp_path / 'logs' / 'run.log'
    logger = setup_logger('ssiv_test_file', log_file=str(path), log_level='INFO')
    assert setup_logger('ssiv_test_file') is logger
    assert len(logger.handlers) == 2
    logger.info('选择路径第 1 步')
    for h in logger.handlers:
        h.flush()
    assert '选择路径第 1 步' in path.read_text(encoding='utf-8')


def test_unknown_level():
    with pytest.raises(ValueError, match='日志级别'):
        setup_logger('ssiv_test_bad', log_file='', log_level='loud')


def test_temporary_level_restores():
    lg = logging.getLogger('selection')
    lg.setLevel(logging.INFO)
    with temporary_level('ERROR'):
        assert lg.level == logging.ERROR
        assert logging.getLogger('estimators').level == logging.ERROR
    assert lg.level == logging.INFO
