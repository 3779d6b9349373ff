import logging

import pytest

from hardytree.log.logging import Logger


@pytest.fixture
def restore_level():
    logger = Logger.get_logger("hardytree")
    level = logger.logger.level
    yield logger
    logger.logger.setLevel(level)


def test_logger_is_a_singleton():
    assert Logger.get_logger("hardytree") is Logger.get_logger("anything")
    with pytest.raises(Exception):
        Logger("second")


def test_configure_level_and_file(restore_level, tmp_path):
    logger = restore_level
    path = tmp_path / "run.log"
    logger.configure(level="debug", log_file=str(path))
    try:
        assert logger.logger.level == logging.DEBUG
        logger.debug("assembled 64 nodes")
        logger._file_handler.flush()
        assert "assembled 64 nodes" in path.read_text(encoding="utf-8")
    finally:
        logger.logger.removeHandler(logger._file_handler)
        logger._file_handler.close()
        logger._file_handler = None
