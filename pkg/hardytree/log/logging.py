import logging
import os
import threading
from logging.handlers import RotatingFileHandler

LOG_FORMAT = "[%(asctime)s] %(levelname)s %(name)s: %(message)s"
FILE_NAME = "hardytree.log"
BACKUP_COUNT = 5
MAX_BYTES = 50 * 1024 * 1024
LEVEL_ENV = "HARDYTREE_LOG_LEVEL"
FILE_ENV = "HARDYTREE_LOG_FILE"


class Logger:
    """
    A singleton Logger shared by every hardytree module.
    Logs to stderr, and to a rotating file once one is configured.
    """

    _instance = None
    _lock = threading.Lock()

    @staticmethod
    def get_logger(name="hardytree"):
        """
        Static method to fetch the singleton instance of the Logger.

            :param name (str): The name of the underlying logging logger.
            :returns Logger: The singleton Logger instance.
        """
        if Logger._instance is None:
            with Logger._lock:
                if Logger._instance is None:
                    Logger._instance = Logger(name)
        return Logger._instance

    def __init__(self, name):
        if Logger._instance is not None:
            raise Exception("This class is a singleton!")
        Logger._instance = self

        self.logger = logging.getLogger(name)
        self.logger.setLevel(os.getenv(LEVEL_ENV, "INFO").upper())
        self.logger.propagate = False
        self._file_handler = None
        self._setup_console_handler()
        if os.getenv(FILE_ENV):
            self._setup_file_handler(os.getenv(FILE_ENV))

    def _setup_console_handler(self):
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        self.logger.addHandler(console_handler)

    def _setup_file_handler(
        self, log_file=FILE_NAME, max_bytes=MAX_BYTES, backup_count=BACKUP_COUNT
    ):
        """
        Sets up (or replaces) the rotating file handler.

            :param log_file (str): Path of the log file.
            :param max_bytes (int): The maximum file size in bytes before rotation.
            :param backup_count (int): The number of rotated files to keep.
        """
        if self._file_handler is not None:
            self.logger.removeHandler(self._file_handler)
            self._file_handler.close()
        file_handler = RotatingFileHandler(
            log_file, maxBytes=max_bytes, backupCount=backup_count
        )
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        self.logger.addHandler(file_handler)
        self._file_handler = file_handler

    def configure(self, level=None, log_file=None):
        """
        Adjusts the level and optionally attaches a rotating log file.

            :param level (str): Level name such as "DEBUG" or "WARNING".
            :param log_file (str): Path of the log file, None keeps the current setup.
        """
        with Logger._lock:
            if level:
                self.logger.setLevel(level.upper())
            if log_file:
                self._setup_file_handler(log_file)

    def debug(self, message):
        self.logger.debug(message)

    def info(self, message):
        self.logger.info(message)

    def warning(self, message):
        self.logger.warning(message)

    def error(self, message):
        self.logger.error(message)

    def critical(self, message):
        self.logger.critical(message)
