"""
Logging helpers.
"""

import logging
from typing import NamedTuple


class _LoggingWatcher(NamedTuple):
    records: list
    output: dict


class CapturingHandler(logging.Handler):
    """
    A logging handler capturing all (raw and formatted) logging output.

    The watcher.output is a dict keyed by the log level name, with a list of
    formatted messages for each. The watcher.records list has the full LogRecord
    instances which carry extra data about the log source and context.

    Usage:

    my_logger = logging.getLogger(name="lexxfer.runner")
    capture_handler = CapturingHandler(logger=my_logger)
    info_log_messages = capture_handler.watcher.output["INFO"]
    capture_handler.detach()
    """

    def __init__(self, logger: logging.Logger, level: str = "INFO"):
        logging.Handler.__init__(self)
        self.logger = logger
        self._previous = (logger.level, logger.propagate)
        self.watcher = self._get_watcher()
        logger.addHandler(self)
        logger.propagate = False
        logger.setLevel(level)
        self.setFormatter(logging.Formatter("%(message)s"))

    def flush(self):
        pass

    def emit(self, record):
        self.watcher.records.append(record)
        msg = self.format(record)
        self.watcher.output[record.levelname].append(msg)

    @staticmethod
    def _get_watcher():
        levels = ["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"]
        return _LoggingWatcher([], {x: [] for x in levels})

    def reset(self):
        self.watcher = self._get_watcher()

    def detach(self):
        """Remove the handler and restore the logger's previous settings."""
        self.logger.removeHandler(self)
        self.logger.setLevel(self._previous[0])
        self.logger.propagate = self._previous[1]
