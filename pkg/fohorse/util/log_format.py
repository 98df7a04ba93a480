import datetime
import logging
from logging import Formatter
import logging.config
import os

import colorlog

logger = logging.getLogger(__name__)


class GlogFormatter(Formatter):

    """Logging Formatter which outputs lines in the format used by google
    logging, so solver logs can be grepped alongside other glog output

    Note that any datefmt passed in to the setup will be ignored as this needs
    to be in a specific format to be recognised.
    """

    levels = {
        logging.DEBUG: "D",
        logging.INFO: "I",
        logging.CRITICAL: "C",
        logging.ERROR: "E",
        logging.WARNING: "W",
    }

    fmt = "{levelname:s}{asctime:s} {pid:d} {file:s}:{line:d}] {message:s}"

    def format(self, record):
        r"""Format a record as

            Lmmdd hh:mm:ss.uuuuuu pid file:line] msg...

        eg

            I1103 11:57:31.739339 24395 solver:241] restart 3 after 18 iterations
        """

        return self.fmt.format(
            levelname=self.levels.get(record.levelno, "I"),
            asctime=self.formatTime(record),
            pid=os.getpid(),
            file=record.module,
            line=record.lineno,
            message=record.getMessage(),
        )

    def formatTime(self, record, datefmt=None):
        """datefmt is ignored"""

        return datetime.datetime.fromtimestamp(record.created).strftime("%m%d %H:%M:%S.%f")


COLOR_FORMAT = "{asctime:s} [{bold:s}{log_color:s}{levelname:s}{reset:s}]: ({bold:s}{name:s}:{lineno:d}{reset:s}) {message:s}"

LOG_COLORS = {
    "DEBUG": "cyan",
    "INFO": "green",
    "WARNING": "yellow",
    "ERROR": "red",
    "CRITICAL": "red,bg_white",
}


def make_handler(log_format="color", stream=None):
    """Build a stderr handler for the cli

    Args:
        log_format (str): "color" for colorlog output, "glog" for GlogFormatter
        stream: where to write, defaults to stderr

    Returns:
        logging.Handler: configured handler
    """
    if log_format == "glog":
        handler = logging.StreamHandler(stream)
        handler.setFormatter(GlogFormatter())
    elif log_format == "color":
        handler = colorlog.StreamHandler(stream)
        handler.setFormatter(colorlog.ColoredFormatter(
            COLOR_FORMAT,
            style="{",
            datefmt="%X",
            log_colors=LOG_COLORS,
        ))
    else:
        raise ValueError("Unknown log format '{}'".format(log_format))

    return handler


def configure_logging(log_format="color", level=logging.INFO, config=None):
    """Set up the 'fohorse' logger for command line use

    If a dictConfig mapping is given (normally from the LOGGING setting) it is
    used as-is and the other arguments are ignored.
    """
    if config:
        logging.config.dictConfig(config)
        return

    root = logging.getLogger("fohorse")
    for existing in list(root.handlers):
        root.removeHandler(existing)

    root.addHandler(make_handler(log_format))
    root.setLevel(level)
    root.propagate = False
