from __future__ import annotations

import logging
import logging.config
import os
import sys

from .colors import MessageColors
from .exceptions import ParseError


logger = logging.getLogger(__name__)
logging_levels = {
    '0': 'ERROR',
    '1': 'WARNING',
    '2': 'INFO',
    '3': 'DEBUG',
}


class ColorFilter(logging.Filter):
    color_map = {
        'ERROR': MessageColors.FAIL,
        'WARNING': MessageColors.WARNING,
        'INFO': MessageColors.HEADER,
        'DEBUG': MessageColors.OK
    }

    def filter(self, record):
        if sys.stderr.isatty():
            record.msg = self.color_map[record.levelname] + str(record.msg) + MessageColors.ENDC
        return record


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'colorize': {
            '()': ColorFilter
        }
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'filters': ['colorize'],
            'stream': 'ext://sys.stderr'
        }
    },
    'loggers': {
        'mslp_builder': {
            'handlers': ['console'],
        }
    }
}


def configure_logger(verbosity):
    LOGGING['loggers']['mslp_builder']['level'] = logging_levels[str(verbosity)]
    logging.config.dictConfig(LOGGING)


def read_text(filename: str) -> str:
    """
    Read a whole input file, or stdin when the filename is ``-``.

    :raises: ParseError if the file cannot be read.
    """
    if filename == '-':
        return sys.stdin.read()
    try:
        with open(filename, 'r') as f:
            return f.read()
    except OSError as exc:
        raise ParseError(f"could not read '{filename}': {exc.strerror}") from exc


def write_file(filename: str | None, lines: list) -> bool:
    """
    Write lines to a file, or to stdout when no filename is given.

    :returns: True if anything was written, False if the file was already up-to-date.
    """
    new_text = '\n'.join(lines)
    if not new_text.endswith('\n'):
        new_text += '\n'
    if filename is None or filename == '-':
        sys.stdout.write(new_text)
        return True

    parent_dir = os.path.dirname(filename)
    if parent_dir and not os.path.exists(parent_dir):
        logger.warning('Creating parent directory for %s', filename)
        os.makedirs(parent_dir)
    if os.path.exists(filename):
        with open(filename, 'r') as f:
            if f.read() == new_text:
                logger.debug("File %s is already up-to-date.", filename)
                return False
            logger.warning('File %s had modifications and will be rewritten', filename)
    with open(filename, 'w') as f:
        f.write(new_text)
    return True
