"""
.. module:: log

:Synopsis: Logging setup and logged errors
:Author: robustspc developers

Log records go to stderr; stdout is left to the monitor record stream.
"""

# Global
import os
import sys
import logging
import platform
import traceback
import functools
from copy import deepcopy
from itertools import cycle

# Local
from robustspc import mpi
from robustspc.conventions import debug_env, color_env


class LoggedError(Exception):
    """
    Exception that logs its message when created.

    The first argument is a logger or a logger name; the rest are the message and its
    ``%``-style arguments. Use ``level="debug"`` for errors that are expected to be
    caught.
    """

    def __init__(self, logger, *args, **kwargs):
        if isinstance(logger, str):
            logger = get_logger(logger)
        if not isinstance(logger, logging.Logger):
            raise SyntaxError("The first argument of %s must be a logger "
                              "instance or name." % self.__class__.__name__)
        if args:
            level = kwargs.pop("level", "error") or "error"
            getattr(logger, level)(*args, **kwargs)
        msg = args[0] if args else ""
        if msg and len(args) > 1:
            msg = msg % args[1:]
        super().__init__(msg)


def is_debug(log=None):
    return (log or logging.root).getEffectiveLevel() <= logging.DEBUG


def get_logger(name):
    if name.startswith('robustspc.'):
        name = name.split('.')[-1]
    return logging.getLogger(add_color_to_name(name))


_colors = cycle(["\x1b[3%d;1m" % i for i in range(1, 7)] +
                ["\x1b[9%d;1m" % i for i in range(1, 7)])
_named_colors = {}
_reset = "\x1b[0m"


def add_color_to_name(name):
    """Bold colour per logger name, if ``ROBUSTSPC_COLOR`` is set (not on Windows)."""
    if not os.getenv(color_env) or platform.system() == "Windows":
        return name
    if name not in _named_colors:
        _named_colors[name] = next(_colors)
    return _named_colors[name] + name + _reset


def abstract(method):
    """
    Marks a method that chart families must implement. Calling the base version logs
    an error naming the family.
    """

    @functools.wraps(method)
    def not_implemented(self, *args, **kwargs):
        if getattr(getattr(self, method.__name__, None), '_is_abstract', None):
            raise LoggedError(self.log, "%s not implemented by chart '%s'",
                              method.__name__, self.__class__.__name__)
        return method(self, *args, **kwargs)

    not_implemented._is_abstract = True  # type: ignore

    return not_implemented


def exception_handler(exception_type, exception_instance, trace_back):
    # errors raised as LoggedError have already been reported: no traceback
    _logger_name = "exception handler"
    log = logging.getLogger(_logger_name)
    if issubclass(exception_type, LoggedError):
        if mpi.more_than_one_process():
            log.error(str(exception_instance))
        if not is_debug(log):
            mpi.abort_if_mpi()
            return
    log.critical("\n" + get_traceback_text((exception_type, exception_instance,
                                            trace_back)))
    if exception_type == KeyboardInterrupt:
        log.critical("Interrupted by the user.")
    elif not is_debug(log):
        log.critical("Unexpected error (traceback above). Rerun with '--debug', or with "
                     "'debug: [file_name]' in the configuration to keep the debug log.")
    mpi.abort_if_mpi()


def logger_setup(debug=None, debug_file=None):
    """
    Configures the root logger, for all robustspc loggers to inherit level, format and
    handlers.

    ``debug`` can be a bool, a ``logging`` level, or a file name (DEBUG level, written to
    that file, while the console stays at INFO). ``ROBUSTSPC_DEBUG`` forces DEBUG.
    Default level: INFO.
    """
    if debug is True or os.getenv(debug_env):
        level = logging.DEBUG
    elif debug in (False, None):
        level = logging.INFO
    elif isinstance(debug, int):
        level = debug
    elif isinstance(debug, str):
        level = logging.DEBUG
        debug_file = debug_file or debug
    else:
        raise ValueError(
            f"Bad value for debug: {debug}. Set to bool|str(file)|int(level).")
    logging.root.setLevel(level)
    debug = is_debug(logging.root)

    class RankFormatter(logging.Formatter):
        def format(self, record):
            rank = ("%d : " % mpi.get_mpi_rank()) if mpi.more_than_one_process() else ""
            self._style._fmt = (
                    (" %(asctime)s " if debug else "") + "[" + rank + "%(name)s] " +
                    {logging.ERROR: "*ERROR* ",
                     logging.WARNING: "*WARNING* "}.get(record.levelno, "") +
                    "%(message)s")
            return super().format(record)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(RankFormatter())
    if debug_file:
        file_handler = logging.FileHandler(debug_file, mode="w")
        file_handler.setLevel(level)
        file_handler.setFormatter(RankFormatter())
        logging.root.addHandler(file_handler)
        console.setLevel(logging.INFO)
    existing = next((h for h in logging.root.handlers
                     if getattr(h, "stream", None) is sys.stderr), None)
    if existing is None:
        logging.root.addHandler(console)
    else:
        existing.setLevel(console.level)
    sys.excepthook = exception_handler


def get_traceback_text(exec_info):
    return "".join(["-"] * 20 + ["\n\n"] +
                   list(traceback.format_exception(*exec_info)) +
                   ["\n"] + ["-"] * 37)


class HasLogger:
    """
    Class with a logger named after it (lowercase), dropped when copying or pickling
    and recreated afterwards.
    """

    def set_logger(self, lowercase=True, name=None):
        name = name or self.__class__.__name__
        self.log = get_logger(name.lower() if lowercase else name)

    def __deepcopy__(self, memo=None):
        new = self.__class__.__new__(self.__class__)
        new.__dict__ = {k: deepcopy(v, memo) for k, v in self.__dict__.items()
                        if k != "log"}
        new.set_logger()
        return new

    def __getstate__(self):
        return {k: v for k, v in self.__dict__.items() if k != "log"}

    def __setstate__(self, d):
        self.__dict__ = d
        self.set_logger()
