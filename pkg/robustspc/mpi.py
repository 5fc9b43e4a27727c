"""
.. module:: mpi

:Synopsis: Manages MPI parallelization transparently
:Author: robustspc developers

Monte Carlo replications are split over MPI processes when the code is launched with
``mpirun`` and ``mpi4py`` is installed; otherwise everything runs in a single process
and all the functions below degrade to their serial equivalents.

Setting ``ROBUSTSPC_NOMPI`` (or calling :func:`set_mpi_disabled`) skips the ``mpi4py``
import altogether.
"""

import os
import functools
from typing import Any, Optional, List, Sequence, TypeVar

from robustspc.conventions import nompi_env

_T = TypeVar("_T")

# communicator: -1 until first looked up, None if not running with MPI
_comm: Any = None if os.environ.get(nompi_env) else -1


def set_mpi_disabled(disabled=True):
    """
    Disables MPI, e.g. on cluster head nodes where mpi4py is installed but MPI calls
    would fail.
    """
    global _comm
    _comm = None if disabled else -1


def get_mpi_comm():
    """``COMM_WORLD``, or ``None`` if mpi4py is missing or MPI is disabled."""
    global _comm
    if _comm == -1:
        try:
            from mpi4py import MPI
        except ImportError:
            _comm = None
        else:
            _comm = MPI.COMM_WORLD
    return _comm


def size() -> int:
    comm = get_mpi_comm()
    return comm.Get_size() if comm is not None else 1


def get_mpi_rank() -> Optional[int]:
    """Rank of this process, or ``None`` if not running with MPI."""
    comm = get_mpi_comm()
    return comm.Get_rank() if comm is not None else None


def rank() -> int:
    return get_mpi_rank() or 0


def is_main_process() -> bool:
    return rank() == 0


def more_than_one_process() -> bool:
    return size() > 1


def allgather(data) -> list:
    return get_mpi_comm().allgather(data) if more_than_one_process() else [data]


def split_indices(n: int) -> List[int]:
    """
    Round-robin share of ``range(n)`` for the current process.
    """
    return list(range(rank(), n, size()))


def merge_indexed(local: Sequence[_T], n: int) -> List[_T]:
    """
    Gathers the per-process results of a :func:`split_indices` loop in every process,
    and returns them in global index order, so that the result does not depend on the
    number of processes.
    """
    pieces = allgather(list(local))
    merged: List[Any] = [None] * n
    for i_proc, piece in enumerate(pieces):
        for j, item in enumerate(piece):
            merged[i_proc + j * len(pieces)] = item
    return merged


def abort_if_mpi():
    """Aborts all processes, if more than one."""
    if more_than_one_process():
        get_mpi_comm().Abort(1)


def root_only(func):
    """Runs the decorated function in the main process only (``None`` elsewhere)."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        if is_main_process():
            return func(*args, **kwargs)

    return wrapper
