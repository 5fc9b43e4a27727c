"""
.. module:: tools

:Synopsis: General tools
:Author: robustspc developers

"""

# Global
import os
import inspect
import warnings
import hashlib
import pkgutil
from copy import deepcopy
from typing import Mapping, Any, List, TypeVar, Optional, Iterable

# Local
from robustspc.conventions import dump_sort_cosmetic
from robustspc.log import HasLogger

charts_subfolder = "charts"


def str_to_list(x) -> List:
    """
    Makes sure that the input is a list of strings (could be string).
    """
    return [x] if isinstance(x, str) else x


def chart_family_names() -> List[str]:
    """Names of the public chart families (subpackages of ``robustspc.charts``)."""
    path = os.path.join(os.path.dirname(__file__), charts_subfolder)
    return sorted(name for _, name, _ in pkgutil.iter_modules([path])
                  if not name.startswith("_"))


def fuzzy_match(input_string, choices, n=3, score_cutoff=50) -> List[str]:
    """
    Up to ``n`` choices similar to the input string, best first.
    """
    with warnings.catch_warnings():
        # optional speedup (python-Levenshtein) warning
        warnings.filterwarnings("ignore")
        from fuzzywuzzy import process as fuzzy_process
    return [choice for choice, _ in fuzzy_process.extractBests(
        input_string, choices, score_cutoff=score_cutoff, limit=n)]


def similar_chart_families(name) -> List[str]:
    return fuzzy_match(name, chart_family_names(), n=3)


_Dict = TypeVar('_Dict', bound=Mapping)


def recursive_update(base: Optional[_Dict], update: Optional[Mapping],
                     copied=True) -> dict:
    """
    Updates ``base`` with ``update``, merging nested mappings.

    ``None`` and ``{}`` are interchangeable, as in yaml input: a ``None`` value in
    ``update`` only creates a missing key, and empty blocks are returned as ``None``.
    """
    updated = deepcopy_where_possible(base) if copied and base else dict(base or {})
    for key, value in (update or {}).items():
        if isinstance(value, Mapping):
            updated[key] = recursive_update(updated.get(key), value, copied=False)
        elif value is not None or key not in updated:
            updated[key] = value if value is not None else {}
    return {k: (None if isinstance(v, Mapping) and not v else v)
            for k, v in updated.items()}


_R = TypeVar('_R')


def deepcopy_where_possible(base: _R) -> _R:
    """
    Deep copy of nested mappings (as ``dict``), keeping references to classes, objects
    with a logger (charts), bound methods and anything that cannot be copied.
    """
    if isinstance(base, Mapping):
        return {k: deepcopy_where_possible(v) for k, v in base.items()}  # type: ignore
    if isinstance(base, (HasLogger, type)) or inspect.ismethod(base):
        return base
    try:
        return deepcopy(base)
    except Exception:
        return base


def sort_cosmetic(info: Mapping) -> dict:
    """
    Reorders the top-level blocks of an info dict for dumping: those in
    ``dump_sort_cosmetic`` first, then the rest.
    """
    first = {k: info[k] for k in dump_sort_cosmetic if k in info}
    return {**first, **{k: v for k, v in info.items() if k not in first}}


def hash_text(text: str) -> str:
    """SHA-256 hex digest of a text, used for provenance of configuration dumps."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def get_class_options(cls, reserved: Iterable[str] = ()) -> dict:
    """
    Public, non-callable class attributes defined directly in ``cls``
    (not inherited), excluding ``reserved`` names.
    """
    return {k: v for k, v in cls.__dict__.items() if not k.startswith('_') and
            k not in reserved and not inspect.isroutine(v) and
            not isinstance(v, (property, classmethod, staticmethod))}


def positive_int(value: Any, name: str, minimum: int = 1) -> int:
    """
    Casts ``value`` to int, checking it is an integer ``>= minimum``.
    Raises ``ValueError`` otherwise.
    """
    if isinstance(value, bool) or int(value) != value or int(value) < minimum:
        raise ValueError(f"'{name}' must be an integer >= {minimum}. Got {value!r}.")
    return int(value)
