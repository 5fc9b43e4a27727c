"""
.. module:: yaml

:Synopsis: Custom YAML loader and dumper
:Author: robustspc developers

Loader:

- reads ``1e3`` as a float (no dot or exponent sign needed);
- rejects duplicate keys;
- ``!defaults [file, ...]`` merges other yaml files, relative to the current one.

Dumper: keeps the order of mappings, and writes tuples and numpy arrays as lists and
numpy scalars as plain numbers. Floats use their shortest round-trip representation, so
that chart artifacts read back exactly.
"""
# Global
import os
import re
from typing import Mapping, Optional, Any
import numpy as np
import yaml as pyyaml

# Local
from robustspc.tools import recursive_update
from robustspc.conventions import Extension
from robustspc.typing import InfoDict


class InputSyntaxError(Exception):
    """Syntax error in YAML input."""


# Loader ################################################################################

class _Loader(pyyaml.SafeLoader):
    # folder of the file being loaded, for relative !defaults
    current_folder: Optional[str] = None


_float_pattern = re.compile(r'''^(?:
    [-+]?[0-9][0-9_]*\.[0-9_]*(?:[eE][-+]?[0-9]+)?
    |[-+]?[0-9][0-9_]*[eE][-+]?[0-9]+
    |\.[0-9_]+(?:[eE][-+][0-9]+)?
    |[-+]?\.(?:inf|Inf|INF)
    |\.(?:nan|NaN|NAN))$''', re.X)

_Loader.add_implicit_resolver('tag:yaml.org,2002:float', _float_pattern,
                              list('-+0123456789.'))


def _find_yaml_file(folder: str, name: str) -> str:
    for ext in ("",) + tuple(Extension.yamls):
        path = os.path.abspath(os.path.join(folder, name + ext))
        if os.path.isfile(path):
            return path
    raise InputSyntaxError(f"Defaults file '{name}' not found in folder '{folder}'.")


def _construct_defaults(loader, node) -> InfoDict:
    folder = loader.current_folder
    if folder is None:
        raise InputSyntaxError(
            "'!defaults' directive can only be used when loading from a file.")
    if isinstance(node, pyyaml.ScalarNode):
        names = [loader.construct_scalar(node)]
    else:
        names = loader.construct_sequence(node)
    merged: InfoDict = {}
    for name in names:
        merged = recursive_update(merged, yaml_load_file(_find_yaml_file(folder, name)))
    # the nested loads change the folder
    _Loader.current_folder = folder
    return merged


def _construct_unique_mapping(loader, node, deep=False):
    keys = [loader.construct_object(key_node, deep=deep) for key_node, _ in node.value]
    duplicates = sorted({str(k) for k in keys if keys.count(k) > 1})
    if duplicates:
        raise InputSyntaxError(f"Duplicate key(s) {', '.join(duplicates)}")
    return loader.construct_mapping(node, deep)


_Loader.add_constructor('!defaults', _construct_defaults)
_Loader.add_constructor(pyyaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG,
                        _construct_unique_mapping)


def _syntax_error_context(text: str, line: int, column: int, context: int = 3) -> str:
    lines = text.split("\n")
    first = max(line - 1 - context, 0)
    shown = []
    for i, content in enumerate(lines[first:line + context], start=first + 1):
        marker = " --> " if i == line else "     "
        shown.append(marker + "|" + content +
                     (f"    <---- column {column}" if i == line else ""))
    return "\n".join(shown)


def yaml_load(text_stream, file_name=None) -> InfoDict:
    """
    Loads yaml text. ``file_name`` (if the text comes from a file) locates relative
    ``!defaults`` files and is named in error messages.
    """
    where = f" '{file_name}'" if file_name else ""
    _Loader.current_folder = os.path.dirname(os.path.abspath(file_name)) \
        if file_name else None
    try:
        return pyyaml.load(text_stream, _Loader)
    except (pyyaml.YAMLError, TypeError) as excpt:
        mark = getattr(excpt, "problem_mark", None)
        if mark is None or not isinstance(text_stream, str):
            raise InputSyntaxError(f"Error in your input{where}: {excpt}") from excpt
        line, column = mark.line + 1, mark.column + 1
        raise InputSyntaxError(
            f"Error in your input{where} at line {line}, column {column}.\n" +
            _syntax_error_context(text_stream, line, column) +
            "\nSome possible causes: inconsistent indentation, '=' instead of ':', "
            "no space after ':', a missing ':' or an empty group.") from excpt


def yaml_load_file(file_name: str, yaml_text: Optional[str] = None) -> InfoDict:
    """
    Loads a yaml file (or ``yaml_text``, if given, as if read from that file).
    """
    if yaml_text is None:
        with open(file_name, "r", encoding="utf-8-sig") as file:
            yaml_text = file.read()
    return yaml_load(yaml_text, file_name=file_name)


# Dumper ################################################################################

class _Dumper(pyyaml.SafeDumper):
    pass


def _represent_as_list(dumper, data):
    return dumper.represent_sequence(pyyaml.resolver.BaseResolver.DEFAULT_SEQUENCE_TAG,
                                     np.asarray(data).tolist()
                                     if isinstance(data, np.ndarray) else list(data))


_Dumper.add_representer(
    dict, lambda dumper, data: dumper.represent_mapping(
        pyyaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, data.items()))
_Dumper.add_representer(tuple, _represent_as_list)
_Dumper.add_representer(np.ndarray, _represent_as_list)
_Dumper.add_multi_representer(np.integer, lambda d, x: d.represent_int(int(x)))
# python floats are written via repr: shortest string that round-trips
_Dumper.add_multi_representer(np.floating, lambda d, x: d.represent_float(float(x)))
_Dumper.add_representer(np.bool_, lambda d, x: d.represent_bool(bool(x)))


def yaml_dump(info: Mapping[str, Any], stream=None, **kwds):
    """
    Dumps to yaml preserving the order of mappings, with numpy types as plain yaml.
    """
    kwds.setdefault("sort_keys", False)
    return pyyaml.dump(info, stream, _Dumper, allow_unicode=True, **kwds)


def yaml_dump_file(file_name: str, data):
    with open(file_name, "w", encoding="utf-8") as f:
        f.write(yaml_dump(data))
