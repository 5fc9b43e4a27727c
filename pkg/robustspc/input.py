"""
.. module:: input

:Synopsis: Input-related functions: configuration and dataset loading
:Author: robustspc developers
"""

# Global
import os
import platform
from typing import Optional, Union, Tuple
import numpy as np
import pandas as pd

# Local
from robustspc.conventions import Extension, Column
from robustspc.typing import InputDict, InfoDict, ChartsDict
from robustspc.tools import recursive_update, deepcopy_where_possible, str_to_list
from robustspc.yaml import yaml_load_file, yaml_load
from robustspc.log import LoggedError, get_logger
from robustspc.component import get_component_class, ChartNotFoundError

logger = get_logger(__name__)

# Valid top-level blocks of a configuration
input_blocks = ("chart", "seed", "output", "force", "debug", "simulate", "qq", "version")
simulate_blocks = ("scenario", "scenarios", "charts", "progress")
qq_options = ("subgroups", "size", "alpha", "seed")


class ConfigError(LoggedError):
    """
    Exception for malformed configurations: unknown blocks or options, bad values.
    """

    pass  # necessary or it won't print the given error message!


class DatasetError(LoggedError):
    """
    Exception for unreadable or malformed subgroup datasets.
    """

    pass  # necessary or it won't print the given error message!


def load_input_dict(info_or_yaml_or_file: Union[InputDict, str, os.PathLike]
                    ) -> InputDict:
    if isinstance(info_or_yaml_or_file, os.PathLike):
        return load_input_file(info_or_yaml_or_file)
    elif isinstance(info_or_yaml_or_file, str):
        if "\n" in info_or_yaml_or_file:
            return yaml_load(info_or_yaml_or_file)  # type: ignore
        else:
            return load_input_file(info_or_yaml_or_file)
    elif isinstance(info_or_yaml_or_file, (dict, str, os.PathLike)):
        return deepcopy_where_possible(info_or_yaml_or_file)
    else:
        raise ValueError("The first argument must be a dictionary, file name or "
                         "yaml string with the required input options.")


def load_input_file(input_file: Union[str, os.PathLike]) -> InputDict:
    input_file = str(input_file)
    extension = os.path.splitext(input_file)[1]
    if extension.lower() not in Extension.yamls:
        raise ConfigError(logger, "Extension of configuration file '%s' not recognized. "
                                  "Use %r.", input_file, Extension.yamls)
    if not os.path.exists(input_file):
        raise ConfigError(logger, "Configuration file '%s' not found.", input_file)
    info: InputDict = yaml_load_file(input_file)  # type: ignore
    if not isinstance(info, dict):
        raise ConfigError(logger, "Configuration file '%s' must contain a dictionary.",
                          input_file)
    return info


def load_info_overrides(*infos_or_yaml_or_files, **flags) -> InputDict:
    """
    Takes a number of input dictionaries (or paths to them), loads them and updates them
    in order, and finally updates with the given flags (the ones that are not None).
    """
    info = load_input_dict(infos_or_yaml_or_files[0])  # makes deep copy if dict
    for another_info in infos_or_yaml_or_files[1:]:
        info = recursive_update(info, load_input_dict(another_info))
    for flag, value in flags.items():
        if value is not None:
            info[flag] = value  # type: ignore
    return info


def split_prefix(prefix):
    """
    Splits an output prefix into folder and file name prefix.

    If on Windows, allows for unix-like input.
    """
    if platform.system() == "Windows":
        prefix = prefix.replace("/", os.sep)
    folder = os.path.dirname(prefix) or "."
    file_prefix = os.path.basename(prefix)
    if file_prefix == ".":
        file_prefix = ""
    return folder, file_prefix


def apply_chart_flags(info: InputDict, family: Optional[str] = None, **options
                      ) -> InputDict:
    """
    Overrides the chart block of ``info`` with a family name and options given from the
    command line (the ones that are not None). Changing the family drops the options of
    the previous one.
    """
    options = {k: v for k, v in options.items() if v is not None}
    block = info.get("chart") or {}
    if isinstance(block, str):
        block = {block: {}}
    if family and family not in block:
        block = {family: {}}
    if options:
        if not block:
            raise ConfigError(logger, "Chart options %r given but no chart family.",
                              sorted(options))
        name = list(block)[0]
        block = {name: dict(block[name] or {}, **options)}
    if block:
        info["chart"] = block
    return info


def get_default_info(family: str) -> InfoDict:
    """
    Default options of a chart family.
    """
    try:
        return get_component_class(family, logger=logger).get_defaults()
    except ChartNotFoundError:
        raise
    except Exception as excpt:
        raise ConfigError(logger, "Failed to get defaults for chart '%s' [%s]",
                          family, excpt)


def update_chart_block(block: Union[ChartsDict, str, None], where: str = "chart"
                       ) -> ChartsDict:
    """
    Returns the ``{family: options}`` block with the family defaults filled in, checking
    that there is exactly one family and no unknown option.
    """
    if isinstance(block, str):
        block = {block: None}
    if not isinstance(block, dict) or len(block) != 1:
        raise ConfigError(logger, "The '%s' block must be a dictionary with a single "
                                  "'family: {options}' entry. Got %r.", where, block)
    (family, options), = block.items()
    if options is not None and not isinstance(options, dict):
        raise ConfigError(logger, "The options of chart '%s' in '%s' must be a "
                                  "dictionary. Got %r.", family, where, options)
    defaults = get_default_info(family)
    unknown = set(options or {}).difference(defaults)
    if unknown:
        raise ConfigError(logger, "Unknown option(s) %r for chart '%s' in '%s'. "
                                  "Known options are %r.",
                          sorted(unknown), family, where, list(defaults))
    defaults.update(options or {})
    return {family: defaults}


def update_info(info: InputDict) -> InputDict:
    """
    Creates an updated info starting from the defaults of each chart and updating it
    with the input info. Scenarios are left as given: they are normalized when run.
    """
    input_info = deepcopy_where_possible(info)
    unknown = set(input_info).difference(input_blocks)
    if unknown:
        raise ConfigError(logger, "Unknown configuration block(s) %r. Valid ones are %r.",
                          sorted(unknown), list(input_blocks))
    updated_info: InputDict = {}
    for block, value in input_info.items():
        if block == "chart":
            if value:
                updated_info["chart"] = update_chart_block(value)
        elif block == "simulate":
            updated_info["simulate"] = _update_simulate(value)
        elif block == "qq":
            updated_info["qq"] = _update_qq(value)
        else:
            updated_info[block] = value  # type: ignore
    seed = updated_info.get("seed")
    if seed is not None and (isinstance(seed, bool) or int(seed) != seed or seed < 0):
        raise ConfigError(logger, "'seed' must be a non-negative integer. Got %r.", seed)
    return updated_info


def _update_simulate(block) -> InfoDict:
    if not isinstance(block, dict):
        raise ConfigError(logger, "The 'simulate' block must be a dictionary.")
    unknown = set(block).difference(simulate_blocks)
    if unknown:
        raise ConfigError(logger, "Unknown option(s) %r in 'simulate'. Valid ones are %r.",
                          sorted(unknown), list(simulate_blocks))
    updated = dict(block)
    if "charts" in block:
        if not isinstance(block["charts"], dict) or not block["charts"]:
            raise ConfigError(logger, "'simulate.charts' must be a non-empty dictionary "
                                      "{label: {family: options}}.")
        updated["charts"] = {label: update_chart_block(chart, f"simulate.charts.{label}")
                             for label, chart in block["charts"].items()}
    if "scenario" in block and "scenarios" in block:
        raise ConfigError(logger, "Give either 'scenario' or 'scenarios' in 'simulate', "
                                  "not both.")
    return updated


def _update_qq(block) -> Union[bool, InfoDict]:
    if block is True or block is None:
        return {}
    if block is False:
        return False
    if not isinstance(block, dict):
        raise ConfigError(logger, "The 'qq' block must be a dictionary of %r.",
                          list(qq_options))
    unknown = set(block).difference(qq_options)
    if unknown:
        raise ConfigError(logger, "Unknown option(s) %r in 'qq'. Valid ones are %r.",
                          sorted(unknown), list(qq_options))
    return dict(block)


def get_simulation_grid(info: InputDict) -> Tuple[dict, dict]:
    """
    Scenarios and labelled charts of a simulation run. Falls back to the top-level chart,
    labelled by its family, if ``simulate.charts`` is not given.
    """
    block = info.get("simulate") or {}
    if "scenarios" in block:
        scenarios = dict(block["scenarios"] or {})
    else:
        scenarios = {"scenario": block.get("scenario")}
    if not scenarios:
        raise ConfigError(logger, "No scenarios given in 'simulate.scenarios'.")
    charts = block.get("charts")
    if not charts:
        if not info.get("chart"):
            raise ConfigError(logger, "No charts to simulate: give 'simulate.charts' "
                                      "or a 'chart' block.")
        charts = {list(info["chart"])[0]: info["chart"]}
    return scenarios, charts


# Datasets ##############################################################################

def ingest(path: Union[str, os.PathLike], dimension: Optional[int] = None
           ) -> np.ndarray:
    """
    Reads a subgroup dataset: a csv file with a header line, an integer ``subgroup_id``
    column and one column per measured variable, one row per observation. Blank lines
    are ignored; line numbers in error messages are those of the file.

    Subgroups are kept in order of first appearance, and must all have the same size.

    :return: array ``(subgroups, size, dimension)``
    """
    path = str(path)
    if not os.path.exists(path):
        raise DatasetError(logger, "Dataset '%s' not found.", path)
    try:
        data = pd.read_csv(path, dtype=str, keep_default_na=False,
                           skipinitialspace=True, skip_blank_lines=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as excpt:
        raise DatasetError(logger, "Could not read dataset '%s': %s", path, excpt)
    if Column.subgroup_id not in data.columns:
        raise DatasetError(logger, "Dataset '%s' has no '%s' column. Columns: %r.",
                           path, Column.subgroup_id, list(data.columns))
    variables = [c for c in data.columns if c != Column.subgroup_id]
    if not variables:
        raise DatasetError(logger, "Dataset '%s' has no measurement columns.", path)
    if dimension is not None and len(variables) != dimension:
        raise DatasetError(logger, "Dataset '%s' has %d measurement column(s) %r, but "
                                   "the chart expects %d.",
                           path, len(variables), variables, dimension)
    blank = data.fillna("").apply(lambda column: column.str.strip() == "").all(axis=1)
    # header is line 1
    lines = data.index.to_numpy()[~blank.to_numpy()] + 2
    data = data[~blank]
    if data.empty:
        raise DatasetError(logger, "Dataset '%s' has no observations.", path)
    values = data[variables].apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row, col = (int(i[0]) for i in np.nonzero(bad))
        raise DatasetError(logger, "Dataset '%s', line %d: missing or non-numeric value "
                                   "%r in column '%s'.", path, lines[row],
                           data[variables[col]].iloc[row], variables[col])
    ids = data[Column.subgroup_id].fillna("").str.strip()
    not_int = ~ids.str.fullmatch(r"[+-]?\d+").to_numpy()
    if not_int.any():
        row = int(np.nonzero(not_int)[0][0])
        raise DatasetError(logger, "Dataset '%s', line %d: %s must be an integer. "
                                   "Got %r.",
                           path, lines[row], Column.subgroup_id, ids.iloc[row])
    groups = values.groupby(ids.astype(int).to_numpy(), sort=False)
    sizes = groups.size()
    if sizes.nunique() > 1:
        size = int(sizes.mode().iloc[0])
        ragged = [i for i, s in sizes.items() if s != size]
        raise DatasetError(logger, "Dataset '%s': subgroups must all have the same size "
                                   "(%d), but subgroup(s) %s have %s observations.",
                           path, size, ", ".join(str(i) for i in ragged),
                           ", ".join(str(int(sizes[i])) for i in ragged))
    if int(sizes.iloc[0]) < 2:
        raise DatasetError(logger, "Dataset '%s': subgroups must have at least 2 "
                                   "observations.", path)
    subgroups = np.stack([g.to_numpy(dtype=float) for _, g in groups])
    logger.debug("Read %d subgroups of size %d and dimension %d from '%s'.",
                 *subgroups.shape, path)
    return subgroups


def dataset_columns(subgroups: np.ndarray, names=None) -> pd.DataFrame:
    """
    Inverse of :func:`ingest`: long-format table of an array of subgroups, with
    1-based subgroup ids.
    """
    m, n, p = subgroups.shape
    names = str_to_list(names) if names else (["x"] if p == 1 else
                                               [f"x{i + 1}" for i in range(p)])
    table = pd.DataFrame(subgroups.reshape(m * n, p), columns=names)
    table.insert(0, Column.subgroup_id, np.repeat(np.arange(1, m + 1), n))
    return table
