"""
.. module:: output

:Synopsis: Output driver: chart artifacts, ARL tables, monitoring streams
:Author: robustspc developers

All products of a run share an output prefix ``[folder/]name``, and are written as
``name.<kind>.<ext>``. Nothing time-dependent is written, so that rerunning a
configuration with the same seed reproduces its outputs byte for byte.
"""

# Global
import os
import sys
from typing import Optional, Iterable, Tuple, TextIO
import numpy as np
import pandas as pd

# Local
from robustspc.conventions import Extension, FileSuffix, separator_files, get_version, \
    monitor_fields, arl_fields
from robustspc.typing import InputDict, InfoDict
from robustspc.log import LoggedError, HasLogger, get_logger
from robustspc.input import split_prefix
from robustspc.tools import sort_cosmetic, hash_text
from robustspc.yaml import yaml_dump, yaml_dump_file, yaml_load_file, InputSyntaxError
from robustspc.component import ChartNotFoundError, version_at_least
from robustspc.chart import Chart, SubgroupReport
from robustspc import mpi

logger = get_logger(__name__)

# Keys of the provenance block of the products
provenance_keys = ("version", "seed", "config_hash")


class OutputError(LoggedError):
    """
    Exception when an output product cannot be written.
    """

    pass  # necessary or it won't print the given error message!


class ArtifactError(LoggedError):
    """
    Exception for unreadable or incompatible chart artifacts.
    """

    pass  # necessary or it won't print the given error message!


def config_hash(updated_info: InputDict) -> str:
    """Hash of the canonical dump of an updated configuration."""
    return hash_text(yaml_dump(sort_cosmetic(
        {k: v for k, v in updated_info.items() if k not in ("output", "force", "debug")})))


def provenance(updated_info: InputDict, seed: Optional[int]) -> InfoDict:
    return {"version": get_version(), "seed": seed, "config_hash": config_hash(updated_info)}


class Output(HasLogger):
    """
    Basic output driver. It takes care of creating the output folder, naming the output
    files and refusing to overwrite existing ones unless forced.
    """

    def __init__(self, prefix, force=False):
        self.name = "output"
        self.set_logger(name=self.name)
        self.folder, self.prefix = split_prefix(prefix)
        self.force = force
        self.create_folder(self.folder)
        self.log.debug("Output to be written into folder '%s', with prefix '%s'",
                       self.folder, self.prefix)

    def is_prefix_folder(self):
        """
        Returns `True` if the output prefix is not a bare folder, e.g. `results/`.
        """
        return bool(self.prefix)

    def add_suffix(self, suffix, extension=""):
        """
        Returns the path of an output product, combining the output prefix with a
        kind suffix and extension.
        """
        return os.path.join(
            self.folder, self.prefix + (separator_files if self.is_prefix_folder() else "")
            + suffix + extension)

    @mpi.root_only
    def create_folder(self, folder):
        """
        Creates the given folder (MPI-aware).
        """
        try:
            if not os.path.exists(folder):
                self.log.debug("Creating output folder '%s'", folder)
                os.makedirs(folder)
        except Exception as e:
            raise OutputError(
                self.log, "Could not create folder %r. Reason: %r", folder, str(e))

    def check_overwrite(self, file_name):
        if os.path.exists(file_name):
            if not self.force:
                raise OutputError(self.log, "Output file '%s' exists. Use a different "
                                            "output prefix or 'force: True'.", file_name)
            self.log.info("Overwriting '%s' ('force' was requested).", file_name)

    @mpi.root_only
    def dump_chart(self, artifact: InfoDict) -> str:
        file_name = self.add_suffix(FileSuffix.chart, Extension.yaml)
        self.check_overwrite(file_name)
        yaml_dump_file(file_name, artifact)
        self.log.info("Chart written to '%s'", file_name)
        return file_name

    @mpi.root_only
    def dump_meta(self, meta: InfoDict) -> str:
        file_name = self.add_suffix(FileSuffix.meta, Extension.yaml)
        self.check_overwrite(file_name)
        yaml_dump_file(file_name, meta)
        return file_name

    @mpi.root_only
    def dump_table(self, table: pd.DataFrame, suffix: str = FileSuffix.arl) -> str:
        file_name = self.add_suffix(suffix, Extension.csv)
        self.check_overwrite(file_name)
        table.to_csv(file_name, index=False, lineterminator="\n")
        self.log.info("Table written to '%s'", file_name)
        return file_name

    @mpi.root_only
    def dump_qq(self, normal_points: np.ndarray, gamma_points: np.ndarray
                ) -> Tuple[str, str]:
        columns = ["theoretical", "sample"]
        return (self.dump_table(pd.DataFrame(normal_points, columns=columns),
                                FileSuffix.qq_normal),
                self.dump_table(pd.DataFrame(gamma_points, columns=columns),
                                FileSuffix.qq_gamma))

    def open_monitor_stream(self) -> TextIO:
        file_name = self.add_suffix(FileSuffix.monitor, Extension.jsonl)
        self.check_overwrite(file_name)
        self.log.info("Monitoring records written to '%s'", file_name)
        return open(file_name, "w", encoding="utf-8")


# noinspection PyMissingConstructor
class OutputDummy(Output):
    """
    Dummy output class. Does nothing. Evaluates to 'False' as a class.
    """

    # noinspection PyUnusedLocal
    def __init__(self, *args, **kwargs):
        self.set_logger()
        self.log.debug("No output requested. Doing nothing.")
        # override all methods that actually produce output
        exclude = ["nullfunc", "open_monitor_stream"]
        _func_name = "__name__"
        for attrname, attr in list(Output.__dict__.items()):
            func_name = getattr(attr, _func_name, None)
            if func_name and func_name not in exclude and '__' not in func_name:
                setattr(self, attrname, self.nullfunc)

    def nullfunc(self, *args, **kwargs):
        pass

    def open_monitor_stream(self) -> TextIO:
        return sys.stdout

    def __nonzero__(self):
        return False

    def __bool__(self):
        return False


def get_output(prefix: Optional[str] = None, force=False) -> Output:
    """
    Auxiliary function to retrieve the output driver (a dummy one if no prefix given).
    """
    if prefix:
        return Output(prefix, force=force)
    else:
        return OutputDummy()


# Chart artifacts #######################################################################

def chart_artifact(chart: Chart, updated_info: InputDict, seed: Optional[int]
                   ) -> InfoDict:
    """
    Serializable fitted chart: its state plus a provenance block.
    """
    return dict(chart.get_state(), provenance=provenance(updated_info, seed))


def load_artifact(path) -> Tuple[Chart, InfoDict]:
    """
    Loads a chart artifact written by :meth:`Output.dump_chart`.

    :return: (fitted chart, provenance block)
    """
    path = str(path)
    if not os.path.isfile(path):
        raise ArtifactError(logger, "Chart artifact '%s' not found.", path)
    try:
        state = yaml_load_file(path)
    except InputSyntaxError as excpt:
        raise ArtifactError(logger, "Chart artifact '%s' is not valid yaml: %s",
                            path, excpt)
    required = ("family", "dimension", "subgroup_size", "limits", "provenance")
    if not isinstance(state, dict) or any(k not in state for k in required):
        raise ArtifactError(logger, "Chart artifact '%s' is malformed: it must contain "
                                    "%r.", path, list(required))
    prov = state.pop("provenance") or {}
    written_by = prov.get("version")
    if written_by is None or not version_at_least(get_version(), written_by):
        raise ArtifactError(logger, "Chart artifact '%s' was written by version %s, "
                                    "newer than this one (%s). Please upgrade.",
                            path, written_by, get_version())
    try:
        chart = Chart.from_state(state)
    except ChartNotFoundError:
        raise
    except (KeyError, TypeError, ValueError, LoggedError) as excpt:
        raise ArtifactError(logger, "Chart artifact '%s' is malformed: %s", path, excpt)
    return chart, prov


# Monitoring records ####################################################################

def monitor_records(reports: Iterable[SubgroupReport]) -> pd.DataFrame:
    """
    Flat table of monitoring verdicts, one row per subgroup and plotted statistic.
    """
    rows = [(report.index, v.name, v.statistic, v.lcl, v.ucl, v.in_control, v.fault)
            for report in reports for v in report.verdicts]
    return pd.DataFrame(rows, columns=list(monitor_fields))


def write_records(records: pd.DataFrame, stream: TextIO):
    """Writes records as JSON lines, with a stable field order."""
    if records.empty:
        return
    stream.write(records.to_json(orient="records", lines=True, double_precision=15)
                 .rstrip("\n") + "\n")
    stream.flush()


def arl_meta(updated_info: InputDict, seed: Optional[int], scenarios: dict) -> InfoDict:
    """
    Sidecar of an ARL table: provenance, normalized scenarios and column definitions.
    """
    return {"provenance": provenance(updated_info, seed),
            "scenarios": scenarios,
            "charts": (updated_info.get("simulate") or {}).get("charts") or
                      updated_info.get("chart"),
            "columns": {
                "arl": "mean of the uncensored run lengths (cap if all censored)",
                "sd_arl": "standard deviation of the uncensored run lengths",
                "se_arl": "sd_arl / sqrt(number of uncensored runs), standard error of "
                          "the arl estimate",
                "arl_lower_bound": "mean run length counting censored runs as the cap",
                "replications": "number of Monte Carlo replications",
                "censored_count": "replications reaching the cap without a signal",
                "seed": "entropy of the seed sequence of the cell",
                "fault_count": "runs ended by a subgroup whose statistic could not be "
                               "computed, counted as signals"},
            "column_order": list(arl_fields)}
