"""
.. module:: run

:Synopsis: Python and command-line entry points
:Author: robustspc developers

Four commands share the same configuration format:

- ``phase1``: fits a chart to Phase-I data and writes it as an artifact.
- ``monitor``: classifies Phase-II subgroups with a fitted chart, as JSON lines.
- ``simulate``: estimates the ARL of charts under simulated scenarios.
- ``qq``: fit diagnostics of the trimmed statistics under normality.
"""

# Global
import os
import sys
from contextlib import contextmanager
from typing import Union, Optional, Tuple, TextIO, Callable
import numpy as np
import pandas as pd

# Local
from robustspc.conventions import ExitCode, get_version, FileSuffix, Extension, Column, \
    seed_default
from robustspc.typing import InputDict, InfoDict
from robustspc.input import load_info_overrides, update_info, apply_chart_flags, \
    ingest, get_simulation_grid, ConfigError, DatasetError
from robustspc.output import get_output, chart_artifact, load_artifact, \
    monitor_records, write_records, arl_meta, provenance, ArtifactError, OutputError
from robustspc.chart import Chart, get_chart
from robustspc.component import ChartNotFoundError
from robustspc.simulate import Scenario, ScenarioError, scenario_table, qq_diagnostics, \
    QQDiagnostics
from robustspc.yaml import InputSyntaxError
from robustspc.log import logger_setup, LoggedError, get_logger, get_traceback_text
from robustspc import mpi

logger = get_logger(__name__)

# Errors in the input of a command, as opposed to failures of the computation
usage_errors = (ConfigError, DatasetError, ArtifactError, ChartNotFoundError,
                InputSyntaxError, ScenarioError, OutputError)

# Chart options that can be given as command-line flags, by flag name
chart_flags = {"alpha": float, "depth": str, "trim-fraction": float, "cutvalue": float,
               "lambda": float, "L": float, "tail-prob": float, "B": int,
               "ucl-quantile": float}


@contextmanager
def configuration_stage():
    """
    Reports any error raised inside as a configuration error.
    """
    try:
        yield
    except usage_errors:
        raise
    except (LoggedError, ValueError, TypeError) as excpt:
        raise ConfigError(logger, "Invalid configuration: %s", excpt) from excpt


def _prepare(info_or_yaml_or_file, chart_name=None, chart_options=None, **flags
             ) -> InputDict:
    info = load_info_overrides(info_or_yaml_or_file or {}, **flags)
    if chart_name or chart_options:
        apply_chart_flags(info, chart_name, **(chart_options or {}))
    logger_setup(info.get("debug"))
    return update_info(info)


def phase1(info_or_yaml_or_file: Union[InputDict, str, os.PathLike],
           dataset: Union[str, os.PathLike, np.ndarray],
           chart: Optional[str] = None, output: Optional[str] = None,
           debug: Union[bool, int, None] = None, force: Optional[bool] = None,
           seed: Optional[int] = None, **chart_options) -> Tuple[InputDict, Chart]:
    """
    Fits the configured chart to a Phase-I dataset, and writes the chart artifact if an
    ``output`` prefix is given.

    :param info_or_yaml_or_file: configuration dictionary, yaml text or file name
    :param dataset: csv file of subgroups, or array ``(m, n[, p])``
    :param chart: chart family, overriding the one in the configuration
    :param chart_options: chart options, overriding those in the configuration
    :return: (updated configuration, fitted chart)
    """
    with configuration_stage():
        updated_info = _prepare(info_or_yaml_or_file, chart, chart_options,
                                output=output, debug=debug, force=force, seed=seed)
        if not updated_info.get("chart"):
            raise ConfigError(logger, "No chart given: add a 'chart' block or --chart.")
        the_chart = get_chart(updated_info["chart"], logger)
    if isinstance(dataset, np.ndarray):
        data = dataset
    else:
        data = ingest(dataset, the_chart._dimension)
    seed_sequence = np.random.SeedSequence(
        seed_default if updated_info.get("seed") is None else updated_info["seed"])
    used_seed = int(seed_sequence.entropy)
    out = get_output(updated_info.get("output"), bool(updated_info.get("force")))
    # fail early on existing products, not after the fit
    if out:
        out.check_overwrite(out.add_suffix(FileSuffix.chart, Extension.yaml))
    the_chart.fit(data, np.random.default_rng(seed_sequence))
    out.dump_chart(chart_artifact(the_chart, updated_info, used_seed))
    return updated_info, the_chart


def monitor(artifact: Union[str, os.PathLike, Chart],
            dataset: Union[str, os.PathLike, np.ndarray],
            output: Optional[str] = None, debug: Union[bool, int, None] = None,
            force: Optional[bool] = None, stream: Optional[TextIO] = None
            ) -> Tuple[Chart, pd.DataFrame, int]:
    """
    Classifies every Phase-II subgroup of a dataset with a fitted chart (an artifact
    file or a fitted :class:`~chart.Chart`).

    Records are written as JSON lines into ``<output>.monitor.jsonl``, into ``stream`` if
    given, or to the standard output otherwise.

    :return: (chart, with its monitoring state updated; table of records; number of
      out-of-control subgroups)
    """
    logger_setup(debug)
    if isinstance(artifact, Chart):
        the_chart = artifact
    else:
        the_chart, _ = load_artifact(artifact)
    if isinstance(dataset, np.ndarray):
        data = dataset
    else:
        data = ingest(dataset, the_chart.dimension)
        if data.shape[1] != the_chart.subgroup_size:
            raise DatasetError(logger, "The chart was fitted to subgroups of size %d, "
                                       "but the dataset has size %d.",
                               the_chart.subgroup_size, data.shape[1])
    out = get_output(output, bool(force))
    if stream is None and mpi.is_main_process():
        stream = out.open_monitor_stream()
        close = stream is not sys.stdout
    else:
        close = False
    try:
        reports = list(the_chart.monitor(data))
        records = monitor_records(reports)
        if stream is not None:
            write_records(records, stream)
    finally:
        if close:
            stream.close()
    signals = sum(not report.in_control for report in reports)
    logger.info("Monitored %d subgroups: %d out of control.", len(data), signals)
    faults = int(records[Column.fault].notna().sum())
    if faults:
        logger.warning("The statistic of %d subgroup(s) could not be computed (see the "
                       "'%s' field of the records).", faults, Column.fault)
    return the_chart, records, signals


def simulate(info_or_yaml_or_file: Union[InputDict, str, os.PathLike],
             output: Optional[str] = None, debug: Union[bool, int, None] = None,
             force: Optional[bool] = None, seed: Optional[int] = None,
             progress: Optional[bool] = None, qq: Optional[bool] = None
             ) -> Tuple[InputDict, pd.DataFrame]:
    """
    Estimates the ARL of every configured chart under every configured scenario.

    If the configuration has a ``qq`` block (or ``qq=True``), also writes the QQ
    diagnostics plot data.

    :return: (updated configuration, ARL table)
    """
    with configuration_stage():
        updated_info = _prepare(info_or_yaml_or_file, output=output, debug=debug,
                                force=force, seed=seed)
        if qq and not updated_info.get("qq"):
            updated_info["qq"] = {}
        scenarios, charts = get_simulation_grid(updated_info)
        scenarios = {name: Scenario.from_info(s).as_dict()
                     for name, s in scenarios.items()}
        for chart_info in charts.values():
            get_chart(chart_info, logger)
    if progress is None:
        progress = bool((updated_info.get("simulate") or {}).get("progress"))
    out = get_output(updated_info.get("output"), bool(updated_info.get("force")))
    if out:
        out.check_overwrite(out.add_suffix(FileSuffix.arl, Extension.csv))
    table = scenario_table(scenarios, charts, seed=updated_info.get("seed"),
                           progress=progress)
    out.dump_table(table)
    meta = arl_meta(updated_info, updated_info.get("seed"), scenarios)
    if updated_info.get("qq") is not None and updated_info["qq"] is not False:
        diagnostics, meta["qq"] = _qq_diagnostics(updated_info)
        out.dump_qq(diagnostics.normal_points, diagnostics.gamma_points)
    out.dump_meta(meta)
    return updated_info, table


def _qq_diagnostics(updated_info: InputDict) -> Tuple[QQDiagnostics, InfoDict]:
    options = dict(updated_info.get("qq") or {})
    if options.get("seed") is None:
        options["seed"] = seed_default if updated_info.get("seed") is None \
            else updated_info["seed"]
    diagnostics = qq_diagnostics(**options)
    logger.info("Trimmed means vs normal: KS = %.4g (p = %.4g)", *diagnostics.ks_normal)
    logger.info("Winsorized variances vs gamma(shape=%.4g, scale=%.4g), central 90%%: "
                "KS = %.4g (p = %.4g)", *diagnostics.gamma_fit, *diagnostics.ks_gamma)
    return diagnostics, {"options": options,
                         "gamma_fit": dict(diagnostics.gamma_fit._asdict()),
                         "ks_normal": list(diagnostics.ks_normal),
                         "ks_gamma": list(diagnostics.ks_gamma)}


def qq(info_or_yaml_or_file: Union[InputDict, str, os.PathLike, None] = None,
       output: Optional[str] = None, debug: Union[bool, int, None] = None,
       force: Optional[bool] = None, seed: Optional[int] = None
       ) -> Tuple[InputDict, QQDiagnostics]:
    """
    QQ diagnostics of the trimmed mean (against a normal fit) and the winsorized variance
    (against a moment-fitted gamma) of simulated standard normal subgroups.

    :return: (updated configuration, diagnostics)
    """
    with configuration_stage():
        updated_info = _prepare(info_or_yaml_or_file, output=output, debug=debug,
                                force=force, seed=seed)
    diagnostics, summary = _qq_diagnostics(updated_info)
    out = get_output(updated_info.get("output"), bool(updated_info.get("force")))
    out.dump_qq(diagnostics.normal_points, diagnostics.gamma_points)
    out.dump_meta(dict(provenance=provenance(updated_info, summary["options"]["seed"]),
                       **summary))
    return updated_info, diagnostics


# Command-line scripts ##################################################################

def monitor_exit_code(records: pd.DataFrame, signals: int) -> int:
    """
    Exit code of a monitoring run: a subgroup whose statistic could not be computed is a
    fault, and takes precedence over out-of-control signals.
    """
    if records[Column.fault].notna().any():
        return ExitCode.fault
    return ExitCode.signal if signals else ExitCode.ok


def exit_status(func: Callable[[], int]) -> int:
    """
    Runs a script body, translating errors into exit codes: ``2`` for errors in the
    input, ``3`` for failures of the computation.
    """
    try:
        return func()
    except usage_errors:
        return ExitCode.usage
    except LoggedError:
        return ExitCode.fault
    except (KeyboardInterrupt, SystemExit):
        raise
    except Exception:
        logger.error(get_traceback_text(sys.exc_info()))
        return ExitCode.fault


def _base_parser(prog, description, config_required=False):
    import argparse
    # kwargs for flags that should be True|None, instead of True|False
    # (needed in order not to mistakenly override the configuration file)
    trueNone_kwargs = {"action": "store_true", "default": None}
    parser = argparse.ArgumentParser(prog=prog, description=description)
    parser.add_argument("-c", "--config", action="store", metavar="config.yaml",
                        required=config_required, default=None,
                        help="Configuration file.")
    parser.add_argument("-o", "--output", action="store", metavar="/some/path",
                        default=None, help="Path and prefix for the output files.")
    parser.add_argument("-f", "--force", help="Overwrites previous output, if it exists.",
                        **trueNone_kwargs)
    parser.add_argument("-d", "--debug", help="Produce verbose debug output.",
                        **trueNone_kwargs)
    parser.add_argument("--version", action="version", version=get_version())
    return parser


def _add_seed(parser):
    parser.add_argument("-s", "--seed", action="store", type=int, default=None,
                        help="Seed of the random number generator.")


def phase1_script(args=None):
    """Shell script wrapper for :func:`run.phase1`"""
    parser = _base_parser("robustspc-phase1",
                          "Fits a control chart to Phase-I data.")
    parser.add_argument("dataset", action="store", metavar="phase1.csv",
                        help="Phase-I subgroups.")
    parser.add_argument("--chart", action="store", default=None, metavar="family",
                        help="Chart family, e.g. tau2 or trimmed_shewhart.")
    for flag, flag_type in chart_flags.items():
        parser.add_argument("--" + flag, action="store", type=flag_type, default=None,
                            dest=flag.replace("-", "_").replace("lambda", "lam"),
                            help=f"Chart option '{flag}'.")
    _add_seed(parser)
    arguments = vars(parser.parse_args(args))
    config, dataset = arguments.pop("config"), arguments.pop("dataset")

    def body():
        phase1(config, dataset, **arguments)
        return ExitCode.ok

    sys.exit(exit_status(body))


def monitor_script(args=None):
    """Shell script wrapper for :func:`run.monitor`"""
    import argparse
    trueNone_kwargs = {"action": "store_true", "default": None}
    parser = argparse.ArgumentParser(
        prog="robustspc-monitor",
        description="Classifies Phase-II subgroups with a fitted chart. Exits with 1 if "
                    "any subgroup is out of control, and with 3 if the statistic of "
                    "some subgroup could not be computed.")
    parser.add_argument("artifact", action="store", metavar="prefix.chart.yaml",
                        help="Fitted chart, as written by robustspc-phase1.")
    parser.add_argument("dataset", action="store", metavar="phase2.csv",
                        help="Phase-II subgroups.")
    parser.add_argument("-o", "--output", action="store", metavar="/some/path",
                        default=None,
                        help="Path and prefix for the records (default: stdout).")
    parser.add_argument("-f", "--force", help="Overwrites previous output, if it exists.",
                        **trueNone_kwargs)
    parser.add_argument("-d", "--debug", help="Produce verbose debug output.",
                        **trueNone_kwargs)
    parser.add_argument("--version", action="version", version=get_version())
    arguments = parser.parse_args(args)

    def body():
        _, records, signals = monitor(arguments.artifact, arguments.dataset,
                                      output=arguments.output, debug=arguments.debug,
                                      force=arguments.force)
        return monitor_exit_code(records, signals)

    sys.exit(exit_status(body))


def simulate_script(args=None):
    """Shell script wrapper for :func:`run.simulate`"""
    parser = _base_parser("robustspc-simulate",
                          "Estimates ARL tables by Monte Carlo simulation.",
                          config_required=True)
    _add_seed(parser)
    parser.add_argument("--progress", action="store_true", default=None,
                        help="Show a progress bar.")
    parser.add_argument("--qq", action="store_true", default=None,
                        help="Also write the QQ diagnostics plot data.")
    parser.add_argument("--no-mpi", action="store_true", default=None,
                        help="Disable MPI when mpi4py is installed but MPI does not "
                             "actually work.")
    arguments = vars(parser.parse_args(args))
    if arguments.pop("no_mpi"):
        mpi.set_mpi_disabled(True)
    config = arguments.pop("config")

    def body():
        simulate(config, **arguments)
        return ExitCode.ok

    sys.exit(exit_status(body))


def qq_script(args=None):
    """Shell script wrapper for :func:`run.qq`"""
    parser = _base_parser("robustspc-qq",
                          "QQ diagnostics of the trimmed mean and winsorized variance.")
    _add_seed(parser)
    arguments = vars(parser.parse_args(args))
    config = arguments.pop("config")

    def body():
        qq(config, **arguments)
        return ExitCode.ok

    sys.exit(exit_status(body))


if __name__ == '__main__':
    phase1_script()
