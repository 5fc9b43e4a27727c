"""
.. module:: conventions

:Synopsis: Default values and naming conventions
           to make the life of the maintainer easier.
:Author: robustspc developers

"""
from typing import Final

# Package name (for importlib)
robustspc_package = __name__.rpartition('.')[0]


def get_version():
    from robustspc import __version__
    return __version__


# Depth kinds, by input name
depth_kinds: Final = ("spatial", "tukey", "simplicial", "oja")

# Experimental protocol defaults
phase1_univariate_default: Final = 80
phase1_multivariate_default: Final = 100
phase2_cap_default: Final = 10000
replications_default: Final = 500
# Seed used when none is given, so that every command is reproducible
seed_default: Final = 0
bootstrap_resamples_default: Final = 1000
trim_fraction_default: Final = 0.10
# Redraws of all-trimmed resamples allowed, as a multiple of the number of resamples
resample_retry_factor: Final = 10
# Reciprocal condition number below which a dispersion matrix is taken as singular
rcond_tolerance: Final = 1e-12
# Phase-II subgroups are generated in blocks growing from min to max size
block_size_min: Final = 64
block_size_max: Final = 1024

# Conventional order for yaml dumping (purely cosmetic)
dump_sort_cosmetic: Final = ["chart", "seed", "output", "simulate", "qq"]


# Names of dataset and output columns
class Column:
    subgroup_id = "subgroup_id"
    index = "index"
    chart = "chart"
    statistic = "statistic"
    lcl = "lcl"
    ucl = "ucl"
    in_control = "in_control"
    fault = "fault"


monitor_fields: Final = (Column.index, Column.chart, Column.statistic, Column.lcl,
                         Column.ucl, Column.in_control, Column.fault)

arl_fields: Final = ("scenario", "chart", "arl", "sd_arl", "se_arl", "arl_lower_bound",
                     "replications", "censored_count", "seed", "fault_count")


# Output files

class FileSuffix:
    chart = "chart"
    arl = "arl"
    meta = "meta"
    monitor = "monitor"
    qq_normal = "qq_normal"
    qq_gamma = "qq_gamma"


class Extension:
    yaml = ".yaml"
    yamls = ".yaml", ".yml"
    csv = ".csv"
    jsonl = ".jsonl"


separator_files: Final = "."


# Exit codes of the command-line scripts
class ExitCode:
    ok = 0
    signal = 1
    usage = 2
    fault = 3


# Environment variables
debug_env: Final = "ROBUSTSPC_DEBUG"
color_env: Final = "ROBUSTSPC_COLOR"
nompi_env: Final = "ROBUSTSPC_NOMPI"
test_skip_env: Final = "ROBUSTSPC_TEST_SKIP"
