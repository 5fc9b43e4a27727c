"""
.. module:: charts.tau2

:Synopsis: Depth-trimmed Hotelling chart
:Author: robustspc developers

Same as the Hotelling chart, with subgroup locations given by the depth-trimmed mean
and the dispersion by the mean winsorized dispersion matrix.

Subgroups with every point at or below the depth cutvalue are reported as faults.
"""

# Global
from typing import Optional

# Local
from robustspc.charts.hotelling import Hotelling
from robustspc.chart import Chart
from robustspc.depth import get_depth_kind
from robustspc.log import LoggedError


def check_trimming(chart: Chart):
    """Checks and normalizes the depth options of a chart."""
    chart.depth = get_depth_kind(chart.depth)
    if chart.cutvalue is not None and not 0 <= chart.cutvalue <= 1:
        raise LoggedError(chart.log, "The cutvalue must be in [0, 1]. Got %r.",
                          chart.cutvalue)
    if not 0 < chart.trim_fraction < 0.5:
        raise LoggedError(chart.log, "trim_fraction must be in (0, 0.5). Got %r.",
                          chart.trim_fraction)
    chart.standardize = bool(chart.standardize)


class Tau2(Hotelling):
    r"""
    Robust :math:`\tau^2` chart.
    """

    _statistic_names = ("tau2",)

    depth: str
    cutvalue: Optional[float]
    trim_fraction: float
    standardize: bool

    def initialize(self):
        super().initialize()
        check_trimming(self)
