"""
.. module:: charts.shewhart

:Synopsis: Classical mean and standard-deviation (X-bar/S) Shewhart charts
:Author: robustspc developers

Plots the subgroup mean :math:`\\bar X` against :math:`\\bar{\\bar X} \\pm L\\bar S/\\sqrt n`,
and the subgroup standard deviation :math:`S` against the usual S-chart limits.

If ``known_mean`` and/or ``known_sd`` are given, the limits use them instead of the
Phase-I estimates (exact limits).

Only the mean chart signals unless ``use_sd_chart: True``; both statistics are always
reported when monitoring.
"""

# Global
from typing import Optional, Tuple
import numpy as np

# Local
from robustspc.chart import Chart, ChartError, BlockStatistics, shewhart_limits_classic


class Shewhart(Chart):
    r"""
    Classical :math:`\bar X`-:math:`S` chart.
    """

    _statistic_names = ("xbar", "s")
    _dimension = 1

    L: float = 3.
    known_mean: Optional[float] = None
    known_sd: Optional[float] = None
    use_sd_chart: bool = False

    def initialize(self):
        if not self.L > 0:
            raise ChartError(self.log, "L must be positive. Got %r.", self.L)

    @property
    def signalling_statistics(self) -> Tuple[str, ...]:
        return self._statistic_names if self.use_sd_chart else self._statistic_names[:1]

    def _fit(self, x, random_state=None):
        mean_limits, sd_limits = shewhart_limits_classic(
            x, self.L, known_mean=self.known_mean, known_sd=self.known_sd)
        self.limits = {"xbar": mean_limits, "s": sd_limits}
        self.estimates = {"grand_mean": mean_limits.center, "mean_sd": sd_limits.center}

    def _statistics(self, x):
        values = np.column_stack([x[..., 0].mean(axis=1),
                                  x[..., 0].std(axis=1, ddof=1)])
        return BlockStatistics(values, [None] * len(x))
