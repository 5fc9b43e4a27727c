"""
.. module:: charts.trimmed_shewhart

:Synopsis: Trimmed-mean and winsorized-sd Shewhart charts
:Author: robustspc developers

Plots the trimmed mean :math:`\\bar X_t` and the winsorized standard deviation
:math:`S_t` of every subgroup. The limits are the ``tail_prob`` and ``1 - tail_prob``
quantiles of a normal distribution fitted to the Phase-I trimmed means, and (through a
square root) of a gamma distribution fitted to the Phase-I winsorized variances.

The nominal tail probability of 0.05 per side gives a false-alarm rate of about 10% per
subgroup; use ``tail_prob: 0.00135`` to match the rate of the classical 3-sigma chart.
"""

# Global
from typing import Tuple
import numpy as np

# Local
from robustspc.chart import Chart, BlockStatistics, shewhart_limits_trimmed
from robustspc.robust_stats import trimmed_mean, winsorized_sd, check_alpha
from robustspc.log import LoggedError


class TrimmedShewhart(Chart):
    r"""
    Trimmed :math:`\bar X_t`-:math:`S_t` chart.
    """

    _statistic_names = ("xbar_t", "s_t")
    _dimension = 1

    alpha: float = 0.1
    tail_prob: float = 0.05
    denominator_mode: str = "retained_count"
    use_sd_chart: bool = False

    def initialize(self):
        check_alpha(self.alpha)
        if self.denominator_mode not in ("retained_count", "nominal_fraction"):
            raise LoggedError(self.log, "Unknown denominator_mode %r.",
                              self.denominator_mode)

    @property
    def signalling_statistics(self) -> Tuple[str, ...]:
        return self._statistic_names if self.use_sd_chart else self._statistic_names[:1]

    def _fit(self, x, random_state=None):
        mean_limits, sd_limits = shewhart_limits_trimmed(
            x, self.alpha, self.tail_prob, self.denominator_mode)
        self.limits = {"xbar_t": mean_limits, "s_t": sd_limits}
        self.estimates = {"grand_trimmed_mean": mean_limits.center,
                          "median_s_t": sd_limits.center}

    def _statistics(self, x):
        y = x[..., 0]
        values = np.column_stack([trimmed_mean(y, self.alpha, self.denominator_mode),
                                  winsorized_sd(y, self.alpha)])
        return BlockStatistics(values, [None] * len(x))
