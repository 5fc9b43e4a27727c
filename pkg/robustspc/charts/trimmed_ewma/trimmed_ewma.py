"""
.. module:: charts.trimmed_ewma

:Synopsis: EWMA chart of subgroup trimmed means
:Author: robustspc developers

Same recursion and limits as the classical EWMA chart, with the trimmed mean as subgroup
location, the grand trimmed mean as :math:`\\mu_0` and the average standard error of the
trimmed mean as the standard deviation of the plotted statistic.
"""

# Global
import numpy as np

# Local
from robustspc.charts.ewma import EWMA
from robustspc.robust_stats import trimmed_mean, trimmed_se, check_alpha
from robustspc.log import LoggedError


class TrimmedEWMA(EWMA):
    """
    Trimmed-mean EWMA chart.
    """

    _statistic_names = ("ewma_t",)

    alpha: float = 0.1
    denominator_mode: str = "retained_count"

    def initialize(self):
        super().initialize()
        check_alpha(self.alpha)
        if self.denominator_mode not in ("retained_count", "nominal_fraction"):
            raise LoggedError(self.log, "Unknown denominator_mode %r.",
                              self.denominator_mode)

    def subgroup_locations(self, x: np.ndarray) -> np.ndarray:
        return trimmed_mean(x, self.alpha, self.denominator_mode)

    def location_and_scale(self, x: np.ndarray):
        means = self.subgroup_locations(x)
        return means, float(np.mean(means)), float(np.mean(trimmed_se(x, self.alpha)))
