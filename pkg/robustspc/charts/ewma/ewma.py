"""
.. module:: charts.ewma

:Synopsis: Classical EWMA chart of subgroup means
:Author: robustspc developers

Plots :math:`Z_i = \\lambda \\bar X_i + (1-\\lambda) Z_{i-1}`, with
:math:`Z_0 = \\bar{\\bar X}`, against the steady-state limits
:math:`\\bar{\\bar X} \\pm L \\sigma_{\\bar x} \\sqrt{\\lambda/(2-\\lambda)}`, where
:math:`\\sigma_{\\bar x} = \\bar S/\\sqrt n` is estimated from the Phase-I subgroup standard
deviations.
"""

# Global
import numpy as np

# Local
from robustspc.chart import Chart, ChartError, BlockStatistics, EwmaParams, ewma_limits
from robustspc.bootstrap import ewma_path


class EWMA(Chart):
    """
    Classical EWMA chart.
    """

    _statistic_names = ("ewma",)
    _dimension = 1
    _is_ewma = True

    lam: float = 0.2
    L: float = 3.

    def initialize(self):
        try:
            self.params = EwmaParams(self.lam, self.L).check()
        except ValueError as excpt:
            raise ChartError(self.log, str(excpt))

    def location_and_scale(self, x: np.ndarray):
        """
        Per-subgroup means of a block ``(m, n)``, and Phase-I center and standard
        deviation of the plotted mean.
        """
        means = x.mean(axis=1)
        sigma = np.mean(x.std(axis=1, ddof=1)) / np.sqrt(x.shape[1])
        return means, float(np.mean(means)), float(sigma)

    def subgroup_locations(self, x: np.ndarray) -> np.ndarray:
        return x.mean(axis=1)

    def _fit(self, x, random_state=None):
        _, mu0, sigma = self.location_and_scale(x[..., 0])
        self.limits = {self._statistic_names[0]: ewma_limits(mu0, sigma, self.params)}
        self.estimates = {"ewma_start": mu0, "sigma_xbar": sigma}

    def _statistics(self, x):
        z = ewma_path(self.subgroup_locations(x[..., 0]), self.lam, self.ewma_value)
        self.ewma_value = float(z[-1])
        return BlockStatistics(z[:, None], [None] * len(x))
