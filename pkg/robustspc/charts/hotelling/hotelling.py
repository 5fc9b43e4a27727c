"""
.. module:: charts.hotelling

:Synopsis: Classical Hotelling T^2 chart with bootstrap limits
:Author: robustspc developers

Plots :math:`T^2 = (\\bar X - \\bar{\\bar X})^T \\bar S^{-1} (\\bar X - \\bar{\\bar X})`,
with the grand mean and mean sample covariance of the resampled Phase-I subgroups, and
upper control limit at the ``ucl_quantile`` quantile of the bootstrap distribution of
:math:`T^2` (lower control limit 0).
"""

# Local
from robustspc.chart import QuadraticFormChart
from robustspc.bootstrap import bootstrap_tau, BootstrapResult


class Hotelling(QuadraticFormChart):
    r"""
    Classical Hotelling :math:`T^2` chart.
    """

    _statistic_names = ("t2",)

    def bootstrap(self, x, plan, random_state) -> BootstrapResult:
        return bootstrap_tau(x, plan, random_state=random_state)
