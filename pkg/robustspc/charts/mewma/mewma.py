"""
.. module:: charts.mewma

:Synopsis: Classical MEWMA chart with bootstrap limits
:Author: robustspc developers

Plots the quadratic form of the EWMA vector :math:`Z_i = \\lambda \\bar X_i +
(1-\\lambda) Z_{i-1}`, started at the Phase-I grand mean, against the mean of the
bootstrap EWMA path and the scaled mean dispersion (see :mod:`~robustspc.bootstrap`).
"""

# Local
from robustspc.chart import QuadraticFormChart
from robustspc.bootstrap import bootstrap_psi, BootstrapResult
from robustspc.log import LoggedError


class MEWMA(QuadraticFormChart):
    """
    Classical MEWMA chart.
    """

    _statistic_names = ("mewma",)
    _is_ewma = True

    lam: float
    z_dispersion_factor: str

    def initialize(self):
        super().initialize()
        if not 0 < self.lam < 1:
            raise LoggedError(self.log, "The EWMA weight must be in (0, 1). Got %r.",
                              self.lam)
        if self.z_dispersion_factor not in ("resampled", "steady_state"):
            raise LoggedError(self.log, "z_dispersion_factor must be 'resampled' or "
                                        "'steady_state'. Got %r.",
                              self.z_dispersion_factor)

    def bootstrap(self, x, plan, random_state) -> BootstrapResult:
        return bootstrap_psi(x, plan, random_state=random_state)
