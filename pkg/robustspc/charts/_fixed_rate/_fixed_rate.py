"""
.. module:: charts._fixed_rate

:Synopsis: Test chart signalling with a fixed probability per subgroup
:Author: robustspc developers

Plots a uniform random number :math:`u` per subgroup, drawn from the random generator
passed at fitting, with limits ``(q, (1+q)/2, 1)``: it signals iff :math:`u < q`, so its
run lengths are geometric with mean :math:`1/q`. Nothing is estimated from the data.

With ``fault_rate > 0``, the statistic of each subgroup cannot be computed with that
probability (a fault, as for a subgroup with every point trimmed).
"""

# Global
import numpy as np

# Local
from robustspc.chart import Chart, ControlLimits, BlockStatistics
from robustspc.log import LoggedError


class _FixedRate(Chart):
    _statistic_names = ("u",)

    q: float = 0.01
    fault_rate: float = 0.

    def initialize(self):
        if not 0 < self.q <= 1:
            raise LoggedError(self.log, "q must be in (0, 1]. Got %r.", self.q)
        if not 0 <= self.fault_rate <= 1:
            raise LoggedError(self.log, "fault_rate must be in [0, 1]. Got %r.",
                              self.fault_rate)

    def _fit(self, x, random_state=None):
        self._rng = random_state or np.random.default_rng()
        self.limits = {"u": ControlLimits(self.q, (1 + self.q) / 2, 1.)}

    def _statistics(self, x):
        if not hasattr(self, "_rng"):
            self._rng = np.random.default_rng()
        values = self._rng.random(len(x))
        faults = [None] * len(x)
        if self.fault_rate:
            for i in np.flatnonzero(self._rng.random(len(x)) < self.fault_rate):
                values[i] = np.nan
                faults[i] = "statistic not computable"
        return BlockStatistics(values[:, None], faults)
