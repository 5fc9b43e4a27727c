"""
.. module:: charts.psi2

:Synopsis: Depth-trimmed MEWMA chart
:Author: robustspc developers

Same as the MEWMA chart, with depth-trimmed subgroup means and winsorized dispersions.
Subgroups with every point trimmed are reported as faults and do not update the EWMA
recursion.
"""

# Global
from typing import Optional

# Local
from robustspc.charts.mewma import MEWMA
from robustspc.charts.tau2.tau2 import check_trimming


class Psi2(MEWMA):
    r"""
    Robust :math:`\psi^2` chart.
    """

    _statistic_names = ("psi2",)

    depth: str
    cutvalue: Optional[float]
    trim_fraction: float
    standardize: bool

    def initialize(self):
        super().initialize()
        check_trimming(self)
