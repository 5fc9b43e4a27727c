import sys

__author__ = "robustspc developers"
__version__ = "1.0.0"
__year__ = "2026"

if sys.version_info < (3, 8):
    print('robustspc requires Python 3.8+, please upgrade.')
    sys.exit(1)

from robustspc.chart import Chart, get_chart
from robustspc.run import phase1, monitor, simulate, qq
from robustspc.simulate import Scenario, estimate_arl, scenario_table
from robustspc.input import ingest
from robustspc.output import load_artifact
from robustspc.typing import InputDict
from robustspc.log import LoggedError
