"""
.. module:: chart

:Synopsis: Base class for control charts, control-limit formulas and run lengths
:Author: robustspc developers

robustspc includes the classical and trimmed Shewhart (mean/sd) and EWMA charts for
univariate data, and the classical (Hotelling :math:`T^2`, MEWMA) and depth-trimmed
(:math:`\\tau^2`, :math:`\\psi^2`) quadratic-form charts for multivariate data.

The chart to use is specified by a ``chart`` block in the input file, whose only member
is the chart family used, containing some options, if necessary.

.. code-block:: yaml

   chart:
     trimmed_shewhart:
       alpha: 0.1
       tail_prob: 0.00135

or

.. code-block:: yaml

   chart:
     tau2:
       depth: oja
       B: 1000

Each chart family is placed in its own folder under ``robustspc/charts/``, containing a
file defining the chart's class, which inherits from :class:`Chart` (or from another
family), and possibly a ``[family].yaml`` file with its options and their default values
(alternatively, options can be declared as class attributes). Whatever option is defined
there automatically becomes an attribute of the chart's instance.

A chart is first fitted to Phase-I subgroups (:meth:`Chart.fit`), which fixes its control
limits, and then computes its plotted statistics on Phase-II subgroups, classifying each
subgroup as in or out of control. Acceptance intervals are closed: a statistic equal to
a limit is in control.
"""

# Global
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple, Dict, List, Iterable, Iterator, \
    Sequence, Union
import numpy as np
from scipy import special

# Local
from robustspc.component import Component, get_component_class
from robustspc.conventions import phase2_cap_default, trim_fraction_default
from robustspc.bootstrap import BootstrapPlan, BootstrapResult, EmpiricalDistribution, \
    ewma_path
from robustspc.mv_robust import classical_block, trim_and_winsorize_block, quadratic_forms
from robustspc.depth import subgroup_depths
from robustspc.log import LoggedError, abstract
from robustspc.robust_stats import trimmed_mean, winsorized_sd, fit_normal, fit_gamma
from robustspc.typing import InfoDict, ChartDictIn, empty_dict, DenominatorMode

# Minimum number of Phase-I subgroups for the fitted-distribution limits
min_subgroups_fit = 30


class ChartError(LoggedError):
    """
    Invalid chart input or use: ragged subgroups, wrong dimension or unfitted chart.
    """


class ControlLimits(NamedTuple):
    lcl: float
    center: float
    ucl: float

    def contains(self, value) -> Union[bool, np.ndarray]:
        """Closed acceptance interval (``nan`` is never contained)."""
        return (self.lcl <= value) & (value <= self.ucl)


class EwmaParams(NamedTuple):
    lam: float
    L: float = 3.

    def check(self) -> 'EwmaParams':
        if not 0 < self.lam <= 1:
            raise ValueError(f"The EWMA weight must be in (0, 1]. Got {self.lam!r}.")
        if not self.L > 0:
            raise ValueError(f"The limits width L must be positive. Got {self.L!r}.")
        return self


@dataclass(frozen=True)
class ChartState:
    """Limits per plotted statistic, current EWMA value (if any) and subgroups seen."""
    limits: Dict[str, ControlLimits]
    ewma_value: Optional[Union[float, np.ndarray]] = None
    sample_count: int = 0


class MonitorVerdict(NamedTuple):
    name: str
    statistic: float
    lcl: float
    ucl: float
    in_control: bool
    fault: Optional[str] = None


class SubgroupReport(NamedTuple):
    """Verdicts for one monitored subgroup; ``in_control`` only uses the signalling
    statistics."""
    index: int
    verdicts: Tuple[MonitorVerdict, ...]
    in_control: bool


class BlockStatistics(NamedTuple):
    """Plotted statistics of a block of ``m`` subgroups, one column per statistic
    (``nan`` where a statistic could not be computed), and the faults per subgroup."""
    values: np.ndarray
    faults: List[Optional[str]]


class Signal(NamedTuple):
    """First out-of-control subgroup of a block (0-based), and its fault if the statistic
    could not be computed."""
    index: int
    fault: Optional[str] = None


class RunLength(NamedTuple):
    length: int
    censored: bool
    # the run ended on a subgroup whose statistic could not be computed
    fault: bool = False


# Helpers ###############################################################################

def as_subgroups(data, dimension: Optional[int] = None) -> np.ndarray:
    """
    Checks and returns a block of subgroups as an array of shape ``(m, n, p)``.

    Accepts a list of equally-sized subgroups, each of them either a list of scalars
    (univariate) or an ``(n, p)`` array.
    """
    try:
        x = np.asarray(data, dtype=float)
    except ValueError:
        sizes = sorted(set(len(s) for s in data))
        raise ChartError(__name__, "Subgroups must all have the same size. Got sizes %r.",
                         sizes)
    if x.ndim == 2:
        x = x[..., None]
    if x.ndim != 3 or not x.size:
        raise ChartError(__name__, "Expected a nonempty list of subgroups. Got an array "
                                   "of shape %r.", x.shape)
    if x.shape[1] < 2:
        raise ChartError(__name__, "Subgroups need at least 2 observations.")
    if not np.all(np.isfinite(x)):
        raise ChartError(__name__, "Subgroups must contain finite values only.")
    if dimension is not None and x.shape[-1] != dimension:
        raise ChartError(__name__, "Expected data of dimension %d. Got %d.", dimension,
                         x.shape[-1])
    return x


def c4(n: int) -> float:
    """Bias factor of the sample standard deviation of ``n`` normal observations."""
    return float(np.sqrt(2 / (n - 1)) *
                 np.exp(special.gammaln(n / 2) - special.gammaln((n - 1) / 2)))


def s_chart_factors(n: int, L: float = 3.) -> Tuple[float, float]:
    """Factors (B3, B4) of the S chart with estimated sigma."""
    c = c4(n)
    spread = L * np.sqrt(1 - c ** 2) / c
    return max(0., 1 - spread), 1 + spread


def s_chart_known_factors(n: int, L: float = 3.) -> Tuple[float, float]:
    """Factors (B5, B6) of the S chart with known sigma."""
    c = c4(n)
    spread = L * np.sqrt(1 - c ** 2)
    return max(0., c - spread), c + spread


# Limit formulas ########################################################################

def shewhart_limits_classic(phase1, L: float = 3.,
                            known_mean: Optional[float] = None,
                            known_sd: Optional[float] = None
                            ) -> Tuple[ControlLimits, ControlLimits]:
    """
    Limits of the classical mean and standard-deviation charts.

    Mean chart: :math:`\\bar{\\bar X} \\pm L \\bar S/\\sqrt n`; sd chart: B-factor limits
    around :math:`\\bar S`. A known mean or standard deviation replaces its estimate
    (the sd chart then uses the known-sigma factors).
    """
    x = as_subgroups(phase1, dimension=1)[..., 0]
    m, n = x.shape
    if m < 2:
        raise ChartError(__name__, "Need at least 2 Phase-I subgroups. Got %d.", m)
    center = float(np.mean(x)) if known_mean is None else float(known_mean)
    if known_sd is None:
        s_bar = float(np.mean(np.std(x, axis=1, ddof=1)))
        b3, b4 = s_chart_factors(n, L)
        sd_limits = ControlLimits(b3 * s_bar, s_bar, b4 * s_bar)
        sigma = s_bar
    else:
        if known_sd < 0:
            raise ChartError(__name__, "The known sd must be nonnegative. Got %r.",
                             known_sd)
        sigma = float(known_sd)
        b5, b6 = s_chart_known_factors(n, L)
        sd_limits = ControlLimits(b5 * sigma, c4(n) * sigma, b6 * sigma)
    half_width = L * sigma / np.sqrt(n)
    return ControlLimits(center - half_width, center, center + half_width), sd_limits


def shewhart_limits_trimmed(phase1, alpha: float = 0.1, tail_prob: float = 0.05,
                            denominator_mode: DenominatorMode = "retained_count"
                            ) -> Tuple[ControlLimits, ControlLimits]:
    """
    Limits of the trimmed mean and winsorized sd charts.

    Mean chart: ``tail_prob`` and ``1 - tail_prob`` quantiles of the normal distribution
    fitted to the Phase-I trimmed means. Sd chart: square roots of the same quantiles of
    the gamma distribution fitted to the Phase-I winsorized variances. Centers are the
    medians of the fitted distributions.
    """
    if not 0 < tail_prob <= 0.5:
        raise ChartError(__name__, "The tail probability must be in (0, 0.5]. Got %r.",
                         tail_prob)
    x = as_subgroups(phase1, dimension=1)[..., 0]
    if len(x) < min_subgroups_fit:
        raise ChartError(__name__, "Need at least %d Phase-I subgroups to fit the "
                                   "trimmed-chart limits. Got %d.",
                         min_subgroups_fit, len(x))
    normal = fit_normal(trimmed_mean(x, alpha, denominator_mode))
    gamma = fit_gamma(winsorized_sd(x, alpha) ** 2)
    probs = np.array([tail_prob, 0.5, 1 - tail_prob])
    mean_limits = ControlLimits(*(float(v) for v in normal.ppf(probs)))
    sd_limits = ControlLimits(*(float(v) for v in np.sqrt(gamma.ppf(probs))))
    return mean_limits, sd_limits


def ewma_update(state: ChartState, xbar, lam: float) -> ChartState:
    """
    One step of the EWMA recursion :math:`Z_i = \\lambda \\bar X_i + (1-\\lambda)
    Z_{i-1}`, componentwise for vectors.
    """
    if state.ewma_value is None:
        raise ChartError(__name__, "The chart state has no EWMA value.")
    z = lam * np.asarray(xbar, dtype=float) + (1 - lam) * np.asarray(state.ewma_value)
    return replace(state, ewma_value=z if z.ndim else float(z),
                   sample_count=state.sample_count + 1)


def ewma_limits(mu0: float, sigma: float, params: EwmaParams,
                n: Optional[int] = None) -> ControlLimits:
    """
    Steady-state EWMA limits :math:`\\mu_0 \\pm L\\sigma\\sqrt{\\lambda/(2-\\lambda)}`.

    ``sigma`` is the standard deviation of the plotted subgroup statistic, or that of
    single observations if the subgroup size ``n`` is given.
    """
    params.check()
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative. Got {sigma!r}.")
    if n is not None:
        sigma = sigma / np.sqrt(n)
    half_width = params.L * sigma * np.sqrt(params.lam / (2 - params.lam))
    return ControlLimits(mu0 - half_width, mu0, mu0 + half_width)


def run_length(verdicts: Iterable, cap: int = phase2_cap_default) -> RunLength:
    """
    1-based index of the first out-of-control verdict, or the number of verdicts seen
    (at most ``cap``) flagged as censored.

    Verdicts are booleans (``True`` meaning in control) or objects with an
    ``in_control`` attribute.
    """
    count = 0
    for verdict in verdicts:
        if count >= cap:
            break
        count += 1
        if not getattr(verdict, "in_control", verdict):
            return RunLength(count, False)
    return RunLength(count, True)


# Base class ############################################################################

class Chart(Component):
    """Base class for control charts."""

    _statistic_names: Tuple[str, ...] = ()
    # Required data dimension (None: any)
    _dimension: Optional[int] = None
    _is_ewma: bool = False

    def __init__(self, info: ChartDictIn = empty_dict, name: Optional[str] = None,
                 initialize=True, standalone=True):
        super().__init__(info, name=name or self.get_family_name(),
                         initialize=initialize, standalone=standalone)

    @classmethod
    def get_family_name(cls) -> str:
        """Name of the chart family, as used in the ``chart`` input block."""
        return cls.__module__.split('.')[-1]

    def set_instance_defaults(self):
        self.limits: Dict[str, ControlLimits] = {}
        self.estimates: InfoDict = {}
        self.dimension: Optional[int] = None
        self.subgroup_size: Optional[int] = None
        self.sample_count = 0
        self.ewma_value = None

    @property
    def fitted(self) -> bool:
        return bool(self.limits)

    @property
    def signalling_statistics(self) -> Tuple[str, ...]:
        """Plotted statistics whose out-of-control verdicts count as signals."""
        return self._statistic_names

    @property
    def state(self) -> ChartState:
        return ChartState(dict(self.limits), self.ewma_value, self.sample_count)

    def fit(self, phase1, random_state: Optional[np.random.Generator] = None
            ) -> 'Chart':
        """
        Estimates the control limits from Phase-I subgroups, and resets the chart.
        """
        x = as_subgroups(phase1, self._dimension)
        self.dimension, self.subgroup_size = x.shape[-1], x.shape[1]
        self.limits, self.estimates = {}, {}
        self._fit(x, random_state)
        self.reset()
        self.log.debug("Fitted limits: %r", self.limits)
        return self

    @abstract
    def _fit(self, x: np.ndarray, random_state: Optional[np.random.Generator]):
        """
        Sets ``self.limits`` (and ``self.estimates``) from Phase-I data ``(m, n, p)``.
        """

    def reset(self):
        """Restarts monitoring: resets the EWMA recursion and the subgroup count."""
        self.sample_count = 0
        if self._is_ewma:
            start = self.estimates["ewma_start"]
            self.ewma_value = np.array(start, dtype=float) if np.ndim(start) else \
                float(start)

    def _check_block(self, block) -> np.ndarray:
        if not self.fitted:
            raise ChartError(self.log, "The chart has not been fitted yet.")
        x = as_subgroups(block, self.dimension)
        if x.shape[1] != self.subgroup_size:
            raise ChartError(self.log, "Expected subgroups of size %d. Got %d.",
                             self.subgroup_size, x.shape[1])
        return x

    def statistics(self, block) -> BlockStatistics:
        """
        Plotted statistics of a block of consecutive Phase-II subgroups, advancing the
        EWMA recursion (if any) and the subgroup count.
        """
        x = self._check_block(block)
        stats = self._statistics(x)
        self.sample_count += len(x)
        return stats

    @abstract
    def _statistics(self, x: np.ndarray) -> BlockStatistics:
        """Statistics of a checked block ``(m, n, p)``."""

    def in_control_matrix(self, values: np.ndarray) -> np.ndarray:
        """In-control flags ``(m, k)`` of plotted values, per statistic."""
        return np.column_stack([self.limits[name].contains(values[:, i])
                                for i, name in enumerate(self._statistic_names)])

    def signals(self, stats: BlockStatistics) -> np.ndarray:
        """Out-of-control flags per subgroup (faults included)."""
        in_control = self.in_control_matrix(stats.values)
        active = [self._statistic_names.index(name)
                  for name in self.signalling_statistics]
        faults = np.array([f is not None for f in stats.faults], dtype=bool)
        return faults | ~np.all(in_control[:, active], axis=1)

    def first_signal(self, block) -> Optional[Signal]:
        """
        First subgroup of the block signalling out of control, or ``None``. A subgroup
        whose statistic cannot be computed (e.g. every point trimmed) is a signal,
        carrying its fault.
        """
        stats = self.statistics(block)
        signals = np.flatnonzero(self.signals(stats))
        if not len(signals):
            return None
        first = int(signals[0])
        if stats.faults[first] is not None:
            index = self.sample_count - len(stats.faults) + first + 1
            self.log.debug("Fault at subgroup %d: %s", index, stats.faults[first])
        return Signal(first, stats.faults[first])

    def monitor(self, subgroups) -> Iterator[SubgroupReport]:
        """
        Classifies each Phase-II subgroup, yielding one report per subgroup (1-based
        index counted since the last reset). Faults are reported as out-of-control
        verdicts, never raised.
        """
        start = self.sample_count
        stats = self.statistics(subgroups)
        in_control = self.in_control_matrix(stats.values)
        signals = self.signals(stats)
        for i, fault in enumerate(stats.faults):
            verdicts = tuple(
                MonitorVerdict(name, float(stats.values[i, j]), self.limits[name].lcl,
                               self.limits[name].ucl,
                               bool(in_control[i, j]) and fault is None, fault)
                for j, name in enumerate(self._statistic_names))
            yield SubgroupReport(start + i + 1, verdicts, not bool(signals[i]))

    # Persistence

    def get_options(self) -> InfoDict:
        return {k: getattr(self, k) for k in self.get_defaults()}

    def get_state(self) -> InfoDict:
        """
        Serializable description of a fitted chart: family, options, limits, pooled
        estimates and monitoring state.
        """
        if not self.fitted:
            raise ChartError(self.log, "Cannot save the state of an unfitted chart.")
        state = {"family": self.get_family_name(),
                 "options": self.get_options(),
                 "dimension": self.dimension,
                 "subgroup_size": self.subgroup_size,
                 "limits": {name: dict(limits._asdict())
                            for name, limits in self.limits.items()},
                 "estimates": dict(self.estimates),
                 "sample_count": self.sample_count}
        if self._is_ewma:
            state["ewma_value"] = self.ewma_value
        return state

    @classmethod
    def from_state(cls, state: InfoDict) -> 'Chart':
        """
        Recreates a fitted chart from the output of :meth:`get_state`.
        """
        chart_class = get_component_class(state["family"]) if cls is Chart else cls
        chart = chart_class(state.get("options") or {})
        chart.dimension = int(state["dimension"])
        chart.subgroup_size = int(state["subgroup_size"])
        chart.limits = {name: ControlLimits(**limits)
                        for name, limits in state["limits"].items()}
        chart.estimates = {k: np.array(v, dtype=float) if isinstance(v, list) else v
                           for k, v in (state.get("estimates") or {}).items()}
        chart.reset()
        chart.sample_count = int(state.get("sample_count", 0))
        if chart._is_ewma and state.get("ewma_value") is not None:
            value = state["ewma_value"]
            chart.ewma_value = np.array(value, dtype=float) if np.ndim(value) else \
                float(value)
        return chart


class QuadraticFormChart(Chart):
    """
    Parent class for charts plotting a quadratic form of the subgroup location, with
    limits ``(0, median, ucl)``: ``ucl`` is the ``ucl_quantile`` quantile of the
    bootstrap distribution of the statistic over resampled Phase-I subgroups.

    Subgroup locations are depth-trimmed means if the chart has a ``depth`` option,
    and sample means otherwise.
    """

    B: int
    ucl_quantile: float

    @property
    def depth_kind(self) -> Optional[str]:
        return getattr(self, "depth", None)

    def initialize(self):
        if not 0 < self.ucl_quantile < 1:
            raise ChartError(self.log, "ucl_quantile must be in (0, 1). Got %r.",
                             self.ucl_quantile)

    def bootstrap_plan(self) -> BootstrapPlan:
        return BootstrapPlan(
            B=self.B, depth=self.depth_kind, cutvalue=getattr(self, "cutvalue", None),
            trim_fraction=getattr(self, "trim_fraction", trim_fraction_default),
            standardize=getattr(self, "standardize", False),
            lam=getattr(self, "lam", None),
            z_dispersion_factor=getattr(self, "z_dispersion_factor", "resampled"))

    @abstract
    def bootstrap(self, x, plan: BootstrapPlan, random_state) -> BootstrapResult:
        """Bootstrap distribution of the plotted statistic."""

    def _fit(self, x, random_state=None):
        if random_state is None:
            random_state = np.random.default_rng()
        result = self.bootstrap(x, self.bootstrap_plan(), random_state)
        self.limits = {self._statistic_names[0]: ControlLimits(
            0., result.distribution.quantile(0.5),
            result.distribution.quantile(self.ucl_quantile))}
        self.estimates = {"center": result.center, "dispersion": result.dispersion,
                          "grand_mean": result.grand_mean,
                          "distribution": result.distribution.sorted_values}
        if result.cutvalue is not None:
            self.estimates["cutvalue"] = result.cutvalue
        if self._is_ewma:
            self.estimates["ewma_start"] = result.grand_mean
        self.log.debug("Bootstrap %s ucl (%g quantile): %g", self._statistic_names[0],
                       self.ucl_quantile, self.limits[self._statistic_names[0]].ucl)

    @property
    def distribution(self) -> EmpiricalDistribution:
        return EmpiricalDistribution.from_values(self.estimates["distribution"])

    def subgroup_locations(self, x) -> Tuple[np.ndarray, np.ndarray]:
        """Locations of a block of subgroups ``(m, p)``, and their validity."""
        if self.depth_kind is None:
            block = classical_block(x)
        else:
            depth_values = subgroup_depths(
                x, self.depth_kind, standardize=getattr(self, "standardize", False))
            block = trim_and_winsorize_block(x, self.depth_kind,
                                             self.estimates["cutvalue"], depth_values)
        return block.means, block.valid

    def all_trimmed_fault(self) -> str:
        return (f"all points have {self.depth_kind} depth <= cutvalue "
                f"{self.estimates.get('cutvalue')}")

    def _statistics(self, x):
        means, valid = self.subgroup_locations(x)
        values = np.full(len(x), np.nan)
        if self._is_ewma:
            if np.any(valid):
                # faulty subgroups do not update the recursion
                z = ewma_path(means[valid], self.lam, self.ewma_value)
                self.ewma_value = z[-1]
                values[valid] = quadratic_forms(z - self.estimates["center"],
                                                self.estimates["dispersion"])
        elif np.any(valid):
            values[valid] = quadratic_forms(means[valid] - self.estimates["center"],
                                            self.estimates["dispersion"])
        faults = [None if v else self.all_trimmed_fault() for v in valid]
        return BlockStatistics(values[:, None], faults)


def monitor(chart: Chart, subgroups) -> Iterator[SubgroupReport]:
    """Per-subgroup reports of a fitted chart on a stream of Phase-II subgroups."""
    return chart.monitor(subgroups)


def get_chart(info_chart, logger=None) -> Chart:
    """
    Instantiates the chart described by a single-key ``{family: options}`` block.
    """
    name, options = get_chart_name_and_options(info_chart, logger)
    return get_component_class(name, logger=logger)(options or {})


def get_chart_name_and_options(info_chart, logger=None) -> Tuple[str, InfoDict]:
    if not info_chart:
        raise ChartError(logger or __name__, "No chart given!")
    if isinstance(info_chart, str):
        return info_chart, {}
    try:
        names = list(info_chart)
    except TypeError:
        raise ChartError(logger or __name__,
                         "The chart block must be a dictionary 'chart: {options}'.")
    if len(names) > 1:
        raise ChartError(logger or __name__,
                         "Only one chart at a time. Got %r.", names)
    return names[0], dict(info_chart[names[0]] or {})


__all__: Sequence[str] = [
    "Chart", "ChartError", "ControlLimits", "EwmaParams", "ChartState", "MonitorVerdict",
    "SubgroupReport", "BlockStatistics", "Signal", "RunLength", "as_subgroups",
    "shewhart_limits_classic", "shewhart_limits_trimmed", "ewma_update", "ewma_limits",
    "run_length", "monitor", "get_chart", "get_chart_name_and_options", "c4"]
