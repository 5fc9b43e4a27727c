"""
.. module:: simulate

:Synopsis: Scenario generation and Monte Carlo estimation of average run lengths
:Author: robustspc developers

Every replication of a run-length estimate:

1. generates fresh in-control Phase-I subgroups (contaminated with outliers only if
   ``contaminate_phase1``) and fits the chart to them;
2. generates Phase-II subgroups, shifted by ``shift`` and contaminated with outliers, in
   blocks of growing size, until the chart signals or ``phase2_cap`` subgroups have been
   monitored (censored run). A subgroup whose statistic cannot be computed (e.g. every
   point trimmed) ends the run as a signal, counted in ``fault_count``.

Replication ``i`` uses the ``i``-th child of ``SeedSequence(seed)`` for all its random
numbers (data, bootstrap and test-chart draws), so each replication is reproducible on
its own, and results do not depend on how replications are distributed over MPI
processes. Without a seed, ``seed_default`` is used.

Outliers replace ``count`` randomly chosen observations of every subgroup by
``mean + sign * shift + scale * e``, where the sign is +1 or -1 with probability 1/2 and
``e`` is drawn from the centered in-control distribution.
"""

# Global
from dataclasses import dataclass, replace, field
from typing import NamedTuple, Optional, Mapping, Union, Sequence, Tuple, Any
import numpy as np
import pandas as pd
from numpy.random import SeedSequence
from scipy import linalg, stats
from tqdm import tqdm

# Local
from robustspc import mpi
from robustspc.chart import Chart, RunLength, get_chart, get_chart_name_and_options
from robustspc.conventions import phase1_univariate_default, \
    phase1_multivariate_default, phase2_cap_default, replications_default, \
    block_size_min, block_size_max, arl_fields, seed_default
from robustspc.log import LoggedError, get_logger
from robustspc.robust_stats import trimmed_mean, winsorized_sd, fit_normal, fit_gamma, \
    qq_points, truncated_ks, GammaFit
from robustspc.tools import positive_int
from robustspc.typing import ScenarioDict, OutlierDict, ChartsDict, Phase, VectorLike

log = get_logger(__name__)

# Outlier defaults, for univariate and multivariate scenarios
outlier_shift_default = {1: 3., "mv": 5.}
outlier_scale_default = {1: 3., "mv": 1.}


class ScenarioError(LoggedError):
    """
    Invalid scenario: sizes, shapes, non-positive-definite covariance or outlier count.
    """


def _as_vector(value, dimension: int, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.ndim == 0:
        v = np.full(dimension, float(v))
    if v.shape != (dimension,) or not np.all(np.isfinite(v)):
        raise ScenarioError(log, "'%s' must be a scalar or a finite vector of length %d. "
                                 "Got %r.", name, dimension, value)
    return v


@dataclass
class OutlierSpec:
    """
    Number of outliers per subgroup, and shift and scale of their distribution.
    Defaults: shift 3 and scale 3 for univariate data, shift (5, ..., 5) and scale 1
    for multivariate data.
    """
    count: int = 1
    shift: Optional[VectorLike] = None
    scale: Optional[float] = None

    @classmethod
    def from_info(cls, info: Union[None, int, OutlierDict, 'OutlierSpec']
                  ) -> Optional['OutlierSpec']:
        if info is None or info is False or isinstance(info, cls):
            return info or None
        if isinstance(info, int) and not isinstance(info, bool):
            return cls(count=info)
        try:
            return cls(**info)
        except TypeError as excpt:
            raise ScenarioError(log, "Bad outliers specification %r: %s", info, excpt)

    def resolved(self, dimension: int) -> 'OutlierSpec':
        key = 1 if dimension == 1 else "mv"
        shift = outlier_shift_default[key] if self.shift is None else self.shift
        scale = outlier_scale_default[key] if self.scale is None else self.scale
        if not scale >= 0:
            raise ScenarioError(log, "Outlier scale must be nonnegative. Got %r.", scale)
        try:
            count = positive_int(self.count, "outliers.count")
        except ValueError as excpt:
            raise ScenarioError(log, str(excpt))
        return OutlierSpec(count, _as_vector(shift, dimension, "outliers.shift"),
                           float(scale))


@dataclass
class Scenario:
    """
    In-control distribution (normal, with given ``mean`` and ``cov``, default standard),
    Phase-II ``shift`` (in process units), outliers and Monte Carlo design.
    """
    dimension: int = 1
    mean: Optional[VectorLike] = None
    cov: Any = None
    shift: VectorLike = 0.
    outliers: Optional[OutlierSpec] = None
    size: int = 20
    phase1: Optional[int] = None
    phase2_cap: int = phase2_cap_default
    replications: int = replications_default
    seed: Optional[int] = None
    contaminate_phase1: bool = False
    _cov_factor: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            self.dimension = positive_int(self.dimension, "dimension")
            self.size = positive_int(self.size, "size", minimum=2)
            self.phase1 = positive_int(
                self.phase1 or (phase1_univariate_default if self.dimension == 1
                                else phase1_multivariate_default), "phase1", minimum=2)
            self.phase2_cap = positive_int(self.phase2_cap, "phase2_cap")
            self.replications = positive_int(self.replications, "replications")
        except ValueError as excpt:
            raise ScenarioError(log, str(excpt))
        p = self.dimension
        self.mean = _as_vector(0. if self.mean is None else self.mean, p, "mean")
        self.shift = _as_vector(self.shift, p, "shift")
        cov = np.eye(p) if self.cov is None else np.asarray(self.cov, dtype=float)
        if cov.ndim == 0:
            cov = np.eye(p) * float(cov)
        if cov.shape != (p, p) or not np.allclose(cov, cov.T):
            raise ScenarioError(log, "'cov' must be a symmetric %dx%d matrix. Got %r.",
                                p, p, self.cov)
        try:
            self._cov_factor = linalg.cholesky(cov, lower=True)
        except linalg.LinAlgError:
            raise ScenarioError(log, "'cov' must be positive definite. Got %r.",
                                cov.tolist())
        self.cov = cov
        self.outliers = OutlierSpec.from_info(self.outliers)
        if self.outliers:
            self.outliers = self.outliers.resolved(p)
            if self.outliers.count >= self.size:
                raise ScenarioError(
                    log, "The number of outliers per subgroup (%d) must be smaller than "
                         "the subgroup size (%d).", self.outliers.count, self.size)
        if self.seed is not None:
            try:
                self.seed = positive_int(self.seed, "seed", minimum=0)
            except ValueError as excpt:
                raise ScenarioError(log, str(excpt))

    @classmethod
    def from_info(cls, info: Union[None, ScenarioDict, 'Scenario']) -> 'Scenario':
        if isinstance(info, cls):
            return info
        try:
            return cls(**(info or {}))
        except TypeError as excpt:
            raise ScenarioError(log, "Bad scenario specification %r: %s", info, excpt)

    @property
    def cov_factor(self) -> np.ndarray:
        return self._cov_factor

    def as_dict(self) -> ScenarioDict:
        info: ScenarioDict = {
            "dimension": self.dimension, "mean": self.mean.tolist(),
            "cov": self.cov.tolist(), "shift": self.shift.tolist(),
            "outliers": None, "size": self.size, "phase1": self.phase1,
            "phase2_cap": self.phase2_cap, "replications": self.replications,
            "seed": self.seed, "contaminate_phase1": self.contaminate_phase1}
        if self.outliers:
            info["outliers"] = {"count": self.outliers.count,
                                "shift": np.asarray(self.outliers.shift).tolist(),
                                "scale": self.outliers.scale}
        return info


class RunLengthSummary(NamedTuple):
    """
    ARL estimate from a set of replications.

    ``arl``: mean of the uncensored run lengths (the cap if all are censored);
    ``sd_arl``: standard deviation of the uncensored run lengths;
    ``se_arl``: standard error of ``arl`` (``sd_arl`` over the square root of the number
    of uncensored runs); ``arl_lower_bound``: mean run length counting censored runs at
    the cap; ``fault_count``: runs ended by a subgroup whose statistic could not be
    computed (counted as signals).
    """
    arl: float
    sd_arl: float
    se_arl: float
    arl_lower_bound: float
    replications: int
    censored_count: int
    seed: Optional[int]
    fault_count: int = 0


# Data generation #######################################################################

def inject_outliers(subgroups, spec: OutlierSpec, random_state: np.random.Generator,
                    mean: VectorLike = 0., cov_factor: Optional[np.ndarray] = None
                    ) -> np.ndarray:
    """
    Returns a copy of a subgroup ``(n,)``/``(n, p)``, or of a block of subgroups
    ``(m, n, p)``, with ``spec.count`` distinct, uniformly chosen observations of every
    subgroup replaced by outliers ``mean + sign * shift + scale * cov_factor @ e``,
    where ``e`` is standard normal and the sign is random.
    """
    x = np.array(subgroups, dtype=float)
    shape = x.shape
    if x.ndim == 1:
        x = x[None, :, None]
    elif x.ndim == 2:
        x = x[None]
    m, n, p = x.shape
    spec = spec.resolved(p)
    if spec.count >= n:
        raise ScenarioError(log, "Cannot insert %d outliers in subgroups of size %d.",
                            spec.count, n)
    if cov_factor is None:
        cov_factor = np.eye(p)
    positions = np.argsort(random_state.random((m, n)), axis=1)[:, :spec.count]
    signs = random_state.integers(0, 2, size=(m, spec.count)) * 2 - 1
    noise = random_state.standard_normal((m, spec.count, p)) @ np.asarray(cov_factor).T
    outliers = (_as_vector(mean, p, "mean") + signs[..., None] * spec.shift +
                spec.scale * noise)
    np.put_along_axis(x, positions[..., None], outliers, axis=1)
    return x.reshape(shape)


def gen_subgroups(scenario: Scenario, phase: Phase, random_state: np.random.Generator,
                  count: Optional[int] = None) -> np.ndarray:
    """
    Generates ``count`` (default: number of Phase-I subgroups) iid subgroups of the
    scenario as an array ``(count, n, p)``. Phase II subgroups are shifted and
    contaminated with outliers; Phase I ones only if ``scenario.contaminate_phase1``.
    """
    if phase not in ("I", "II"):
        raise ScenarioError(log, "Phase must be 'I' or 'II'. Got %r.", phase)
    if count is None:
        count = scenario.phase1
    e = random_state.standard_normal((count, scenario.size, scenario.dimension))
    x = scenario.mean + e @ scenario.cov_factor.T
    if phase == "II":
        x += scenario.shift
    if scenario.outliers and (phase == "II" or scenario.contaminate_phase1):
        x = inject_outliers(x, scenario.outliers, random_state, scenario.mean,
                            scenario.cov_factor)
    return x


# Run lengths ###########################################################################

def replication_run_length(chart: Chart, scenario: Scenario,
                           random_state: np.random.Generator) -> RunLength:
    """
    Fits the chart to fresh Phase-I data and monitors fresh Phase-II data until a signal
    or the cap. A subgroup whose statistic cannot be computed ends the run as a signal.
    """
    chart.fit(gen_subgroups(scenario, "I", random_state), random_state=random_state)
    count, block = 0, block_size_min
    while count < scenario.phase2_cap:
        size = min(block, scenario.phase2_cap - count)
        signal = chart.first_signal(gen_subgroups(scenario, "II", random_state, size))
        if signal is not None:
            return RunLength(count + signal.index + 1, False, signal.fault is not None)
        count += size
        block = min(2 * block, block_size_max)
    return RunLength(scenario.phase2_cap, True)


def summarize_run_lengths(run_lengths: Sequence[RunLength], cap: int,
                          seed: Optional[int] = None) -> RunLengthSummary:
    lengths = np.array([r.length for r in run_lengths], dtype=float)
    censored = np.array([r.censored for r in run_lengths], dtype=bool)
    uncensored = lengths[~censored]
    n_ok = len(uncensored)
    arl = float(np.mean(uncensored)) if n_ok else float(cap)
    sd_arl = float(np.std(uncensored, ddof=1)) if n_ok > 1 else 0.
    se_arl = sd_arl / np.sqrt(n_ok) if n_ok else float("nan")
    lower = float(np.mean(np.where(censored, cap, lengths)))
    faults = sum(bool(r.fault) for r in run_lengths)
    return RunLengthSummary(arl, sd_arl, float(se_arl), lower, len(lengths),
                            int(censored.sum()), seed, faults)


def estimate_arl(chart_info: Union[ChartsDict, str], scenario: Union[Scenario, ScenarioDict]
                 ) -> RunLengthSummary:
    """
    Estimates the ARL of a chart (``{family: options}`` block) under a scenario.

    Replications are shared among MPI processes, if running with more than one. A failed
    replication aborts the estimate, after logging its index.
    """
    scenario = Scenario.from_info(scenario)
    name, options = get_chart_name_and_options(chart_info, log)
    chart = get_chart({name: options}, log)
    seed_sequence = SeedSequence(seed_default if scenario.seed is None else scenario.seed)
    seed = int(seed_sequence.entropy)
    children = seed_sequence.spawn(scenario.replications)
    local = []
    for i in mpi.split_indices(scenario.replications):
        try:
            result = replication_run_length(chart, scenario,
                                            np.random.default_rng(children[i]))
        except Exception:
            log.error("Replication %d of '%s' failed (seed %d).", i, name, seed)
            raise
        log.debug("Replication %d: run length %d%s", i, result.length,
                  " (censored)" if result.censored else
                  " (fault)" if result.fault else "")
        local.append(result)
    run_lengths = mpi.merge_indexed(local, scenario.replications)
    return summarize_run_lengths(run_lengths, scenario.phase2_cap, seed)


def cell_seed(master_seed: int, i_scenario: int, i_chart: int) -> int:
    """Seed of a table cell, derived from the table seed and the cell position."""
    return int(SeedSequence([master_seed, i_scenario, i_chart]).generate_state(1)[0])


def scenario_table(scenarios: Mapping[str, Union[Scenario, ScenarioDict, None]],
                   charts: Mapping[str, ChartsDict], seed: Optional[int] = None,
                   progress: bool = False) -> pd.DataFrame:
    """
    Estimates the ARL of every chart under every scenario.

    If a table ``seed`` is given, each cell uses a seed derived from it and the cell
    position; otherwise the scenario's own seed, or one derived from ``seed_default``.

    :return: ``DataFrame`` with columns scenario, chart, and the run-length summary.
    """
    cells = [(i_s, s_name, i_c, c_name)
             for i_s, s_name in enumerate(scenarios)
             for i_c, c_name in enumerate(charts)]
    rows = []
    for i_s, s_name, i_c, c_name in tqdm(cells, disable=not progress or
                                         not mpi.is_main_process(), desc="ARL cells"):
        scenario = Scenario.from_info(scenarios[s_name])
        if seed is not None or scenario.seed is None:
            scenario = replace(scenario, seed=cell_seed(
                seed_default if seed is None else seed, i_s, i_c))
        summary = estimate_arl(charts[c_name], scenario)
        if mpi.is_main_process():
            log.info("%s / %s: ARL = %.4g (sd %.4g, %d/%d censored, %d faults)", s_name,
                     c_name, summary.arl, summary.sd_arl, summary.censored_count,
                     summary.replications, summary.fault_count)
        rows.append({"scenario": s_name, "chart": c_name, **summary._asdict()})
    return pd.DataFrame(rows, columns=list(arl_fields))


# QQ diagnostics ########################################################################

class QQDiagnostics(NamedTuple):
    """
    QQ points of standardized trimmed means against the normal distribution and of
    winsorized variances against their moment-fitted gamma distribution, with
    Kolmogorov-Smirnov (statistic, p-value) summaries (the gamma one on the central 90%).
    """
    normal_points: np.ndarray
    gamma_points: np.ndarray
    gamma_fit: GammaFit
    ks_normal: Tuple[float, float]
    ks_gamma: Tuple[float, float]


def qq_diagnostics(subgroups: int = 5000, size: int = 20, alpha: float = 0.1,
                   seed: Optional[int] = None) -> QQDiagnostics:
    """
    Fit diagnostics of the trimmed mean and winsorized variance of standard normal
    subgroups.
    """
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((positive_int(subgroups, "subgroups", minimum=10),
                             positive_int(size, "size", minimum=2)))
    means = trimmed_mean(x, alpha)
    variances = winsorized_sd(x, alpha) ** 2
    normal = fit_normal(means)
    gamma = fit_gamma(variances)
    ks_normal = stats.kstest(means, normal.frozen().cdf)
    return QQDiagnostics(qq_points(means, "normal"), qq_points(variances, gamma), gamma,
                         (float(ks_normal.statistic), float(ks_normal.pvalue)),
                         truncated_ks(variances, gamma.frozen()))
