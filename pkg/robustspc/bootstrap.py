"""
.. module:: bootstrap

:Synopsis: Bootstrap distributions of the quadratic-form chart statistics
:Author: robustspc developers

Whole Phase-I subgroups are resampled with replacement. For every resample the trimmed
mean and winsorized dispersion (or the classical mean and covariance, if no depth is
given) are computed, and pooled into a grand mean and a mean dispersion, against which
each resample's quadratic form is evaluated:

- :func:`bootstrap_tau`: :math:`\\tau^2_i = (\\bar X_{i,t} - \\bar{\\bar X}_t)^T
  \\bar S_w^{-1} (\\bar X_{i,t} - \\bar{\\bar X}_t)`
- :func:`bootstrap_psi`: the resampled means are smoothed with the EWMA recursion
  starting at :math:`\\bar{\\bar X}_t`, and :math:`\\psi^2_i` is computed against their
  grand mean and :math:`S_Z = c(\\lambda)\\,\\bar S_w`, with
  :math:`c = \\lambda/(1-\\lambda)` (``z_dispersion_factor: resampled``, default) or
  :math:`c = \\lambda/(2-\\lambda)` (``steady_state``).

Since the resampling unit is the whole subgroup, the estimates of every Phase-I subgroup
are computed once and indexed by the resample draws. Resamples of subgroups left with no
point above the cutvalue are redrawn, within a budget of ``resample_retry_factor * B``
redraws.
"""

# Global
from dataclasses import dataclass
from typing import NamedTuple, Optional, Literal
import numpy as np
from scipy import signal

# Local
from robustspc.conventions import bootstrap_resamples_default, trim_fraction_default, \
    resample_retry_factor
from robustspc.depth import get_depth_kind, estimate_cutvalue, subgroup_depths
from robustspc.mv_robust import trim_and_winsorize_block, classical_block, \
    quadratic_forms, AllTrimmedError
from robustspc.robust_stats import order_quantile, fit_gamma, GammaFit
from robustspc.log import LoggedError, get_logger

log = get_logger(__name__)

ZDispersionFactor = Literal["resampled", "steady_state"]


class ResampleExhaustedError(LoggedError):
    """
    Too many resampled subgroups had every point trimmed.
    """


@dataclass(frozen=True)
class EmpiricalDistribution:
    """
    Sorted sample of a statistic, supporting order-statistic quantiles.
    """
    sorted_values: np.ndarray

    @classmethod
    def from_values(cls, values) -> 'EmpiricalDistribution':
        x = np.sort(np.asarray(values, dtype=float).ravel())
        if not len(x):
            raise ValueError("An empirical distribution needs at least one value.")
        return cls(x)

    @property
    def size(self) -> int:
        return len(self.sorted_values)

    def quantile(self, p: float) -> float:
        return quantile(self, p)

    def fit_gamma(self) -> GammaFit:
        """Method-of-moments gamma fit of the (positive) values."""
        return fit_gamma(self.sorted_values[self.sorted_values > 0])


def quantile(dist: EmpiricalDistribution, p: float) -> float:
    """
    Value at the ``ceil(p * B)``-th order statistic (1-based), the minimum for ``p=0``.
    """
    return order_quantile(dist.sorted_values, p)


@dataclass
class BootstrapPlan:
    """
    Settings of a bootstrap run.

    ``depth=None`` uses the classical sample mean and covariance. If ``cutvalue`` is not
    given, it is estimated from the Phase-I subgroups with ``trim_fraction``.
    ``lam`` is only used by :func:`bootstrap_psi`.
    """
    B: int = bootstrap_resamples_default
    seed: Optional[int] = None
    depth: Optional[str] = "spatial"
    cutvalue: Optional[float] = None
    trim_fraction: float = trim_fraction_default
    # standardized Oja depth
    standardize: bool = False
    lam: Optional[float] = None
    z_dispersion_factor: ZDispersionFactor = "resampled"
    phase1_subgroups: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.B, bool) or int(self.B) != self.B or self.B < 1:
            raise ValueError(f"B must be a positive integer. Got {self.B!r}.")
        self.B = int(self.B)
        if self.depth is not None:
            self.depth = get_depth_kind(self.depth)
        if self.cutvalue is not None and not 0 <= self.cutvalue <= 1:
            raise ValueError(f"The cutvalue must be in [0, 1]. Got {self.cutvalue!r}.")
        if self.z_dispersion_factor not in ("resampled", "steady_state"):
            raise ValueError("z_dispersion_factor must be 'resampled' or "
                             f"'steady_state'. Got {self.z_dispersion_factor!r}.")


class BootstrapResult(NamedTuple):
    """
    Bootstrap output: the sorted statistic values, the center and dispersion they were
    computed against, the grand (trimmed) mean of the resamples, and the cutvalue used
    (``None`` for the classical estimators).
    """
    distribution: EmpiricalDistribution
    center: np.ndarray
    dispersion: np.ndarray
    grand_mean: np.ndarray
    cutvalue: Optional[float]


def subgroup_estimates(phase1, plan: BootstrapPlan) -> tuple:
    """
    Per-subgroup estimates of the Phase-I data, and the cutvalue used.
    """
    x = np.asarray(phase1, dtype=float)
    if x.ndim == 2:
        x = x[..., None]
    if x.ndim != 3:
        raise ValueError("Phase-I data must be a list of equally-sized subgroups.")
    if len(x) < 2:
        raise ValueError(f"Need at least 2 Phase-I subgroups. Got {len(x)}.")
    if plan.phase1_subgroups is not None and len(x) != plan.phase1_subgroups:
        raise ValueError(f"Expected {plan.phase1_subgroups} Phase-I subgroups. "
                         f"Got {len(x)}.")
    if plan.depth is None:
        return classical_block(x), None
    depth_values = subgroup_depths(x, plan.depth, standardize=plan.standardize)
    cut = plan.cutvalue
    if cut is None:
        cut = estimate_cutvalue(x, plan.depth, plan.trim_fraction,
                                depth_values=depth_values)
        log.debug("Estimated %s-depth cutvalue: %g", plan.depth, cut)
    return trim_and_winsorize_block(x, plan.depth, cut, depth_values), cut


def draw_resamples(valid: np.ndarray, B: int, random_state: np.random.Generator
                   ) -> np.ndarray:
    """
    Draws ``B`` subgroup indices with replacement, redrawing those of invalid subgroups.
    """
    k = len(valid)
    if not np.any(valid):
        raise AllTrimmedError(
            log, "Every Phase-I subgroup has all its points trimmed. "
                 "Lower the cutvalue.")
    indices = random_state.integers(k, size=B)
    budget = resample_retry_factor * B
    redraws = 0
    while np.any(bad := ~valid[indices]):
        redraws += int(bad.sum())
        if redraws > budget:
            raise ResampleExhaustedError(
                log, "Exceeded %d redraws of resampled subgroups with all points "
                     "trimmed. Lower the cutvalue.", budget)
        indices[bad] = random_state.integers(k, size=int(bad.sum()))
    if redraws:
        log.debug("Redrew %d resampled subgroups with all points trimmed.", redraws)
    return indices


def _resample(phase1, plan: BootstrapPlan, random_state, indices):
    estimates, cut = subgroup_estimates(phase1, plan)
    if indices is None:
        if random_state is None:
            random_state = np.random.default_rng(plan.seed)
        indices = draw_resamples(estimates.valid, plan.B, random_state)
    else:
        indices = np.asarray(indices, dtype=int)
        if not np.all(estimates.valid[indices]):
            raise AllTrimmedError(
                log, "The given resample includes subgroups with all points trimmed.")
    means = estimates.means[indices]
    mean_dispersion = estimates.dispersions[indices].mean(axis=0)
    return means, mean_dispersion, cut


def bootstrap_tau(phase1, plan: BootstrapPlan,
                  random_state: Optional[np.random.Generator] = None,
                  indices=None) -> BootstrapResult:
    """
    Bootstrap distribution of the (trimmed) Hotelling statistic.

    Uses ``random_state`` if given, otherwise a generator seeded with ``plan.seed``.
    An explicit array of Phase-I subgroup ``indices`` replaces the random resample.
    """
    means, mean_dispersion, cut = _resample(phase1, plan, random_state, indices)
    grand_mean = means.mean(axis=0)
    values = quadratic_forms(means - grand_mean, mean_dispersion)
    return BootstrapResult(EmpiricalDistribution.from_values(values), grand_mean,
                           mean_dispersion, grand_mean, cut)


def z_dispersion_factor(lam: float, mode: ZDispersionFactor = "resampled") -> float:
    if mode == "steady_state":
        return lam / (2 - lam)
    return lam / (1 - lam)


def ewma_path(values, lam: float, start) -> np.ndarray:
    """
    EWMA recursion :math:`Z_i = \\lambda x_i + (1-\\lambda) Z_{i-1}`, along the first axis,
    with :math:`Z_0` = ``start``.
    """
    x = np.asarray(values, dtype=float)
    zi = (1 - lam) * np.asarray(start, dtype=float)[None]
    path, _ = signal.lfilter([lam], [1, -(1 - lam)], x, axis=0, zi=zi)
    return path


def bootstrap_psi(phase1, plan: BootstrapPlan,
                  random_state: Optional[np.random.Generator] = None,
                  indices=None) -> BootstrapResult:
    """
    Bootstrap distribution of the (trimmed) MEWMA statistic, for ``0 < plan.lam < 1``.
    """
    lam = plan.lam
    if lam is None or not 0 < lam < 1:
        raise ValueError(f"The EWMA weight must be in (0, 1). Got {lam!r}.")
    means, mean_dispersion, cut = _resample(phase1, plan, random_state, indices)
    grand_mean = means.mean(axis=0)
    z = ewma_path(means, lam, grand_mean)
    z_mean = z.mean(axis=0)
    s_z = z_dispersion_factor(lam, plan.z_dispersion_factor) * mean_dispersion
    values = quadratic_forms(z - z_mean, s_z)
    return BootstrapResult(EmpiricalDistribution.from_values(values), z_mean, s_z,
                           grand_mean, cut)


__all__ = ["EmpiricalDistribution", "BootstrapPlan", "BootstrapResult",
           "ResampleExhaustedError", "bootstrap_tau", "bootstrap_psi", "quantile",
           "draw_resamples", "subgroup_estimates", "ewma_path", "z_dispersion_factor"]
