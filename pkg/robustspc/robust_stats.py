"""
.. module:: robust_stats

:Synopsis: Univariate robust estimators and distribution-fit diagnostics
:Author: robustspc developers

Trimmed mean, winsorized standard deviation and the standard error of the trimmed mean,
computed for a single sample or for a block of subgroups at once (``axis`` argument,
default: last axis).

The number of observations trimmed from each end of a sample of size :math:`n` is

.. math::

   t = \\lfloor n\\alpha + 0.4 \\rfloor,

with :math:`0 \\le \\alpha < 0.5`. The trimmed mean averages the :math:`n-2t` central
order statistics (``denominator_mode="retained_count"``, default), or divides their sum by
:math:`n(1-2\\alpha)` (``denominator_mode="nominal_fraction"``), which only preserves
constants when :math:`n\\alpha` is an integer.

Winsorization replaces the :math:`t` smallest (largest) observations by the smallest
(largest) retained one; the winsorized standard deviation :math:`s_w` uses divisor
:math:`n-1`, and the standard error of the trimmed mean is
:math:`s_w / ((1-2\\alpha)\\sqrt{n})`.

For :math:`\\alpha=0` all estimators reduce exactly to their classical counterparts.
"""

# Global
import math
from typing import NamedTuple, Union, Callable, Tuple
import numpy as np
from scipy import stats

# Local
from robustspc.log import LoggedError, get_logger
from robustspc.typing import DenominatorMode

log = get_logger(__name__)

_min_fit_size = 10
_min_qq_size = 10


class TrimmingError(LoggedError):
    """
    Invalid trimming request: proportion out of range, or nothing left after trimming.
    """


class FitError(LoggedError):
    """
    A distribution could not be fitted to the given values.
    """


class NormalFit(NamedTuple):
    """Moment fit of a normal distribution."""
    mean: float
    sd: float

    def ppf(self, p):
        # written explicitly so that sd=0 gives degenerate quantiles instead of nan
        return self.mean + self.sd * stats.norm.ppf(p)

    def cdf(self, x):
        return stats.norm.cdf(x, loc=self.mean, scale=self.sd)

    def frozen(self):
        return stats.norm(loc=self.mean, scale=self.sd)


class GammaFit(NamedTuple):
    """Method-of-moments fit of a gamma distribution."""
    shape: float
    scale: float

    def ppf(self, p):
        return stats.gamma.ppf(p, self.shape, scale=self.scale)

    def cdf(self, x):
        return stats.gamma.cdf(x, self.shape, scale=self.scale)

    def frozen(self):
        return stats.gamma(self.shape, scale=self.scale)


def check_alpha(alpha: float) -> float:
    if not 0 <= alpha < 0.5:
        raise TrimmingError(
            log, "The trimming proportion must be in [0, 0.5). Got %r.", alpha)
    return float(alpha)


def trim_count(n: int, alpha: float) -> int:
    """
    Number of order statistics trimmed from each end of a sample of size ``n``.

    Raises :class:`TrimmingError` if trimming would leave no observation.
    """
    alpha = check_alpha(alpha)
    if n < 2:
        raise TrimmingError(log, "Samples need at least 2 values. Got %r.", n)
    t = int(math.floor(n * alpha + 0.4))
    if n - 2 * t < 1:
        raise TrimmingError(
            log, "Trimming %d values from each end of a sample of size %d (alpha=%g) "
                 "would leave no observation.", t, n, alpha)
    return t


def _as_samples(sample, axis: int) -> np.ndarray:
    """Float array with the sample axis moved last; checks size and finiteness."""
    x = np.moveaxis(np.asarray(sample, dtype=float), axis, -1)
    if x.ndim == 0 or x.shape[-1] < 2:
        raise TrimmingError(log, "Samples need at least 2 values. Got shape %r.",
                            np.shape(sample))
    if not np.all(np.isfinite(x)):
        raise TrimmingError(log, "Samples must contain finite values only.")
    return x


def trimmed_mean(sample, alpha: float = 0.1,
                 denominator_mode: DenominatorMode = "retained_count",
                 axis: int = -1) -> Union[float, np.ndarray]:
    """
    Trimmed mean of ``sample`` along ``axis``.
    """
    x = _as_samples(sample, axis)
    n = x.shape[-1]
    t = trim_count(n, alpha)
    if denominator_mode not in ("retained_count", "nominal_fraction"):
        raise TrimmingError(
            log, "Unknown denominator mode %r. Use 'retained_count' or 'nominal_fraction'.",
            denominator_mode)
    if t == 0:
        retained = x
    else:
        retained = np.sort(x, axis=-1)[..., t:n - t]
    if denominator_mode == "retained_count":
        return retained.mean(axis=-1)
    return retained.sum(axis=-1) / (n * (1 - 2 * alpha))


def winsorize(sample, alpha: float = 0.1, axis: int = -1) -> np.ndarray:
    """
    Returns the sample, in its original order, with the ``t`` smallest (largest)
    order statistics replaced by the smallest (largest) retained one.
    """
    x = _as_samples(sample, axis)
    n = x.shape[-1]
    t = trim_count(n, alpha)
    if t == 0:
        return np.moveaxis(x.copy(), -1, axis)
    x_sorted = np.sort(x, axis=-1)
    lower = x_sorted[..., t:t + 1]
    upper = x_sorted[..., n - t - 1:n - t]
    return np.moveaxis(np.clip(x, lower, upper), -1, axis)


def winsorized_sd(sample, alpha: float = 0.1, axis: int = -1) -> Union[float, np.ndarray]:
    """
    Standard deviation (divisor ``n-1``) of the winsorized sample.
    """
    return np.std(winsorize(sample, alpha, axis=axis), axis=axis, ddof=1)


def trimmed_se(sample, alpha: float = 0.1, axis: int = -1) -> Union[float, np.ndarray]:
    """
    Standard error of the trimmed mean: :math:`s_w / ((1-2\\alpha)\\sqrt{n})`.
    """
    n = np.shape(sample)[axis]
    return winsorized_sd(sample, alpha, axis=axis) / ((1 - 2 * alpha) * np.sqrt(n))


def fit_normal(values) -> NormalFit:
    """
    Moment fit (mean, sample standard deviation) of a normal distribution.
    """
    x = np.asarray(values, dtype=float).ravel()
    if len(x) < 2 or not np.all(np.isfinite(x)):
        raise FitError(log, "Need at least 2 finite values to fit a normal distribution.")
    return NormalFit(float(np.mean(x)), float(np.std(x, ddof=1)))


def fit_gamma(values) -> GammaFit:
    """
    Method-of-moments fit of a gamma distribution: ``shape = mean^2/variance``,
    ``scale = variance/mean``, with the sample variance (divisor ``n-1``).
    """
    x = np.asarray(values, dtype=float).ravel()
    if len(x) < _min_fit_size:
        raise FitError(log, "Need at least %d values to fit a gamma distribution. "
                            "Got %d.", _min_fit_size, len(x))
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise FitError(log, "Gamma fits need finite, positive values.")
    mean = np.mean(x)
    variance = np.var(x, ddof=1)
    if variance <= 0:
        raise FitError(log, "Cannot fit a gamma distribution: zero variance.")
    return GammaFit(float(mean ** 2 / variance), float(variance / mean))


def order_quantile(values, p: float) -> float:
    """
    Order-statistic quantile: the ``ceil(p*m)``-th smallest of ``m`` values (1-based),
    and the minimum for ``p=0``.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    if not len(x):
        raise ValueError("Cannot take the quantile of an empty sample.")
    if not 0 <= p <= 1:
        raise ValueError(f"Quantile probability must be in [0, 1]. Got {p}.")
    # rounding guards against e.g. 0.9 * 100 = 90.00000000000001
    k = max(1, math.ceil(round(p * len(x), 9)))
    return float(x[k - 1])


def qq_points(values, reference: Union[str, GammaFit] = "normal",
              standardize: bool = True) -> np.ndarray:
    """
    QQ-plot points ``(theoretical quantile, sample quantile)`` as an ``(m, 2)`` array,
    using plotting positions ``(i - 0.5) / m``.

    ``reference`` is ``"normal"`` or a :class:`GammaFit`. For the normal reference, the
    sample is standardized with its fitted moments unless ``standardize=False``.
    """
    x = np.sort(np.asarray(values, dtype=float).ravel())
    m = len(x)
    if m < _min_qq_size:
        raise FitError(log, "Need at least %d values for a QQ plot. Got %d.",
                       _min_qq_size, m)
    probs = (np.arange(1, m + 1) - 0.5) / m
    if isinstance(reference, GammaFit):
        return np.column_stack([reference.ppf(probs), x])
    if str(reference).lower() != "normal":
        raise FitError(log, "Unknown QQ reference %r: use 'normal' or a GammaFit.",
                       reference)
    if standardize:
        fit = fit_normal(x)
        if fit.sd > 0:
            x = (x - fit.mean) / fit.sd
    return np.column_stack([stats.norm.ppf(probs), x])


def truncated_ks(values, dist, lower: float = 0.05, upper: float = 0.95
                 ) -> Tuple[float, float]:
    """
    Kolmogorov-Smirnov test of the central part of a sample.

    Keeps the values between the ``lower`` and ``upper`` quantiles of the reference
    distribution ``dist`` (a frozen scipy distribution, or any object with ``cdf`` and
    ``ppf`` methods) and tests them against the reference truncated to that range.

    :return: (statistic, p-value)
    """
    if not 0 <= lower < upper <= 1:
        raise ValueError(f"Need 0 <= lower < upper <= 1. Got {lower}, {upper}.")
    x = np.asarray(values, dtype=float).ravel()
    a, b = dist.ppf(lower), dist.ppf(upper)
    kept = x[(x >= a) & (x <= b)]
    if len(kept) < _min_qq_size:
        raise FitError(log, "Too few values (%d) in the central range of the reference.",
                       len(kept))
    cdf_a, cdf_b = dist.cdf(a), dist.cdf(b)
    truncated_cdf: Callable = lambda y: (dist.cdf(y) - cdf_a) / (cdf_b - cdf_a)
    result = stats.kstest(kept, truncated_cdf)
    return float(result.statistic), float(result.pvalue)
