"""
.. module:: mv_robust

:Synopsis: Depth-trimmed mean vectors, winsorized dispersion matrices and quadratic forms
:Author: robustspc developers

A point of a subgroup is retained if its within-subgroup depth is strictly above the
cutvalue. The trimmed mean averages the retained points. For the winsorized dispersion,
every trimmed point is replaced by the single retained point of minimum depth, and the
sample covariance (divisor ``n-1``) of the resulting cloud is returned.

The block functions work on arrays of subgroups of shape ``(m, n, p)``; subgroups left
with no retained point are flagged instead of raising, so that callers can handle them
one by one.
"""

# Global
from typing import NamedTuple, Optional, Tuple
import numpy as np
from scipy import linalg

# Local
from robustspc.conventions import rcond_tolerance
from robustspc.depth import subgroup_depths
from robustspc.log import LoggedError, get_logger

log = get_logger(__name__)


class AllTrimmedError(LoggedError):
    """
    No point of a subgroup has depth above the cutvalue.
    """


class SingularDispersionError(LoggedError):
    """
    A dispersion matrix is numerically singular and cannot be inverted.
    """


class TrimmedMeanMV(NamedTuple):
    mean: np.ndarray
    retained_count: int
    trimmed_indices: Tuple[int, ...]


class TrimmedBlock(NamedTuple):
    """Estimates for a block of ``m`` subgroups."""
    means: np.ndarray  # (m, p)
    dispersions: np.ndarray  # (m, p, p)
    retained_counts: np.ndarray  # (m,)

    @property
    def valid(self) -> np.ndarray:
        return self.retained_counts > 0


def _as_subgroup(subgroup) -> np.ndarray:
    x = np.asarray(subgroup, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or len(x) < 2:
        raise ValueError(f"A subgroup must be an (n, p) array with n >= 2. "
                         f"Got shape {np.shape(subgroup)}.")
    return x


def _covariance(y: np.ndarray) -> np.ndarray:
    """Sample covariance (divisor n-1) of clouds of shape (..., n, p)."""
    centered = y - y.mean(axis=-2, keepdims=True)
    return np.einsum("...ni,...nj->...ij", centered, centered) / (y.shape[-2] - 1)


def trim_and_winsorize_block(block, kind: str, cut: float,
                             depth_values: Optional[np.ndarray] = None) -> TrimmedBlock:
    """
    Trimmed means and winsorized dispersions of a block of subgroups ``(m, n, p)``.

    Means and dispersions of subgroups with no retained point are ``nan``.
    """
    x = np.asarray(block, dtype=float)
    if depth_values is None:
        depth_values = subgroup_depths(x, kind)
    retained = depth_values > cut
    counts = retained.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = (np.where(retained[..., None], x, 0).sum(axis=-2) /
                 counts[..., None])
    # least deep retained point of each subgroup
    substitute = np.argmin(np.where(retained, depth_values, np.inf), axis=-1)
    substitutes = np.take_along_axis(x, substitute[..., None, None], axis=-2)
    winsorized = np.where(retained[..., None], x, substitutes)
    dispersions = _covariance(winsorized)
    means[counts == 0] = np.nan
    dispersions[counts == 0] = np.nan
    return TrimmedBlock(means, dispersions, counts)


def classical_block(block) -> TrimmedBlock:
    """Sample means and covariances of a block of subgroups ``(m, n, p)``."""
    x = np.asarray(block, dtype=float)
    return TrimmedBlock(x.mean(axis=-2), _covariance(x),
                        np.full(x.shape[:-2], x.shape[-2]))


def trim_and_winsorize(subgroup, kind: str, cut: float,
                       depth_values: Optional[np.ndarray] = None
                       ) -> Tuple[TrimmedMeanMV, np.ndarray]:
    """
    Depth-trimmed mean and winsorized dispersion of a subgroup, computing depths once.

    Raises :class:`AllTrimmedError` if no point has depth above ``cut``.
    """
    x = _as_subgroup(subgroup)
    if depth_values is None:
        depth_values = subgroup_depths(x, kind)
    result = trim_and_winsorize_block(x[None], kind, cut, depth_values[None])
    if not result.valid[0]:
        raise AllTrimmedError(
            log, "All %d points have depth <= cutvalue %g (max depth %g). "
                 "Lower the cutvalue.", len(x), cut, np.max(depth_values))
    trimmed = tuple(int(i) for i in np.flatnonzero(depth_values <= cut))
    return (TrimmedMeanMV(result.means[0], int(result.retained_counts[0]), trimmed),
            result.dispersions[0])


def mv_trimmed_mean(subgroup, kind: str, cut: float) -> TrimmedMeanMV:
    """
    Mean of the points with within-subgroup depth strictly above ``cut``.
    """
    return trim_and_winsorize(subgroup, kind, cut)[0]


def mv_winsorized_dispersion(subgroup, kind: str, cut: float) -> np.ndarray:
    """
    Covariance matrix of the subgroup after replacing trimmed points by the retained
    point of minimum depth.
    """
    return trim_and_winsorize(subgroup, kind, cut)[1]


def classical_mean_and_dispersion(subgroup) -> Tuple[np.ndarray, np.ndarray]:
    x = _as_subgroup(subgroup)
    result = classical_block(x[None])
    return result.means[0], result.dispersions[0]


def factor_dispersion(dispersion) -> Tuple[np.ndarray, bool]:
    """
    Cholesky factor of a dispersion matrix, checking its reciprocal condition number.

    Raises :class:`SingularDispersionError` if the matrix is numerically singular.
    """
    s = np.atleast_2d(np.asarray(dispersion, dtype=float))
    if s.shape[0] != s.shape[1] or not np.all(np.isfinite(s)):
        raise SingularDispersionError(
            log, "Dispersion must be a finite square matrix. Got %r.", s)
    s = (s + s.T) / 2
    eigenvalues = linalg.eigvalsh(s)
    if eigenvalues[-1] <= 0 or eigenvalues[0] / eigenvalues[-1] < rcond_tolerance:
        raise SingularDispersionError(
            log, "Dispersion matrix is numerically singular (eigenvalues %r).",
            eigenvalues.tolist())
    return linalg.cho_factor(s, lower=True)


def quadratic_forms(differences, dispersion) -> np.ndarray:
    """
    Values of :math:`d^T S^{-1} d` for every row ``d`` of ``differences`` ``(m, p)``.
    """
    d = np.atleast_2d(np.asarray(differences, dtype=float))
    factor = factor_dispersion(dispersion)
    solved = linalg.cho_solve(factor, d.T)
    return np.clip(np.sum(d.T * solved, axis=0), 0, None)


def quadratic_form(x, center, dispersion) -> float:
    diff = np.atleast_1d(np.asarray(x, dtype=float) - np.asarray(center, dtype=float))
    return float(quadratic_forms(diff[None], dispersion)[0])


def tau_squared(xbar_t, mu, s_w) -> float:
    """Robust Hotelling statistic of a trimmed mean against a winsorized dispersion."""
    return quadratic_form(xbar_t, mu, s_w)


def psi_squared(z_t, mu_z, s_zw) -> float:
    """Robust MEWMA statistic of a trimmed EWMA vector."""
    return quadratic_form(z_t, mu_z, s_zw)


def hotelling_t2(xbar, mu, s) -> float:
    """Classical Hotelling statistic."""
    return quadratic_form(xbar, mu, s)
