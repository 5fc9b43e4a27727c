"""
.. module:: depth

:Synopsis: Data-depth functions and depth cutvalue estimation
:Author: robustspc developers

Four depths, all normalized into :math:`[0, 1]`:

- ``spatial`` (L1): :math:`1 - \\lVert \\frac{1}{n}\\sum_{y \\ne x}
  \\frac{x-y}{\\lVert x-y \\rVert} \\rVert`, coincident points contributing zero.
- ``tukey`` (halfspace): smallest fraction of the cloud in a closed halfplane containing
  :math:`x`. Exact, for dimension 1 and 2.
- ``simplicial`` (Liu): fraction of the closed triangles with vertices in the cloud that
  contain :math:`x`. Dimension 2 only.
- ``oja``: :math:`1 / (1 + \\bar{V}(x))`, with :math:`\\bar{V}` the mean volume of the
  simplices formed by :math:`x` and every :math:`p`-subset of the cloud. Dimension 1 and 2.

Clouds are arrays of shape ``(n, p)`` (a 1d array is taken as ``n`` scalar observations).
:func:`subgroup_depths` also accepts blocks of clouds of shape ``(..., n, p)``.
"""

# Global
from itertools import combinations
from typing import Optional
import numpy as np

# Local
from robustspc.conventions import depth_kinds
from robustspc.log import LoggedError, get_logger
from robustspc.tools import fuzzy_match

log = get_logger(__name__)

# Angles closer than this are the same critical direction (Tukey depth)
_angle_tolerance = 1e-12


class DepthError(LoggedError):
    """
    Unsupported depth computation: unknown kind, dimension or too small a cloud.
    """


def get_depth_kind(kind: str) -> str:
    """
    Returns the canonical (lowercase) name of a depth kind, or raises
    :class:`DepthError` with suggestions.
    """
    name = str(kind).lower()
    if name not in depth_kinds:
        suggestions = fuzzy_match(name, depth_kinds, n=2)
        raise DepthError(
            log, "Unknown depth kind %r. %sKnown kinds: %r.", kind,
            ("Did you mean %s? " % " or ".join(repr(s) for s in suggestions)
             if suggestions else ""), list(depth_kinds))
    return name


def _as_cloud(cloud) -> np.ndarray:
    c = np.asarray(cloud, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.ndim != 2 or not len(c):
        raise DepthError(log, "A point cloud must be a nonempty (n, p) array. "
                              "Got shape %r.", np.shape(cloud))
    if not np.all(np.isfinite(c)):
        raise DepthError(log, "Point clouds must have finite coordinates.")
    return c


def _as_points(points, p: int) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if p == 1 and x.ndim <= 1:
        x = x.reshape(-1, 1)
    x = np.atleast_2d(x)
    if x.shape[-1] != p:
        raise DepthError(log, "Points of dimension %d do not match a cloud of "
                              "dimension %d.", x.shape[-1], p)
    return x


def _check_dimension(kind: str, p: int, allowed):
    if p not in allowed:
        raise DepthError(log, "The %s depth is only implemented for dimension %s. "
                              "Got %d.", kind, " or ".join(map(str, allowed)), p)


def _orient(a, b, c):
    """Twice the signed area of the triangle (a, b, c), on the last axis."""
    return ((b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) -
            (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0]))


# Batched kernels: points (..., m, p), clouds (..., n, p) -> (..., m) ####################

def _spatial(points, clouds):
    diffs = points[..., :, None, :] - clouds[..., None, :, :]
    norms = np.linalg.norm(diffs, axis=-1)
    safe = np.where(norms > 0, norms, 1)
    units = np.where((norms > 0)[..., None], diffs / safe[..., None], 0)
    mean_unit = units.sum(axis=-2) / clouds.shape[-2]
    return np.clip(1 - np.linalg.norm(mean_unit, axis=-1), 0, 1)


def _oja(points, clouds, standardize=False):
    p = clouds.shape[-1]
    if p == 1:
        volumes = np.abs(points[..., :, None, 0] - clouds[..., None, :, 0])
    else:
        first, second = (np.array(i) for i in zip(*combinations(
            range(clouds.shape[-2]), 2)))
        a = clouds[..., None, first, :]
        b = clouds[..., None, second, :]
        volumes = np.abs(_orient(a, b, points[..., :, None, :])) / 2
    mean_volume = volumes.mean(axis=-1)
    if standardize:
        centered = clouds - clouds.mean(axis=-2, keepdims=True)
        cov = np.einsum("...ni,...nj->...ij", centered, centered) / max(
            clouds.shape[-2] - 1, 1)
        scale = np.sqrt(np.abs(np.linalg.det(cov)))
        mean_volume = np.where(scale[..., None] > 0,
                               mean_volume / np.where(scale > 0, scale, 1)[..., None],
                               mean_volume)
    return 1 / (1 + mean_volume)


def _simplicial_single(points, cloud):
    n = len(cloud)
    triangles = np.array(list(combinations(range(n), 3)))
    a, b, c = (cloud[triangles[:, i]][None] for i in range(3))
    x = points[:, None, :]
    d1, d2, d3 = _orient(a, b, x), _orient(b, c, x), _orient(c, a, x)
    has_neg = (d1 < 0) | (d2 < 0) | (d3 < 0)
    has_pos = (d1 > 0) | (d2 > 0) | (d3 > 0)
    # collinear vertices: x must lie on the degenerate segment
    degenerate = _orient(a, b, c) == 0
    vertices = np.stack([a, b, c])
    in_box = np.all((x >= vertices.min(axis=0)) & (x <= vertices.max(axis=0)), axis=-1)
    contained = ~(has_neg & has_pos) & (~degenerate | in_box)
    return contained.mean(axis=-1)


def _tukey_single(points, cloud):
    n = len(cloud)
    result = np.empty(len(points))
    if cloud.shape[-1] == 1:
        for i, x in enumerate(points[:, 0]):
            result[i] = min(np.sum(cloud[:, 0] <= x), np.sum(cloud[:, 0] >= x)) / n
        return result
    for i, x in enumerate(points):
        diffs = cloud - x
        coincident = np.all(diffs == 0, axis=-1)
        others = diffs[~coincident]
        if not len(others):
            result[i] = 1.
            continue
        # the count only changes at directions normal to some (y - x)
        angles = np.arctan2(others[:, 1], others[:, 0])
        critical = np.sort(np.mod(np.concatenate(
            [angles + np.pi / 2, angles - np.pi / 2]), 2 * np.pi))
        gaps = np.diff(np.append(critical, critical[0] + 2 * np.pi))
        keep = gaps > _angle_tolerance
        middle = critical[keep] + gaps[keep] / 2
        directions = np.column_stack([np.cos(middle), np.sin(middle)])
        counts = np.sum(others @ directions.T > 0, axis=0)
        result[i] = (np.sum(coincident) + counts.min()) / n
    return result


def _batched(kernel, points, clouds):
    lead = clouds.shape[:-2]
    out = np.empty(lead + points.shape[-2:-1])
    for index in np.ndindex(*lead):
        out[index] = kernel(points[index], clouds[index])
    return out


# Public interface ######################################################################

def spatial_depth(x, cloud) -> float:
    c = _as_cloud(cloud)
    return float(_spatial(_as_points(x, c.shape[1]), c)[0])


def tukey_depth(x, cloud) -> float:
    c = _as_cloud(cloud)
    _check_dimension("tukey", c.shape[1], (1, 2))
    return float(_tukey_single(_as_points(x, c.shape[1]), c)[0])


def simplicial_depth(x, cloud) -> float:
    c = _as_cloud(cloud)
    _check_dimension("simplicial", c.shape[1], (2,))
    if len(c) < 3:
        raise DepthError(log, "The simplicial depth needs at least 3 points. Got %d.",
                         len(c))
    return float(_simplicial_single(_as_points(x, 2), c)[0])


def oja_depth(x, cloud, standardize: bool = False) -> float:
    """
    Oja depth. With ``standardize=True`` the mean volume is divided by the square root of
    the determinant of the cloud's sample covariance, which makes it affine invariant.
    """
    c = _as_cloud(cloud)
    _check_dimension("oja", c.shape[1], (1, 2))
    if len(c) < c.shape[1]:
        raise DepthError(log, "The oja depth needs at least %d points. Got %d.",
                         c.shape[1], len(c))
    return float(_oja(_as_points(x, c.shape[1]), c, standardize)[0])


_single_point = {"spatial": spatial_depth, "tukey": tukey_depth,
                 "simplicial": simplicial_depth, "oja": oja_depth}


def depth(kind: str, x, cloud, **kwargs) -> float:
    """
    Depth of the point ``x`` with respect to ``cloud``, with the given kind of depth.
    """
    return _single_point[get_depth_kind(kind)](x, cloud, **kwargs)


def depths(kind: str, points, cloud, **kwargs) -> np.ndarray:
    """
    Depths of every point in ``points`` (shape ``(m, p)``) with respect to ``cloud``.
    """
    c = _as_cloud(cloud)
    return subgroup_depths(c, kind, points=_as_points(points, c.shape[1]), **kwargs)


def subgroup_depths(clouds, kind: str, points: Optional[np.ndarray] = None,
                    standardize: bool = False) -> np.ndarray:
    """
    Within-subgroup depths: the depth of every point of a cloud with respect to that same
    cloud. Accepts a single cloud ``(n, p)`` or a block of clouds ``(..., n, p)``, and
    returns depths of shape ``(n,)`` or ``(..., n)``.

    If ``points`` is given (same leading shape as ``clouds``), returns their depths
    instead.
    """
    kind = get_depth_kind(kind)
    c = np.asarray(clouds, dtype=float)
    if c.ndim == 1:
        c = c[:, None]
    if c.ndim < 2 or not c.shape[-2]:
        raise DepthError(log, "Empty point cloud.")
    if not np.all(np.isfinite(c)):
        raise DepthError(log, "Point clouds must have finite coordinates.")
    x = c if points is None else np.asarray(points, dtype=float)
    p, n = c.shape[-1], c.shape[-2]
    if kind == "spatial":
        return _spatial(x, c)
    if kind == "oja":
        _check_dimension(kind, p, (1, 2))
        if n < p:
            raise DepthError(log, "The oja depth needs at least %d points. Got %d.", p, n)
        return _oja(x, c, standardize)
    if kind == "simplicial":
        _check_dimension(kind, p, (2,))
        if n < 3:
            raise DepthError(
                log, "The simplicial depth needs at least 3 points. Got %d.", n)
        return _batched(_simplicial_single, x, c)
    _check_dimension(kind, p, (1, 2))
    return _batched(_tukey_single, x, c)


def estimate_cutvalue(subgroups, kind: str, trim_fraction: float = 0.1,
                      depth_values: Optional[np.ndarray] = None) -> float:
    """
    Estimates the depth cutvalue from in-control subgroups.

    The within-subgroup depths of all points are pooled, and the cutvalue is the largest
    pooled depth ``v`` whose empirical CDF satisfies ``F(v) <= trim_fraction``, or 0 if
    there is none (then no point is trimmed). Points with depth not above the cutvalue
    are trimmed, so about ``trim_fraction`` of in-control points are.

    Precomputed within-subgroup depths can be passed as ``depth_values``.
    """
    if not 0 < trim_fraction < 0.5:
        raise DepthError(log, "The trimming fraction must be in (0, 0.5). Got %r.",
                         trim_fraction)
    if len(subgroups) < 10:
        log.warning("Estimating the cutvalue from %d subgroups (fewer than 10): "
                    "it may be unreliable.", len(subgroups))
    if depth_values is None:
        depth_values = subgroup_depths(subgroups, kind)
    pooled = np.sort(np.asarray(depth_values, dtype=float).ravel())
    ecdf_counts = np.searchsorted(pooled, pooled, side="right")
    below = pooled[ecdf_counts <= trim_fraction * len(pooled) + 1e-9]
    return float(below.max()) if len(below) else 0.
