"""
Nonparametric distribution estimators under right censoring.

* :func:`kaplan_meier` -- product-limit marginal CDFs.
* :func:`beran_conditional` -- kernel-weighted product-limit estimate of the
  conditional CDF of one margin given an uncensored value of the other.
* :func:`akritas_joint` -- joint CDF as a weighted combination of the two
  "conditional times marginal" integrals, each integral realized exactly as a
  sum over the Kaplan-Meier jump points of the conditioning margin.
* :func:`avk_joint_single` -- the single-censoring special case that averages
  conditionals over the fully observed margin.
* :func:`ecdf_bivariate` -- complete-data baseline.

Joint estimates live on the product grid of the distinct observed values of
each margin. Masses are stored as a dense matrix.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .data import Sample

__all__ = [
    "StepFunction",
    "KernelShape",
    "KernelSpec",
    "default_bandwidth",
    "kaplan_meier",
    "beran_conditional",
    "beran_matrix",
    "JointDistributionEstimate",
    "akritas_joint",
    "avk_joint_single",
    "ecdf_bivariate",
    "EstimatorWarning",
]


class EstimatorWarning(UserWarning):
    """A distribution estimate is degenerate (e.g. a fully censored margin)."""


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous nondecreasing step function, 0 before the first jump."""

    jump_points: np.ndarray
    values: np.ndarray
    degenerate: bool = False

    def __post_init__(self):
        jp = np.asarray(self.jump_points, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if jp.shape != v.shape or jp.ndim != 1:
            raise ValueError("jump_points and values must be 1-d of equal length")
        if np.any(np.diff(jp) <= 0):
            raise ValueError("jump points must be strictly increasing")
        object.__setattr__(self, "jump_points", jp)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(self.jump_points, x, side="right") - 1
        out = np.where(idx >= 0, self.values[np.maximum(idx, 0)] if len(self.values) else 0.0, 0.0)
        return float(out) if out.ndim == 0 else out

    @property
    def masses(self) -> np.ndarray:
        return np.diff(self.values, prepend=0.0)

    @property
    def total(self) -> float:
        return float(self.values[-1]) if len(self.values) else 0.0


def _product_limit(y: np.ndarray, d: np.ndarray):
    """Kaplan-Meier CDF at the distinct event times.

    Runs of event times with no censored value in between telescope, so within
    a run ``S = P * r_after / r_start`` and ``F = (r_start - P r_after) / r_start``.
    For complete data this is ``count / n`` evaluated with a single rounding,
    i.e. bit-identical to the empirical CDF.
    """
    times, inv = np.unique(y, return_inverse=True)
    d = d.astype(bool)
    deaths = np.bincount(inv, weights=d, minlength=len(times))
    total = np.bincount(inv, minlength=len(times)).astype(float)
    cens = total - deaths
    at_risk = len(y) - np.concatenate(([0.0], np.cumsum(total)[:-1]))
    after = at_risk - deaths
    # a new run starts after every time carrying censored values
    block = np.concatenate(([0], np.cumsum(cens > 0)[:-1]))
    first = np.concatenate(([True], block[1:] != block[:-1]))
    start_r = at_risk[first]
    last = np.concatenate((first[1:], [True]))
    ratio = after[last] / start_r
    prefix = np.concatenate(([1.0], np.cumprod(ratio)[:-1]))
    P = prefix[block]
    rs = start_r[block]
    F = (rs - P * after) / rs
    ev = deaths > 0
    return times[ev], F[ev]


def kaplan_meier(sample: Sample, margin: int = 1, rescale: bool = False) -> StepFunction:
    """Product-limit estimate of the CDF of margin ``margin``.

    Parameters
    ----------
    rescale : bool
        Multiply all values by ``n / (n + 1)`` (keeps pseudo-observations
        strictly inside the unit interval).

    Notes
    -----
    If the largest value is censored the estimate stays below one. A margin
    without any uncensored value yields the zero function with
    ``degenerate=True``.
    """
    y, d = sample.y(margin), sample.delta(margin)
    jp, vals = _product_limit(y, d)
    if rescale:
        n = len(y)
        vals = vals * (n / (n + 1.0))
    degenerate = len(jp) == 0
    if degenerate:
        warnings.warn(f"margin {margin} is fully censored", EstimatorWarning, stacklevel=2)
    return StepFunction(jp, vals, degenerate)


# -- kernels -----------------------------------------------------------------


class KernelShape(str, enum.Enum):
    EPANECHNIKOV = "epanechnikov"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


def default_bandwidth(values: np.ndarray, c: float = 1.0) -> float:
    """``c * sigma * n^(-1/5)`` with ``sigma = min(sd, IQR / 1.349)``."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n < 2:
        return 1.0
    sd = float(np.std(v, ddof=1))
    q75, q25 = np.percentile(v, [75, 25])
    iqr = (q75 - q25) / 1.349
    scale = min(sd, iqr) if iqr > 0 else sd
    if not scale > 0:
        scale = abs(float(v[0])) or 1.0
    return c * scale * n ** (-0.2)


@dataclass(frozen=True)
class KernelSpec:
    """Kernel shape and bandwidth.

    ``bandwidth=None`` picks :func:`default_bandwidth` (scaled by
    ``bandwidth_factor``) separately for each conditioning margin.
    """

    shape: KernelShape = KernelShape.EPANECHNIKOV
    bandwidth: float | None = None
    bandwidth_factor: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "shape", KernelShape(self.shape))
        if self.bandwidth is not None and not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise ValueError("bandwidth must be a positive finite number")
        if not self.bandwidth_factor > 0:
            raise ValueError("bandwidth_factor must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape is KernelShape.EPANECHNIKOV:
            return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)
        if self.shape is KernelShape.UNIFORM:
            return np.where(np.abs(x) <= 1.0, 0.5, 0.0)
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def resolve(self, conditioning_values: np.ndarray) -> float:
        if self.bandwidth is not None:
            return float(self.bandwidth)
        return default_bandwidth(conditioning_values, self.bandwidth_factor)


DEFAULT_KERNEL = KernelSpec()


# -- Beran --------------------------------------------------------------------------


def beran_matrix(
    y_target: np.ndarray,
    d_target: np.ndarray,
    y_cond: np.ndarray,
    d_cond: np.ndarray,
    given: np.ndarray,
    kernel: KernelSpec,
    h: float,
):
    """Conditional CDFs at every distinct target value, one row per ``given``.

    Returns
    -------
    grid : ndarray (m,)
        Distinct target values, sorted.
    F : ndarray (len(given), m)
        ``F[k, a]`` is the conditional CDF at ``grid[a]`` given ``given[k]``.
    degenerate : ndarray of bool (len(given),)
        Rows whose kernel weights all vanish (returned as zero rows).
    """
    grid, inv = np.unique(y_target, return_inverse=True)
    m = len(grid)
    given = np.atleast_1d(np.asarray(given, dtype=float))
    W = kernel((given[:, None] - y_cond[None, :]) / h) * (d_cond[None, :] != 0)
    # group the weights by distinct target value
    order = np.argsort(inv, kind="stable")
    starts = np.searchsorted(inv[order], np.arange(m))
    Wo = W[:, order]
    events_o = Wo * (d_target[order] != 0)[None, :]
    A = np.add.reduceat(Wo, starts, axis=1) if Wo.shape[1] else np.zeros((len(given), m))
    E = np.add.reduceat(events_o, starts, axis=1) if Wo.shape[1] else np.zeros((len(given), m))
    R = np.cumsum(A[:, ::-1], axis=1)[:, ::-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        factor = np.where(R > 0, 1.0 - E / np.where(R > 0, R, 1.0), 1.0)
    S = np.cumprod(np.clip(factor, 0.0, 1.0), axis=1)
    F = 1.0 - S
    degenerate = ~(W.sum(axis=1) > 0)
    F[degenerate] = 0.0
    return grid, F, degenerate


def beran_conditional(
    sample: Sample,
    target_margin: int,
    y: float,
    given: float,
    kernel: KernelSpec = DEFAULT_KERNEL,
) -> float:
    """Kernel-weighted product-limit estimate ``F(y | given)``.

    The weight of observation ``i`` is ``k((given - Y_i^c) / h)`` for
    uncensored conditioning values ``Y_i^c`` and zero otherwise; normalization
    cancels in the product so it is omitted.

    Raises
    ------
    ValueError
        If ``given`` is not an uncensored value of the conditioning margin.
    """
    if target_margin not in (1, 2):
        raise ValueError("target_margin must be 1 or 2")
    cond = 3 - target_margin
    yc, dc = sample.y(cond), sample.delta(cond)
    if not np.any((yc == given) & (dc == 1)):
        raise ValueError("conditioning point must be an uncensored observed value of the other margin")
    h = kernel.resolve(yc)
    grid, F, degenerate = beran_matrix(
        sample.y(target_margin), sample.delta(target_margin), yc, dc, np.array([given]), kernel, h
    )
    if degenerate[0]:
        warnings.warn("all kernel weights vanish", EstimatorWarning, stacklevel=2)
        return 0.0
    idx = np.searchsorted(grid, y, side="right") - 1
    return float(F[0, idx]) if idx >= 0 else 0.0


# -- joint estimates --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class JointDistributionEstimate:
    """Joint CDF estimate on the grid ``x`` (margin 1) by ``y`` (margin 2).

    ``mass[a, b]`` is the point mass at ``(x[a], y[b])`` and ``F`` the
    cumulative sums, so ``F[a, b]`` equals the estimate at ``(x[a], y[b])``.
    """

    x: np.ndarray
    y: np.ndarray
    mass: np.ndarray
    method: str
    flags: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)
    F: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        F = np.cumsum(np.cumsum(self.mass, axis=0), axis=1)
        object.__setattr__(self, "F", F)

    @property
    def total_mass(self) -> float:
        return float(self.mass.sum())

    def cdf(self, y1, y2):
        """Evaluate the estimate at arbitrary points (0 left of the grid)."""
        a = np.searchsorted(self.x, np.asarray(y1, dtype=float), side="right") - 1
        b = np.searchsorted(self.y, np.asarray(y2, dtype=float), side="right") - 1
        ok = (a >= 0) & (b >= 0)
        out = np.where(ok, self.F[np.maximum(a, 0), np.maximum(b, 0)], 0.0)
        return float(out) if out.ndim == 0 else out

    def support(self):
        """Indices and masses of the positive cells: ``(a, b, p)``."""
        a, b = np.nonzero(self.mass > 0)
        return a, b, self.mass[a, b]

    def sup_distance(self, other: "JointDistributionEstimate") -> float:
        """Sup distance between two estimates over the union of both grids."""
        xs = np.union1d(self.x, other.x)
        ys = np.union1d(self.y, other.y)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return float(np.max(np.abs(self.cdf(X, Y) - other.cdf(X, Y))))


def _branch_masses(
    sample: Sample,
    target: int,
    kernel: KernelSpec,
    gx: np.ndarray,
    gy: np.ndarray,
    cond_masses: StepFunction,
) -> np.ndarray:
    """Masses of ``sum_k dF_cond(z_k) F_{target|cond}(. | z_k)`` on the grid.

    Returned with margin 1 along axis 0 regardless of ``target``.
    """
    cond = 3 - target
    yc, dc = sample.y(cond), sample.delta(cond)
    z = cond_masses.jump_points
    mz = cond_masses.masses
    out = np.zeros((len(gx), len(gy)))
    if len(z) == 0:
        return out
    h = kernel.resolve(yc)
    grid_t, Fc, _ = beran_matrix(sample.y(target), sample.delta(target), yc, dc, z, kernel, h)
    dF = np.diff(Fc, axis=1, prepend=0.0) * mz[:, None]  # (len(z), len(grid_t))
    if target == 1:
        out[:, np.searchsorted(gy, z)] = dF.T
    else:
        out[np.searchsorted(gx, z), :] = dF
    return out


def _repair(F: np.ndarray, total: float) -> np.ndarray:
    """Masses of the running-maximum rectified surface, negatives removed."""
    G = np.maximum.accumulate(np.maximum.accumulate(np.clip(F, 0.0, 1.0), axis=0), axis=1)
    M = np.diff(np.diff(G, axis=0, prepend=0.0), axis=1, prepend=0.0)
    neg = M < 0
    if neg.any():
        M[neg] = 0.0
        s = M.sum()
        if s > 0:
            M *= total / s
    return M


def akritas_joint(
    sample: Sample,
    kernel: KernelSpec = DEFAULT_KERNEL,
    w: float | Callable[[np.ndarray, np.ndarray], np.ndarray] = 0.5,
) -> JointDistributionEstimate:
    """Joint CDF estimate for arbitrarily right-censored pairs.

    ``F(y1, y2) = w * sum_{z <= y2} dF2(z) F_{1|2}(y1|z)
    + (1 - w) * sum_{z <= y1} dF1(z) F_{2|1}(y2|z)`` where ``dF_j`` are the
    Kaplan-Meier jumps and ``F_{.|.}`` Beran conditionals.

    Parameters
    ----------
    w : float in [0, 1] or callable
        Branch weight. A constant keeps all masses nonnegative. A callable
        ``w(Y1, Y2)`` evaluated on the meshgrid makes the surface a pointwise
        mixture, which is rectified by running maxima before extracting masses.

    Notes
    -----
    If one conditioning margin has no uncensored values its branch is empty;
    the other branch is then used alone and the estimate is flagged.
    """
    gx, gy = np.unique(sample.y1), np.unique(sample.y2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        km1, km2 = kaplan_meier(sample, 1), kaplan_meier(sample, 2)
    M1 = _branch_masses(sample, 1, kernel, gx, gy, km2)  # conditions on margin 2
    M2 = _branch_masses(sample, 2, kernel, gx, gy, km1)
    flags = []
    empty1, empty2 = km2.degenerate, km1.degenerate
    if empty1 and empty2:
        flags.append("both-margins-fully-censored")
        warnings.warn("both margins fully censored; joint estimate is zero", EstimatorWarning, stacklevel=2)
        return JointDistributionEstimate(gx, gy, np.zeros((len(gx), len(gy))), "akritas", tuple(flags))
    if callable(w):
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        wv = np.clip(np.asarray(w(X, Y), dtype=float), 0.0, 1.0)
        if empty1:
            wv = np.zeros_like(wv)
        if empty2:
            wv = np.ones_like(wv)
        F1 = np.cumsum(np.cumsum(M1, 0), 1)
        F2 = np.cumsum(np.cumsum(M2, 0), 1)
        F = wv * F1 + (1.0 - wv) * F2
        mass = _repair(F, float(F[-1, -1]))
        flags.append("monotone-repair")
        w_used = "callable"
    else:
        w_used = float(w)
        if not 0.0 <= w_used <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        if empty1:
            w_used = 0.0
        if empty2:
            w_used = 1.0
        mass = w_used * M1 + (1.0 - w_used) * M2
    if empty1 or empty2:
        flags.append(f"single-branch:margin{2 if empty1 else 1}-conditioning")
        warnings.warn("one margin fully censored; using the other branch only", EstimatorWarning, stacklevel=2)
    return JointDistributionEstimate(gx, gy, mass, "akritas", tuple(flags), {"w": w_used})


def avk_joint_single(sample: Sample, kernel: KernelSpec = DEFAULT_KERNEL) -> JointDistributionEstimate:
    """Single-censoring joint estimate: Beran conditionals averaged over the
    empirical distribution of the fully observed margin.

    The fully observed margin is margin 2 when margin 1 carries the censoring
    and margin 1 in the mirrored case.

    Raises
    ------
    ValueError
        On doubly censored data.
    """
    d1_all, d2_all = bool(sample.delta1.all()), bool(sample.delta2.all())
    if not (d1_all or d2_all):
        raise ValueError("avk_joint_single needs one fully observed margin; data are doubly censored")
    gx, gy = np.unique(sample.y1), np.unique(sample.y2)
    target = 1 if d2_all else 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        ecdf = kaplan_meier(sample, 3 - target)
    mass = _branch_masses(sample, target, kernel, gx, gy, ecdf)
    return JointDistributionEstimate(gx, gy, mass, "avk", (), {"target_margin": target})


def ecdf_bivariate(sample: Sample) -> JointDistributionEstimate:
    """Empirical joint CDF with mass ``1/n`` per observed pair.

    Raises
    ------
    ValueError
        If any component is censored.
    """
    if not (sample.delta1.all() and sample.delta2.all()):
        raise ValueError("ecdf_bivariate requires complete (uncensored) data")
    gx, ix = np.unique(sample.y1, return_inverse=True)
    gy, iy = np.unique(sample.y2, return_inverse=True)
    counts = np.zeros((len(gx), len(gy)))
    np.add.at(counts, (ix, iy), 1.0)
    return JointDistributionEstimate(gx, gy, counts / sample.n, "ecdf", (), {"counts": counts})
