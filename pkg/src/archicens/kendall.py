"""
Empirical Kendall distribution, tau and generator estimates.

Every Archimedean copula is characterized by its Kendall distribution
``K(v) = P[C(U1, U2) <= v] = v - phi(v) / phi'(v)``. The estimators here
work from any joint distribution estimate (so censoring is handled upstream)
or, for complete data, from pair counts.

Level convention
    An atom of mass ``p`` located at ``(y1, y2)`` is assigned the level
    ``V = F_<(y1, y2) / (1 - p)`` where ``F_<`` is the mass lying strictly
    below in both coordinates. For the empirical distribution with distinct
    pairs this is the classical pseudo-observation
    ``#{j : t_j < t_i} / (n - 1)``; the empirical route uses that count
    directly (also for duplicated pairs), so the joint route and the counting
    route agree exactly on complete data.
"""

from __future__ import annotations

import csv
import warnings
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .copulas import Copula, Family, as_generator, clipped_alpha
from .data import Sample
from .survival import JointDistributionEstimate

__all__ = [
    "EPS",
    "KendallCurve",
    "kendall_from_joint",
    "kendall_counting",
    "tau_hat",
    "GeneratorEstimate",
    "generator_estimate",
    "CurveTable",
    "graphical_curves",
    "kendall_on_grid",
]

EPS = 1e-6
_SINGULAR = 1e-10
_DEFICIT_POLICIES = ("renormalize", "atone")


@dataclass(frozen=True, eq=False)
class KendallCurve:
    """Step-function estimate of the Kendall distribution.

    Attributes
    ----------
    levels, level_mass : ndarray
        Sorted distinct levels in [0, 1] and the probability attached to each.
    nu_grid : ndarray
        Evaluation grid in ``[EPS, 1]``: the levels (those at or below
        ``EPS`` merged into ``EPS``) plus both endpoints.
    K_values, lambda_values : ndarray
        ``K`` on ``nu_grid`` and ``nu_grid - K_values``.
    source : str
        ``"counting"`` or ``"joint:<method>"``.
    raw_tau : float
        Tau before clamping to [-1, 1].
    """

    levels: np.ndarray
    level_mass: np.ndarray
    source: str
    flags: tuple[str, ...] = ()
    nu_grid: np.ndarray = field(init=False)
    K_values: np.ndarray = field(init=False)
    lambda_values: np.ndarray = field(init=False)
    raw_tau: float = field(init=False)
    tau_hat: float = field(init=False)

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        mass = np.asarray(self.level_mass, dtype=float)
        if levels.ndim != 1 or levels.shape != mass.shape or len(levels) == 0:
            raise ValueError("levels and level_mass must be nonempty 1-d arrays of equal length")
        if np.any(np.diff(levels) <= 0) or levels[0] < 0 or levels[-1] > 1:
            raise ValueError("levels must be strictly increasing within [0, 1]")
        if np.any(mass < 0):
            raise ValueError("level masses must be nonnegative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "level_mass", mass)
        grid = np.unique(np.concatenate(([EPS, 1.0], levels[levels > EPS])))
        object.__setattr__(self, "nu_grid", grid)
        K = self(grid)
        object.__setattr__(self, "K_values", K)
        object.__setattr__(self, "lambda_values", grid - K)
        raw = 3.0 - 4.0 * self.integral_K()
        object.__setattr__(self, "raw_tau", raw)
        object.__setattr__(self, "tau_hat", float(min(1.0, max(-1.0, raw))))

    def __call__(self, nu):
        """``K(nu)``: total mass of levels at or below ``nu`` (capped at 1)."""
        nu = np.asarray(nu, dtype=float)
        cum = np.minimum(np.cumsum(self.level_mass), 1.0)
        idx = np.searchsorted(self.levels, nu, side="right") - 1
        out = np.where(idx >= 0, cum[np.maximum(idx, 0)], 0.0)
        out = np.where(nu >= 1.0, 1.0, out)
        return float(out) if out.ndim == 0 else out

    def lam(self, nu):
        """``lambda(nu) = nu - K(nu)``."""
        return np.asarray(nu, dtype=float) - self(nu)

    @property
    def total_mass(self) -> float:
        return float(self.level_mass.sum())

    def _cells(self):
        """Breakpoints ``0 = b_0 < ... < b_m = 1`` and ``K`` on each ``[b_i, b_{i+1})``."""
        inner = self.levels[(self.levels > 0) & (self.levels < 1)]
        b = np.concatenate(([0.0], inner, [1.0]))
        return b, self(b[:-1])

    def integral_K(self) -> float:
        """Exact integral of the step function ``K`` over [0, 1]."""
        b, k = self._cells()
        return float(np.sum(k * np.diff(b)))

    def integral_lambda(self) -> float:
        """Exact integral of ``nu - K(nu)`` over [0, 1]."""
        b, k = self._cells()
        return float(np.sum(0.5 * (b[1:] ** 2 - b[:-1] ** 2) - k * np.diff(b)))

    @classmethod
    def from_function(cls, K: Callable[[np.ndarray], np.ndarray], grid: np.ndarray, source: str = "function"):
        """Step approximation of a continuous Kendall CDF (right endpoint values)."""
        g = np.unique(np.clip(np.asarray(grid, dtype=float), 0.0, 1.0))
        vals = np.maximum.accumulate(np.clip(K(g), 0.0, 1.0))
        mass = np.diff(vals, prepend=0.0)
        return cls(g, mass, source)


def _merge_levels(levels: np.ndarray, masses: np.ndarray):
    order = np.argsort(levels, kind="stable")
    lv, ms = levels[order], masses[order]
    uniq, start = np.unique(lv, return_index=True)
    return uniq, np.add.reduceat(ms, start)


def kendall_from_joint(joint: JointDistributionEstimate, deficit: str = "atone") -> KendallCurve:
    """Kendall distribution of a joint distribution estimate.

    Parameters
    ----------
    deficit : {"atone", "renormalize"}
        How to treat a total mass below one (censored tails that the
        product-limit estimators cannot allocate). ``"renormalize"`` rescales
        the joint estimate to a proper distribution before computing levels;
        ``"atone"`` keeps the masses and puts the missing probability at
        ``nu = 1``.

    Raises
    ------
    ValueError
        If the joint estimate carries no mass.
    """
    if deficit not in _DEFICIT_POLICIES:
        raise ValueError(f"deficit must be one of {_DEFICIT_POLICIES}")
    a, b, p = joint.support()
    total = float(p.sum())
    if not total > 0:
        raise ValueError("joint estimate has zero total mass")
    flags = []
    counts = joint.params.get("counts") if joint.method == "ecdf" else None
    if counts is not None:
        # exact integer route for the empirical distribution
        c = counts
        C = np.cumsum(np.cumsum(c, axis=0), axis=1)
        strict = np.zeros_like(C)
        strict[1:, 1:] = C[:-1, :-1]
        n = int(c.sum())
        ci = c[a, b]
        # the counting denominator n - 1 (not n - c) keeps duplicated pairs identical too
        V = strict[a, b] / (n - 1) if n > 1 else np.ones(len(ci))
        levels, cnt = _merge_levels(V, ci)
        return KendallCurve(levels, cnt / n, source="joint:ecdf")
    if total < 1.0 - 1e-12:
        flags.append(f"mass-deficit:{1.0 - total:.6g}")
    scale = total if deficit == "renormalize" else 1.0
    V = _levels(joint.F, a, b, p, scale)
    weights = p / scale
    if total < 1.0 - 1e-12 and deficit == "atone":
        V = np.append(V, 1.0)
        weights = np.append(weights, 1.0 - total)
    levels, lm = _merge_levels(V, weights)
    return KendallCurve(levels, lm, source=f"joint:{joint.method}", flags=tuple(flags))


def _levels(F: np.ndarray, a: np.ndarray, b: np.ndarray, p: np.ndarray, scale: float) -> np.ndarray:
    """``F(strictly below atom) / (scale - own mass)``, clipped to [0, 1]."""
    Fs = np.where((a > 0) & (b > 0), F[np.maximum(a - 1, 0), np.maximum(b - 1, 0)], 0.0)
    denom = scale - p
    # an atom carrying all the mass has level 1 (0/0 resolved by its CDF value)
    with np.errstate(invalid="ignore", divide="ignore"):
        V = np.where(denom > 1e-15, Fs / denom, 1.0)
    return np.clip(V, 0.0, 1.0)


def _strict_dominated_counts(t1: np.ndarray, t2: np.ndarray, chunk: int = 2048) -> np.ndarray:
    n = len(t1)
    out = np.empty(n, dtype=np.int64)
    for s in range(0, n, chunk):
        e = min(n, s + chunk)
        out[s:e] = np.count_nonzero((t1[None, :] < t1[s:e, None]) & (t2[None, :] < t2[s:e, None]), axis=1)
    return out


def kendall_counting(sample: Sample) -> KendallCurve:
    """Complete-data estimator from pairwise counts.

    ``nu_i = #{j : t1_j < t1_i and t2_j < t2_i} / (n - 1)`` and
    ``K(nu) = #{i : nu_i <= nu} / n``.
    """
    if not (sample.delta1.all() and sample.delta2.all()):
        raise ValueError("kendall_counting requires complete (uncensored) data")
    n = sample.n
    if n < 2:
        raise ValueError("kendall_counting needs at least two observations")
    k = _strict_dominated_counts(sample.y1, sample.y2)
    levels, cnt = np.unique(k, return_counts=True)
    return KendallCurve(levels / (n - 1), cnt / n, source="counting")


def tau_hat(curve: KendallCurve, via: str = "K") -> float:
    """Kendall's tau of a Kendall-distribution estimate, clamped to [-1, 1].

    ``via="K"`` uses ``3 - 4 * int K``; ``via="lambda"`` uses
    ``1 + 4 * int lambda``. The two are algebraically identical.
    """
    if via == "K":
        raw = 3.0 - 4.0 * curve.integral_K()
    elif via == "lambda":
        raw = 1.0 + 4.0 * curve.integral_lambda()
    else:
        raise ValueError("via must be 'K' or 'lambda'")
    if raw > 1.0 or raw < -1.0:
        warnings.warn(f"raw tau estimate {raw:.6g} outside [-1, 1]; clamped", RuntimeWarning, stacklevel=2)
    return float(min(1.0, max(-1.0, raw)))


def kendall_on_grid(copula: Copula, nu: np.ndarray) -> np.ndarray:
    """Parametric Kendall CDF on a grid, with ``K(0) = 0``."""
    nu = np.asarray(nu, dtype=float)
    out = np.zeros_like(nu)
    pos = nu > 0
    out[pos] = copula.kendall_cdf(np.minimum(nu[pos], 1.0))
    return out


# -- generator ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GeneratorEstimate:
    """Generator estimate, normalized so that ``phi(nu0) = 1``."""

    nu_grid: np.ndarray
    phi_values: np.ndarray
    nu0: float
    excluded_cells: int

    @property
    def log_phi(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.phi_values)

    def __call__(self, nu):
        return np.interp(nu, self.nu_grid, self.phi_values)


def generator_estimate(curve: KendallCurve, nu0: float = 0.5, nu: Sequence[float] | None = None) -> GeneratorEstimate:
    """Generator estimate ``exp(int_{nu0}^{nu} dt / (t - K(t)))``.

    ``K`` is constant on each cell between consecutive levels, so every cell
    contributes ``log|(b - k) / (a - k)|`` exactly. Cells where ``t - K(t)``
    vanishes or changes sign (distance below 1e-10 at an endpoint) are
    excluded, and log phi is interpolated across them using the slopes of the
    neighbouring cells.

    Parameters
    ----------
    nu : sequence, optional
        Output grid; defaults to the curve grid without the endpoint 1.

    Raises
    ------
    ValueError
        If every cell is singular (``t == K(t)`` throughout).
    """
    if not 0.0 < nu0 < 1.0:
        raise ValueError("nu0 must lie in (0, 1)")
    grid = np.asarray(curve.nu_grid[curve.nu_grid < 1.0] if nu is None else nu, dtype=float)
    if np.any((grid <= 0) | (grid >= 1)):
        raise ValueError("generator evaluation points must lie in (0, 1)")
    # cells over [EPS', 1) anchored at every level and requested point
    b = np.unique(np.concatenate((grid, [nu0], curve.levels[(curve.levels > 0) & (curve.levels < 1)])))
    b = b[(b > 0) & (b < 1)]
    k = curve(b[:-1])
    lo, hi = b[:-1] - k, b[1:] - k
    ok = (lo * hi > 0) & (np.abs(lo) > _SINGULAR) & (np.abs(hi) > _SINGULAR)
    if not ok.any():
        raise ValueError("degenerate Kendall curve: t - K(t) vanishes everywhere")
    inc = np.zeros(len(lo))
    with np.errstate(divide="ignore", invalid="ignore"):
        inc[ok] = np.log(hi[ok] / lo[ok])
    width = np.diff(b)
    if not ok.all():
        slope = np.where(ok, inc / width, np.nan)
        good = np.flatnonzero(ok)
        idx = np.arange(len(slope))
        # average slope of the nearest valid neighbours on each side
        prev = np.searchsorted(good, idx, side="left") - 1
        nxt = np.searchsorted(good, idx, side="right")
        sl = np.where(prev >= 0, slope[good[np.maximum(prev, 0)]], np.nan)
        sr = np.where(nxt < len(good), slope[good[np.minimum(nxt, len(good) - 1)]], np.nan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            fill = np.nanmean(np.vstack([sl, sr]), axis=0)
        inc[~ok] = np.nan_to_num(fill[~ok]) * width[~ok]
    L = np.concatenate(([0.0], np.cumsum(inc)))
    L0 = L[np.searchsorted(b, nu0)]
    logphi = L[np.searchsorted(b, grid)] - L0
    return GeneratorEstimate(grid, np.exp(logphi), float(nu0), int((~ok).sum()))


# -- graphical comparison ------------------------------------------------------------------


@dataclass
class CurveTable:
    """Aligned columns ``nu``, ``K_hat``, ``lambda_hat``, then ``<family>_K`` and
    ``<family>_lambda`` per candidate."""

    columns: dict[str, np.ndarray]
    alphas: dict[str, float]
    tau_hat: float
    notes: list[str] = field(default_factory=list)

    def to_csv(self, path: str | Path) -> None:
        names = list(self.columns)
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(names)
            for row in zip(*(self.columns[c] for c in names)):
                w.writerow([repr(float(v)) for v in row])


def graphical_curves(
    curve: KendallCurve,
    candidates: Sequence[Family | str],
    grid: np.ndarray | None = None,
) -> CurveTable:
    """Empirical ``lambda`` next to each candidate's ``lambda`` at the
    tau-matched parameter.

    Candidates whose admissible tau range excludes the estimate are fitted at
    the nearest admissible value and noted.
    """
    fams = [Family.parse(c) for c in candidates]
    if not fams:
        raise ValueError("no candidate families given")
    nu = curve.nu_grid if grid is None else np.asarray(grid, dtype=float)
    cols = {"nu": nu, "K_hat": curve(nu), "lambda_hat": curve.lam(nu)}
    alphas, notes = {}, []
    t = curve.tau_hat
    for fam in fams:
        if fam is Family.INDEPENDENCE:
            cop = as_generator(Family.INDEPENDENCE)
        else:
            cop, clipped = clipped_alpha(fam, t)
            if clipped:
                notes.append(f"{fam.value}: tau {t:.4f} outside admissible range; clipped")
        alphas[fam.value] = float(cop.alpha)
        k = kendall_on_grid(cop, nu)
        cols[f"{fam.value}_K"] = k
        cols[f"{fam.value}_lambda"] = nu - k
    return CurveTable(cols, alphas, t, notes)
