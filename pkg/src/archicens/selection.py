"""
Validation procedures for a chosen Archimedean family.

1. Omnibus comparison: the tau-inversion estimate ``alpha_hat`` against the
   pseudo-maximum-likelihood estimate ``alpha_star`` computed from the
   censored-data likelihood with rescaled Kaplan-Meier margins.
2. L2 distance between the empirical and parametric Kendall distributions,
   with bootstrap pseudo p-values.
3. A goodness-of-fit test that imputes the pair ``(U, V)`` with
   ``U = phi(U1) / phi(C(U1, U2))`` and ``V = C(U1, U2)``. Under the
   hypothesized model ``U`` and ``V`` are independent, so the Fisher transform
   of their sample correlation is approximately ``N(0, 1/n)``.

Scales
    The default ``scale="cdf"`` treats the copula as the dependence function
    of the joint CDF, matching :func:`archicens.data.simulate_censored`.
    ``scale="survival"`` treats it as the copula of the joint survival
    function instead, which is the convention of the imputation formulas in
    their original survival form.
"""

from __future__ import annotations

import json
import math
import warnings
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import optimize, special
from scipy.optimize import elementwise

from .copulas import Copula, Family, as_generator, clipped_alpha
from .data import DataError, MarginalModel, Sample, SimulationConfig, simulate_censored, stream
from .kendall import KendallCurve, kendall_counting, kendall_from_joint, kendall_on_grid
from .survival import (
    DEFAULT_KERNEL,
    EstimatorWarning,
    KernelSpec,
    akritas_joint,
    avk_joint_single,
    kaplan_meier,
)

__all__ = [
    "NumericalError",
    "DEFAULT_CANDIDATES",
    "PipelineConfig",
    "estimate_curve",
    "fit_alpha",
    "pseudo_observations",
    "case_loglik",
    "pseudo_mle",
    "FitResult",
    "omnibus_table",
    "l2_distance",
    "fit_censoring_model",
    "BootstrapResult",
    "bootstrap_pseudo_p",
    "ImputedPair",
    "impute_uv",
    "fisher_z",
    "GOFResult",
    "wang_gof",
    "SelectionReport",
    "select",
]

DEFAULT_CANDIDATES = (Family.CLAYTON, Family.FRANK, Family.GUMBEL, Family.JOE)

# stable per-family stream keys so results do not depend on candidate order
_FAMILY_KEY = {Family.CLAYTON: 1, Family.FRANK: 2, Family.GUMBEL: 3, Family.JOE: 4, Family.INDEPENDENCE: 5}

# pseudo-MLE search domains (natural scale)
_MLE_DOMAIN = {
    Family.CLAYTON: (1e-6, 100.0),
    Family.FRANK: (-100.0, 100.0),
    Family.GUMBEL: (1.0 + 1e-6, 100.0),
    Family.JOE: (1.0 + 1e-6, 100.0),
}

_TINY = 1e-300


class NumericalError(RuntimeError):
    """An optimizer or root finder failed; the message carries the inputs."""


def _families(candidates) -> list[Family]:
    fams = [Family.parse(c) for c in candidates]
    if not fams:
        raise ValueError("no candidate families given")
    if len(set(fams)) != len(fams):
        raise ValueError("duplicate candidate families")
    return fams


# -- estimation pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    """How a sample is turned into a Kendall curve.

    ``estimator``: ``"flexible"`` (joint estimator for any censoring),
    ``"auto"`` (counting for complete data, the single-censoring estimator
    when one margin is fully observed, else flexible), ``"counting"`` or
    ``"avk"``.

    ``deficit``: ``"atone"`` (default) keeps the probability the joint
    estimate cannot allocate and counts it at level 1, which is what
    ``3 - 4 * integral(K_hat)`` gives for a sub-probability estimate;
    ``"renormalize"`` rescales first. Under fixed limits the missing mass is
    structural and ``"renormalize"`` is the better choice.
    """

    estimator: str = "flexible"
    kernel: KernelSpec = DEFAULT_KERNEL
    w: float = 0.5
    deficit: str = "atone"

    def __post_init__(self):
        if self.estimator not in ("flexible", "auto", "counting", "avk"):
            raise ValueError(f"unknown estimator {self.estimator!r}")
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")
        if self.deficit not in ("atone", "renormalize"):
            raise ValueError(f"unknown deficit policy {self.deficit!r}")

    def echo(self) -> dict:
        return {
            "estimator": self.estimator,
            "kernel": self.kernel.shape.value,
            "bandwidth": "rule" if self.kernel.bandwidth is None else self.kernel.bandwidth,
            "bandwidth_factor": self.kernel.bandwidth_factor,
            "w": self.w,
            "deficit": self.deficit,
        }


DEFAULT_PIPELINE = PipelineConfig()


def estimate_curve(sample: Sample, config: PipelineConfig = DEFAULT_PIPELINE) -> KendallCurve:
    """Kendall curve of a sample under the configured estimator."""
    est = config.estimator
    complete = bool(sample.delta1.all() and sample.delta2.all())
    if est == "auto":
        if complete:
            est = "counting"
        elif sample.delta1.all() or sample.delta2.all():
            est = "avk"
        else:
            est = "flexible"
    if est == "counting":
        return kendall_counting(sample)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        if est == "avk":
            joint = avk_joint_single(sample, config.kernel)
        else:
            joint = akritas_joint(sample, config.kernel, config.w)
    return kendall_from_joint(joint, config.deficit)


def fit_alpha(family: Family | str, tau: float) -> tuple[Copula, bool]:
    """Tau-inversion estimate, clamped to the family's reachable range."""
    return clipped_alpha(family, tau)


# -- pseudo-likelihood ---------------------------------------------------------------------


def pseudo_observations(sample: Sample) -> tuple[np.ndarray, np.ndarray]:
    """Rescaled Kaplan-Meier CDF values at every observation, clamped to
    ``[1/(n+1), n/(n+1)]``."""
    n = sample.n
    lo, hi = 1.0 / (n + 1.0), n / (n + 1.0)
    out = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EstimatorWarning)
        for j in (1, 2):
            km = kaplan_meier(sample, j, rescale=True)
            out.append(np.clip(km(sample.y(j)), lo, hi))
    return out[0], out[1]


def case_loglik(copula: Copula, u1, u2, d1, d2, scale: str = "cdf") -> np.ndarray:
    """Per-observation log-likelihood: exactly one case term per observation.

    With ``scale="cdf"`` a censored component means ``U_j > u_j``:
    ``log c`` for (1,1), ``log(1 - dC/du1)`` for (1,0), ``log(1 - dC/du2)`` for
    (0,1) and ``log(1 - u1 - u2 + C)`` for (0,0). With ``scale="survival"``
    ``u`` are survival values, censoring means ``U_j < u_j`` and the terms are
    ``log c``, ``log dC/du1``, ``log dC/du2`` and ``log C``.
    """
    u1, u2 = np.asarray(u1, float), np.asarray(u2, float)
    d1, d2 = np.asarray(d1) != 0, np.asarray(d2) != 0
    out = np.empty(u1.shape)
    cases = {
        (True, True): d1 & d2,
        (True, False): d1 & ~d2,
        (False, True): ~d1 & d2,
        (False, False): ~d1 & ~d2,
    }
    m = cases[(True, True)]
    if m.any():
        out[m] = copula.log_density(u1[m], u2[m])
    surv = scale == "survival"
    for key, fn in (((True, False), copula.partial_u1), ((False, True), copula.partial_u2)):
        m = cases[key]
        if m.any():
            p = np.asarray(fn(u1[m], u2[m]), float)
            out[m] = np.log(np.maximum(p if surv else 1.0 - p, _TINY))
    m = cases[(False, False)]
    if m.any():
        c = np.asarray(copula.cdf(u1[m], u2[m]), float)
        val = c if surv else 1.0 - u1[m] - u2[m] + c
        out[m] = np.log(np.maximum(val, _TINY))
    return out


def _to_theta(fam: Family, alpha: float) -> float:
    if fam is Family.CLAYTON:
        return math.log(alpha)
    if fam in (Family.GUMBEL, Family.JOE):
        return math.log(alpha - 1.0)
    return alpha


def _from_theta(fam: Family, theta: float) -> float:
    if fam is Family.CLAYTON:
        return math.exp(theta)
    if fam in (Family.GUMBEL, Family.JOE):
        return 1.0 + math.exp(theta)
    return theta


def pseudo_mle(
    sample: Sample,
    family: Family | str,
    *,
    scale: str = "cdf",
    margins: tuple[np.ndarray, np.ndarray] | None = None,
    grid_points: int = 41,
) -> float:
    """Maximum pseudo-likelihood estimate of the dependence parameter.

    The margins default to the rescaled Kaplan-Meier pseudo-observations. The
    search scans a grid on the log-parameterized domain (Clayton ``log a``,
    Gumbel/Joe ``log(a - 1)``, Frank ``a``), then refines with bounded Brent
    around the best grid point to an absolute tolerance of 1e-10 in the
    search variable.

    Returns
    -------
    float
        ``nan`` for the independence family (no parameter).

    Raises
    ------
    NumericalError
        If the refinement does not converge; the message reports the bracket
        and the best iterate.
    """
    fam = Family.parse(family)
    if fam is Family.INDEPENDENCE:
        return float("nan")
    if scale not in ("cdf", "survival"):
        raise ValueError("scale must be 'cdf' or 'survival'")
    u1, u2 = pseudo_observations(sample) if margins is None else margins
    if scale == "survival" and margins is None:
        u1, u2 = 1.0 - u1, 1.0 - u2
    d1, d2 = sample.delta1, sample.delta2
    lo, hi = (_to_theta(fam, a) for a in _MLE_DOMAIN[fam])

    def nll(theta: float) -> float:
        cop = Copula(fam, _from_theta(fam, theta))
        with np.errstate(all="ignore"):
            v = -float(np.sum(case_loglik(cop, u1, u2, d1, d2, scale)))
        return v if math.isfinite(v) else 1e300

    grid = np.linspace(lo, hi, grid_points)
    vals = np.array([nll(t) for t in grid])
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    res = optimize.minimize_scalar(nll, bounds=(a, b), method="bounded", options={"xatol": 1e-10, "maxiter": 500})
    if not res.success:
        raise NumericalError(
            f"pseudo-MLE for {fam.value} did not converge: bracket ({_from_theta(fam, a)}, "
            f"{_from_theta(fam, b)}), best iterate {_from_theta(fam, res.x)}"
        )
    theta = res.x if res.fun <= vals[k] else grid[k]
    return _from_theta(fam, float(theta))


# -- L2 distance --------------------------------------------------------------------------


def l2_distance(curve: KendallCurve, copula: Copula, grid: np.ndarray | None = None) -> float:
    """Riemann sum ``sum_i (K_hat(nu_i) - K(nu_i))^2 (nu_i - nu_{i-1})`` over
    the ordered grid (default: the curve's grid), starting at its smallest
    point."""
    nu = curve.nu_grid if grid is None else np.sort(np.asarray(grid, dtype=float))
    diff = curve(nu) - kendall_on_grid(copula, nu)
    return float(np.sum(diff[1:] ** 2 * np.diff(nu)))


# -- omnibus ---------------------------------------------------------------------------------


@dataclass
class FitResult:
    """Per-candidate validation summary."""

    family: str
    alpha_hat: float
    alpha_star: float
    omnibus_gap: float
    l2_distance: float
    tau_clipped: bool = False
    pseudo_p: float | None = None
    gof_p: float | None = None
    gof_statistic: float | None = None


def omnibus_table(
    sample: Sample,
    candidates: Sequence[Family | str] = DEFAULT_CANDIDATES,
    *,
    curve: KendallCurve | None = None,
    config: PipelineConfig = DEFAULT_PIPELINE,
    scale: str = "cdf",
) -> list[FitResult]:
    """``alpha_hat``, ``alpha_star``, their gap and the L2 distance per candidate."""
    fams = _families(candidates)
    if curve is None:
        curve = estimate_curve(sample, config)
    margins = pseudo_observations(sample)
    if scale == "survival":
        margins = (1.0 - margins[0], 1.0 - margins[1])
    out = []
    for fam in fams:
        cop, clipped = fit_alpha(fam, curve.tau_hat)
        a_star = pseudo_mle(sample, fam, scale=scale, margins=margins)
        gap = abs(cop.alpha - a_star) if fam is not Family.INDEPENDENCE else 0.0
        out.append(
            FitResult(fam.value, float(cop.alpha), float(a_star), float(gap), l2_distance(curve, cop), clipped)
        )
    return out


def _argmin_with_ties(fits: list[FitResult], key: str, tiebreak: str | None = "l2_distance") -> str:
    vals = [(getattr(f, key), getattr(f, tiebreak) if tiebreak else 0.0, f.family) for f in fits]
    vals = [v for v in vals if v[0] is not None and math.isfinite(v[0])]
    return min(vals)[2] if vals else ""


# -- bootstrap -------------------------------------------------------------------------------


def fit_censoring_model(sample: Sample) -> SimulationConfig:
    """Exponential margins and censoring fitted to the data.

    * Margin rates: events divided by total exposure.
    * Administrative limit on margin ``j``: the largest value when at least
      ``max(2, n/100)`` observations are censored exactly there.
    * Random censoring rate: censored values below the limit divided by the
      exposure. When every doubly censored pair has ``y1 == y2`` the censor is
      taken as shared, with exposure ``sum(max(y1, y2))``.

    The returned configuration carries the independence copula; replace it
    with :func:`archicens.data.with_copula`.
    """
    n = sample.n
    rates, limits, cens_counts = [], [], []
    for j in (1, 2):
        y, d = sample.y(j), sample.delta(j)
        events = int(d.sum())
        if events == 0:
            raise DataError(f"margin {j} has no uncensored values; cannot fit a margin model")
        rates.append(events / float(y.sum()))
        ymax = float(y.max())
        at_max = int(np.count_nonzero((y == ymax) & (d == 0)))
        limit = ymax if at_max >= max(2, n / 100.0) else math.inf
        limits.append(limit)
        cens_counts.append(int(np.count_nonzero((d == 0) & (y < limit))))
    both = (sample.delta1 == 0) & (sample.delta2 == 0) & (sample.y1 < limits[0]) & (sample.y2 < limits[1])
    shared = bool(both.any() and np.all(sample.y1[both] == sample.y2[both]))
    margins = (MarginalModel.exponential(rates[0]), MarginalModel.exponential(rates[1]))
    if shared:
        events = int(np.count_nonzero(((sample.delta1 == 0) & (sample.y1 < limits[0])) | ((sample.delta2 == 0) & (sample.y2 < limits[1]))))
        cm = MarginalModel.exponential(events / float(np.maximum(sample.y1, sample.y2).sum()))
        censors = (cm, cm)
    else:
        censors = tuple(
            MarginalModel.exponential(cens_counts[j] / float(sample.y(j + 1).sum())) if cens_counts[j] else None
            for j in range(2)
        )
    return SimulationConfig(
        copula=as_generator(Family.INDEPENDENCE),
        n=n,
        margin1=margins[0],
        margin2=margins[1],
        censor1=censors[0],
        censor2=censors[1],
        shared_censor=shared,
        limit1=limits[0],
        limit2=limits[1],
    )


@dataclass
class BootstrapResult:
    """Pseudo p-values and the per-replicate distance matrix.

    ``distances[b, m]`` is the L2 distance between the data curve and the
    candidate-``m`` Kendall CDF refitted on bootstrap sample ``b`` of model
    ``m``. ``p[m]`` is the fraction of retained replicates in which another
    candidate has a strictly smaller distance.
    """

    families: list[str]
    p: dict[str, float]
    distances: np.ndarray
    dropped: int
    B: int
    winner: str

    def to_dict(self) -> dict:
        return {"p": self.p, "dropped": self.dropped, "B": self.B, "winner": self.winner}


def _bootstrap_replicate(args):
    template, copula, fam, b, seed, config, curve_data = args
    from dataclasses import replace as _replace

    cfg = _replace(template, copula=copula, seed=seed)
    try:
        s = simulate_censored(cfg, (_FAMILY_KEY[fam], b))
        cv = estimate_curve(s, config)
        cop_b, _ = fit_alpha(fam, cv.tau_hat)
        return l2_distance(curve_data, cop_b)
    except (ValueError, NumericalError, FloatingPointError, ArithmeticError):
        return float("nan")


def bootstrap_pseudo_p(
    sample: Sample,
    candidates: Sequence[Family | str] = DEFAULT_CANDIDATES,
    B: int = 1000,
    seed: int = 0,
    *,
    config: PipelineConfig = DEFAULT_PIPELINE,
    curve: KendallCurve | None = None,
    model: SimulationConfig | None = None,
    n_jobs: int = 1,
    max_drop: float = 0.10,
) -> BootstrapResult:
    """Parametric-bootstrap pseudo p-values for the L2 criterion.

    For every candidate ``m``: fit ``alpha_m`` on the data, simulate ``B``
    censored samples of the same size from ``C_{alpha_m}`` with the fitted
    margin and censoring model (:func:`fit_censoring_model` unless ``model``
    is given), re-estimate ``alpha`` on each and record the distance between
    the data curve and the refitted parametric curve. ``p_m`` is the fraction
    of replicates ``b`` for which some other candidate's distance is smaller;
    the smallest ``p`` wins.

    Replicate ``b`` of family ``f`` draws from stream ``(seed, key(f), b)`` so
    the result is deterministic and independent of candidate order and of
    ``n_jobs``.

    Raises
    ------
    NumericalError
        If more than ``max_drop`` of the replicates fail.
    """
    fams = _families(candidates)
    if B < 1:
        raise ValueError("B must be >= 1")
    if curve is None:
        curve = estimate_curve(sample, config)
    template = fit_censoring_model(sample) if model is None else model
    tasks = []
    for fam in fams:
        cop, _ = fit_alpha(fam, curve.tau_hat)
        tasks.extend((template, cop, fam, b, seed, config, curve) for b in range(B))
    if n_jobs == 1:
        flat = [_bootstrap_replicate(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=None if n_jobs < 1 else n_jobs) as ex:
            flat = list(ex.map(_bootstrap_replicate, tasks, chunksize=max(1, len(tasks) // 64)))
    D = np.array(flat, dtype=float).reshape(len(fams), B).T
    keep = np.all(np.isfinite(D), axis=1)
    dropped = int(B - keep.sum())
    if dropped > max_drop * B:
        raise NumericalError(f"{dropped} of {B} bootstrap replicates failed")
    Dk = D[keep]
    p = {}
    for m, fam in enumerate(fams):
        others = np.delete(Dk, m, axis=1)
        if others.shape[1] == 0:
            p[fam.value] = 0.0
            continue
        p[fam.value] = float(np.mean(np.min(others, axis=1) < Dk[:, m]))
    order = sorted(fams, key=lambda f: (p[f.value], f.value))
    return BootstrapResult([f.value for f in fams], p, D, dropped, B, order[0].value)


# -- imputation ---------------------------------------------------------------------------------


class ImputedPair(NamedTuple):
    u: np.ndarray
    v: np.ndarray


def _invert(F, W, lo, hi, label: str):
    """Solve ``F(v) = W`` for increasing ``F`` on ``[lo, hi]`` elementwise."""
    W, lo, hi = np.broadcast_arrays(np.asarray(W, float), np.asarray(lo, float), np.asarray(hi, float))
    Flo, Fhi = F(lo), F(hi)
    out = np.where(W <= Flo, lo, np.where(W >= Fhi, hi, np.nan))
    pending = np.isnan(out)
    if pending.any():
        idx = np.flatnonzero(pending)
        res = elementwise.find_root(
            lambda v, w, ii: F(v, ii) - w,
            (lo[idx], hi[idx]),
            args=(W[idx], idx),
            tolerances=dict(xatol=1e-12, xrtol=4 * np.finfo(float).eps),
        )
        if not np.all(res.success):
            bad = idx[~res.success][0]
            raise NumericalError(f"imputation inversion failed for case {label} at index {bad}")
        out[idx] = res.x
    return out


def impute_uv(
    copula: Copula,
    a1,
    a2,
    d1,
    d2,
    rng: np.random.Generator,
    scale: str = "cdf",
) -> ImputedPair:
    """Impute ``(U, V)`` given marginal values ``a_j`` and censoring indicators.

    ``a_j`` are CDF values (``scale="cdf"``) or survival values
    (``scale="survival"``) of the observed ``y_j``, all in (0, 1).
    Uncensored pairs are mapped exactly; censored pairs draw ``V`` from its
    conditional distribution on the censoring event by inverting the case CDF
    (expressed through ``phi`` and ``phi'``) and then ``U`` given ``V``.
    Support bounds are asserted on every draw.
    """
    if scale not in ("cdf", "survival"):
        raise ValueError("scale must be 'cdf' or 'survival'")
    a1, a2, d1, d2 = np.broadcast_arrays(np.asarray(a1, float), np.asarray(a2, float), np.asarray(d1), np.asarray(d2))
    a1, a2 = a1.ravel(), a2.ravel()
    d1, d2 = d1.ravel() != 0, d2.ravel() != 0
    if np.any((a1 <= 0) | (a1 >= 1) | (a2 <= 0) | (a2 >= 1)):
        raise ValueError("marginal values must lie strictly inside (0, 1)")
    n = len(a1)
    phi, dphi = copula.generator, copula.generator_deriv
    # draw the uniforms for every observation so streams do not depend on the case mix
    W = rng.random(n)
    R = rng.random(n)
    U = np.empty(n)
    V = np.empty(n)
    c = np.asarray(copula.cdf(a1, a2), float).reshape(n)
    pa1, pa2 = np.asarray(phi(a1), float).reshape(n), np.asarray(phi(a2), float).reshape(n)

    def sub(x, ii):
        return x if ii is None else x[ii]

    m = d1 & d2
    if m.any():
        U[m] = pa1[m] / (pa1[m] + pa2[m])
        V[m] = c[m]

    tiny = 1e-12
    for case, mask in (("(1,0)", d1 & ~d2), ("(0,1)", ~d1 & d2)):
        if not mask.any():
            continue
        ix = np.flatnonzero(mask)
        cc = c[ix]
        aa = a1[ix] if case == "(1,0)" else a2[ix]
        pa = pa1[ix] if case == "(1,0)" else pa2[ix]
        if scale == "cdf":
            inv_c, inv_a = 1.0 / dphi(cc), 1.0 / dphi(aa)
            F = lambda v, ii=None: (1.0 / dphi(v) - sub(inv_c, ii)) / (sub(inv_a, ii) - sub(inv_c, ii))
            v = _invert(F, W[ix], cc, aa, case)
        else:
            dc = dphi(cc)
            F = lambda v, ii=None: sub(dc, ii) / dphi(v)
            v = _invert(F, W[ix], np.full(len(ix), tiny), cc, case)
        ratio = pa / phi(v)
        U[ix] = ratio if case == "(1,0)" else 1.0 - ratio
        V[ix] = v

    m = ~d1 & ~d2
    if m.any():
        ix = np.flatnonzero(m)
        cc, x1, x2 = c[ix], a1[ix], a2[ix]
        p1, p2 = pa1[ix], pa2[ix]
        if scale == "cdf":
            K = copula.kendall_cdf

            def Q(v, a, pa):
                # P(V <= v, U_j > a)
                return np.where(v <= a, -pa / dphi(np.minimum(v, a)), K(v) - a)

            total = 1.0 - x1 - x2 + cc

            def F(v, ii=None):
                return (
                    Q(v, sub(x1, ii), sub(p1, ii)) + Q(v, sub(x2, ii), sub(p2, ii)) - K(v) + sub(cc, ii)
                ) / sub(total, ii)

            v = _invert(F, W[ix], cc, np.ones(len(ix)), "(0,0)")
            with np.errstate(divide="ignore"):
                pv = phi(v)
                lo_u = np.where(pv > 0, np.maximum(0.0, 1.0 - p2 / np.where(pv > 0, pv, 1.0)), 0.0)
                hi_u = np.where(pv > 0, np.minimum(1.0, p1 / np.where(pv > 0, pv, 1.0)), 1.0)
        else:
            pc = phi(cc)
            F = lambda v, ii=None: (v - (phi(v) - sub(pc, ii)) / dphi(v)) / sub(cc, ii)
            v = _invert(F, W[ix], np.full(len(ix), tiny), cc, "(0,0)")
            pv = phi(v)
            lo_u, hi_u = p1 / pv, 1.0 - p2 / pv
        U[ix] = lo_u + R[ix] * (hi_u - lo_u)
        V[ix] = v
        _check_support(U[ix], lo_u, hi_u, V[ix], cc, scale)
    return ImputedPair(U, V)


def _check_support(u, lo_u, hi_u, v, c, scale, tol: float = 1e-9):
    bad_u = (u < lo_u - tol) | (u > hi_u + tol) | (lo_u > hi_u + tol)
    bad_v = (v < c - tol) if scale == "cdf" else (v > c + tol)
    if np.any(bad_u) or np.any(bad_v):
        raise NumericalError("imputed (U, V) fell outside the case support for case (0,0)")


def fisher_z(r):
    """``0.5 * log((1 + r) / (1 - r))``."""
    return np.arctanh(r)


@dataclass
class GOFResult:
    statistic: float
    p_value: float
    z_values: list[float]
    r_values: list[float]
    combine: str
    M: int
    flags: list[str] = field(default_factory=list)


def wang_gof(
    sample: Sample,
    copula: Copula,
    M: int = 5,
    seed: int = 0,
    *,
    combine: str = "mean",
    scale: str = "cdf",
) -> GOFResult:
    """Imputation-based goodness-of-fit test of an Archimedean copula.

    Each imputation maps every observation to ``(U, V)`` with
    :func:`impute_uv` using the rescaled Kaplan-Meier margins, then takes
    ``Z = atanh(corr(U, V))``. ``combine="mean"`` refers ``sqrt(n) * mean(Z)``
    to ``N(0, 1)``; ``combine="rubin"`` divides ``mean(Z)`` by the square root
    of ``1/n + (1 + 1/M) * var(Z)``. Complete data need a single imputation.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if combine not in ("mean", "rubin"):
        raise ValueError("combine must be 'mean' or 'rubin'")
    u1, u2 = pseudo_observations(sample)
    if scale == "survival":
        u1, u2 = 1.0 - u1, 1.0 - u2
    n = sample.n
    complete = bool(sample.delta1.all() and sample.delta2.all())
    reps = 1 if complete else M
    zs, rs, flags = [], [], []
    for m in range(reps):
        pair = impute_uv(copula, u1, u2, sample.delta1, sample.delta2, stream(seed, m), scale)
        if np.std(pair.u) == 0 or np.std(pair.v) == 0:
            r = 0.0
            flags.append("constant-imputation")
        else:
            r = float(np.corrcoef(pair.u, pair.v)[0, 1])
        rs.append(r)
        if abs(r) >= 1.0:
            flags.append("degenerate-correlation")
            return GOFResult(math.inf, 0.0, [math.copysign(math.inf, r)], rs, combine, reps, flags)
        zs.append(float(fisher_z(r)))
    z = np.asarray(zs)
    if combine == "mean":
        stat = math.sqrt(n) * float(z.mean())
    else:
        between = float(z.var(ddof=1)) if reps > 1 else 0.0
        stat = float(z.mean()) / math.sqrt(1.0 / n + (1.0 + 1.0 / reps) * between)
    p = float(2.0 * special.ndtr(-abs(stat)))
    return GOFResult(stat, p, zs, rs, combine, reps, flags)


# -- full selection ----------------------------------------------------------------------------


@dataclass
class SelectionReport:
    """Outcome of the full validation pipeline on one sample."""

    n: int
    scenario: str
    censored_fraction: float
    tau_hat: float
    raw_tau: float
    fits: list[FitResult]
    winners: dict[str, str]
    config: dict
    bootstrap: dict | None = None
    flags: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fits"] = [asdict(f) for f in self.fits]
        return _clean(d)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default, allow_nan=False, **kw)


def _clean(o):
    """Recursively turn numpy scalars into Python ones and non-finite floats
    into ``None`` so the report is strict JSON."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        o = o.item()
    if isinstance(o, float) and not math.isfinite(o):
        return None
    return o


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def select(
    sample: Sample,
    candidates: Sequence[Family | str] = DEFAULT_CANDIDATES,
    *,
    B: int = 1000,
    M: int = 5,
    seed: int = 0,
    config: PipelineConfig = DEFAULT_PIPELINE,
    nu0: float = 0.5,
    combine: str = "mean",
    n_jobs: int = 1,
) -> SelectionReport:
    """Run all validation procedures and collect the per-criterion winners.

    ``B=0`` skips the bootstrap, ``M=0`` skips the goodness-of-fit test.
    Winners: smallest omnibus gap (ties by L2 distance), smallest L2 distance,
    smallest pseudo p-value and largest goodness-of-fit p-value.
    """
    fams = _families(candidates)
    curve = estimate_curve(sample, config)
    fits = omnibus_table(sample, fams, curve=curve, config=config)
    flags = list(curve.flags)
    winners = {
        "omnibus": _argmin_with_ties(fits, "omnibus_gap"),
        "l2": _argmin_with_ties(fits, "l2_distance", None),
    }
    boot = None
    if B > 0 and len(fams) >= 2:
        res = bootstrap_pseudo_p(sample, fams, B, seed, config=config, curve=curve, n_jobs=n_jobs)
        for f in fits:
            f.pseudo_p = res.p[f.family]
        winners["pseudo_p"] = res.winner
        boot = res.to_dict()
    if M > 0:
        for f in fits:
            cop, _ = fit_alpha(f.family, curve.tau_hat)
            g = wang_gof(sample, cop, M, seed, combine=combine)
            f.gof_p, f.gof_statistic = g.p_value, g.statistic
            flags.extend(f"{f.family}:{fl}" for fl in g.flags)
        winners["gof"] = min(fits, key=lambda f: (-f.gof_p, f.family)).family
        if combine == "mean":
            flags.append("gof-combine:mean")
    cfg = dict(config.echo(), B=B, M=M, seed=seed, nu0=nu0, candidates=[f.value for f in fams], combine=combine)
    return SelectionReport(
        n=sample.n,
        scenario=sample.scenario.value,
        censored_fraction=sample.censored_fraction,
        tau_hat=curve.tau_hat,
        raw_tau=curve.raw_tau,
        fits=fits,
        winners=winners,
        config=cfg,
        bootstrap=boot,
        flags=flags,
    )
