"""
Bivariate Archimedean copulas
-----------------------------

Closed-form generators, lambda and Kendall functions, CDF, partial derivatives
and densities for the Clayton, Frank, Gumbel-Hougaard and Joe families plus the
independence copula, the Kendall's tau <-> parameter maps and exact samplers.

All copulas here are of the form ``C(u, v) = p(phi(u) + phi(v))`` with ``phi``
the generator and ``p`` its inverse.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
from scipy import integrate, optimize
from scipy.optimize import elementwise

__all__ = [
    "Family",
    "Copula",
    "independence",
    "tau_from_alpha",
    "alpha_from_tau",
    "admissible_tau",
    "as_generator",
    "ARCHIMEDEAN_FAMILIES",
]

ArrayLike = npt.ArrayLike

# Brackets used when inverting tau numerically.
FRANK_BRACKET = (1e-6, 500.0)
JOE_BRACKET = (1.0, 500.0)
# Largest parameters the pipeline will hand out when tau-hat saturates.
ALPHA_MAX = {"clayton": 500.0, "frank": 500.0, "gumbel": 500.0, "joe": 500.0}


class Family(str, enum.Enum):
    CLAYTON = "clayton"
    FRANK = "frank"
    GUMBEL = "gumbel"
    JOE = "joe"
    INDEPENDENCE = "independence"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        key = str(value).strip().lower()
        if key in ("gumbel-hougaard", "gumbel_hougaard"):
            key = "gumbel"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown copula family {value!r}") from None


ARCHIMEDEAN_FAMILIES = (Family.CLAYTON, Family.FRANK, Family.GUMBEL, Family.JOE)

# parameter value at which each family collapses to the product copula
_INDEPENDENCE_ALPHA = {
    Family.CLAYTON: 0.0,
    Family.FRANK: 0.0,
    Family.GUMBEL: 1.0,
    Family.JOE: 1.0,
}


def _out(x):
    """Return a Python float for 0-d results, the array otherwise."""
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_unit(name, x, *, open_left=False, open_right=False):
    x = np.asarray(x, dtype=float)
    bad = ~np.isfinite(x) | (x < 0.0) | (x > 1.0)
    if open_left:
        bad |= x <= 0.0
    if open_right:
        bad |= x >= 1.0
    if np.any(bad):
        lo = "(" if open_left else "["
        hi = ")" if open_right else "]"
        raise ValueError(f"{name} must lie in {lo}0, 1{hi}")
    return x


@dataclass(frozen=True)
class Copula:
    """A bivariate Archimedean copula with a single dependence parameter.

    Parameters
    ----------
    family : Family or str
        One of ``clayton``, ``frank``, ``gumbel``, ``joe`` or ``independence``.
    alpha : float
        Dependence parameter. Clayton needs ``alpha >= 0``, Gumbel and Joe
        ``alpha >= 1``; Frank takes any real. ``alpha = 0`` (Clayton, Frank) and
        ``alpha = 1`` (Gumbel, Joe) are the independence limits and are evaluated
        with the product copula. Ignored for ``independence``.
    """

    family: Family
    alpha: float = float("nan")

    def __post_init__(self):
        fam = Family.parse(self.family)
        object.__setattr__(self, "family", fam)
        if fam is Family.INDEPENDENCE:
            object.__setattr__(self, "alpha", float("nan"))
            return
        a = float(self.alpha)
        if not math.isfinite(a):
            raise ValueError(f"{fam.value} parameter must be finite, got {self.alpha!r}")
        if fam is Family.CLAYTON and a < 0.0:
            raise ValueError(f"clayton parameter must be >= 0, got {a}")
        if fam in (Family.GUMBEL, Family.JOE) and a < 1.0:
            raise ValueError(f"{fam.value} parameter must be >= 1, got {a}")
        object.__setattr__(self, "alpha", a)

    # -- helpers ---------------------------------------------------------
    @property
    def is_independence(self) -> bool:
        if self.family is Family.INDEPENDENCE:
            return True
        return self.alpha == _INDEPENDENCE_ALPHA[self.family]

    @property
    def _kind(self) -> Family:
        return Family.INDEPENDENCE if self.is_independence else self.family

    def __str__(self):
        if self.family is Family.INDEPENDENCE:
            return "independence"
        return f"{self.family.value}(alpha={self.alpha:.6g})"

    # -- generator and its derivatives ----------------------------------
    def generator(self, nu: ArrayLike):
        """Generator ``phi(nu)`` on ``(0, 1]``; ``phi(1) = 0``."""
        t = _check_unit("nu", nu, open_left=True)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore"):
            if k is Family.INDEPENDENCE:
                r = -np.log(t)
            elif k is Family.CLAYTON:
                r = np.expm1(-a * np.log(t)) / a
            elif k is Family.FRANK:
                r = -np.log(np.expm1(-a * t) / np.expm1(-a))
            elif k is Family.GUMBEL:
                r = (-np.log(t)) ** a
            else:
                r = -np.log1p(-((1.0 - t) ** a))
        return _out(r)

    def generator_inv(self, s: ArrayLike):
        """Inverse generator ``p(s)`` for ``s >= 0`` (``p(inf) = 0``)."""
        s = np.asarray(s, dtype=float)
        if np.any(s < 0) or np.any(np.isnan(s)):
            raise ValueError("generator inverse needs s >= 0")
        a, k = self.alpha, self._kind
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = np.exp(-s)
            elif k is Family.CLAYTON:
                r = np.exp(-np.log1p(a * s) / a)
            elif k is Family.FRANK:
                r = -np.log1p(np.exp(-s) * np.expm1(-a)) / a
            elif k is Family.GUMBEL:
                r = np.exp(-(s ** (1.0 / a)))
            else:
                r = 1.0 - (-np.expm1(-s)) ** (1.0 / a)
        return _out(r)

    def generator_deriv(self, nu: ArrayLike):
        """First derivative ``phi'(nu) < 0``."""
        t = _check_unit("nu", nu, open_left=True)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = -1.0 / t
            elif k is Family.CLAYTON:
                r = -np.exp(-(a + 1.0) * np.log(t))
            elif k is Family.FRANK:
                r = -a / np.expm1(a * t)
            elif k is Family.GUMBEL:
                x = -np.log(t)
                r = -a * x ** (a - 1.0) / t
            else:
                w = (1.0 - t) ** a
                r = -a * (1.0 - t) ** (a - 1.0) / (1.0 - w)
        return _out(r)

    def generator_deriv2(self, nu: ArrayLike):
        """Second derivative ``phi''(nu) > 0``."""
        t = _check_unit("nu", nu, open_left=True)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = 1.0 / t**2
            elif k is Family.CLAYTON:
                r = (a + 1.0) * np.exp(-(a + 2.0) * np.log(t))
            elif k is Family.FRANK:
                e = np.expm1(a * t)
                r = a * a * (e + 1.0) / (e * e)
            elif k is Family.GUMBEL:
                x = -np.log(t)
                r = a * x ** (a - 2.0) * (a - 1.0 + x) / t**2
            else:
                w = (1.0 - t) ** a
                r = a * (1.0 - t) ** (a - 2.0) * (a - 1.0 + w) / (1.0 - w) ** 2
        return _out(r)

    # -- Kendall machinery -----------------------------------------------
    def lambda_fn(self, nu: ArrayLike):
        """``lambda(nu) = phi(nu) / phi'(nu)``, nonpositive with ``lambda(1) = 0``."""
        t = _check_unit("nu", nu, open_left=True)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = t * np.log(t)
            elif k is Family.CLAYTON:
                r = t * np.expm1(a * np.log(t)) / a
            elif k is Family.FRANK:
                # phi / phi' = log(expm1(-a t) / expm1(-a)) * expm1(a t) / a
                r = np.log(np.expm1(-a * t) / np.expm1(-a)) * np.expm1(a * t) / a
            elif k is Family.GUMBEL:
                r = t * np.log(t) / a
            else:
                # log(1 - w) (1 - w) / (a s^(a-1)) rewritten as g(w) (1 - w) s / a
                s = 1.0 - t
                w = s**a
                g = np.where(w > 0, np.log1p(-w) / np.where(w > 0, w, 1.0), -1.0)
                r = g * (1.0 - w) * s / a
        r = np.where(t == 1.0, 0.0, r)
        r = np.where(t == 0.0, 0.0, r)
        return _out(r)

    def kendall_cdf(self, nu: ArrayLike):
        """Kendall distribution ``K(nu) = nu - lambda(nu)``."""
        t = np.asarray(nu, dtype=float)
        return _out(t - np.asarray(self.lambda_fn(t)))

    def tau(self) -> float:
        """Kendall's tau of the copula."""
        if self.is_independence:
            return 0.0
        return tau_from_alpha(self.family, self.alpha)

    # -- distribution ----------------------------------------------------
    def cdf(self, u1: ArrayLike, u2: ArrayLike):
        """Copula distribution function ``C(u1, u2)`` on the unit square."""
        u = _check_unit("u1", u1)
        v = _check_unit("u2", u2)
        u, v = np.broadcast_arrays(u, v)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = u * v
            elif k is Family.CLAYTON:
                s = np.exp(-a * np.log(u)) + np.exp(-a * np.log(v)) - 1.0
                r = np.exp(-np.log(s) / a)
            elif k is Family.FRANK:
                r = -np.log1p(np.expm1(-a * u) * np.expm1(-a * v) / np.expm1(-a)) / a
            elif k is Family.GUMBEL:
                x, y = -np.log(u), -np.log(v)
                hi, lo = np.maximum(x, y), np.minimum(x, y)
                ratio = np.where(hi > 0, lo / np.where(hi > 0, hi, 1.0), 0.0)
                r = np.exp(-hi * (1.0 + ratio**a) ** (1.0 / a))
            else:
                ub, vb = (1.0 - u) ** a, (1.0 - v) ** a
                r = 1.0 - (ub + vb - ub * vb) ** (1.0 / a)
        r = np.where((u == 0) | (v == 0), 0.0, r)
        r = np.where(u == 1, v, r)
        r = np.where(v == 1, u, r)
        return _out(np.clip(r, 0.0, 1.0))

    def partial_u1(self, u1: ArrayLike, u2: ArrayLike):
        """``dC/du1``: the conditional CDF of ``U2`` at ``u2`` given ``U1 = u1``."""
        u = _check_unit("u1", u1, open_left=True, open_right=True)
        v = _check_unit("u2", u2)
        u, v = np.broadcast_arrays(u, v)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore", under="ignore"):
            if k is Family.INDEPENDENCE:
                r = v.astype(float)
            elif k is Family.CLAYTON:
                base = 1.0 + np.exp(a * np.log(u)) * np.expm1(-a * np.log(v))
                r = np.exp((-1.0 - 1.0 / a) * np.log(base))
            elif k is Family.FRANK:
                num = np.exp(-a * u) * -np.expm1(-a * v)
                den = -np.expm1(-a) - np.expm1(-a * v) * np.expm1(-a * u)
                r = num / den
            elif k is Family.GUMBEL:
                x, y = -np.log(u), -np.log(v)
                ratio = y / x
                # log of u^-1 exp(-(x^a + y^a)^(1/a)) (1 + (y/x)^a)^(1/a - 1)
                lr = a * np.log(ratio)
                l1p = np.logaddexp(0.0, lr)
                logr = x - x * np.exp(l1p / a) + (1.0 / a - 1.0) * l1p
                r = np.exp(logr)
            else:
                vb = (1.0 - v) ** a
                ub = (1.0 - u) ** (-a)
                r = (1.0 - vb) * (1.0 - vb + vb * ub) ** (-1.0 + 1.0 / a)
        r = np.where(v == 0, 0.0, r)
        r = np.where(v == 1, 1.0, r)
        return _out(np.clip(r, 0.0, 1.0))

    def partial_u2(self, u1: ArrayLike, u2: ArrayLike):
        """``dC/du2`` (the families are exchangeable)."""
        return self.partial_u1(u2, u1)

    def log_density(self, u1: ArrayLike, u2: ArrayLike):
        """Log of the copula density on the open unit square."""
        u = _check_unit("u1", u1, open_left=True, open_right=True)
        v = _check_unit("u2", u2, open_left=True, open_right=True)
        u, v = np.broadcast_arrays(u, v)
        a, k = self.alpha, self._kind
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            if k is Family.INDEPENDENCE:
                r = np.zeros(u.shape)
            elif k is Family.CLAYTON:
                lu, lv = np.log(u), np.log(v)
                s = np.exp(-a * lu) + np.exp(-a * lv) - 1.0
                r = np.log1p(a) - (a + 1.0) * (lu + lv) - (2.0 + 1.0 / a) * np.log(s)
            elif k is Family.FRANK:
                den = -np.expm1(-a) - np.expm1(-a * u) * np.expm1(-a * v)
                r = (
                    np.log(a * -np.expm1(-a))
                    - a * (u + v)
                    - 2.0 * np.log(np.abs(den))
                )
            elif k is Family.GUMBEL:
                x, y = -np.log(u), -np.log(v)
                hi, lo = np.maximum(x, y), np.minimum(x, y)
                # log A with A = x^a + y^a, evaluated without overflow
                log_a = a * np.log(hi) + np.log1p((lo / hi) ** a)
                a1a = np.exp(log_a / a)
                r = (
                    -a1a
                    + x
                    + y
                    + (a - 1.0) * (np.log(x) + np.log(y))
                    + (1.0 / a - 2.0) * log_a
                    + np.log(a1a + a - 1.0)
                )
            else:
                lub, lvb = np.log1p(-u), np.log1p(-v)
                ub, vb = np.exp(a * lub), np.exp(a * lvb)
                s = ub + vb - ub * vb
                r = (
                    (1.0 / a - 2.0) * np.log(s)
                    + (a - 1.0) * (lub + lvb)
                    + np.log(a - 1.0 + s)
                )
        return _out(r)

    def density(self, u1: ArrayLike, u2: ArrayLike):
        """Copula density ``d^2 C / du1 du2``."""
        return _out(np.exp(np.asarray(self.log_density(u1, u2))))

    # -- sampling ---------------------------------------------------------
    def sample(self, n: int, rng=None) -> np.ndarray:
        """Draw ``n`` pairs from the copula.

        Marshall-Olkin frailty construction: gamma (Clayton), positive stable
        (Gumbel), Sibuya (Joe) and logarithmic series (Frank) mixing variables.
        Frank with negative ``alpha`` falls back to conditional inversion.

        Returns
        -------
        ndarray of shape (n, 2)
        """
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(rng)
        a, k = self.alpha, self._kind
        if k is Family.INDEPENDENCE:
            return rng.random((n, 2))
        if k is Family.FRANK and a < 0:
            return self.sample_conditional(n, rng)
        e = rng.standard_exponential((n, 2))
        if k is Family.CLAYTON:
            m = rng.gamma(1.0 / a, 1.0, size=n)
            s = e / m[:, None]
            u = np.exp(-np.log1p(s) / a)
        elif k is Family.GUMBEL:
            m = _positive_stable(1.0 / a, n, rng)
            s = e / m[:, None]
            u = np.exp(-(s ** (1.0 / a)))
        elif k is Family.JOE:
            m = _sibuya(1.0 / a, n, rng)
            s = e / m[:, None]
            u = 1.0 - (-np.expm1(-s)) ** (1.0 / a)
        else:
            p = -np.expm1(-a)
            m = rng.logseries(p, size=n).astype(float)
            s = e / m[:, None]
            u = -np.log1p(-p * np.exp(-s)) / a
        return np.clip(u, np.finfo(float).tiny, 1.0)

    def sample_conditional(self, n: int, rng=None) -> np.ndarray:
        """Draw ``n`` pairs by inverting ``dC/du1`` in its second argument."""
        rng = np.random.default_rng(rng)
        u = rng.random(n)
        w = rng.random(n)
        if self.is_independence:
            return np.column_stack([u, w])
        if self.family is Family.FRANK:
            a = self.alpha
            v = -np.log1p(w * np.expm1(-a) / (w + (1.0 - w) * np.exp(-a * u))) / a
        else:
            v = self.inverse_partial_u1(u, w)
        return np.column_stack([u, np.clip(v, 0.0, 1.0)])

    def inverse_partial_u1(self, u1: ArrayLike, q: ArrayLike):
        """Solve ``dC/du1(u1, v) = q`` for ``v``."""
        u1, q = np.broadcast_arrays(np.asarray(u1, float), np.asarray(q, float))
        res = elementwise.find_root(
            lambda v, uu, qq: np.asarray(self.partial_u1(uu, v)) - qq,
            (np.zeros(u1.shape), np.ones(u1.shape)),
            args=(u1, q),
            tolerances=dict(xatol=1e-13, xrtol=1e-13),
        )
        return _out(res.x)


def independence() -> Copula:
    return Copula(Family.INDEPENDENCE)


def as_generator(family: "str | Family", alpha: float | None = None) -> Copula:
    """Build a :class:`Copula`, mapping the independence limits explicitly."""
    fam = Family.parse(family)
    if fam is Family.INDEPENDENCE:
        return independence()
    return Copula(fam, alpha)


# -- mixing distributions ----------------------------------------------------


def _positive_stable(a: float, n: int, rng) -> np.ndarray:
    """Positive stable variates with Laplace transform ``exp(-s**a)``, 0 < a <= 1.

    Kanter's representation of the one-sided stable law.
    """
    if a == 1.0:
        return np.ones(n)
    theta = rng.uniform(0.0, np.pi, size=n)
    w = rng.standard_exponential(n)
    part1 = np.sin(a * theta) / np.sin(theta) ** (1.0 / a)
    part2 = (np.sin((1.0 - a) * theta) / w) ** ((1.0 - a) / a)
    return part1 * part2


def _sibuya(a: float, n: int, rng) -> np.ndarray:
    """Sibuya(a) variates, Laplace transform ``1 - (1 - exp(-s))**a``.

    Inversion of the survival function ``P(V > k) = 1 / (k B(k, 1 - a))``.
    """
    from scipy.special import beta as beta_fn, gammaln

    if a == 1.0:
        return np.ones(n)
    u = rng.random(n)
    out = np.ones(n)
    big = u > a
    if np.any(big):
        ub = u[big]
        # (1 - U) Gamma(1 - a) = P(V > x) ~ x^{-a}, first guess of the quantile
        ginv = np.exp(-(np.log1p(-ub) + gammaln(1.0 - a)) / a)
        fl = np.floor(ginv)
        x_max = 1.0 / np.finfo(float).eps
        res = np.where(ginv > x_max, fl, 0.0)
        small = ginv <= x_max
        fl_s = np.maximum(fl[small], 1.0)
        surv = 1.0 / (fl_s * beta_fn(fl_s, 1.0 - a))
        pick_ceil = (1.0 - ub[small]) < surv
        res[small] = np.where(pick_ceil, np.ceil(ginv[small]), fl_s)
        out[big] = np.maximum(res, 1.0)
    return out


# -- Kendall's tau <-> parameter -------------------------------------------------


def _frank_tau(a: float) -> float:
    if abs(a) < 1e-3:
        return a / 9.0 - a**3 / 900.0

    def integrand(x):
        return 1.0 if x == 0 else x / math.expm1(x)

    val, _ = integrate.quad(integrand, 0.0, a, epsabs=0.0, epsrel=1e-12, limit=200)
    debye1 = val / a
    return 1.0 + 4.0 / a * (debye1 - 1.0)


def _joe_tau(a: float) -> float:
    if a == 1.0:
        return 0.0
    cop = Copula(Family.JOE, a)
    val, _ = integrate.quad(
        lambda t: float(cop.lambda_fn(t)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-12, limit=200
    )
    return 4.0 * val + 1.0


@functools.lru_cache(maxsize=65536)
def _tau_cached(family: Family, alpha: float) -> float:
    if family is Family.FRANK:
        return _frank_tau(alpha)
    return _joe_tau(alpha)


def tau_from_alpha(family: "str | Family", alpha: float) -> float:
    """Kendall's tau of a family at parameter ``alpha``.

    Clayton ``alpha / (alpha + 2)``, Gumbel ``1 - 1/alpha``; Frank through the
    Debye integral and Joe through ``4 * int_0^1 lambda + 1``, both by adaptive
    quadrature.
    """
    fam = Family.parse(family)
    if fam is Family.INDEPENDENCE:
        return 0.0
    cop = Copula(fam, alpha)  # validates
    a = cop.alpha
    if cop.is_independence:
        return 0.0
    if fam is Family.CLAYTON:
        return a / (a + 2.0)
    if fam is Family.GUMBEL:
        return 1.0 - 1.0 / a
    return _tau_cached(fam, a)


def admissible_tau(family: "str | Family") -> tuple[float, float]:
    """Closed/open range of Kendall's tau reachable by the family."""
    fam = Family.parse(family)
    if fam is Family.FRANK:
        return (-1.0, 1.0)
    if fam is Family.INDEPENDENCE:
        return (0.0, 0.0)
    return (0.0, 1.0)


def alpha_from_tau(family: "str | Family", tau: float) -> Copula:
    """Invert Kendall's tau for a family.

    Raises
    ------
    ValueError
        If ``tau`` is outside the family's admissible range or beyond the
        numerical bracket used for Frank and Joe.
    """
    fam = Family.parse(family)
    tau = float(tau)
    if not math.isfinite(tau) or not -1.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (-1, 1), got {tau}")
    if fam is Family.INDEPENDENCE:
        if tau != 0.0:
            raise ValueError("the independence copula only has tau = 0")
        return independence()
    if fam in (Family.CLAYTON, Family.GUMBEL, Family.JOE) and tau < 0.0:
        raise ValueError(f"{fam.value} copula cannot reach negative tau {tau}")
    if tau == 0.0:
        return Copula(fam, _INDEPENDENCE_ALPHA[fam])
    if fam is Family.CLAYTON:
        return Copula(fam, 2.0 * tau / (1.0 - tau))
    if fam is Family.GUMBEL:
        return Copula(fam, 1.0 / (1.0 - tau))
    if fam is Family.FRANK:
        lo, hi = FRANK_BRACKET
        sign = 1.0 if tau > 0 else -1.0
        target = abs(tau)
        if target < _frank_tau(lo):
            return Copula(fam, sign * 9.0 * target)
        if target > _frank_tau(hi):
            raise ValueError(f"|tau| = {target} is beyond the Frank bracket alpha <= {hi}")
        root = optimize.brentq(
            lambda x: _tau_cached(fam, x) - target, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500
        )
        return Copula(fam, sign * root)
    lo, hi = JOE_BRACKET
    if tau > _tau_cached(fam, hi):
        raise ValueError(f"tau = {tau} is beyond the Joe bracket alpha <= {hi}")
    root = optimize.brentq(
        lambda x: _tau_cached(fam, x) - tau, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=500
    )
    return Copula(fam, root)


def clipped_alpha(family: "str | Family", tau: float) -> tuple[Copula, bool]:
    """Like :func:`alpha_from_tau` but clamps ``tau`` into the reachable range.

    Returns the copula and whether clamping happened. Used by the estimation
    pipeline where finite-sample tau-hat may fall outside a family's range.
    """
    fam = Family.parse(family)
    if fam is Family.INDEPENDENCE:
        return independence(), tau != 0.0
    lo_tau = -1.0 if fam is Family.FRANK else 0.0
    hi_tau = tau_from_alpha(fam, ALPHA_MAX[fam.value])
    if fam is Family.FRANK:
        lo_tau = -hi_tau
    clipped = min(max(tau, lo_tau), hi_tau)
    return alpha_from_tau(fam, clipped), clipped != tau
