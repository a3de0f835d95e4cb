"""
Censored bivariate samples
--------------------------

Data model for observations ``Y_j = min(T_j, X_j, omega_j)`` with indicators
``delta_j = 1[Y_j = T_j]``, CSV round-tripping, declarative scenario files and
the simulation engine used by the studies and the bootstrap.

Random streams: every stochastic routine takes a ``seed`` and an optional
``replicate`` index. Replicate ``r`` of seed ``s`` uses
``numpy.random.default_rng(SeedSequence(s, spawn_key=(r,)))`` (PCG64), so
replicates are independent, reproducible and order-free.
"""

from __future__ import annotations

import configparser
import csv
import enum
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import optimize, special

from .copulas import Copula, Family, alpha_from_tau, as_generator

__all__ = [
    "DataError",
    "Observation",
    "Scenario",
    "Sample",
    "MarginalModel",
    "UNIT_EXPONENTIAL",
    "SimulationConfig",
    "CENSORING_PRESETS",
    "stream",
    "simulate_censored",
    "calibrate_censoring",
    "load_csv",
    "save_csv",
    "ScenarioSpec",
    "load_scenario",
]

# total censoring targets for the limit study ("low", "medium", "high")
CENSORING_PRESETS = {"low": 0.05, "medium": 0.30, "high": 0.75}

CSV_COLUMNS = ("y1", "y2", "delta1", "delta2")


class DataError(ValueError):
    """Malformed input data; ``line`` is the 1-based file line when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


class Observation(NamedTuple):
    y1: float
    y2: float
    delta1: int
    delta2: int


class Scenario(str, enum.Enum):
    COMPLETE = "complete"
    SINGLE1 = "single1"  # only margin 1 carries censored values
    SINGLE2 = "single2"
    DOUBLE = "double"

    @property
    def censored_margins(self) -> tuple[int, ...]:
        return {
            Scenario.COMPLETE: (),
            Scenario.SINGLE1: (1,),
            Scenario.SINGLE2: (2,),
            Scenario.DOUBLE: (1, 2),
        }[self]


def _infer_scenario(d1: np.ndarray, d2: np.ndarray) -> Scenario:
    c1, c2 = not d1.all(), not d2.all()
    if c1 and c2:
        return Scenario.DOUBLE
    if c1:
        return Scenario.SINGLE1
    if c2:
        return Scenario.SINGLE2
    return Scenario.COMPLETE


@dataclass(frozen=True, eq=False)
class Sample:
    """Immutable bag of censored bivariate observations (column storage).

    Parameters
    ----------
    y1, y2 : array-like of nonnegative finite floats
        Observed values ``min(T_j, X_j, omega_j)``.
    delta1, delta2 : array-like of {0, 1}
        1 when the latent value was observed.
    """

    y1: np.ndarray
    y2: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray
    scenario: Scenario = field(init=False)

    def __post_init__(self):
        cols = {}
        for name in CSV_COLUMNS:
            arr = np.array(getattr(self, name), dtype=float if name[0] == "y" else np.int8, copy=True)
            if arr.ndim != 1:
                raise DataError(f"{name} must be one-dimensional")
            arr.setflags(write=False)
            cols[name] = arr
        n = len(cols["y1"])
        if n == 0:
            raise DataError("no observations")
        if any(len(c) != n for c in cols.values()):
            raise DataError("columns have different lengths")
        for name in ("y1", "y2"):
            y = cols[name]
            if not np.all(np.isfinite(y)) or np.any(y < 0):
                raise DataError(f"{name} must be finite and nonnegative")
        for name in ("delta1", "delta2"):
            if not np.all((cols[name] == 0) | (cols[name] == 1)):
                raise DataError(f"{name} must be 0 or 1")
        for name, arr in cols.items():
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "scenario", _infer_scenario(cols["delta1"], cols["delta2"]))

    @classmethod
    def from_observations(cls, observations: Sequence[Observation | tuple]) -> "Sample":
        rows = list(observations)
        if not rows:
            raise DataError("no observations")
        arr = np.array([tuple(r) for r in rows], dtype=float)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])

    @classmethod
    def complete(cls, y1, y2) -> "Sample":
        y1 = np.asarray(y1, float)
        return cls(y1, y2, np.ones(len(y1)), np.ones(len(y1)))

    def __len__(self) -> int:
        return len(self.y1)

    @property
    def n(self) -> int:
        return len(self.y1)

    def __iter__(self) -> Iterator[Observation]:
        for row in zip(self.y1.tolist(), self.y2.tolist(), self.delta1.tolist(), self.delta2.tolist()):
            yield Observation(*row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in CSV_COLUMNS)

    def y(self, margin: int) -> np.ndarray:
        return {1: self.y1, 2: self.y2}[margin]

    def delta(self, margin: int) -> np.ndarray:
        return {1: self.delta1, 2: self.delta2}[margin]

    @property
    def censored_fraction(self) -> float:
        """Fraction of observations with at least one censored component."""
        return float(np.mean((self.delta1 == 0) | (self.delta2 == 0)))

    def swapped(self) -> "Sample":
        return Sample(self.y2, self.y1, self.delta2, self.delta1)


# -- marginal models -----------------------------------------------------------


@dataclass(frozen=True)
class MarginalModel:
    """Parametric margin: ``exponential(rate)`` or ``lognormal(mu, sigma)``."""

    kind: str
    rate: float = 1.0
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exponential", "lognormal"):
            raise ValueError(f"unknown marginal family {self.kind!r}")
        if self.kind == "exponential" and not self.rate > 0:
            raise ValueError("exponential rate must be > 0")
        if self.kind == "lognormal" and not self.sigma > 0:
            raise ValueError("lognormal sigma must be > 0")

    @classmethod
    def exponential(cls, rate: float = 1.0) -> "MarginalModel":
        return cls("exponential", rate=float(rate))

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> "MarginalModel":
        return cls("lognormal", mu=float(mu), sigma=float(sigma))

    @classmethod
    def parse(cls, text: str) -> "MarginalModel":
        """Parse ``exponential``, ``exponential(2.5)`` or ``lognormal(8, 1)``."""
        s = text.strip().lower().replace(" ", "")
        name, _, rest = s.partition("(")
        args = [float(a) for a in rest.rstrip(")").split(",") if a] if rest else []
        if name in ("exponential", "exp", "unitexponential"):
            return cls.exponential(*(args or [1.0]))
        if name in ("lognormal", "lnorm"):
            if len(args) != 2:
                raise ValueError("lognormal needs (mu, sigma)")
            return cls.lognormal(*args)
        raise ValueError(f"cannot parse marginal model {text!r}")

    def __str__(self):
        if self.kind == "exponential":
            return f"exponential({self.rate:g})"
        return f"lognormal({self.mu:g},{self.sigma:g})"

    def ppf(self, q):
        q = np.asarray(q, dtype=float)
        if self.kind == "exponential":
            return -np.log1p(-q) / self.rate
        return np.exp(self.mu + self.sigma * special.ndtri(q))

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            return -np.expm1(-self.rate * np.maximum(x, 0.0))
        with np.errstate(divide="ignore"):
            return special.ndtr((np.log(x) - self.mu) / self.sigma)

    def sf(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "exponential":
            return np.exp(-self.rate * np.maximum(x, 0.0))
        with np.errstate(divide="ignore"):
            return special.ndtr(-(np.log(x) - self.mu) / self.sigma)

    def rvs(self, size, rng) -> np.ndarray:
        if self.kind == "exponential":
            return rng.standard_exponential(size) / self.rate
        return np.exp(self.mu + self.sigma * rng.standard_normal(size))

    def median(self) -> float:
        return float(self.ppf(0.5))


UNIT_EXPONENTIAL = MarginalModel.exponential(1.0)


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to draw one censored sample.

    ``censor1``/``censor2`` set to ``None`` disable random censoring on that
    margin. With ``shared_censor`` a single draw of ``censor1`` censors both
    margins (``X1 = X2``). ``limit1``/``limit2`` are the deterministic caps.
    """

    copula: Copula
    n: int
    margin1: MarginalModel = UNIT_EXPONENTIAL
    margin2: MarginalModel = UNIT_EXPONENTIAL
    censor1: MarginalModel | None = None
    censor2: MarginalModel | None = None
    shared_censor: bool = False
    limit1: float = math.inf
    limit2: float = math.inf
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not (self.limit1 > 0 and self.limit2 > 0):
            raise ValueError("limits must be strictly positive")
        if self.shared_censor and self.censor1 != self.censor2:
            raise ValueError("a shared censor needs censor1 == censor2")


def simulate_censored(
    config: SimulationConfig, replicate: int | tuple[int, ...] = 0, *, return_latent: bool = False
):
    """Draw a censored sample.

    Latent ``T_j = F_j^{-1}(U_j)`` with ``(U1, U2)`` from the copula (the copula
    is the dependence function of the joint CDF), censors drawn independently
    of ``T``, ``Y_j = min(T_j, X_j, omega_j)`` and ``delta_j = 1[T_j <= min(X_j, omega_j)]``.

    ``replicate`` may be a tuple of stream keys (see :func:`stream`).

    Returns
    -------
    Sample, or ``(Sample, T)`` with ``T`` of shape (n, 2) if ``return_latent``.
    """
    keys = replicate if isinstance(replicate, tuple) else (replicate,)
    rng = stream(config.seed, *keys)
    n = config.n
    u = config.copula.sample(n, rng)
    t1 = config.margin1.ppf(u[:, 0])
    t2 = config.margin2.ppf(u[:, 1])
    x1 = config.censor1.rvs(n, rng) if config.censor1 is not None else np.full(n, np.inf)
    if config.shared_censor:
        x2 = x1
    else:
        x2 = config.censor2.rvs(n, rng) if config.censor2 is not None else np.full(n, np.inf)
    c1 = np.minimum(x1, config.limit1)
    c2 = np.minimum(x2, config.limit2)
    d1 = t1 <= c1
    d2 = t2 <= c2
    sample = Sample(np.where(d1, t1, c1), np.where(d2, t2, c2), d1, d2)
    if return_latent:
        return sample, np.column_stack([t1, t2])
    return sample


# -- censoring calibration -----------------------------------------------------


def _censor_family(kind: str, theta: float, margin: MarginalModel, sigma: float) -> MarginalModel:
    if kind == "exponential":
        return MarginalModel.exponential(math.exp(theta))
    return MarginalModel.lognormal(math.log(margin.median()) + theta, sigma)


def calibrate_censoring(
    copula: Copula,
    margins: tuple[MarginalModel, MarginalModel],
    target: float,
    scenario: str | Scenario = "double",
    *,
    censor_kind: str = "exponential",
    censor_sigma: float = 1.0,
    shared: bool = False,
    limits: tuple[float, float] = (math.inf, math.inf),
    pilot_n: int = 200_000,
    seed: int = 0,
) -> tuple[MarginalModel | None, MarginalModel | None]:
    """Find censoring distributions giving a target censored fraction.

    The target is ``P[at least one component censored]``. One scalar is tuned:
    the common exponential rate (``censor_kind="exponential"``) or a common
    log-scale shift of lognormal censors located at each margin's median
    (``censor_kind="lognormal"``). The fraction is estimated on a fixed pilot
    sample of latent pairs by averaging the conditional censoring probability
    given ``T``, which makes it smooth in the tuned scalar.

    Returns
    -------
    (censor1, censor2)
        ``None`` for margins left uncensored.
    """
    if not 0.0 < target < 1.0:
        raise ValueError("target censored fraction must be in (0, 1)")
    scen = scenario if isinstance(scenario, Scenario) else _SCENARIO_ALIASES.get(str(scenario).lower())
    if scen is None:
        raise ValueError(f"unknown censoring scenario {scenario!r}")
    if scen is Scenario.COMPLETE:
        raise ValueError("complete scenario has nothing to calibrate")
    if censor_kind not in ("exponential", "lognormal"):
        raise ValueError(f"unknown censor family {censor_kind!r}")
    if shared and scen is not Scenario.DOUBLE:
        raise ValueError("a shared censor only makes sense with double censoring")

    rng = stream(seed, 0xCA11B)
    u = copula.sample(pilot_n, rng)
    t = np.column_stack([margins[0].ppf(u[:, 0]), margins[1].ppf(u[:, 1])])
    within = (t[:, 0] <= limits[0]) & (t[:, 1] <= limits[1])
    active = [j - 1 for j in scen.censored_margins]

    def fraction(theta: float) -> float:
        cens = [_censor_family(censor_kind, theta, margins[j], censor_sigma) for j in range(2)]
        if shared:
            # one censor (located at margin 1) for both: both observed iff X exceeds the larger
            keep = cens[0].sf(np.max(t, axis=1))
        else:
            keep = np.ones(len(t))
            for j in active:
                keep = keep * cens[j].sf(t[:, j])
        return float(1.0 - np.mean(keep * within))

    # exponential: theta is the log rate; lognormal: theta shifts the censors later
    none_end, full_end = (-40.0, 40.0) if censor_kind == "exponential" else (40.0, -40.0)
    f_none, f_full = fraction(none_end), fraction(full_end)
    if f_none > target:
        raise ValueError(f"target {target} unattainable: limits alone censor {f_none:.4f} of observations")
    if f_full < target:
        raise ValueError(f"target {target} unattainable: at most {f_full:.4f} can be censored")
    theta = optimize.brentq(lambda x: fraction(x) - target, -40.0, 40.0, xtol=1e-10)
    cens = [_censor_family(censor_kind, theta, margins[j], censor_sigma) for j in range(2)]
    if shared:
        return cens[0], cens[0]
    return (cens[0] if 0 in active else None, cens[1] if 1 in active else None)


# -- CSV ---------------------------------------------------------------------------


def load_csv(path: str | Path) -> Sample:
    """Read a CSV with header ``y1,y2,delta1,delta2`` (extra columns ignored)."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("no observations (empty file)") from None
        names = [h.strip().lower() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in names]
        if missing:
            raise DataError(f"missing column(s): {', '.join(missing)}", line=1)
        idx = [names.index(c) for c in CSV_COLUMNS]
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < len(names):
                raise DataError(f"expected {len(names)} fields, found {len(row)}", line=line_no)
            try:
                y1, y2 = float(row[idx[0]]), float(row[idx[1]])
            except ValueError:
                raise DataError("y1/y2 are not numbers", line=line_no) from None
            if not (math.isfinite(y1) and math.isfinite(y2)):
                raise DataError("y1/y2 must be finite", line=line_no)
            if y1 < 0 or y2 < 0:
                raise DataError("negative value", line=line_no)
            deltas = []
            for k in (2, 3):
                cell = row[idx[k]].strip()
                if cell not in ("0", "1", "0.0", "1.0"):
                    raise DataError(f"{CSV_COLUMNS[k]} must be 0 or 1, got {cell!r}", line=line_no)
                deltas.append(int(float(cell)))
            rows.append((y1, y2, *deltas))
    if not rows:
        raise DataError("no observations")
    return Sample.from_observations(rows)


def save_csv(sample: Sample, path: str | Path) -> None:
    """Write ``sample``; floats use ``repr`` so values round-trip exactly."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for o in sample:
            w.writerow((repr(o.y1), repr(o.y2), o.delta1, o.delta2))


# -- scenario files -----------------------------------------------------------------


def _parse_limit(text: str) -> float | str:
    s = text.strip().lower()
    if s in ("", "inf", "infinity", "none"):
        return math.inf
    if s.startswith("q"):
        q = float(s[1:])
        if not 0 < q < 1:
            raise ValueError(f"limit quantile must be in (0, 1), got {q}")
        return s
    v = float(s)
    if not v > 0:
        raise ValueError("limits must be strictly positive")
    return v


@dataclass(frozen=True)
class ScenarioSpec:
    """Parsed scenario file.

    Limits are numbers, ``inf``, or ``qP`` meaning the ``P`` quantile of the
    corresponding latent margin.
    """

    family: Family
    n: int
    tau: float | None = None
    alpha: float | None = None
    margin1: MarginalModel = UNIT_EXPONENTIAL
    margin2: MarginalModel = UNIT_EXPONENTIAL
    scenario: Scenario = Scenario.COMPLETE
    censored_fraction: float = 0.2
    censor_kind: str = "exponential"
    censor_sigma: float = 1.0
    shared_censor: bool = False
    limit1: float | str = math.inf
    limit2: float | str = math.inf
    replicates: int = 1
    seed: int = 0

    def copula(self) -> Copula:
        if self.family is Family.INDEPENDENCE:
            return as_generator(Family.INDEPENDENCE)
        if self.alpha is not None:
            return Copula(self.family, self.alpha)
        if self.tau is None:
            raise ValueError("scenario needs tau or alpha")
        return alpha_from_tau(self.family, self.tau)

    def _limit(self, value, margin: MarginalModel) -> float:
        if isinstance(value, str):
            return float(margin.ppf(float(value[1:])))
        return float(value)

    def build(self) -> SimulationConfig:
        """Resolve limits and calibrate censors into a :class:`SimulationConfig`."""
        cop = self.copula()
        limits = (self._limit(self.limit1, self.margin1), self._limit(self.limit2, self.margin2))
        c1 = c2 = None
        if self.scenario is not Scenario.COMPLETE:
            c1, c2 = calibrate_censoring(
                cop,
                (self.margin1, self.margin2),
                self.censored_fraction,
                self.scenario,
                censor_kind=self.censor_kind,
                censor_sigma=self.censor_sigma,
                shared=self.shared_censor,
                limits=limits,
                seed=self.seed,
            )
        return SimulationConfig(
            copula=cop,
            n=self.n,
            margin1=self.margin1,
            margin2=self.margin2,
            censor1=c1,
            censor2=c2,
            shared_censor=self.shared_censor,
            limit1=limits[0],
            limit2=limits[1],
            seed=self.seed,
        )


_SCENARIO_ALIASES = {
    "none": Scenario.COMPLETE,
    "complete": Scenario.COMPLETE,
    "single": Scenario.SINGLE1,
    "single1": Scenario.SINGLE1,
    "single2": Scenario.SINGLE2,
    "double": Scenario.DOUBLE,
}


def load_scenario(path_or_text: str | Path) -> ScenarioSpec:
    """Parse a ``key = value`` scenario file (``#`` comments allowed).

    Recognised keys: ``family``, ``tau`` or ``alpha``, ``n``, ``margin1``,
    ``margin2``, ``scenario`` (complete/single/single2/double),
    ``censored_fraction``, ``censor_kind``, ``censor_sigma``, ``shared_censor``,
    ``limit1``, ``limit2``, ``replicates``, ``seed``.
    """
    p = Path(path_or_text) if not isinstance(path_or_text, str) or "\n" not in path_or_text else None
    text = p.read_text() if p is not None else str(path_or_text)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        parser.read_string("[scenario]\n" + text)
    except configparser.Error as exc:
        raise DataError(f"malformed scenario file: {exc}") from None
    kv = dict(parser["scenario"])
    known = {
        "family", "tau", "alpha", "n", "margin1", "margin2", "scenario", "censored_fraction",
        "censor_kind", "censor_sigma", "shared_censor", "limit1", "limit2", "replicates", "seed",
    }
    unknown = set(kv) - known
    if unknown:
        raise DataError(f"unknown scenario key(s): {', '.join(sorted(unknown))}")
    if "family" not in kv or "n" not in kv:
        raise DataError("scenario needs at least 'family' and 'n'")
    try:
        scen_key = kv.get("scenario", "complete").strip().lower()
        if scen_key not in _SCENARIO_ALIASES:
            raise ValueError(f"unknown censoring scenario {scen_key!r}")
        return ScenarioSpec(
            family=Family.parse(kv["family"]),
            n=int(kv["n"]),
            tau=float(kv["tau"]) if "tau" in kv else None,
            alpha=float(kv["alpha"]) if "alpha" in kv else None,
            margin1=MarginalModel.parse(kv.get("margin1", "exponential(1)")),
            margin2=MarginalModel.parse(kv.get("margin2", "exponential(1)")),
            scenario=_SCENARIO_ALIASES[scen_key],
            censored_fraction=float(kv.get("censored_fraction", 0.2)),
            censor_kind=kv.get("censor_kind", "exponential").strip().lower(),
            censor_sigma=float(kv.get("censor_sigma", 1.0)),
            shared_censor=kv.get("shared_censor", "false").strip().lower() in ("1", "true", "yes"),
            limit1=_parse_limit(kv.get("limit1", "inf")),
            limit2=_parse_limit(kv.get("limit2", "inf")),
            replicates=int(kv.get("replicates", 1)),
            seed=int(kv.get("seed", 0)),
        )
    except ValueError as exc:
        raise DataError(str(exc)) from None


def with_copula(config: SimulationConfig, copula: Copula, n: int | None = None) -> SimulationConfig:
    return replace(config, copula=copula, n=config.n if n is None else n)
