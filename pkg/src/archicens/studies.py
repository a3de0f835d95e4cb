"""
Simulation studies: independence, omnibus, graphical, bootstrap, GOF and limit.

Each study returns a :class:`StudyTable` (rows of plain dicts) that can be
printed or written as CSV. Unless stated otherwise margins are unit
exponential and censors exponential, calibrated so that a target fraction of
pairs (default 20%) has at least one censored component.
"""

from __future__ import annotations

import csv
import math
import warnings
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import special

from .copulas import Family, alpha_from_tau, as_generator
from .data import (
    CENSORING_PRESETS,
    UNIT_EXPONENTIAL,
    MarginalModel,
    Scenario,
    SimulationConfig,
    calibrate_censoring,
    simulate_censored,
)
from .selection import (
    DEFAULT_CANDIDATES,
    DEFAULT_PIPELINE,
    PipelineConfig,
    bootstrap_pseudo_p,
    estimate_curve,
    fit_alpha,
    l2_distance,
    omnibus_table,
    wang_gof,
)
from .survival import EstimatorWarning

__all__ = [
    "NormalCopula",
    "StudyTable",
    "scenario_config",
    "independence_study",
    "omnibus_study",
    "omnibus_rejection_study",
    "graphical_study",
    "bootstrap_study",
    "gof_study",
    "limit_study",
    "TABLES",
]

_SCENARIOS = {"none": Scenario.COMPLETE, "single": Scenario.SINGLE1, "double": Scenario.DOUBLE}


@dataclass(frozen=True)
class NormalCopula:
    """Gaussian copula; only sampling is provided (used as a non-Archimedean
    data generator)."""

    rho: float

    def sample(self, n: int, rng) -> np.ndarray:
        z = rng.standard_normal((n, 2))
        z[:, 1] = self.rho * z[:, 0] + math.sqrt(1.0 - self.rho**2) * z[:, 1]
        return special.ndtr(z)

    def tau(self) -> float:
        return 2.0 / math.pi * math.asin(self.rho)


@dataclass
class StudyTable:
    name: str
    rows: list[dict]
    meta: dict = field(default_factory=dict)

    def columns(self) -> list[str]:
        cols: list[str] = []
        for r in self.rows:
            cols.extend(k for k in r if k not in cols)
        return cols

    def to_csv(self, path: str | Path) -> None:
        cols = self.columns()
        with Path(path).open("w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=cols)
            w.writeheader()
            w.writerows(self.rows)

    def to_text(self) -> str:
        cols = self.columns()
        fmt = lambda v: f"{v:.4f}" if isinstance(v, float) else str(v)
        cells = [[fmt(r.get(c, "")) for c in cols] for r in self.rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) if cells else len(c) for i, c in enumerate(cols)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in cells]
        return f"# {self.name}\n" + "\n".join(lines)


@lru_cache(maxsize=256)
def _censors(copula, scenario: Scenario, target: float):
    if scenario is Scenario.COMPLETE:
        return None, None
    return calibrate_censoring(copula, (UNIT_EXPONENTIAL, UNIT_EXPONENTIAL), target, scenario)


def scenario_config(
    family: Family | str,
    tau: float,
    n: int,
    scenario: str = "double",
    seed: int = 0,
    target: float = 0.2,
) -> SimulationConfig:
    """Unit-exponential margins, exponential censors at the target fraction.

    ``scenario`` is ``"none"``, ``"single"`` (margin 1 censored) or ``"double"``.
    """
    fam = Family.parse(family)
    cop = as_generator(Family.INDEPENDENCE) if tau == 0.0 else alpha_from_tau(fam, tau)
    scen = _SCENARIOS[scenario]
    c1, c2 = _censors(cop, scen, target)
    return SimulationConfig(cop, n, censor1=c1, censor2=c2, seed=seed)


def _quiet():
    ctx = warnings.catch_warnings()
    ctx.__enter__()
    warnings.simplefilter("ignore", EstimatorWarning)
    warnings.simplefilter("ignore", RuntimeWarning)
    return ctx


def independence_study(
    replicates: int = 1000,
    n: int = 1000,
    seed: int = 0,
    scenario: str = "double",
    target: float = 0.2,
    config: PipelineConfig = DEFAULT_PIPELINE,
    candidates: Sequence[Family | str] = DEFAULT_CANDIDATES,
) -> StudyTable:
    """Mean tau-inversion estimate per family on independent data.

    At ``tau = 0`` every family reduces to the independence copula, so one
    independent sample per replicate serves all candidates.
    """
    fams = [Family.parse(c) for c in candidates]
    cfg = scenario_config(Family.CLAYTON, 0.0, n, scenario, seed, target)
    vals = {f: [] for f in fams}
    taus = []
    ctx = _quiet()
    try:
        for r in range(replicates):
            curve = estimate_curve(simulate_censored(cfg, r), config)
            taus.append(curve.tau_hat)
            for f in fams:
                vals[f].append(fit_alpha(f, curve.tau_hat)[0].alpha)
    finally:
        ctx.__exit__(None, None, None)
    rows = []
    for f in fams:
        v = np.asarray(vals[f])
        rows.append(
            {
                "family": f.value,
                "mean_alpha_hat": float(v.mean()),
                "mc_se": float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else float("nan"),
                "target": 0.0 if f in (Family.CLAYTON, Family.FRANK) else 1.0,
            }
        )
    return StudyTable(
        "independence",
        rows,
        {"replicates": replicates, "n": n, "scenario": scenario, "mean_tau_hat": float(np.mean(taus))},
    )


def omnibus_study(
    n: int = 1000,
    tau: float = 0.4,
    seed: int = 0,
    scenarios: Sequence[str] = ("none", "single", "double"),
    families: Sequence[Family | str] = DEFAULT_CANDIDATES,
    config: PipelineConfig = DEFAULT_PIPELINE,
) -> StudyTable:
    """One realization per (scenario, true family): alpha_hat, alpha_star, gap."""
    rows = []
    ctx = _quiet()
    try:
        for si, scen in enumerate(scenarios):
            for fi, fam in enumerate(families):
                s = simulate_censored(scenario_config(fam, tau, n, scen, seed), (si, fi))
                for fit in omnibus_table(s, DEFAULT_CANDIDATES, config=config):
                    rows.append(
                        {
                            "scenario": scen,
                            "true": Family.parse(fam).value,
                            "candidate": fit.family,
                            "alpha_hat": fit.alpha_hat,
                            "alpha_star": fit.alpha_star,
                            "gap": fit.omnibus_gap,
                        }
                    )
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("omnibus", rows, {"n": n, "tau": tau})


def omnibus_rejection_study(
    replicates: int = 1000,
    n: int = 1000,
    tau: float = 0.4,
    seed: int = 0,
    scenarios: Sequence[str] = ("none", "single", "double"),
    families: Sequence[Family | str] = DEFAULT_CANDIDATES,
    config: PipelineConfig = DEFAULT_PIPELINE,
) -> StudyTable:
    """Fraction of replicates in which each candidate does not have the
    smallest omnibus gap."""
    rows = []
    cands = [f.value for f in DEFAULT_CANDIDATES]
    ctx = _quiet()
    try:
        for si, scen in enumerate(scenarios):
            for fi, fam in enumerate(families):
                cfg = scenario_config(fam, tau, n, scen, seed)
                wins = Counter()
                for r in range(replicates):
                    s = simulate_censored(cfg, (si, fi, r))
                    fits = omnibus_table(s, DEFAULT_CANDIDATES, config=config)
                    wins[min(fits, key=lambda f: (f.omnibus_gap, f.l2_distance)).family] += 1
                row = {"scenario": scen, "true": Family.parse(fam).value}
                row.update({c: 1.0 - wins[c] / replicates for c in cands})
                rows.append(row)
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("omnibus-rejection", rows, {"replicates": replicates, "n": n, "tau": tau})


def graphical_study(
    replicates: int = 100,
    n: int = 1000,
    tau: float = 0.4,
    seed: int = 0,
    scenario: str = "double",
    families: Sequence[Family | str] = DEFAULT_CANDIDATES,
    config: PipelineConfig = DEFAULT_PIPELINE,
) -> StudyTable:
    """Fraction of replicates in which the true family has the smallest L2
    distance to the empirical Kendall curve."""
    rows = []
    ctx = _quiet()
    try:
        for fi, fam in enumerate(families):
            cfg = scenario_config(fam, tau, n, scenario, seed)
            hits = 0
            for r in range(replicates):
                curve = estimate_curve(simulate_censored(cfg, (fi, r)), config)
                d = {c.value: l2_distance(curve, fit_alpha(c, curve.tau_hat)[0]) for c in DEFAULT_CANDIDATES}
                hits += min(d, key=d.get) == Family.parse(fam).value
            rows.append({"true": Family.parse(fam).value, "nearest_fraction": hits / replicates})
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("graphical", rows, {"replicates": replicates, "n": n, "tau": tau, "scenario": scenario})


def bootstrap_study(
    rows_spec: Sequence[tuple[str, str, float]] = (("double", "frank", 0.4),),
    n: int = 500,
    B: int = 1000,
    seed: int = 0,
    config: PipelineConfig = DEFAULT_PIPELINE,
    n_jobs: int = 1,
) -> StudyTable:
    """Pseudo p-values on one simulated sample per ``(scenario, family, tau)``."""
    rows = []
    ctx = _quiet()
    try:
        for k, (scen, fam, tau) in enumerate(rows_spec):
            s = simulate_censored(scenario_config(fam, tau, n, scen, seed), (k,))
            res = bootstrap_pseudo_p(s, DEFAULT_CANDIDATES, B, seed + k, config=config, n_jobs=n_jobs)
            row = {"scenario": scen, "true": Family.parse(fam).value, "tau": tau}
            row.update(res.p)
            row["winner"] = res.winner
            row["dropped"] = res.dropped
            rows.append(row)
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("bootstrap", rows, {"n": n, "B": B})


def gof_study(
    replicates: int = 1000,
    n: int = 200,
    taus: Sequence[float] = (0.2, 0.4, 0.6),
    true_family: Family | str = Family.FRANK,
    scenario: str = "none",
    M: int = 5,
    seed: int = 0,
    level: float = 0.05,
    config: PipelineConfig = DEFAULT_PIPELINE,
    combine: str = "mean",
) -> StudyTable:
    """Rejection rates of the imputation GOF test for each null family.

    The null parameter is the tau-inversion estimate from the configured
    pipeline.
    """
    rows = []
    ctx = _quiet()
    try:
        for ti, tau in enumerate(taus):
            cfg = scenario_config(true_family, tau, n, scenario, seed)
            rej = Counter()
            for r in range(replicates):
                s = simulate_censored(cfg, (ti, r))
                th = estimate_curve(s, config).tau_hat
                for fam in DEFAULT_CANDIDATES:
                    g = wang_gof(s, fit_alpha(fam, th)[0], M, seed * 1_000_003 + r, combine=combine)
                    rej[fam.value] += g.p_value < level
            row = {"scenario": scenario, "true": Family.parse(true_family).value, "tau": tau}
            row.update({f.value: rej[f.value] / replicates for f in DEFAULT_CANDIDATES})
            rows.append(row)
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("gof", rows, {"replicates": replicates, "n": n, "M": M, "level": level})


LIMIT_MARGINS = (MarginalModel.lognormal(8.0, 1.0), MarginalModel.lognormal(7.0, 3.0))


def limit_study(
    replicates: int = 100,
    n: int = 500,
    rho: float = 0.35,
    quantiles: tuple[float, float] = (0.99, 0.75),
    presets: Sequence[str] = ("low", "medium", "high"),
    seed: int = 0,
    config: PipelineConfig = PipelineConfig(deficit="renormalize"),
    copula=None,
) -> StudyTable:
    """Effect of lowering the limits on tau-hat and on the L2-selected family.

    Lognormal margins ``(8, 1)`` and ``(7, 3)`` joined by a Gaussian copula with
    correlation ``rho`` (override with ``copula``), independent lognormal
    censors with unit log-scale calibrated to each preset's total censoring
    target. The limits are quantiles of the uncapped observed values
    ``min(T_j, X_j)``. Both limit settings are applied to the same latent draws.

    The default pipeline rescales the joint estimate (``deficit="renormalize"``):
    nothing beyond a fixed limit is ever observed, so the unallocated mass is
    large and counting it at level 1 would push tau-hat towards one.
    """
    cop = NormalCopula(rho) if copula is None else copula
    rows = []
    ctx = _quiet()
    try:
        for pi, preset in enumerate(presets):
            c1, c2 = calibrate_censoring(
                cop, LIMIT_MARGINS, CENSORING_PRESETS[preset], "double", censor_kind="lognormal", seed=seed
            )
            pilot = simulate_censored(SimulationConfig(cop, 200_000, *LIMIT_MARGINS, c1, c2, seed=seed), (pi, 10**6))
            limits = {q: (float(np.quantile(pilot.y1, q)), float(np.quantile(pilot.y2, q))) for q in quantiles}
            same = 0
            taus = {q: [] for q in quantiles}
            picks = {q: Counter() for q in quantiles}
            for r in range(replicates):
                chosen = {}
                for q in quantiles:
                    cfg = SimulationConfig(cop, n, *LIMIT_MARGINS, c1, c2, limit1=limits[q][0], limit2=limits[q][1], seed=seed)
                    curve = estimate_curve(simulate_censored(cfg, (pi, r)), config)
                    d = {c.value: l2_distance(curve, fit_alpha(c, curve.tau_hat)[0]) for c in DEFAULT_CANDIDATES}
                    chosen[q] = min(d, key=d.get)
                    taus[q].append(curve.tau_hat)
                    picks[q][chosen[q]] += 1
                same += len(set(chosen.values())) == 1
            row = {"preset": preset, "agreement": same / replicates}
            for q in quantiles:
                row[f"tau_hat_q{q:g}"] = float(np.mean(taus[q]))
                row[f"mode_q{q:g}"] = picks[q].most_common(1)[0][0]
            rows.append(row)
    finally:
        ctx.__exit__(None, None, None)
    return StudyTable("limit", rows, {"replicates": replicates, "n": n, "rho": rho, "quantiles": list(quantiles)})


TABLES = {
    "4": independence_study,
    "5": omnibus_study,
    "6": omnibus_rejection_study,
    "7": bootstrap_study,
    "8": gof_study,
    "graphical": graphical_study,
    "limit": limit_study,
}
