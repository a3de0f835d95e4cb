"""Command-line front end.

Commands
--------
``fit``              tau-inversion and pseudo-MLE fits with L2 distances
``select``           every validation procedure, report plus curve table
``simulate``         draw censored samples from a scenario file
``gof``              imputation goodness-of-fit test of one family
``curves``           empirical and candidate K/lambda curves
``reproduce-table``  rerun a simulation study

Exit status is 0 on success, 2 for bad input and 3 for numerical failures;
failures also print ``{"error": {...}}`` on stderr.
"""

from __future__ import annotations

import argparse
import inspect
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .copulas import Copula, Family
from .data import DataError, load_csv, load_scenario, save_csv, simulate_censored
from .kendall import CurveTable, generator_estimate, graphical_curves
from .selection import (
    DEFAULT_CANDIDATES,
    NumericalError,
    PipelineConfig,
    _clean,
    estimate_curve,
    fit_alpha,
    select,
    wang_gof,
)
from .studies import TABLES
from .survival import KernelSpec

SCHEMA_PATH = Path(__file__).with_name("report.schema.json")

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """Argument errors produce the machine-readable error JSON (``--help``
    still prints the usage text)."""

    def error(self, message):
        print(json.dumps({"error": {"class": "input", "type": "UsageError", "message": message}}), file=sys.stderr)
        sys.exit(EXIT_INPUT)


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _candidates(text: str) -> list[Family]:
    try:
        fams = [Family.parse(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    if not fams:
        raise argparse.ArgumentTypeError("no candidate families")
    return fams


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", type=Path, help="output directory (created if missing)")
    common.add_argument("--seed", type=int, help="random seed (required by stochastic commands)")

    pipe = _Parser(add_help=False)
    pipe.add_argument(
        "--candidates",
        type=_candidates,
        default=list(DEFAULT_CANDIDATES),
        help="comma-separated families (default: clayton,frank,gumbel,joe)",
    )
    pipe.add_argument("--estimator", choices=["flexible", "auto", "counting", "avk"], default="flexible")
    pipe.add_argument("--kernel", choices=["epanechnikov", "gaussian", "uniform"], default="epanechnikov")
    pipe.add_argument("--bandwidth", type=_positive_float, help="fixed bandwidth (default: rule of thumb)")
    pipe.add_argument("--bandwidth-factor", type=_positive_float, default=1.0, help="rule-of-thumb constant")
    pipe.add_argument("--w", type=float, default=0.5, help="weight of the margin-2-conditioned branch")
    pipe.add_argument("--deficit", choices=["atone", "renormalize"], default="atone")
    pipe.add_argument("--nu0", type=float, default=0.5, help="generator normalization point")

    p = _Parser(prog="archicens", description="Archimedean copula selection under censoring")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", parents=[common, pipe], help="tau-inversion and pseudo-MLE fits")
    s.add_argument("input", type=Path)

    s = sub.add_parser("select", parents=[common, pipe], help="full validation pipeline")
    s.add_argument("input", type=Path)
    s.add_argument("--B", type=_nonneg_int, default=1000, help="bootstrap replicates (0 skips)")
    s.add_argument("--M", type=_nonneg_int, default=5, help="imputations for the GOF test (0 skips)")
    s.add_argument("--combine", choices=["mean", "rubin"], default="mean")
    s.add_argument("--jobs", type=int, default=1, help="worker processes for the bootstrap")
    s.add_argument("--svg", action="store_true", help="also render curves.svg (needs matplotlib)")

    s = sub.add_parser("simulate", parents=[common], help="simulate from a scenario file")
    s.add_argument("scenario", type=Path)
    s.add_argument("--replicates", type=int, help="override the scenario's replicate count")

    s = sub.add_parser("gof", parents=[common, pipe], help="goodness-of-fit test of one family")
    s.add_argument("input", type=Path)
    s.add_argument("--family", required=True, type=Family.parse)
    s.add_argument("--alpha", type=float, help="parameter (default: tau inversion)")
    s.add_argument("--M", type=_nonneg_int, default=5)
    s.add_argument("--combine", choices=["mean", "rubin"], default="mean")
    s.add_argument("--scale", choices=["cdf", "survival"], default="cdf")

    s = sub.add_parser("curves", parents=[common, pipe], help="empirical and candidate Kendall curves")
    s.add_argument("input", type=Path)
    s.add_argument("--svg", action="store_true", help="also render curves.svg (needs matplotlib)")

    s = sub.add_parser("reproduce-table", parents=[common], help="rerun a simulation study")
    s.add_argument("table", choices=sorted(TABLES))
    s.add_argument("--replicates", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--B", type=int)
    s.add_argument("--M", type=int)
    s.add_argument("--jobs", type=int, default=1)
    return p


def _pipeline(args) -> PipelineConfig:
    kernel = KernelSpec(args.kernel, args.bandwidth, args.bandwidth_factor)
    return PipelineConfig(args.estimator, kernel, args.w, args.deficit)


def _need_seed(args, why: str) -> int:
    if args.seed is None:
        raise InputError(f"--seed is required for {why}")
    return args.seed


def _outdir(args) -> Path | None:
    if args.out is None:
        return None
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _curve_table(sample, args, config: PipelineConfig) -> CurveTable:
    curve = estimate_curve(sample, config)
    table = graphical_curves(curve, args.candidates)
    nu = table.columns["nu"]
    inner = (nu > 0) & (nu < 1)
    phi = np.full(len(nu), np.nan)
    try:
        phi[inner] = generator_estimate(curve, args.nu0, nu[inner]).phi_values
    except ValueError:
        table.notes.append("generator estimate unavailable (degenerate curve)")
    table.columns["phi_hat"] = phi
    return table


def _write_svg(table: CurveTable, path: Path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise InputError("--svg needs matplotlib (pip install 'artifact[plot]')") from exc
    plt.rcParams["svg.hashsalt"] = "archicens"
    fig, ax = plt.subplots(figsize=(6, 4))
    nu = table.columns["nu"]
    ax.step(nu, table.columns["lambda_hat"], where="post", color="black", label="empirical")
    for name, col in table.columns.items():
        if name.endswith("_lambda"):
            ax.plot(nu, col, label=name.removesuffix("_lambda"))
    ax.set_xlabel("nu")
    ax.set_ylabel("lambda(nu)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _emit(obj: dict, out: Path | None, name: str) -> None:
    text = json.dumps(_clean(obj), indent=2, allow_nan=False)
    if out is not None:
        (out / name).write_text(text + "\n")
    print(text)


def cmd_fit(args) -> int:
    sample = load_csv(args.input)
    config = _pipeline(args)
    report = select(sample, args.candidates, B=0, M=0, config=config, nu0=args.nu0)
    out = _outdir(args)
    if out is not None:
        _curve_table(sample, args, config).to_csv(out / "curves.csv")
    _emit(report.to_dict(), out, "report.json")
    return EXIT_OK


def cmd_select(args) -> int:
    sample = load_csv(args.input)
    config = _pipeline(args)
    seed = _need_seed(args, "select") if (args.B > 0 or args.M > 0) else (args.seed or 0)
    report = select(
        sample, args.candidates, B=args.B, M=args.M, seed=seed, config=config, nu0=args.nu0,
        combine=args.combine, n_jobs=args.jobs,
    )
    out = _outdir(args)
    if out is not None:
        table = _curve_table(sample, args, config)
        table.to_csv(out / "curves.csv")
        if args.svg:
            _write_svg(table, out / "curves.svg")
    _emit(report.to_dict(), out, "report.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = load_scenario(args.scenario)
    if args.seed is not None:
        spec.seed = args.seed
    reps = spec.replicates if args.replicates is None else args.replicates
    if reps < 1:
        raise InputError("replicates must be >= 1")
    config = spec.build()
    out = _outdir(args) or Path(".")
    names = []
    for r in range(reps):
        name = "sample.csv" if reps == 1 else f"sample_{r:04d}.csv"
        save_csv(simulate_censored(config, r), out / name)
        names.append(name)
    print(json.dumps({"files": names, "seed": spec.seed, "n": spec.n, "family": spec.family.value}))
    return EXIT_OK


def cmd_gof(args) -> int:
    sample = load_csv(args.input)
    seed = _need_seed(args, "gof")
    config = _pipeline(args)
    if args.M < 1:
        raise InputError("--M must be >= 1")
    if args.alpha is not None:
        cop = Copula(args.family, args.alpha)
        tau = None
    else:
        tau = estimate_curve(sample, config).tau_hat
        cop, _ = fit_alpha(args.family, tau)
    g = wang_gof(sample, cop, args.M, seed, combine=args.combine, scale=args.scale)
    result = {
        "family": args.family.value,
        "alpha": cop.alpha,
        "tau_hat": tau,
        "statistic": g.statistic,
        "p_value": g.p_value,
        "z_values": g.z_values,
        "M": g.M,
        "combine": g.combine,
        "scale": args.scale,
        "seed": seed,
        "flags": g.flags,
        "config": config.echo(),
    }
    _emit(result, _outdir(args), "gof.json")
    return EXIT_OK


def cmd_curves(args) -> int:
    sample = load_csv(args.input)
    table = _curve_table(sample, args, _pipeline(args))
    out = _outdir(args)
    if out is None:
        if args.svg:
            raise InputError("--svg needs --out")
        names = list(table.columns)
        print(",".join(names))
        for row in zip(*(table.columns[c] for c in names)):
            print(",".join(repr(float(v)) for v in row))
    else:
        table.to_csv(out / "curves.csv")
        if args.svg:
            _write_svg(table, out / "curves.svg")
    for note in table.notes:
        print(f"note: {note}", file=sys.stderr)
    return EXIT_OK


def cmd_reproduce_table(args) -> int:
    seed = _need_seed(args, "reproduce-table")
    fn = TABLES[args.table]
    accepted = inspect.signature(fn).parameters
    kw = {"seed": seed}
    for name, key in (("replicates", "replicates"), ("n", "n"), ("B", "B"), ("M", "M"), ("jobs", "n_jobs")):
        val = getattr(args, name)
        if val is None or (name == "jobs" and key not in accepted):
            continue
        if key not in accepted:
            raise InputError(f"table {args.table} does not take --{name}")
        if val < 1:
            raise InputError(f"--{name} must be >= 1")
        kw[key] = val
    table = fn(**kw)
    out = _outdir(args)
    if out is not None:
        table.to_csv(out / f"table_{args.table}.csv")
    print(table.to_text())
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "select": cmd_select,
    "simulate": cmd_simulate,
    "gof": cmd_gof,
    "curves": cmd_curves,
    "reproduce-table": cmd_reproduce_table,
}


def _fail(kind: str, exc: BaseException, code: int) -> int:
    err = {"class": kind, "type": type(exc).__name__, "message": str(exc)}
    line = getattr(exc, "line", None)
    if line is not None:
        err["line"] = line
    print(json.dumps({"error": err}), file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BrokenPipeError:
        # downstream reader closed early (``| head``); not an error
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail("numerical", exc, EXIT_NUMERICAL)
    except (DataError, InputError, ValueError, OSError) as exc:
        return _fail("input", exc, EXIT_INPUT)


if __name__ == "__main__":
    sys.exit(main())
