"""Command-line interface: CSV tables of asymptotic and simulated PCR risk.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 degenerate
linear algebra.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import generalrisk as gr
from . import pcrsim, polyrisk
from .densities import DensitySpec
from .exceptions import DomainError, SolverError

EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_LINALG = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".9g")


def _grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if not step > 0 or stop < start:
                raise ValueError
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid grid {text!r}; use start:stop:step or a,b,c") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _write(rows: list[list], header: list[str], out: str | None):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    if out:
        Path(out).write_text(buf.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(buf.getvalue())


def _poly_model(args) -> polyrisk.PolyModel:
    return polyrisk.PolyModel(args.kappa, args.beta, args.bigN, args.sigma)


def _load_density(path: str) -> DensitySpec:
    try:
        config = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise DomainError(f"cannot read density spec {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DomainError(f"density spec {path} is not valid JSON: {exc.msg}") from None
    return DensitySpec.from_config(config)


# subcommands -------------------------------------------------------------------


def run_curve(args):
    model = _poly_model(args)
    if not args.exclusion > 0:
        raise DomainError("--exclusion must be positive")
    for a in args.alpha_grid:
        if not 0 <= a <= 1:
            raise DomainError(f"--alpha-grid values must lie in [0, 1], got {a}")
    points = polyrisk.risk_curve(model, args.alpha_grid, args.exclusion)
    rows = [[p.alpha, p.regime.value, p.risk] for p in points]
    _write(rows, ["alpha", "regime", "risk"], args.out)


def run_optimum(args):
    model = _poly_model(args)
    cmp = polyrisk.compare(model)
    fp = polyrisk.fixed_point(model, 1.0)
    rows = [
        ["alpha_star", cmp.alpha_star],
        ["risk_alpha_star", cmp.risk_at_alpha_star],
        ["s_star", fp.s_star],
        ["m0", fp.m0],
        ["m0_prime", fp.m0_prime],
        ["risk_one", cmp.risk_at_one],
        ["interpolation_wins", cmp.interpolation_wins],
        ["verdict", cmp.verdict],
    ]
    _write(rows, ["quantity", "value"], args.out)


def _asymptotic(model: polyrisk.PolyModel, p: int, N: int, exclusion: float) -> float:
    if p == 0:
        # predicting zero: the finite-N risk is known exactly
        return float(pcrsim.make_sigma(N, model.kappa).sum()) + model.sigma**2
    alpha = p / N
    regime = polyrisk.classify(alpha, model.beta, exclusion)
    if regime is polyrisk.Regime.EXCLUDED:
        return math.nan
    return polyrisk.risk(model, alpha)


def run_simulate(args):
    if args.p_list is not None and args.alpha_list is not None:
        raise DomainError("give only one of --p-list and --alpha-list")
    if args.p_list is None and args.alpha_list is None:
        raise DomainError("one of --p-list or --alpha-list is required")
    if args.p_list is not None:
        p_values = args.p_list
    else:
        p_values = [int(round(a * args.bigN)) for a in args.alpha_list]
    config = pcrsim.SimConfig(
        N=args.bigN,
        n=args.n,
        kappa=args.kappa,
        sigma=args.sigma,
        p_values=p_values,
        replicates=args.replicates,
        seed=args.seed,
        theta_draws=args.theta_draws,
    )
    if config.theta_draws == 1:
        raise DomainError("--theta-draws must be 0 or at least 2")
    model = polyrisk.PolyModel(args.kappa, config.beta, args.bigN, args.sigma)
    if config.n in config.p_values:
        print(
            f"warning: p={config.n} equals n (interpolation threshold); the Gram matrix is near singular",
            file=sys.stderr,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", pcrsim.InterpolationThresholdWarning)
        estimates = pcrsim.mc_curve(config, n_jobs=args.n_jobs)

    header = ["p", "alpha", "mc_mean", "mc_stderr", "asymptotic", "rel_err"]
    if config.theta_draws:
        header += ["sampled_mean", "sampled_stderr"]
    rows, failed = [], False
    for est in estimates:
        asym = _asymptotic(model, est.p, args.bigN, args.exclusion)
        rel = abs(est.mean - asym) / asym if asym and math.isfinite(asym) else math.nan
        row = [est.p, est.p / args.bigN, est.mean, est.stderr, asym, rel]
        if config.theta_draws:
            row += [est.sampled_mean, est.sampled_stderr]
        rows.append(row)
        for msg in est.failures:
            failed = True
            print(f"error: p={est.p}: {msg}", file=sys.stderr)
    _write(rows, header, args.out)
    return EXIT_LINALG if failed else 0


def run_spectrum(args):
    for p in args.p:
        if not 1 <= p <= args.bigN:
            raise DomainError(f"--p must lie in [1, bigN], got {p}")
    if not args.kappa > 0:
        raise DomainError("--kappa must be positive")
    rows = []
    for p in args.p:
        rep = pcrsim.empirical_spectrum(p, args.bigN, args.kappa)
        rows.append([rep.p, rep.ks_distance])
    _write(rows, ["p", "ks_distance"], args.out)


def run_stieltjes(args):
    config = pcrsim.SimConfig(N=args.bigN, n=args.n, kappa=args.kappa, replicates=args.replicates, seed=args.seed)
    if not config.n < args.p <= config.N:
        raise DomainError(f"--p must satisfy n < p <= bigN, got p={args.p}")
    if args.mu < 0:
        raise DomainError("--mu must be non-negative")
    model = polyrisk.PolyModel(args.kappa, config.beta, args.bigN)
    fp = polyrisk.fixed_point(model, args.p / args.bigN)
    values = np.array(
        [
            pcrsim.empirical_stieltjes(pcrsim.sample_design(config, i), args.p, args.kappa, args.bigN, args.mu)
            for i in range(config.replicates)
        ]
    )
    m_err = values[:, 0].std(ddof=1) / math.sqrt(len(values)) if len(values) > 1 else 0.0
    row = [values[:, 0].mean(), m_err, fp.m0, values[:, 1].mean(), fp.m0_prime]
    _write([row], ["m_hat_mean", "m_hat_stderr", "m0_theory", "mprime_hat_mean", "mprime_theory"], args.out)


def _general_model(args) -> gr.GeneralModel:
    spec = _load_density(args.density)
    return gr.GeneralModel(spec, args.beta, args.bigN, args.cN, args.sigma)


def run_general_curve(args):
    if args.nu_grid is None:
        raise DomainError("--nu-grid is required")
    model = _general_model(args)
    if any(nu < 0 for nu in args.nu_grid):
        raise DomainError("--nu-grid values must be non-negative")
    rows = []
    for nu in sorted(args.nu_grid):
        alpha = gr.alpha_of_nu(model.spec, nu)
        regime = polyrisk.classify(alpha, model.beta, args.exclusion)
        value = math.nan if regime is polyrisk.Regime.EXCLUDED else gr.risk_general(model.with_nu(nu))
        rows.append([nu, alpha, regime.value, value])
    _write(rows, ["nu", "alpha", "regime", "risk"], args.out)


def run_general_optimum(args):
    model = _general_model(args)
    if model.sigma != 0:
        raise DomainError("general-optimum is defined for --sigma 0 only")
    cmp = gr.compare_general(model)
    best = cmp.best_under
    rows = [
        ["nu_b", gr.nu_b(model)],
        ["nu_star", "AtInfinity" if best.at_infinity else best.nu_star],
        ["min_under_risk", best.min_risk],
        ["s_star_f_eta1", cmp.s_star_f],
        ["risk_eta1", cmp.risk_at_eta1],
        ["interpolation_wins", cmp.interpolation_wins],
    ]
    _write(rows, ["quantity", "value"], args.out)


# parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcrrisk", description="Asymptotic and simulated risk of principal component regression.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def poly_flags(p, sigma=True):
        p.add_argument("--kappa", type=float, required=True, help="eigenvalue decay exponent")
        p.add_argument("--beta", type=float, required=True, help="limit of n/N")
        p.add_argument("--bigN", type=int, default=1000, help="ambient dimension N")
        if sigma:
            p.add_argument("--sigma", type=float, default=0.0, help="noise standard deviation")

    def out_flag(p):
        p.add_argument("--out", help="write CSV here instead of standard output")

    p = sub.add_parser("curve", help="asymptotic risk as a function of alpha = p/N")
    poly_flags(p)
    p.add_argument("--alpha-grid", type=_grid, default=_grid("0.01:1.0:0.01"))
    p.add_argument("--exclusion", type=float, default=polyrisk.DEFAULT_EXCLUSION)
    out_flag(p)
    p.set_defaults(func=run_curve)

    p = sub.add_parser("optimum", help="optimal alpha below the threshold versus alpha = 1")
    poly_flags(p)
    out_flag(p)
    p.set_defaults(func=run_optimum)

    p = sub.add_parser("simulate", help="Monte Carlo conditional risk against the asymptotic curve")
    p.add_argument("--bigN", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--p-list", type=_int_list)
    p.add_argument("--alpha-list", type=_grid)
    p.add_argument("--replicates", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theta-draws", type=int, default=0, help="0 skips the sampled-risk oracle")
    p.add_argument("--exclusion", type=float, default=polyrisk.DEFAULT_EXCLUSION)
    p.add_argument("--n-jobs", type=_positive_int, default=1)
    out_flag(p)
    p.set_defaults(func=run_simulate)

    p = sub.add_parser("spectrum", help="KS distance of the rescaled spectrum to its limit")
    p.add_argument("--bigN", type=_positive_int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--p", type=_int_list, required=True)
    out_flag(p)
    p.set_defaults(func=run_spectrum)

    p = sub.add_parser("stieltjes", help="empirical Stieltjes transform at zero against the fixed point")
    p.add_argument("--bigN", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--replicates", type=_positive_int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu", type=float, default=0.0, help="evaluate at z = -mu (diagnostic)")
    out_flag(p)
    p.set_defaults(func=run_stieltjes)

    for name, func, helptext in (
        ("general-curve", run_general_curve, "risk over a threshold grid for a general density"),
        ("general-optimum", run_general_optimum, "optimal threshold versus keeping all components"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--density", required=True, help="JSON density spec")
        p.add_argument("--beta", type=float, required=True)
        p.add_argument("--bigN", type=_positive_int, default=1000)
        p.add_argument("--cN", type=float, default=1.0)
        p.add_argument("--sigma", type=float, default=0.0)
        if name == "general-curve":
            p.add_argument("--nu-grid", type=_grid)
            p.add_argument("--exclusion", type=float, default=polyrisk.DEFAULT_EXCLUSION)
        out_flag(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except DomainError as exc:
        print(f"pcrrisk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        print(f"pcrrisk: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except np.linalg.LinAlgError as exc:
        print(f"pcrrisk: linear algebra error: {exc}", file=sys.stderr)
        return EXIT_LINALG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
