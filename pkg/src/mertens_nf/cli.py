"""Command-line entry point.

    mertens-nf invariants --q 5
    mertens-nf density --q 5 --eps 0.05 --cutoff 25 --product-cutoff 9999
    mertens-nf reproduce-table1 --zeros-dir data/

Options may also come from a config file (--config run.cfg) with a [DEFAULT]
section and one section per command; command-line flags win.  Exit status is
0 on success, 1 on a domain error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import configparser
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import density as dens
from . import observables as obs
from .fields import EULER_GAMMA, InvariantError, QuadraticField, RationalField, field_invariants
from .output import density_csv, emit_csv, emit_svg, scan_csv, scan_svg
from .sieve import SieveBudgetError, chebyshev_check, default_grid, sieve
from .zeros import ZeroFileError, data_dir, load_field_zeros, load_zeros, validate_counts, zero_file

log = logging.getLogger("mertens_nf")

TABLE1_FIELDS = (5, 13)


class DomainError(Exception):
    pass


def _field(q: int):
    return RationalField() if q == 1 else QuadraticField(q)


def _threads(n: int) -> int:
    return n if n > 0 else (os.cpu_count() or 1)


def _positive(kind):
    def conv(s):
        v = kind(float(s)) if kind is int else kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"expected a positive value, got {s}")
        return v
    return conv


# ---------------------------------------------------------------- commands

def cmd_invariants(args):
    K = _field(args.q)
    inv = field_invariants(K)
    print(f"field            {K.label}")
    print(f"discriminant     {K.discriminant}")
    print(f"fundamental unit {inv.fundamental_unit}")
    print(f"regulator        {inv.regulator:.15g}")
    print(f"class number     {inv.class_number}")
    print(f"residue kappa    {inv.residue:.15g}")
    print(f"L(1, chi)        {inv.l_value:.15g}")
    return 0


def cmd_sieve(args):
    K = _field(args.q)
    res = sieve(K, args.x, threads=_threads(args.threads))
    out = Path(args.out_dir) / f"sieve_q{args.q}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    res.to_csv(out)
    rep = chebyshev_check(res, strict=False)
    print(f"{K.label}: x = {args.x}, pi_K = {res.pi_K[-1]}, psi_K = {res.psi_K[-1]:.10g}")
    print(f"upper Chebyshev bounds hold: {rep.bound_holds}; lying-over sandwich holds: {rep.lying_over_holds}")
    if not rep.sandwich_holds:
        print(f"pi_Q <= pi_K fails first at x = {rep.first_lower_violation:g} (inert primes count at p^2)")
    print(f"wrote {out}")
    return 0 if rep.bound_holds and rep.lying_over_holds else 1


def cmd_mertens(args):
    K = _field(args.q)
    inv = field_invariants(K)
    grid = np.union1d(default_grid(args.x), [float(args.x)])
    res = sieve(K, args.x, grid, threads=_threads(args.threads))
    x = float(args.x)
    prod = res.mertens_product(x)
    main = math.exp(EULER_GAMMA) * inv.residue * math.log(x)
    E = obs.error_term(res, inv, x)
    print(f"{K.label}, x = {args.x}")
    print(f"product          {prod:.12g}")
    print(f"e^gamma kappa log x {main:.12g}")
    print(f"E_K(x)           {E.E_K:.10g}  (in M_K: {E.in_M_K})")
    print(f"A(x)             {obs.a_integral(res, x):.12g}")
    return 0


def cmd_scan(args):
    K = _field(args.q)
    inv = field_invariants(K)
    res = sieve(K, args.x, threads=_threads(args.threads))
    rep = obs.scan(res, inv)
    out = Path(args.out_dir)
    scan_csv(rep, out / "scan.csv")
    scan_svg(rep, out / "e_k_plot.svg", K.label)
    print(f"{K.label} up to {args.x}: {len(rep.sign_changes)} sign changes, "
          f"logarithmic density of M_K {rep.density[-1]:.6f}")
    for a, b in rep.sign_changes[:20]:
        print(f"  sign change in [{a:g}, {b:g}]")
    if len(rep.sign_changes) > 20:
        print(f"  ... {len(rep.sign_changes) - 20} more in scan.csv")
    return 0


def cmd_explicit_check(args):
    K = QuadraticField(args.q)
    inv = field_invariants(K)
    _, _, merged = load_field_zeros(K.discriminant, args.zeros_dir)
    x = float(args.x)
    res = sieve(K, int(args.x), np.array([x]), keep_events=True)
    rows = []
    print(f"{'T':>8} {'|psi res|':>12} {'C_psi':>10} {'|E res|':>12} {'C_E':>10}")
    for T in args.T:
        c = obs.explicit_check(res, merged, inv, x, T)
        rows.append((T, c.psi_residual_mean, c.psi_constant, c.E_residual_mean, c.E_constant))
        print(f"{T:8g} {c.psi_residual_mean:12.6g} {c.psi_constant:10.4g} "
              f"{c.E_residual_mean:12.6g} {c.E_constant:10.4g}")
    emit_csv(Path(args.out_dir) / "explicit_check.csv",
             ("T", "psi_residual_mean", "psi_constant", "E_residual_mean", "E_constant"), rows)
    return 0


def cmd_verify_zeros(args):
    K = QuadraticField(args.q)
    _, _, merged = load_field_zeros(K.discriminant, args.zeros_dir)
    rep = validate_counts(merged, K, args.T, args.slack_factor)
    fields = [("T", rep.T), ("observed", rep.observed), ("main_term", rep.main_term),
              ("deviation", rep.deviation), ("slack", rep.slack),
              ("worst_window", rep.worst_window), ("worst_window_excess", rep.worst_window_excess),
              ("passed", rep.passed)]
    for k, v in fields:
        print(f"{k:20s} {v}")
    emit_csv(Path(args.out_dir) / "zero_counts.csv", [k for k, _ in fields], [[v for _, v in fields]])
    return 0 if rep.passed else 1


def _density_params(args) -> dens.DensityParams:
    return dens.DensityParams(epsilon=args.eps, C=args.cutoff, M=args.M, X=args.product_cutoff, A=args.A)


def _print_density(q, r):
    print(f"q = {q}: delta = {r.delta:.10f}")
    print(f"  b1 = {r.b1:.9g}, M = {r.M}, zeros used = {r.n_zeros}")
    print(f"  poisson {r.poisson_error:.3g}  truncation {r.truncation_error:.3g}  "
          f"product {r.product_error:.3g}  total {r.total_budget:.3g}")
    print(f"  zero rounding (not in total) {r.zero_precision_error:.3g}")
    if r.low_confidence:
        print("  LOW CONFIDENCE: error budget above 1e-4")
    for n in r.notes:
        print(f"  note: {n}")


def cmd_density(args):
    K = QuadraticField(args.q)
    params = _density_params(args)
    _, _, merged = load_field_zeros(K.discriminant, args.zeros_dir)
    t0 = time.perf_counter()
    r = dens.delta_density(params, merged, threads=_threads(args.threads))
    log.info("density for q=%d in %.1fs", args.q, time.perf_counter() - t0)
    _print_density(args.q, r)
    out = Path(args.out_dir)
    density_csv(args.q, r, out / "density.csv")
    t = np.linspace(-params.C, params.C, 801)
    w = dens.omega_hat(t, merged, r.polynomial, X=params.X, threads=_threads(args.threads))
    emit_svg(out / "omega_hat.svg", t, w, title=f"omega_hat for q={args.q}", xlabel="t", ylabel="omega_hat(t)")
    return 0


def cmd_mc_density(args):
    K = QuadraticField(args.q)
    _, _, merged = load_field_zeros(K.discriminant, args.zeros_dir)
    r = dens.monte_carlo_density(merged, int(args.samples), args.seed, args.zero_cutoff,
                                 threads=_threads(args.threads))
    print(f"q = {args.q}: P(Z > 0) = {r.estimate:.6f} +- {r.stderr:.2g} "
          f"({r.n_samples} samples, {r.n_zeros} zeros up to {r.cutoff:g}, seed {r.seed})")
    print(f"  P(Z - 1 > 0) = {r.upper_half:.6f} +- {r.upper_half_stderr:.2g}")
    emit_csv(Path(args.out_dir) / "mc_density.csv",
             ("q", "estimate", "stderr", "upper_half", "n_samples", "cutoff", "n_zeros", "seed"),
             [(args.q, r.estimate, r.stderr, r.upper_half, r.n_samples, r.cutoff, r.n_zeros, r.seed)])
    return 0


def cmd_dissipation(args):
    entries = {}
    for q in args.q_list:
        K = QuadraticField(q)
        try:
            zeta, lchi, _ = load_field_zeros(K.discriminant, args.zeros_dir)
        except FileNotFoundError:
            print(f"q = {q}: no zero data for discriminant {K.discriminant}, skipped")
            continue
        entries[q] = (zeta, lchi)
    if not entries:
        raise DomainError("no field in the list has zero data")
    rows = dens.dissipation_scan(entries, threads=_threads(args.threads))
    print(f"{'q':>5} {'delta':>10} {'|delta-1/2|':>12} {'L-only signed':>14} {'L-only bound':>13} holds")
    for r in rows:
        print(f"{r.q:5d} {r.delta:10.6f} {r.bias:12.6f} {r.l_only_signed:14.6f} {r.l_only_bound:13.6f} {r.bound_holds}")
    emit_csv(Path(args.out_dir) / "dissipation.csv",
             ("q", "delta", "bias", "l_only_signed", "l_only_bound", "bound_holds"),
             [(r.q, r.delta, r.bias, r.l_only_signed, r.l_only_bound, r.bound_holds) for r in rows])
    return 0


def cmd_reproduce_table1(args):
    rows = []
    print(f"{'q':>4} {'delta':>8} {'b1':>14} {'budget':>10}")
    for q in TABLE1_FIELDS:
        K = QuadraticField(q)
        _, _, merged = load_field_zeros(K.discriminant, args.zeros_dir)
        r = dens.delta_density(dens.DensityParams(), merged, threads=_threads(args.threads))
        rows.append((q, round(r.delta, 4), r.delta, r.b1, r.total_budget))
        print(f"{q:4d} {r.delta:8.4f} {r.b1:14.9f} {r.total_budget:10.3g}")
    emit_csv(Path(args.out_dir) / "table1.csv", ("q", "delta_4dp", "delta", "b1", "total_budget"), rows)
    return 0


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mertens-nf", description=__doc__.split("\n")[0])
    p.add_argument("--config", help="key = value config file with [DEFAULT] and per-command sections")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", metavar="command")

    def add(name, func, help_):
        s = sub.add_parser(name, help=help_)
        s.set_defaults(func=func)
        s.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all cores")
        s.add_argument("--out-dir", default=".", help="directory for CSV/SVG output")
        return s

    s = add("invariants", cmd_invariants, "fundamental unit, regulator, class number, residue")
    s.add_argument("--q", type=int, required=True)

    s = add("sieve", cmd_sieve, "prime-ideal counting functions on the default grid")
    s.add_argument("--q", type=int, required=True, help="squarefree q >= 2, or 1 for Q")
    s.add_argument("--x", type=_positive(int), required=True)

    s = add("mertens", cmd_mertens, "Mertens product and E_K at one x")
    s.add_argument("--q", type=int, required=True, help="squarefree q >= 2, or 1 for Q")
    s.add_argument("--x", type=_positive(int), required=True)

    s = add("scan", cmd_scan, "sign changes of E_K and the empirical density of M_K")
    s.add_argument("--q", type=int, required=True, help="squarefree q >= 2, or 1 for Q")
    s.add_argument("--x", type=_positive(int), required=True)

    zeros_help = "directory with zeros_zeta.txt and zeros_L<disc>.txt (default: $MERTENS_NF_DATA or bundled)"

    s = add("explicit-check", cmd_explicit_check, "sieve values against truncated explicit formulas")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--x", type=_positive(int), default=10**4)
    s.add_argument("--T", type=_positive(float), nargs="+", default=[1e2, 1e3, 1e4])
    s.add_argument("--zeros-dir", help=zeros_help)

    s = add("verify-zeros", cmd_verify_zeros, "zero counts against the counting formula")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--T", type=_positive(float), default=1000.0)
    s.add_argument("--slack-factor", type=_positive(float), default=3.0)
    s.add_argument("--zeros-dir", help=zeros_help)

    s = add("density", cmd_density, "logarithmic density of M_K with error budget")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--eps", type=_positive(float), default=1 / 20)
    s.add_argument("--cutoff", type=_positive(float), default=25.0)
    s.add_argument("--product-cutoff", type=_positive(float), default=9999.0)
    s.add_argument("--M", type=_positive(int), default=None)
    s.add_argument("--A", type=int, choices=(0, 1, 2), default=1)
    s.add_argument("--zeros-dir", help=zeros_help)

    s = add("mc-density", cmd_mc_density, "Monte Carlo estimate of the density")
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--samples", type=_positive(float), default=1e6)
    s.add_argument("--seed", type=int, default=42)
    s.add_argument("--zero-cutoff", type=_positive(float), default=1000.0)
    s.add_argument("--zeros-dir", help=zeros_help)

    s = add("dissipation", cmd_dissipation, "density and L-only bounds over several fields")
    s.add_argument("--q-list", type=int, nargs="+", default=[5, 13])
    s.add_argument("--zeros-dir", help=zeros_help)

    s = add("reproduce-table1", cmd_reproduce_table1, "densities for q = 5 and 13 with default parameters")
    s.add_argument("--zeros-dir", help=zeros_help)
    return p


def _apply_config(parser: argparse.ArgumentParser, path: str, command: str) -> None:
    cfg = configparser.ConfigParser()
    if not cfg.read(path):
        raise DomainError(f"cannot read config file {path}")
    values = dict(cfg.defaults())
    if cfg.has_section(command):
        values.update(cfg.items(command))
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    by_dest = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, raw in values.items():
        dest = key.replace("-", "_")
        act = by_dest.get(dest)
        if act is None:
            raise DomainError(f"config key {key!r} is not an option of {command}")
        conv = act.type or str
        if act.nargs in ("+", "*"):
            defaults[dest] = [conv(v) for v in raw.split()]
        else:
            defaults[dest] = conv(raw)
        act.required = False
    sub.set_defaults(**defaults)


def _validate(args) -> None:
    """Fail fast on data and parameter problems before any heavy work."""
    q = getattr(args, "q", None)
    if q is not None and not (q == 1 and args.command in ("sieve", "mertens", "scan")):
        QuadraticField(q)
    if hasattr(args, "zeros_dir"):
        d = data_dir(args.zeros_dir)
        qs = args.q_list if args.command == "dissipation" else (
            TABLE1_FIELDS if args.command == "reproduce-table1" else [args.q])
        needed = [zero_file("zeta", directory=d)]
        if args.command != "dissipation":
            needed += [zero_file("lchi", QuadraticField(q).discriminant, d) for q in qs]
        missing = [str(f) for f in needed if not f.exists()]
        if missing:
            raise DomainError("missing zero data: " + ", ".join(missing))
    if args.command == "density":
        _density_params(args)
    if hasattr(args, "out_dir"):
        Path(args.out_dir).mkdir(parents=True, exist_ok=True)


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    # find --config and the command without enforcing required options, which
    # the config file may still supply
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    choices = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices
    command = next((a for a in rest if a in choices), None)
    try:
        if known.config and command:
            _apply_config(parser, known.config, command)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except (DomainError, ValueError, InvariantError, ZeroFileError, SieveBudgetError,
            FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
