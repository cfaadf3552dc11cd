"""Command-line front end.

Subcommands: ``gamma``, ``survival``, ``integrated``, ``duality``, ``ca``,
``fit``, ``verify``.  Every run echoes its resolved configuration as ``#``
comment lines above the CSV so results are reproducible from the output
alone.  All state lives on the command line (no environment variables), and
``--workers`` never changes the emitted bytes.

Exit codes: 0 success, 1 validation or check failure, 2 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

import numpy as np

from . import __version__
from .automata import density_curve
from .chain import WalkModel, load_chain_file
from .errors import ComputationError, ParseError, PersistLabError, ValidationError
from .presets import preset_from_string
from .seeding import SeedSpec
from .survival import (
    duality_gap,
    integrated_survival_dp,
    integrated_survival_mc,
    sqrt_fit,
    survival_dp,
)
from .variance import gamma2_exact, gamma2_series, gamma2_spectral
from .verify import run_suite

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NO_CONVERGENCE = 2


def _add_model_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help="named model, e.g. srw, persistent(0.75), ghm-pair")
    src.add_argument("--chain", help="path to a chain-spec file")


def _resolve_model(args) -> WalkModel:
    if args.preset:
        return preset_from_string(args.preset)
    return load_chain_file(args.chain)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="persistlab",
        description="Persistence of Markov-functional random walks and 3-color cellular automata",
    )
    top.add_argument("--version", action="version", version=f"persistlab {__version__}")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gamma", help="limiting variance of a model")
    _add_model_args(p)
    p.add_argument("--method", default="all", choices=["exact", "series", "spectral", "all"])
    p.add_argument("--k-max", type=int, default=100_000)
    p.add_argument("--tol", type=float, default=1e-13)
    p.add_argument("--out", default="-")

    p = sub.add_parser("survival", help="exact survival probabilities over time")
    _add_model_args(p)
    p.add_argument("--level", type=int, required=True, help="start level (may be negative)")
    p.add_argument("--state", default=None, help="condition on this start state label")
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--cap", type=int, default=None, help="level cap (default: exact)")
    p.add_argument("--every", type=int, default=1, help="emit every k-th time step")
    p.add_argument("--out", default="-")

    p = sub.add_parser("integrated", help="integrated survival probability")
    _add_model_args(p)
    p.add_argument("--times", required=True, help="comma-separated t values")
    p.add_argument("--method", default="mc", choices=["mc", "dp"])
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")

    p = sub.add_parser("duality", help="both sides of the maximum/survival duality")
    _add_model_args(p)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--mode", default="auto", choices=["auto", "exact", "mc"])
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("ca", help="cellular-automaton particle-density curve")
    p.add_argument("--rule", required=True, choices=["cca", "ghm", "fca"])
    p.add_argument("--n", type=int, default=1 << 20)
    p.add_argument("--t-max", type=int, required=True)
    p.add_argument("--replicas", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--particles", action="store_true", help="add a mean particle-count column")
    p.add_argument("--out", default="-")

    p = sub.add_parser("fit", help="fit C * t^(-rho) to a t,value CSV")
    p.add_argument("--window", required=True, help="lo,hi time window")
    p.add_argument("--mode", default="fixed-half", choices=["fixed-half", "free-exponent"])
    p.add_argument("--input", default="-", help="CSV path or - for stdin")
    p.add_argument("--out", default="-")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all")
    p.add_argument("--out", default="-")
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ComputationError as exc:
        if exc.code == "NO_CONVERGENCE":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NO_CONVERGENCE
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


class _Out:
    def __init__(self, path: str):
        self.path = path

    def __enter__(self):
        self.fh = sys.stdout if self.path == "-" else open(self.path, "w", encoding="utf-8")
        return self.fh

    def __exit__(self, *exc):
        if self.path != "-":
            self.fh.close()


def _echo_config(fh, args, skip=("out",)) -> None:
    fh.write(f"# persistlab {__version__}\n")
    for key in sorted(vars(args)):
        if key in skip or key == "command":
            continue
        fh.write(f"# {key}={getattr(args, key)}\n")


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "gamma":
        return _cmd_gamma(args)
    if cmd == "survival":
        return _cmd_survival(args)
    if cmd == "integrated":
        return _cmd_integrated(args)
    if cmd == "duality":
        return _cmd_duality(args)
    if cmd == "ca":
        return _cmd_ca(args)
    if cmd == "fit":
        return _cmd_fit(args)
    if cmd == "verify":
        return _cmd_verify(args)
    raise ValidationError("UNKNOWN_COMMAND", cmd)


def _cmd_gamma(args) -> int:
    model = _resolve_model(args)
    rows = []
    exit_code = EXIT_OK
    methods = ["exact", "series", "spectral"] if args.method == "all" else [args.method]
    for method in methods:
        if method == "exact":
            rep = gamma2_exact(model)
        elif method == "series":
            rep = gamma2_series(model, k_max=args.k_max, tol=args.tol)
            if not rep.converged:
                exit_code = EXIT_NO_CONVERGENCE
        else:
            try:
                rep = gamma2_spectral(model)
            except ComputationError as exc:
                if args.method == "all":
                    rows.append(("spectral", "nan", exc.code))
                    continue
                raise
        rows.append((rep.method, repr(rep.gamma2), rep.detail))
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("method,gamma2,detail\n")
        for method, value, detail in rows:
            fh.write(f"{method},{value},{detail}\n")
    return exit_code


def _cmd_survival(args) -> int:
    model = _resolve_model(args)
    table = survival_dp(model, args.level, args.t_max, cap=args.cap)
    state = model.state_index(args.state) if args.state is not None else None
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("t,value,stderr\n")
        for t in range(0, args.t_max + 1, max(args.every, 1)):
            fh.write(f"{t},{table.q(args.level, t, state)!r},0.0\n")
    return EXIT_OK


def _cmd_integrated(args) -> int:
    model = _resolve_model(args)
    times = [int(tok) for tok in args.times.split(",") if tok.strip()]
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("t,value,stderr\n")
        for t in times:
            if args.method == "dp":
                val = integrated_survival_dp(model, t, cap=args.cap)
                fh.write(f"{t},{val!r},0.0\n")
            else:
                est = integrated_survival_mc(
                    model, t, args.samples, SeedSpec(args.seed), workers=args.workers
                )
                fh.write(f"{t},{est.value!r},{est.stderr!r}\n")
    return EXIT_OK


def _cmd_duality(args) -> int:
    model = _resolve_model(args)
    gap = duality_gap(
        model, args.r, args.t, mode=args.mode, samples=args.samples, seed=SeedSpec(args.seed)
    )
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("r,t,lhs,lhs_stderr,rhs_t,rhs_tm1,exact\n")
        se = "0.0" if gap.lhs_stderr is None else repr(gap.lhs_stderr)
        fh.write(
            f"{gap.r},{gap.t},{gap.lhs!r},{se},{gap.rhs_t!r},{gap.rhs_tm1!r},{int(gap.exact)}\n"
        )
    return EXIT_OK


def _cmd_ca(args) -> int:
    series = density_curve(
        args.rule, args.n, args.t_max, args.replicas, SeedSpec(args.seed), workers=args.workers
    )
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        if args.particles:
            fh.write("t,density,stderr,particles\n")
            for t in range(args.t_max + 1):
                fh.write(
                    f"{t},{series.density[t]!r},{series.stderr[t]!r},{series.particles[t]!r}\n"
                )
        else:
            fh.write("t,density,stderr\n")
            for t in range(args.t_max + 1):
                fh.write(f"{t},{series.density[t]!r},{series.stderr[t]!r}\n")
    return EXIT_OK


def _cmd_fit(args) -> int:
    lo, hi = (float(tok) for tok in args.window.split(","))
    fh_in = sys.stdin if args.input == "-" else open(args.input, "r", encoding="utf-8")
    try:
        t_vals, values = _read_series(fh_in)
    finally:
        if args.input != "-":
            fh_in.close()
    fit = sqrt_fit(t_vals, values, (lo, hi), mode=args.mode)
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("C,rho,window_lo,window_hi,residual\n")
        fh.write(
            f"{fit.constant!r},{fit.exponent!r},{fit.window[0]!r},{fit.window[1]!r},{fit.residual!r}\n"
        )
    return EXIT_OK


def _read_series(fh):
    t_vals = []
    values = []
    for raw in fh:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        try:
            t = float(parts[0])
            v = float(parts[1])
        except (ValueError, IndexError):
            continue  # header or malformed row
        t_vals.append(t)
        values.append(v)
    if not t_vals:
        raise ValidationError("EMPTY_WINDOW", "no data rows on input")
    return np.array(t_vals), np.array(values)


def _cmd_verify(args) -> int:
    results = run_suite(args.suite)
    failed = [r for r in results if not r.passed]
    with _Out(args.out) as fh:
        _echo_config(fh, args)
        fh.write("name,status,detail\n")
        for r in results:
            fh.write(f"{r.name},{'PASS' if r.passed else 'FAIL'},{r.detail}\n")
    return EXIT_OK if not failed else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
