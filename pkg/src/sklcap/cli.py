"""Command-line front end: ``sklcap {capacity,sweep,compare,klmatrix,gibbs}``.

Data goes to stdout, logs to stderr. Exit status is 0 on success, 2 for
domain or numerical errors and 64 for usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from .channels import load_channel, make_bac, make_binomial, make_bsc, parse_grid
from .errors import SklcapError
from .gibbs import case_distribution, worst_case_search
from .infomeasures import bsc_capacity_closed_form, kl_matrix
from .solvers import (
    SolveOptions,
    blahut_arimoto,
    eigen_baseline,
    grid_oracle,
    max_skl,
    power_baseline,
)

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64

ALGOS = ("max-skl", "max-skl-wos", "ba", "power", "eigen", "grid")
LN2 = math.log(2.0)

log = logging.getLogger("sklcap")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def _default_seed() -> int:
    raw = os.environ.get("SKLCAP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"SKLCAP_SEED={raw!r} is not an integer") from None


def _add_channel_args(p):
    g = p.add_argument_group("channel")
    g.add_argument("--channel", required=True, choices=("bsc", "bac", "binomial", "file"))
    g.add_argument("--p", type=float, help="crossover probability (bsc, bac 0->1)")
    g.add_argument("--q", type=float, help="bac 1->0 crossover probability")
    g.add_argument("--n", type=int, help="binomial trial count")
    g.add_argument("--grid", help="binomial input grid A:B:STEP (inclusive)")
    g.add_argument("--path", help="channel file (.json or .csv)")


def _add_solver_args(p):
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--seed", type=int, default=None, help="defaults to $SKLCAP_SEED, else 0")
    p.add_argument("--log-base", choices=("nats", "bits"), default="nats")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sklcap", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cap = sub.add_parser("capacity", help="compute a capacity with one algorithm")
    _add_channel_args(cap)
    _add_solver_args(cap)
    cap.add_argument("--algo", choices=ALGOS, default="max-skl")
    cap.add_argument("--resolution", type=int, default=1000, help="grid oracle lattice steps")
    cap.add_argument("--format", choices=("json", "csv"), default="json")
    cap.add_argument("--trajectory", help="write iter,objective_nats,tv_step CSV here")

    sw = sub.add_parser("sweep", help="BSC sweep against the closed form")
    sw.add_argument("--p-range", default="0.1:0.9:0.1", help="A:B:STEP or a single value")
    sw.add_argument("--algo", choices=("max-skl", "max-skl-wos", "power", "eigen", "grid"), default="max-skl")
    _add_solver_args(sw)

    cmp_ = sub.add_parser("compare", help="trajectories of every solver on one channel")
    _add_channel_args(cmp_)
    _add_solver_args(cmp_)

    km = sub.add_parser("klmatrix", help="symmetrized KL divergence matrix as CSV")
    _add_channel_args(km)
    km.add_argument("--log-base", choices=("nats", "bits"), default="nats")

    gb = sub.add_parser("gibbs", help="worst-case data distributions for the Gibbs channel")
    gb.add_argument("--case", type=int, choices=(1, 2), required=True)
    gb.add_argument("--n", type=int, default=100)
    gb.add_argument("--iterations", type=int, default=1)
    mode = gb.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_true", default=True,
                      help="pre-train on expected counts (default)")
    mode.add_argument("--sampled", dest="exact", action="store_false",
                      help="pre-train on i.i.d. samples drawn with --seed")
    gb.add_argument("--literal-prior", action="store_true",
                    help="prior N(0, I/n) with inverse temperature n")
    gb.add_argument("--seed", type=int, default=None)
    gb.add_argument("--epsilon", type=float, default=1e-10)
    gb.add_argument("--max-iter", type=int, default=10_000)
    gb.add_argument("--restarts", type=int, default=0)
    gb.add_argument("--format", choices=("json", "csv"), default="json")
    return parser


def channel_from_args(args):
    kind = args.channel
    if kind == "bsc":
        if args.p is None:
            raise UsageError("--channel bsc needs --p")
        return make_bsc(args.p)
    if kind == "bac":
        if args.p is None or args.q is None:
            raise UsageError("--channel bac needs --p and --q")
        return make_bac(args.p, args.q)
    if kind == "binomial":
        if args.n is None or args.grid is None:
            raise UsageError("--channel binomial needs --n and --grid")
        try:
            grid = parse_grid(args.grid)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return make_binomial(args.n, grid)
    if args.path is None:
        raise UsageError("--channel file needs --path")
    return load_channel(args.path)


def _seed(args) -> int:
    return args.seed if args.seed is not None else _default_seed()


def _options(args, symmetrize=True) -> SolveOptions:
    if args.epsilon <= 0 or args.max_iter < 1 or args.restarts < 0:
        raise UsageError("--epsilon must be > 0, --max-iter >= 1, --restarts >= 0")
    return SolveOptions(
        epsilon=args.epsilon,
        max_iter=args.max_iter,
        symmetrize=symmetrize,
        restarts=args.restarts,
        rng_seed=_seed(args),
    )


def solve(ch, algo: str, args):
    if algo in ("max-skl", "max-skl-wos"):
        return max_skl(ch, _options(args, symmetrize=algo == "max-skl"))
    if algo == "ba":
        _options(args)
        return blahut_arimoto(ch, epsilon=args.epsilon, max_iter=args.max_iter)
    dm = kl_matrix(ch)
    if algo == "power":
        return power_baseline(dm, max_iter=args.max_iter)
    if algo == "eigen":
        return eigen_baseline(dm)
    return grid_oracle(dm, getattr(args, "resolution", 1000))


def cmd_capacity(args, out) -> int:
    ch = channel_from_args(args)
    report = solve(ch, args.algo, args)
    value = report.value_in(args.log_base)
    if args.trajectory:
        report.trajectory_csv(args.trajectory)
    if args.format == "json":
        payload = {
            "algorithm": report.algorithm,
            "log_base": args.log_base,
            "value": value,
            "caid": [float(v) for v in report.caid],
            "input_labels": list(ch.input_labels),
            "iterations": report.iterations,
            "converged": report.converged,
        }
        if report.warnings:
            payload["warnings"] = report.warnings
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["algorithm", "log_base", "value", "iterations", "converged"])
        w.writerow([report.algorithm, args.log_base, _fmt(value), report.iterations, report.converged])
        w.writerow([])
        w.writerow(["input_label", "caid"])
        for lab, v in zip(ch.input_labels, report.caid):
            w.writerow([lab, _fmt(v)])
    for msg in report.warnings:
        log.warning(msg)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    try:
        ps = parse_grid(args.p_range)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(p <= 0.0 or p >= 1.0 for p in ps):
        raise SklcapError(f"sweep range {args.p_range!r} touches 0 or 1 where the capacity diverges")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["p", "theoretical_bits", "computed_bits"])
    for p in ps:
        theory = bsc_capacity_closed_form(p)
        computed = solve(make_bsc(p), args.algo, args).value / LN2
        w.writerow([_fmt(p), _fmt(theory), _fmt(computed)])
    return EXIT_OK


def cmd_compare(args, out) -> int:
    ch = channel_from_args(args)
    dm = kl_matrix(ch)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["algo", "iter", "objective_nats"])
    runs = [
        max_skl(dm, _options(args, symmetrize=True)),
        max_skl(dm, _options(args, symmetrize=False)),
        power_baseline(dm, max_iter=args.max_iter),
    ]
    for rep in runs:
        for k, (obj, _) in enumerate(rep.trajectory):
            w.writerow([rep.algorithm, k, _fmt(obj)])
    ba = blahut_arimoto(ch, max_iter=args.max_iter)
    w.writerow(["ba", ba.iterations, _fmt(dm.quadratic_form(ba.caid))])
    return EXIT_OK


def cmd_klmatrix(args, out) -> int:
    dm = kl_matrix(channel_from_args(args))
    scale = LN2 if args.log_base == "bits" else 1.0
    for row in dm.sym:
        out.write(",".join(_fmt(v / scale) for v in row) + "\n")
    return EXIT_OK


def cmd_gibbs(args, out) -> int:
    if args.n < 1 or args.iterations < 1:
        raise UsageError("--n and --iterations must be positive")
    opts = _options(args)
    report = worst_case_search(
        case_distribution(args.case),
        n=args.n,
        iterations=args.iterations,
        exact_counts=args.exact,
        rng_seed=_seed(args),
        opts=opts,
        literal=args.literal_prior,
    )
    out.write(report.to_json() + "\n" if args.format == "json" else report.to_csv())
    return EXIT_OK


COMMANDS = {
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "klmatrix": cmd_klmatrix,
    "gibbs": cmd_gibbs,
}


def main(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    out = out or sys.stdout
    buf = io.StringIO()
    try:
        code = COMMANDS[args.command](args, buf)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sklcap: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SklcapError, np.linalg.LinAlgError, FileNotFoundError) as exc:
        print(f"sklcap: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    out.write(buf.getvalue())
    return code


if __name__ == "__main__":
    sys.exit(main())
