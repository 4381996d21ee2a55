"""Command-line front end.

Exit status: 0 on success, 2 on invalid arguments (with a message naming
the flag), 1 on runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .basis import BasisKind, Interval
from .coefficients import KernelSpec, build_tensor, parse_weight
from .combinatorics import MAX_ORDER, enumerate_pair_partitions
from .errors import DomainError, ItoSeriesError
from .expansion import FORMS, approximate_integral, sample_table, term
from .io import dumps, emit, iter_lines
from .oracle import convergence_curve
from .sde import CATALOG, SchemeConfig, catalog_system, strong_error

MAX_SEED = 2**64 - 1


class UsageError(Exception):
    """Invalid flag value detected after parsing."""


# --------------------------------------------------------------------------
# flag value parsers (argparse reports their failures against the flag)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _nonneg_list(text: str) -> tuple[int, ...]:
    vals = _int_list(text)
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError(f"entries must be nonnegative, got {text!r}")
    return vals


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64 - 1], got {v}")
    return v


def _interval(text: str) -> Interval:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected t,T, got {text!r}")
    try:
        return Interval(*vals)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _basis(text: str) -> BasisKind:
    try:
        return BasisKind.parse(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _weights(text: str) -> tuple:
    try:
        return tuple(parse_weight(tok) for tok in text.split("/"))
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# --------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, seed: bool = False, fmt: bool = True):
    if seed:
        p.add_argument("--seed", type=_seed, required=True, help="random seed (unsigned 64-bit)")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _add_kernel(p: argparse.ArgumentParser):
    p.add_argument("--weights", type=_weights, default=None,
                   help="weight spec, or one per level separated by '/': const[:C], pow:Q[:SCALE], "
                        "table:TAU@V;TAU@V;... (default const)")
    p.add_argument("--interval", type=_interval, default=Interval(0.0, 1.0), help="t,T (default 0,1)")
    p.add_argument("--basis", type=_basis, default=BasisKind.LEGENDRE, help="legendre or trig")
    p.add_argument("--degree", type=_positive_int, default=None, help="Gauss points per quadrature panel")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itoseries",
        description="Iterated Ito integrals by multiple Fourier-Legendre series.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", default=None, help="file of key=value lines mirroring the flags")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("partitions", help="list pair partitions of {1..k} with r pairs")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--r", type=_positive_int, required=True)
    _add_common(p, fmt=False)

    p = sub.add_parser("coeffs", help="compute a Fourier coefficient tensor")
    p.add_argument("--k", type=_positive_int, required=True)
    p.add_argument("--p", type=_nonneg_list, required=True, help="truncation p_1,...,p_k (or one value)")
    _add_kernel(p)
    _add_common(p, fmt=False)

    p = sub.add_parser("sample", help="sample truncated-expansion approximations")
    p.add_argument("--mi", type=_nonneg_list, required=True, help="multi-index i_1,...,i_k")
    p.add_argument("--p", type=_nonneg_list, required=True, help="truncation (one value or k values)")
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--form", choices=FORMS, default="hermite")
    _add_kernel(p)
    _add_common(p, seed=True)

    p = sub.add_parser("term", help="evaluate one multiple Wiener term on a sampled table")
    p.add_argument("--mi", type=_nonneg_list, required=True)
    p.add_argument("--j", type=_nonneg_list, required=True)
    p.add_argument("--form", choices=FORMS, default="hermite")
    p.add_argument("--interval", type=_interval, default=Interval(0.0, 1.0))
    p.add_argument("--basis", type=_basis, default=BasisKind.LEGENDRE)
    _add_common(p, seed=True)

    p = sub.add_parser("convergence", help="coupled mean-square error against a path oracle")
    p.add_argument("--mi", type=_nonneg_list, required=True)
    p.add_argument("--pmax", type=_nonneg_int, required=True)
    p.add_argument("--p-list", type=_nonneg_list, default=None,
                   help="explicit truncations to measure (default 0..pmax)")
    p.add_argument("--n-grid", type=_positive_int, required=True)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--form", choices=FORMS, default="hermite")
    _add_kernel(p)
    _add_common(p, seed=True)

    p = sub.add_parser("sde-demo", help="strong error of Euler/Milstein on a catalog system")
    p.add_argument("--system", choices=sorted(CATALOG), required=True)
    p.add_argument("--scheme", choices=("euler", "milstein"), required=True)
    p.add_argument("--h", type=_float_list, required=True, help="step size(s), comma-separated")
    p.add_argument("--p", type=_nonneg_int, default=0, help="expansion truncation for Milstein")
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--ref-factor", type=_positive_int, default=256,
                   help="reference Euler step = smallest h / ref-factor")
    p.add_argument("--reference", choices=("euler", "exact"), default="euler")
    _add_common(p, seed=True)
    return parser


def _expand_config(argv: list[str]) -> list[str]:
    """Splice ``--config FILE`` contents in as flags right after the subcommand.

    Explicit flags come later on the command line and therefore win.
    """
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise UsageError("--config: missing file name")
    path = argv[idx + 1]
    rest = argv[:idx] + argv[idx + 2:]
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"--config: cannot read {path}: {exc.strerror}") from None
    extra = []
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"--config: line {n} is not key=value: {line!r}")
        extra += [f"--{key.strip()}", value.strip()]
    commands = {"partitions", "coeffs", "sample", "term", "convergence", "sde-demo"}
    pos = next((i for i, a in enumerate(rest) if a in commands), None)
    if pos is None:
        raise UsageError("--config: a subcommand is required on the command line")
    return rest[:pos + 1] + extra + rest[pos + 1:]


def _truncation(p: tuple[int, ...], k: int, flag: str = "--p") -> tuple[int, ...]:
    if len(p) == 1:
        return p * k
    if len(p) != k:
        raise UsageError(f"{flag}: expected 1 or {k} values, got {len(p)}")
    return p


def _kernel(args, k: int) -> KernelSpec:
    if not 1 <= k <= MAX_ORDER:
        raise UsageError(f"--k/--mi: multiplicity must be in [1, {MAX_ORDER}], got {k}")
    weights = args.weights
    if weights is None:
        weights = (parse_weight("const"),)
    if len(weights) == 1:
        weights = weights * k
    if len(weights) != k:
        raise UsageError(f"--weights: expected 1 or {k} specs, got {len(weights)}")
    try:
        return KernelSpec(weights, args.interval)
    except DomainError as exc:
        raise UsageError(f"--weights: {exc}") from None


def _write(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {out}: {exc.strerror}") from None


def cmd_partitions(args) -> None:
    if args.k > MAX_ORDER:
        raise UsageError(f"--k: must be <= {MAX_ORDER}, got {args.k}")
    if args.r > args.k // 2:
        raise UsageError(f"--r: must be <= k/2 = {args.k // 2}, got {args.r}")
    _write(iter_lines(enumerate_pair_partitions(args.k, args.r)), args.out)


def cmd_coeffs(args) -> None:
    ks = _kernel(args, args.k)
    trunc = _truncation(args.p, args.k)
    if args.k > 6:
        raise UsageError(f"--k: direct quadrature supports k <= 6, got {args.k}")
    tensor = build_tensor(ks, trunc, args.basis, args.degree)
    _write(dumps(tensor.to_dict(), indent=1) + "\n", args.out)


def cmd_sample(args) -> None:
    k = len(args.mi)
    ks = _kernel(args, k)
    trunc = _truncation(args.p, k)
    tensor = build_tensor(ks, trunc, args.basis, args.degree)
    m = max(max(args.mi), 1)
    tab = sample_table(args.seed, m, max(trunc), args.basis, args.interval, batch=args.trials)
    values = np.atleast_1d(approximate_integral(tensor, args.mi, tab, args.form))
    records = [{"trial": n, "value": float(v)} for n, v in enumerate(values)]
    _write(emit(records, args.format, None, columns=["trial", "value"]), args.out)


def cmd_term(args) -> None:
    if len(args.mi) != len(args.j):
        raise UsageError(f"--j: expected {len(args.mi)} values to match --mi, got {len(args.j)}")
    if len(args.mi) > MAX_ORDER:
        raise UsageError(f"--mi: multiplicity must be <= {MAX_ORDER}")
    m = max(max(args.mi), 1)
    tab = sample_table(args.seed, m, max(args.j), args.basis, args.interval)
    value = term(args.mi, args.j, tab, args.form)
    rec = {"mi": ",".join(map(str, args.mi)), "j": ",".join(map(str, args.j)),
           "form": args.form, "seed": args.seed, "value": float(value)}
    _write(emit([rec], args.format, None), args.out)


def cmd_convergence(args) -> None:
    k = len(args.mi)
    ks = _kernel(args, k)
    p_list = args.p_list if args.p_list is not None else tuple(range(args.pmax + 1))
    if max(p_list) > args.pmax:
        raise UsageError(f"--p-list: entries must not exceed --pmax={args.pmax}")
    if args.trials < 100:
        raise UsageError(f"--trials: coupled estimates need at least 100 trials, got {args.trials}")
    tensors = [build_tensor(ks, (p,) * k, args.basis, args.degree) for p in p_list]
    stats = convergence_curve(args.mi, ks, tensors, args.n_grid, args.trials, args.seed, args.form)
    records = [{"p": p, "analytic_residual": s.analytic_mse, "sample_mse": s.sample_mse,
                "stderr": s.stderr, "n_grid": s.n_grid} for p, s in zip(p_list, stats)]
    _write(emit(records, args.format, None), args.out)


def cmd_sde_demo(args) -> None:
    system = catalog_system(args.system)
    if any(h <= 0 for h in args.h):
        raise UsageError("--h: steps must be positive")
    if args.trials < 2:
        raise UsageError("--trials: need at least 2")
    try:
        cfgs = [SchemeConfig(args.scheme, h, args.p) for h in args.h]
        for c in cfgs:
            c.steps(Interval(0.0, 1.0))
    except DomainError as exc:
        raise UsageError(f"--h: {exc}") from None
    if args.reference == "exact":
        if system.exact is None:
            raise UsageError(f"--reference: system {args.system} has no closed-form solution")
        reference = "exact"
    else:
        reference = SchemeConfig("euler", min(args.h) / args.ref_factor)
    rows = strong_error(system, cfgs, reference, args.trials, args.seed)
    records = [{"system": args.system, "scheme": args.scheme, "h": r.h, "p": args.p,
                "rmse": r.rmse, "stderr": r.stderr, "trials": r.trials} for r in rows]
    _write(emit(records, args.format, None), args.out)


COMMANDS = {
    "partitions": cmd_partitions,
    "coeffs": cmd_coeffs,
    "sample": cmd_sample,
    "term": cmd_term,
    "convergence": cmd_convergence,
    "sde-demo": cmd_sde_demo,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"itoseries: error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"itoseries {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"itoseries {args.command}: invalid argument: {exc}", file=sys.stderr)
        return 2
    except (ItoSeriesError, OSError, MemoryError) as exc:
        print(f"itoseries {args.command}: failed: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
