"""Command-line interface.

Exit status is 0 on success, 1 when a configuration is invalid or an axiom
check fails, and 2 for usage or document errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from .checks import SUITES, run_suite
from .conformal import NumericalError
from .generators import GenerationError, GeneratorSpec, Twist, random_config
from .io import DocumentError, dumps_config, read_config, write_config
from .operad import ExtendedPermutation, InvalidConfiguration, cyclic_act, partial_compose, validate_config
from .render import render_svg
from .retraction import homotopy_step

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(c, out):
    if out in (None, "-"):
        sys.stdout.write(dumps_config(c))
    else:
        write_config(c, out)


def _read(path):
    try:
        return read_config(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def cmd_gen(args) -> int:
    try:
        spec = GeneratorSpec(args.n, args.arity, args.margin, args.seed, Twist.parse(args.twist))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(random_config(spec), args.out)
    return EXIT_OK


def cmd_validate(args) -> int:
    c = _read(args.input)
    # read_config already validated; report the margin for information
    print(f"valid: n={c.n} arity={c.arity} margin={validate_config(c).margin:.6g}")
    return EXIT_OK


def cmd_compose(args) -> int:
    f, g = _read(args.in_f), _read(args.in_g)
    if f.n != g.n:
        raise UsageError(f"dimension mismatch: n={f.n} vs n={g.n}")
    if not 1 <= args.slot <= f.arity:
        raise UsageError(f"slot {args.slot} out of range 1..{f.arity}")
    _emit(partial_compose(f, args.slot, g), args.out)
    return EXIT_OK


def cmd_act(args) -> int:
    c = _read(args.input)
    try:
        sigma = ExtendedPermutation.parse(args.perm)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if sigma.arity != c.arity:
        raise UsageError(f"permutation of 0..{sigma.arity} does not match arity {c.arity}")
    _emit(cyclic_act(c, sigma), args.out)
    return EXIT_OK


def cmd_retract(args) -> int:
    c = _read(args.input)
    if not 0.0 <= args.t <= 1.0:
        raise UsageError("--t must lie in [0, 1]")
    _emit(homotopy_step(c, args.t), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    suites = SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for name in suites:
        twist = args.twist or ("q" if name == "retraction" else "framed")
        try:
            spec = GeneratorSpec(args.n, args.arity, args.margin, args.seed, Twist.parse(twist))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        reports.append(run_suite(name, spec, args.trials, args.t_samples))
    if args.json:
        payload = [r.to_dict() for r in reports]
        print(json.dumps(payload if len(payload) > 1 else payload[0], indent=2, sort_keys=True))
    else:
        print("\n".join(r.format_table() for r in reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_render(args) -> int:
    c = _read(args.input)
    if c.n != 2:
        raise UsageError(f"render needs n = 2, got n = {c.n}")
    render_svg(c, args.out)
    return EXIT_OK


def _positive(value: str) -> int:
    k = int(value)
    if k < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return k


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conformal-balls",
        description="Operad of conformal n-balls: generate, compose, act, retract, check and render.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a random configuration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--arity", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--twist", choices=[t.value for t in Twist], default="framed")
    p.add_argument("--margin", type=float, default=0.02)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="validate a configuration document")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compose", help="insert g into slot K of f")
    p.add_argument("--in-f", required=True)
    p.add_argument("--in-g", required=True)
    p.add_argument("--slot", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("act", help="apply the cyclic action of a permutation of 0..j")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--perm", required=True, help='images of 0..j, e.g. "1,2,0"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("retract", help="evaluate the retraction homotopy at time t")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_retract)

    p = sub.add_parser("check", help="run randomized axiom suites")
    p.add_argument("suite", choices=[*SUITES, "all"])
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--trials", type=_positive, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--arity", type=int, default=5, help="largest arity drawn")
    p.add_argument("--margin", type=float, default=0.02)
    p.add_argument("--twist", choices=[t.value for t in Twist],
                   help="input family (default: q for retraction, framed otherwise)")
    p.add_argument("--t-samples", type=int, default=11)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("render", help="draw an n = 2 configuration as SVG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DocumentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidConfiguration as exc:
        print(f"invalid ({exc.report.violation}): {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (GenerationError, NumericalError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
