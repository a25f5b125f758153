"""Command-line surface: level solving, convergence studies, omega0 tools,
and wavefunction/potential sampling with csv/json/text output.

Exit codes: 0 success, 1 non-convergence, 2 argument or domain errors.
Identical invocations produce byte-identical output; csv and json carry the
same numeric tokens digit for digit (json quotes a token only when it holds
more digits than a binary double can).
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
from decimal import Decimal, InvalidOperation
from typing import List, Sequence, Tuple

from .eigensolve import eigenvalues_lowest
from .hamiltonian import BasisSpec, ModelParams, Parity, assemble_hamiltonian
from .precision import format_fixed, make_context
from .spectrum import (
    ConvergenceFailure,
    Omega0Model,
    Omega0Policy,
    SolveRequest,
    convergence_table,
    fit_omega0_model,
    optimize_omega0,
    predict_omega0,
    solve_levels,
)
from .wavefunction import Grid, sample, sample_potential, solution_wavefunction


class _Num:
    """A numeric cell carried as its exact output token."""

    __slots__ = ("token",)

    def __init__(self, token: str):
        self.token = token


def _float_token(value) -> str:
    """Output token for an auxiliary real (omega0, fit parameters, ...)."""
    if isinstance(value, str):
        return value
    return repr(float(value))


def _json_scalar(value) -> str:
    if isinstance(value, _Num):
        # A token survives as a bare json number only if a double holds it
        # exactly; otherwise it is quoted to keep every digit.
        try:
            lossless = Decimal(repr(float(value.token))) == Decimal(value.token)
        except (ValueError, OverflowError, InvalidOperation):
            lossless = False
        if lossless:
            return value.token
        return json.dumps(value.token)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    return json.dumps(value)


def _json_text(value, depth: int = 0) -> str:
    pad = "  " * depth
    if isinstance(value, dict):
        if not value:
            return "{}"
        body = ",\n".join(
            f"{pad}  {json.dumps(key)}: {_json_text(item, depth + 1)}"
            for key, item in value.items()
        )
        return "{\n" + body + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        body = ",\n".join(f"{pad}  {_json_text(item, depth + 1)}" for item in value)
        return "[\n" + body + "\n" + pad + "]"
    return _json_scalar(value)


def _json_doc(payload: dict) -> str:
    return _json_text(payload) + "\n"


def _csv_doc(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _text_doc(meta: Sequence[Tuple[str, object]], table=None) -> str:
    lines = [f"{key} = {value}" for key, value in meta]
    if table is not None:
        header, rows = table
        lines.append("  ".join(header))
        lines.extend("  ".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def _omega0_policy(text: str) -> Omega0Policy:
    if text == "auto":
        return Omega0Policy.optimize()
    if text == "formula":
        return Omega0Policy.formula()
    try:
        float(text)
    except ValueError:
        raise ValueError(
            f"omega0 must be 'auto', 'formula', or a positive number, got {text!r}"
        ) from None
    return Omega0Policy.fixed(text)


def _parse_orders(text: str) -> List[int]:
    match = re.fullmatch(r"(\d+)\.\.(\d+)(?::(\d+))?", text)
    if not match:
        raise ValueError(f"orders must look like a..b or a..b:step, got {text!r}")
    lo, hi = int(match[1]), int(match[2])
    step = int(match[3]) if match[3] else 1
    if step < 1 or hi < lo:
        raise ValueError(f"orders range must ascend, got {text!r}")
    return list(range(lo, hi + 1, step))


def _parse_grid(text: str) -> Tuple[str, str, str]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be min:max:step, got {text!r}")
    try:
        for part in parts:
            Decimal(part)
    except InvalidOperation:
        raise ValueError(f"grid values must be decimal numbers, got {text!r}") from None
    return parts[0], parts[1], parts[2]


def _label_decimals(parts: Sequence[str]) -> int:
    return max(0, *(-Decimal(part).as_tuple().exponent for part in parts))


def _solve(args, levels: Tuple[int, ...]):
    params = ModelParams(omega=args.omega, lam=args.lam)
    request = SolveRequest(
        params,
        levels,
        target_digits=args.digits,
        omega0=_omega0_policy(args.omega0),
        n_start=max(8, (max(levels) + 5) // 2),
        n_max=args.n_max,
    )
    return solve_levels(request)


def _cmd_energy(args) -> str:
    result = _solve(args, (args.level,))
    energy = format_fixed(result.energies[0], args.digits)
    omega0 = _float_token(result.omega0_used)
    if args.format == "csv":
        return _csv_doc(
            ("level", "energy", "omega0", "final_order"),
            [(str(args.level), energy, omega0, str(result.final_order))],
        )
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "omega": _Num(args.omega),
                "level": args.level,
                "digits": args.digits,
                "omega0": _Num(omega0),
                "final_order": result.final_order,
                "energy": _Num(energy),
            }
        )
    return _text_doc(
        [
            ("lambda", args.lam),
            ("omega", args.omega),
            ("omega0", omega0),
            ("final order", result.final_order),
            (f"E_{args.level}", energy),
        ]
    )


def _cmd_levels(args) -> str:
    levels = tuple(range(args.count))
    result = _solve(args, levels)
    energies = [format_fixed(e, args.digits) for e in result.energies]
    omega0 = _float_token(result.omega0_used)
    if args.format == "csv":
        return _csv_doc([f"E{n}" for n in levels], [energies])
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "omega": _Num(args.omega),
                "count": args.count,
                "digits": args.digits,
                "omega0": _Num(omega0),
                "final_order": result.final_order,
                "energies": [_Num(e) for e in energies],
            }
        )
    meta = [("lambda", args.lam), ("omega", args.omega), ("omega0", omega0),
            ("final order", result.final_order)]
    meta.extend((f"E_{n}", energies[n]) for n in levels)
    return _text_doc(meta)


def _cmd_converge(args) -> str:
    orders = _parse_orders(args.orders)
    try:
        float(args.omega0)
    except ValueError:
        raise ValueError(
            f"converge needs a numeric omega0, got {args.omega0!r}"
        ) from None
    params = ModelParams(omega=args.omega, lam=args.lam)
    ctx = make_context(args.digits)
    rows = convergence_table(params, args.omega0, orders, ctx, level=args.level)
    label = f"E{args.level}"
    cells = [(str(r.order), format_fixed(r.energies[0], args.digits)) for r in rows]
    if args.format == "csv":
        return _csv_doc(("N", label), cells)
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "omega": _Num(args.omega),
                "omega0": _Num(args.omega0),
                "level": args.level,
                "digits": args.digits,
                "rows": [{"N": int(n), label: _Num(e)} for n, e in cells],
            }
        )
    meta = [("lambda", args.lam), ("omega", args.omega), ("omega0", args.omega0),
            ("level", args.level)]
    return _text_doc(meta, (("N", label), cells))


def _cmd_wavefunction(args) -> str:
    grid_parts = _parse_grid(args.x)
    grid = Grid(*grid_parts)
    decimals = _label_decimals(grid_parts)
    result = _solve(args, (args.level,))
    ctx = make_context(args.digits)
    wf = solution_wavefunction(result, args.level)
    points = [
        (format_fixed(x, decimals), format_fixed(psi, args.digits))
        for x, psi in sample(wf, grid, ctx)
    ]
    energy = format_fixed(wf.energy, args.digits)
    omega0 = _float_token(result.omega0_used)
    if args.format == "csv":
        return _csv_doc(("x", "psi"), points)
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "omega": _Num(args.omega),
                "level": args.level,
                "digits": args.digits,
                "omega0": _Num(omega0),
                "final_order": result.final_order,
                "energy": _Num(energy),
                "points": [{"x": _Num(x), "psi": _Num(p)} for x, p in points],
            }
        )
    meta = [("lambda", args.lam), ("omega", args.omega), ("omega0", omega0),
            ("final order", result.final_order), ("level", args.level),
            ("energy", energy)]
    return _text_doc(meta, (("x", "psi"), points))


def _cmd_potential(args) -> str:
    grid_parts = _parse_grid(args.x)
    grid = Grid(*grid_parts)
    decimals = _label_decimals(grid_parts)
    params = ModelParams(lam=args.lam)
    ctx = make_context(args.digits)
    series = sample_potential(params, args.omega0, grid, ctx)
    rows = [
        (
            format_fixed(x, decimals),
            format_fixed(harm, args.digits),
            format_fixed(pert, args.digits),
        )
        for (x, harm), (_, pert) in zip(series["harmonic"], series["perturbation"])
    ]
    if args.format == "csv":
        return _csv_doc(("x", "harmonic", "perturbation"), rows)
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "omega0": _Num(args.omega0),
                "digits": args.digits,
                "points": [
                    {"x": _Num(x), "harmonic": _Num(h), "perturbation": _Num(p)}
                    for x, h, p in rows
                ],
            }
        )
    meta = [("lambda", args.lam), ("omega0", args.omega0)]
    return _text_doc(meta, (("x", "harmonic", "perturbation"), rows))


def _cmd_omega0_predict(args) -> str:
    omega0 = _float_token(predict_omega0(args.lam))
    if args.format == "csv":
        return _csv_doc(("lambda", "omega0"), [(args.lam, omega0)])
    if args.format == "json":
        return _json_doc({"lambda": _Num(args.lam), "omega0": _Num(omega0)})
    return _text_doc([("lambda", args.lam), ("omega0", omega0)])


def _cmd_omega0_optimize(args) -> str:
    params = ModelParams(omega=args.omega, lam=args.lam)
    ctx = make_context(args.digits)
    omega0 = optimize_omega0(params, args.order, args.level, ctx)
    basis = BasisSpec(omega0=omega0, parity=Parity.of_level(args.level),
                      order=args.order)
    matrix = assemble_hamiltonian(params, basis, ctx)
    value = eigenvalues_lowest(matrix, args.level // 2 + 1, ctx)[args.level // 2]
    energy = format_fixed(value, args.digits)
    token = _float_token(omega0)
    if args.format == "csv":
        return _csv_doc(
            ("lambda", "order", "level", "omega0", "energy"),
            [(args.lam, str(args.order), str(args.level), token, energy)],
        )
    if args.format == "json":
        return _json_doc(
            {
                "lambda": _Num(args.lam),
                "order": args.order,
                "level": args.level,
                "omega0": _Num(token),
                "energy": _Num(energy),
            }
        )
    return _text_doc(
        [("lambda", args.lam), ("order", args.order), ("level", args.level),
         ("omega0", token), ("energy", energy)]
    )


def _read_fit_points(path: str) -> List[Tuple[str, str]]:
    points = []
    with open(path, newline="") as handle:
        for index, row in enumerate(csv.reader(handle)):
            if not row or not row[0].strip():
                continue
            first = row[0].strip()
            if index == 0:
                try:
                    float(first)
                except ValueError:
                    continue  # header row
            if len(row) < 2:
                raise ValueError(f"fit input needs lambda,omega0 rows, got {row!r}")
            points.append((first, row[1].strip()))
    return points


def _model_sse(model: Omega0Model, points: Sequence[Tuple[str, str]]) -> float:
    total = 0.0
    for lam, omega0 in points:
        residual = predict_omega0(lam, model) - float(omega0)
        total += residual * residual
    return total


def _cmd_omega0_fit(args) -> str:
    points = _read_fit_points(args.input)
    model = fit_omega0_model(points)
    sse = _model_sse(model, points)
    cells = {
        "a": _float_token(model.a),
        "b": _float_token(model.b),
        "c": _float_token(model.c),
        "alpha": _float_token(model.alpha),
        "sse": _float_token(sse),
    }
    if args.format == "csv":
        return _csv_doc(tuple(cells), [tuple(cells.values())])
    if args.format == "json":
        payload = {key: _Num(token) for key, token in cells.items()}
        payload["points"] = len(points)
        return _json_doc(payload)
    return _text_doc(list(cells.items()) + [("points", len(points))])


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _add_common(parser, omega0_default="auto", with_solver=True):
    parser.add_argument("--lambda", dest="lam", required=True,
                        help="quartic coupling (>= 0)")
    parser.add_argument("--omega", default="1", help="oscillator frequency")
    parser.add_argument("--digits", type=_positive_int, default=8,
                        help="printed digits after the decimal point")
    if with_solver:
        parser.add_argument("--omega0", default=omega0_default,
                            help="basis frequency: auto, formula, or a number")
        parser.add_argument("--n-max", dest="n_max", type=_positive_int,
                            default=2000, help="largest truncation order tried")
    parser.add_argument("--format", choices=("csv", "json", "text"),
                        default="text", help="output format")
    parser.add_argument("--output", default=None,
                        help="write output to this file instead of stdout")


def get_args(argv=None):
    if argv is None:
        argv = sys.argv[1:]
    merged = []
    skip = False
    for position, token in enumerate(argv):
        if skip:
            skip = False
            continue
        # Join "--x -5:5:0.01" so the negative grid bound is not mistaken
        # for an option.
        if (token == "--x" and position + 1 < len(argv)
                and re.match(r"-[\d.]", argv[position + 1])):
            merged.append(token + "=" + argv[position + 1])
            skip = True
            continue
        merged.append(token)
    argv = merged
    parser = argparse.ArgumentParser(
        prog="anharm",
        description="Energy levels and wavefunctions of the quartic"
        " anharmonic oscillator H = (p^2 + omega^2 x^2)/2 + lambda x^4,"
        " computed in a tunable harmonic-oscillator basis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_energy = sub.add_parser("energy", help="one converged energy level")
    _add_common(p_energy)
    p_energy.add_argument("--level", type=_nonneg_int, default=0)
    p_energy.set_defaults(handler=_cmd_energy)

    p_levels = sub.add_parser("levels", help="levels 0..count-1 in one run")
    _add_common(p_levels)
    p_levels.add_argument("--count", type=_positive_int, required=True)
    p_levels.set_defaults(handler=_cmd_levels)

    p_conv = sub.add_parser("converge", help="energy at each truncation order")
    _add_common(p_conv, with_solver=False)
    p_conv.add_argument("--orders", required=True, help="range a..b or a..b:step")
    p_conv.add_argument("--omega0", default="1", help="basis frequency (number)")
    p_conv.add_argument("--level", type=_nonneg_int, default=0)
    p_conv.set_defaults(handler=_cmd_converge)

    p_wf = sub.add_parser("wavefunction", help="sampled eigenfunction psi(x)")
    _add_common(p_wf)
    p_wf.add_argument("--level", type=_nonneg_int, required=True)
    p_wf.add_argument("--x", default="-5:5:0.01", help="grid min:max:step")
    p_wf.set_defaults(handler=_cmd_wavefunction)

    p_pot = sub.add_parser("potential", help="basis potential and perturbation")
    p_pot.add_argument("--lambda", dest="lam", required=True)
    p_pot.add_argument("--omega0", required=True)
    p_pot.add_argument("--x", required=True, help="grid min:max:step")
    p_pot.add_argument("--digits", type=_positive_int, default=8)
    p_pot.add_argument("--format", choices=("csv", "json", "text"), default="text")
    p_pot.add_argument("--output", default=None)
    p_pot.set_defaults(handler=_cmd_potential)

    p_w0 = sub.add_parser("omega0", help="basis-frequency tools")
    w0_sub = p_w0.add_subparsers(dest="action", required=True)

    p_pred = w0_sub.add_parser("predict", help="fitted omega0(lambda) curve")
    p_pred.add_argument("--lambda", dest="lam", required=True)
    p_pred.add_argument("--format", choices=("csv", "json", "text"), default="text")
    p_pred.add_argument("--output", default=None)
    p_pred.set_defaults(handler=_cmd_omega0_predict)

    p_opt = w0_sub.add_parser("optimize", help="variational omega0 at fixed order")
    p_opt.add_argument("--lambda", dest="lam", required=True)
    p_opt.add_argument("--order", type=_nonneg_int, required=True)
    p_opt.add_argument("--level", type=_nonneg_int, default=0)
    p_opt.add_argument("--omega", default="1")
    p_opt.add_argument("--digits", type=_positive_int, default=8)
    p_opt.add_argument("--format", choices=("csv", "json", "text"), default="text")
    p_opt.add_argument("--output", default=None)
    p_opt.set_defaults(handler=_cmd_omega0_optimize)

    p_fit = w0_sub.add_parser("fit", help="fit the omega0(lambda) curve to data")
    p_fit.add_argument("--input", required=True, help="csv of lambda,omega0 rows")
    p_fit.add_argument("--format", choices=("csv", "json", "text"), default="text")
    p_fit.add_argument("--output", default=None)
    p_fit.set_defaults(handler=_cmd_omega0_fit)

    return parser.parse_args(argv)


def run(argv=None) -> int:
    threads = os.environ.get("ANHARM_THREADS")
    if threads is not None:
        try:
            if int(threads) < 0:
                raise ValueError
        except ValueError:
            print("error: ANHARM_THREADS must be a nonnegative integer",
                  file=sys.stderr)
            return 2
    try:
        args = get_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        text = args.handler(args)
    except ConvergenceFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
