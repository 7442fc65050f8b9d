"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical/domain error.  Errors are
reported as a single JSON line on standard error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .coeffs import Problem, load_problem, problem_from_dict
from .errors import HeatpropError, NumericalError, UsageError
from .expr import parse_coeff_expr
from .kernel import compute_kernel_coeffs, heat_kernel
from .characteristic import solve_characteristic
from .presets import PRESET_NAMES
from .verify import run_preset_checks
from .propagator import Constant, Delta, apply_propagator, duhamel_solve, read_field_csv

DIGITS = 12


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    problem: Problem | None
    args: argparse.Namespace


def _fmt(v) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    return f"{v:.{DIGITS}g}"


def _json_number(v):
    # round-trip through the fixed-digit format for reproducible output
    v = float(v)
    if not math.isfinite(v):
        return None
    return float(_fmt(v))


def _threads() -> int:
    raw = os.environ.get("HEATPROP_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"HEATPROP_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError("HEATPROP_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _batched(func, xs: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Evaluate ``func`` on chunks of ``xs``, in parallel when allowed."""
    pieces = [xs[i : i + chunk] for i in range(0, xs.size, chunk)]
    n = min(_threads(), len(pieces))
    if n <= 1:
        results = [func(p) for p in pieces]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(func, pieces))
    return np.concatenate([np.atleast_1d(r) for r in results]) if results else np.empty(0)


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--grid expects a:b:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"--grid expects a:b:n, got {text!r}") from None
    if n < 1 or (n > 1 and not hi > lo):
        raise UsageError("--grid needs n >= 1 and b > a")
    return np.linspace(lo, hi, n)


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param value must be a number, got {value!r}") from None
    return out


def _parse_data(text: str, t0: float):
    kind, sep, value = text.partition(":")
    if not sep:
        raise UsageError(f"--data expects kind:value, got {text!r}")
    if kind == "file":
        return read_field_csv(value, t0)
    try:
        number = float(value)
    except ValueError:
        raise UsageError(f"--data {kind} needs a number, got {value!r}") from None
    if kind == "constant":
        return Constant(number)
    if kind == "delta":
        return Delta(number)
    raise UsageError(f"unknown data kind {kind!r} (constant, delta, file)")


def _problem(args) -> Problem:
    sources = [args.preset is not None, args.problem is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --preset or --problem")
    if args.preset is not None:
        problem = problem_from_dict({"preset": args.preset, "params": _parse_params(args.param)})
    else:
        if args.param:
            raise UsageError("--param only applies to --preset")
        problem = load_problem(args.problem)
    if args.t0 is not None:
        problem = Problem(problem.coeffs, float(args.t0), problem.preset)
    return problem


def _require_t(args, problem: Problem) -> float:
    if args.t is None:
        raise UsageError("--t is required")
    if not args.t > problem.t0:
        raise UsageError(f"--t must exceed t0 = {problem.t0}")
    return float(args.t)


# ---------------------------------------------------------------------------
# output


def _emit(args, text: str) -> None:
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise UsageError(f"cannot write {args.out}: {exc}") from exc


def _table(args, header, columns) -> str:
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if args.format == "json":
        rows = [{h: _json_number(c[i]) for h, c in zip(header, cols)} for i in range(cols[0].size)]
        return json.dumps(rows) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for i in range(cols[0].size):
        writer.writerow([_fmt(c[i]) for c in cols])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_presets(cfg: RunConfig) -> int:
    if cfg.args.format == "json":
        _emit(cfg.args, _json(list(PRESET_NAMES)))
    else:
        _emit(cfg.args, "".join(f"{name}\n" for name in PRESET_NAMES))
    return 0


def cmd_mu(cfg: RunConfig) -> int:
    a, p = cfg.args, cfg.problem
    t_end = p.t0 + 10.0 if a.t_end is None else float(a.t_end)
    if not t_end > p.t0:
        raise UsageError("--t-end must exceed t0")
    sol = solve_characteristic(p.coeffs, p.t0, t_end, a.tol)
    if a.n is None:
        ts, mu, dmu = sol.ts, sol.mu_nodes, sol.dmu_nodes
    else:
        if a.n < 2:
            raise UsageError("--n must be at least 2")
        ts = np.linspace(p.t0, t_end, a.n)
        mu, dmu = sol(ts)
    _emit(a, _table(a, ["t", "mu", "dmu"], [ts, mu, dmu]))
    return 0


def cmd_coeffs(cfg: RunConfig) -> int:
    a, p = cfg.args, cfg.problem
    t = _require_t(a, p)
    sol = solve_characteristic(p.coeffs, p.t0, t, a.tol)
    kc = compute_kernel_coeffs(p.coeffs, sol, t, a.qtol)
    data = {k: _json_number(v) for k, v in kc.as_dict().items()}
    if a.format == "csv":
        _emit(a, _table(a, list(data), [[v] for v in kc.as_dict().values()]))
    else:
        _emit(a, _json(data))
    return 0


def cmd_kernel(cfg: RunConfig) -> int:
    a, p = cfg.args, cfg.problem
    t = _require_t(a, p)
    hk = heat_kernel(p.coeffs, t, p.t0, a.tol, a.qtol)
    evaluate = hk.log_eval if a.log else hk.eval
    label = "logK" if a.log else "K"
    if a.x is not None or a.y is not None:
        if a.x is None or a.y is None:
            raise UsageError("point evaluation needs both --x and --y")
        value = float(evaluate(a.x, a.y))
        if a.format == "json":
            _emit(a, _json({"x": a.x, "y": a.y, "t": t, label: _json_number(value)}))
        else:
            _emit(a, f"{value:#.6g}\n")
        return 0
    if a.nx < 1 or a.ny < 1:
        raise UsageError("--nx and --ny must be positive")
    xs = np.linspace(a.xmin, a.xmax, a.nx)
    ys = np.linspace(a.ymin, a.ymax, a.ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    values = evaluate(X, Y)
    _emit(a, _table(a, ["x", "y", label], [X, Y, values]))
    return 0


def cmd_solve(cfg: RunConfig) -> int:
    a, p = cfg.args, cfg.problem
    t = _require_t(a, p)
    if a.data is None:
        raise UsageError("--data is required")
    data = _parse_data(a.data, p.t0)
    xs = _parse_grid(a.grid)
    hk = heat_kernel(p.coeffs, t, p.t0, a.tol, a.qtol)
    u = _batched(lambda chunk: apply_propagator(hk, data, chunk, a.order), xs)
    _emit(a, _table(a, ["x", "u"], [xs, u]))
    return 0


def cmd_duhamel(cfg: RunConfig) -> int:
    a, p = cfg.args, cfg.problem
    t = _require_t(a, p)
    if a.source is None:
        raise UsageError("--source is required")
    source_expr = parse_coeff_expr(a.source, variables=("s", "x"))
    data = None if a.data is None else _parse_data(a.data, p.t0)
    xs = _parse_grid(a.grid)

    def source(s, x):
        return source_expr.vector(np.full(np.shape(x), s), np.asarray(x, dtype=float))

    field = duhamel_solve(p.coeffs, data, source, xs, t, a.slices, p.t0, tol=a.tol, qtol=a.qtol, gh_order=a.order)
    _emit(a, _table(a, ["x", "u"], [field.xs, field.values]))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    a = cfg.args
    if a.preset is None:
        raise UsageError("verify needs --preset")
    if a.problem is not None:
        raise UsageError("verify works on presets only")
    results = run_preset_checks(a.preset, _parse_params(a.param), tol=a.tol, qtol=a.qtol)
    for r in results:
        r["passed"] = bool(r["passed"])
    lines = [json.dumps(r, default=_json_number) for r in results]
    _emit(a, "".join(line + "\n" for line in lines))
    return 0 if all(r["passed"] for r in results) else 2


COMMANDS = {
    "presets": cmd_presets,
    "mu": cmd_mu,
    "coeffs": cmd_coeffs,
    "kernel": cmd_kernel,
    "solve": cmd_solve,
    "duhamel": cmd_duhamel,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--preset", choices=PRESET_NAMES, help="named coefficient preset")
    common.add_argument("--param", action="append", metavar="NAME=VALUE", help="preset parameter (repeatable)")
    common.add_argument("--problem", metavar="FILE", help="JSON problem spec")
    common.add_argument("--t0", type=float, help="initial time (overrides the problem file)")
    common.add_argument("--t", type=float, help="evaluation time")
    common.add_argument("--tol", type=float, default=1e-10, help="characteristic ODE tolerance")
    common.add_argument("--qtol", type=float, default=1e-11, help="kernel quadrature tolerance")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format")

    parser = _Parser(prog="heatprop", description="Heat kernels of variable-coefficient diffusion equations.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sub.add_parser("presets", parents=[common], help="list presets")

    p = sub.add_parser("mu", parents=[common], help="characteristic function as CSV t,mu,dmu")
    p.add_argument("--t-end", type=float, help="end of the interval (default t0 + 10)")
    p.add_argument("--n", type=int, help="resample on n uniform points instead of solver nodes")

    sub.add_parser("coeffs", parents=[common], help="kernel coefficients at --t")

    p = sub.add_parser("kernel", parents=[common], help="kernel on a grid or at a point")
    for axis in ("x", "y"):
        p.add_argument(f"--{axis}", type=float, help=f"single-point {axis}")
        p.add_argument(f"--{axis}min", type=float, default=-2.0)
        p.add_argument(f"--{axis}max", type=float, default=2.0)
        p.add_argument(f"--n{axis}", type=int, default=21)
    p.add_argument("--log", action="store_true", help="emit the logarithm of the kernel")

    p = sub.add_parser("solve", parents=[common], help="propagate initial data")
    p.add_argument("--data", help="constant:<v> | delta:<x0> | file:<csv>")
    p.add_argument("--grid", default="-2:2:41", help="x_min:x_max:n (default -2:2:41)")
    p.add_argument("--order", type=int, default=64, help="Gauss-Hermite order")

    p = sub.add_parser("duhamel", parents=[common], help="non-homogeneous problem via Duhamel")
    p.add_argument("--source", help="source expression in s and x")
    p.add_argument("--data", help="initial data (default zero)")
    p.add_argument("--grid", default="-1:1:21", help="x_min:x_max:n (default -1:1:21)")
    p.add_argument("--slices", type=int, default=8, help="Gauss-Legendre panels in s")
    p.add_argument("--order", type=int, default=64, help="Gauss-Hermite order")

    sub.add_parser("verify", parents=[common], help="run the verification checks for a preset")
    return parser


_DEFAULT_FORMAT = {"coeffs": "json", "verify": "json"}


_VALUE_FLAGS = ("--grid", "--data", "--source")


def _join_values(argv):
    # values such as "-1:1:5" or "-x^2" would otherwise be read as flags
    out, it = [], iter(argv)
    for item in it:
        if item in _VALUE_FLAGS:
            nxt = next(it, None)
            out.append(item if nxt is None else f"{item}={nxt}")
        else:
            out.append(item)
    return out


def run(argv=None) -> int:
    """Run the CLI on ``argv`` and return the exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_join_values(argv))
        if args.format is None:
            args.format = _DEFAULT_FORMAT.get(args.command, "csv")
        for name in ("tol", "qtol"):
            value = getattr(args, name)
            if not (0.0 < value <= 1e-2):
                raise UsageError(f"--{name} must lie in (0, 1e-2]")
        needs_problem = args.command not in ("presets", "verify")
        problem = _problem(args) if needs_problem else None
        return COMMANDS[args.command](RunConfig(args.command, problem, args))
    except UsageError as exc:
        _report(exc, 1)
        return 1
    except (NumericalError, ZeroDivisionError, OverflowError, FloatingPointError) as exc:
        _report(exc, 2)
        return 2
    except HeatpropError as exc:
        _report(exc, 2)
        return 2


def _report(exc: BaseException, code: int) -> None:
    line = {"error": type(exc).__name__, "message": str(exc).replace("\n", " "), "exit": code}
    t = getattr(exc, "t", None)
    if t is not None:
        line["t"] = t
    sys.stderr.write(json.dumps(line) + "\n")


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
