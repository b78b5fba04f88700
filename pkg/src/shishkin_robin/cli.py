"""Command-line entry point: ``solve``, ``table`` and ``validate``.

Exit status: 0 success, 1 configuration or usage error, 2 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Optional

from . import exprlang
from .analysis import AXES, DEFAULT_EPSILONS, SweepConfig, format_table, report_csv, run_sweep
from .errors import DataEvaluationError, NumericError
from .mesh import build_space_mesh, build_time_mesh
from .problem import ExprField1, ExprField2, Problem, validate_problem
from .solver import march, write_grid_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
COMPAT_TOL = 1e-6
EXPRESSION_FIELDS = ("a", "f", "phi_L", "phi_R", "phi_B")

BUILTIN_PROBLEM = {
    "a": "1+3*t",
    "f": "exp(3*t)",
    "phi_L": "1+t^5",
    "phi_R": "1+t^5",
    "phi_B": "1",
    "epsilon": "2^-14",
    "alpha": 0.9,
    "T": 1,
}


class ConfigError(ValueError):
    pass


def _number(value, where: str) -> float:
    """A positive number given either as JSON number or as a constant expression."""
    if isinstance(value, bool):
        raise ConfigError(f"invalid config: {where} must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        v = float(value)
    elif isinstance(value, str):
        try:
            v = exprlang.evaluate(exprlang.parse(value), 0.0, 0.0)
        except (exprlang.ExprError, exprlang.EvalError) as exc:
            raise ConfigError(f"expression error in {where}: {exc}") from None
    else:
        raise ConfigError(f"invalid config: {where} must be a number, got {value!r}")
    if not v > 0 or v == float("inf"):
        raise ConfigError(f"invalid config: {where} must be positive, got {value!r}")
    return v


def _count(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(f"invalid config: {where} must be a positive integer, got {value!r}")
    return value


def _check_N(N: int, where: str) -> None:
    if N % 4 or N < 8:
        raise ConfigError(
            f"invalid config: {where}={N} must be divisible by 4 and at least 8"
        )


@dataclass
class RunConfig:
    problem: dict
    mesh: Optional[dict] = None
    sweep: Optional[dict] = None
    output: Optional[dict] = None
    _parsed: dict = field(default_factory=dict, repr=False, compare=False)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"problem": dict(self.problem)}
        for name in ("mesh", "sweep", "output"):
            block = getattr(self, name)
            if block is not None:
                out[name] = dict(block)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def build_problem(self, epsilon: Optional[float] = None) -> Problem:
        p = self._parsed["sources"]
        return Problem(
            a=ExprField2(p["a"]),
            f=ExprField2(p["f"]),
            phi_L=ExprField1(p["phi_L"], "t", 0.0),
            phi_R=ExprField1(p["phi_R"], "t", 1.0),
            phi_B=ExprField1(p["phi_B"], "x", 0.0),
            epsilon=self._parsed["epsilon"] if epsilon is None else epsilon,
            alpha=self._parsed["alpha"],
            T=self._parsed["T"],
        )


def config_from_dict(data: Any) -> RunConfig:
    """Validate a decoded JSON document and build a `RunConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("invalid config: top level must be a JSON object")
    unknown = set(data) - {"problem", "mesh", "sweep", "output"}
    if unknown:
        raise ConfigError(f"invalid config: unknown block(s) {sorted(unknown)}")
    prob = data.get("problem")
    if not isinstance(prob, dict):
        raise ConfigError("missing field: problem")
    parsed: dict[str, Any] = {"sources": {}}
    for name in EXPRESSION_FIELDS:
        if name not in prob:
            raise ConfigError(f"missing field: problem.{name}")
        src = prob[name]
        if isinstance(src, (int, float)) and not isinstance(src, bool):
            src = repr(src)
        if not isinstance(src, str):
            raise ConfigError(f"invalid config: problem.{name} must be an expression string")
        try:
            exprlang.parse(src)
        except exprlang.ExprError as exc:
            raise ConfigError(f"expression error in problem.{name}: {exc}") from None
        parsed["sources"][name] = src
    for name in ("alpha", "T"):
        if name not in prob:
            raise ConfigError(f"missing field: problem.{name}")
        parsed[name] = _number(prob[name], f"problem.{name}")
    if "epsilon" in prob:
        parsed["epsilon"] = _number(prob["epsilon"], "problem.epsilon")
    else:
        parsed["epsilon"] = DEFAULT_EPSILONS[-1]

    mesh = data.get("mesh")
    if mesh is not None:
        for name in ("N", "M"):
            if name not in mesh:
                raise ConfigError(f"missing field: mesh.{name}")
            _count(mesh[name], f"mesh.{name}")
        _check_N(mesh["N"], "mesh.N")

    sweep = data.get("sweep")
    if sweep is not None:
        axis = sweep.get("axis")
        if axis not in AXES:
            raise ConfigError(f"invalid config: sweep.axis must be one of {AXES}, got {axis!r}")
        key = "fixed_N" if axis == "time" else "fixed_M"
        if key not in sweep:
            raise ConfigError(f"missing field: sweep.{key}")
        _count(sweep[key], f"sweep.{key}")
        if axis == "time":
            _check_N(sweep[key], "sweep.fixed_N")
        refine = sweep.get("refine_values")
        if not isinstance(refine, list) or len(refine) < 2:
            raise ConfigError("invalid config: sweep.refine_values needs at least two integers")
        for i, v in enumerate(refine):
            _count(v, f"sweep.refine_values[{i}]")
        if any(b != 2 * a for a, b in zip(refine, refine[1:])):
            raise ConfigError(f"invalid config: sweep.refine_values must double, got {refine}")
        if axis != "time":
            for v in refine:
                _check_N(v, "sweep.refine_values entry")
        if "epsilons" in sweep:
            eps = sweep["epsilons"]
            if not isinstance(eps, list) or not eps:
                raise ConfigError("invalid config: sweep.epsilons must be a non-empty list")
            for i, e in enumerate(eps):
                _number(e, f"sweep.epsilons[{i}]")

    output = data.get("output")
    if output is not None:
        fmt = output.get("format", "csv")
        what = output.get("what", "solution")
        if fmt not in ("text", "csv"):
            raise ConfigError(f"invalid config: output.format must be text or csv, got {fmt!r}")
        if what not in ("solution", "derivative", "table"):
            raise ConfigError(
                f"invalid config: output.what must be solution, derivative or table, got {what!r}"
            )
        if "path" in output and not isinstance(output["path"], str):
            raise ConfigError("invalid config: output.path must be a string")

    return RunConfig(problem=prob, mesh=mesh, sweep=sweep, output=output, _parsed=parsed)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return config_from_dict(data)


# --- argument handling -----------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _expr_list(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("problem source")
    src.add_argument("--config", metavar="PATH", help="JSON run configuration")
    src.add_argument("--builtin-example", action="store_true",
                     help="use u_t - eps u_xx + (1+3t)u = exp(3t) with Robin data 1+t^5")
    common.add_argument("--epsilon", help="perturbation parameter (number or expression, e.g. 2^-14)")
    common.add_argument("--strict-compat", action="store_true",
                        help="abort instead of warning when the corner compatibility check fails")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("text", "csv"))

    parser = _Parser(prog="shishkin-robin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve = sub.add_parser("solve", parents=[common], help="march one problem and write U or D_x U")
    solve.add_argument("--N", type=int)
    solve.add_argument("--M", type=int)
    solve.add_argument("--what", choices=("solution", "derivative"))

    table = sub.add_parser("table", parents=[common], help="two-mesh convergence table")
    table.add_argument("--axis", choices=AXES)
    table.add_argument("--fixed-N", type=int, dest="fixed_N")
    table.add_argument("--fixed-M", type=int, dest="fixed_M")
    table.add_argument("--refine", type=_int_list, metavar="LIST")
    table.add_argument("--epsilons", type=_expr_list, metavar="LIST")
    table.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    sub.add_parser("validate", parents=[common], help="check positivity and corner compatibility")
    return parser


def _merge_args(args) -> RunConfig:
    if args.config and args.builtin_example:
        raise ConfigError("use either --config or --builtin-example, not both")
    if args.config:
        data = load_config(args.config).to_dict()
    elif args.builtin_example:
        data = {"problem": dict(BUILTIN_PROBLEM)}
    else:
        raise ConfigError("no problem given: pass --config PATH or --builtin-example")

    if args.epsilon is not None:
        data["problem"]["epsilon"] = args.epsilon
    out = dict(data.get("output") or {})
    if args.format:
        out["format"] = args.format
    if args.out:
        out["path"] = args.out

    if args.command == "solve":
        mesh = dict(data.get("mesh") or {})
        if args.N is not None:
            mesh["N"] = args.N
        if args.M is not None:
            mesh["M"] = args.M
        if mesh:
            data["mesh"] = mesh
        if args.what:
            out["what"] = args.what
    elif args.command == "table":
        sweep = dict(data.get("sweep") or {})
        if args.axis:
            sweep["axis"] = args.axis
        if args.fixed_N is not None:
            sweep["fixed_N"] = args.fixed_N
        if args.fixed_M is not None:
            sweep["fixed_M"] = args.fixed_M
        if args.refine:
            sweep["refine_values"] = args.refine
        if args.epsilons:
            sweep["epsilons"] = args.epsilons
        if sweep:
            data["sweep"] = sweep
        out["what"] = "table"
    if out:
        data["output"] = out
    return config_from_dict(data)


def _emit(text: str, cfg: RunConfig) -> None:
    path = (cfg.output or {}).get("path")
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _validate(problem: Problem, strict: bool) -> bool:
    report = validate_problem(problem, 10)
    if not report.positivity_ok:
        x, t = report.min_location
        print(f"error: a(x,t) > alpha={problem.alpha} fails: min sampled a = "
              f"{report.min_sampled_a:.6g} at (x={x:.6g}, t={t:.6g})", file=sys.stderr)
        return False
    rl, rr = report.compatibility_residuals
    if max(abs(rl), abs(rr)) > COMPAT_TOL:
        level = "error" if strict else "warning"
        print(f"{level}: corner compatibility residuals (left={rl:.3e}, right={rr:.3e}) "
              f"exceed {COMPAT_TOL:g}", file=sys.stderr)
        return not strict
    return True


def cmd_solve(cfg: RunConfig, strict_compat: bool = False) -> int:
    if cfg.mesh is None:
        raise ConfigError("missing field: mesh (give --N and --M or a mesh block)")
    problem = cfg.build_problem()
    if not _validate(problem, strict_compat):
        return EXIT_CONFIG
    sm = build_space_mesh(problem.epsilon, problem.alpha, cfg.mesh["N"])
    tm = build_time_mesh(problem.T, cfg.mesh["M"])
    sol = march(problem, sm, tm)
    out = cfg.output or {}
    text = write_grid_csv(sol, what=out.get("what", "solution"))
    if out.get("format") == "text":
        text = "".join(
            " ".join(f"{c:>24}" for c in line.split(",")) + "\n" for line in text.splitlines()
        )
    _emit(text, cfg)
    return EXIT_OK


def cmd_table(cfg: RunConfig, strict_compat: bool = False, jobs: int = 1) -> int:
    if cfg.sweep is None:
        raise ConfigError("missing field: sweep (give --axis/--refine or a sweep block)")
    problem = cfg.build_problem()
    if not _validate(problem, strict_compat):
        return EXIT_CONFIG
    s = cfg.sweep
    epsilons = (
        tuple(_number(e, "sweep.epsilons") for e in s["epsilons"])
        if "epsilons" in s else DEFAULT_EPSILONS
    )
    fixed = s["fixed_N"] if s["axis"] == "time" else s["fixed_M"]
    try:
        sweep = SweepConfig(s["axis"], fixed, tuple(s["refine_values"]), problem, epsilons)
    except ValueError as exc:
        raise ConfigError(f"invalid config: {exc}") from None
    report = run_sweep(sweep, jobs=max(1, jobs))
    fmt = (cfg.output or {}).get("format", "text")
    _emit(report_csv(report) if fmt == "csv" else format_table(report), cfg)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, strict_compat: bool = False) -> int:
    problem = cfg.build_problem()
    report = validate_problem(problem, 10)
    rl, rr = report.compatibility_residuals
    x, t = report.min_location
    _emit(
        f"positivity_ok: {report.positivity_ok}\n"
        f"min_sampled_a: {report.min_sampled_a:.17g} at x={x:.17g} t={t:.17g}\n"
        f"alpha: {problem.alpha:.17g}\n"
        f"compatibility_residuals: {rl:.17g} {rr:.17g}\n",
        cfg,
    )
    ok = report.positivity_ok and (not strict_compat or max(abs(rl), abs(rr)) <= COMPAT_TOL)
    return EXIT_OK if ok else EXIT_CONFIG


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_args(args)
        if args.command == "solve":
            return cmd_solve(cfg, args.strict_compat)
        if args.command == "table":
            return cmd_table(cfg, args.strict_compat, args.jobs)
        return cmd_validate(cfg, args.strict_compat)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericError, DataEvaluationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
