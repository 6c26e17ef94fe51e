"""Command-line front end: run configuration, orchestration, CSV/JSON output.

Subcommands: trajectory | measure | histogram | verify | translate.
Configuration comes from an optional JSON file plus flag overrides; output
files are deterministic for a fixed config and seed (timings go to stderr
only). Exit codes: 0 success, 1 invalid input or orthogonal-pair
rejection, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .dynamics import lambda_map_coefficients, make_grid, rates_from_model
from .errors import (
    BackflowError,
    CptViolation,
    IntegratorDiverged,
    ParseError,
    PositivityFailure,
    PositivityLost,
    QuadratureFailure,
    ValidationError,
)
from .measure import (
    MeasureStrategy,
    backflow,
    estimate_measure,
    histogram_backflow,
    mixed_reference_pair,
    pure_a_plus_pair,
    pure_ab_pair,
    trace_distance_trajectory,
)
from .statespace import DensityMatrix, make_density_matrix, trace_distance
from .translation import jointly_translate
from .verify import run_all

TAU = 2.0 * np.pi

_NAMED_PAIRS = {
    "mpair": mixed_reference_pair,
    "pure-ab": pure_ab_pair,
    "pure-a-plus": pure_a_plus_pair,
}

_NUMERICAL_ERRORS = (
    QuadratureFailure,
    CptViolation,
    IntegratorDiverged,
    PositivityLost,
    PositivityFailure,
)


# --- matrix (de)serialization -------------------------------------------


def matrix_to_json(matrix: np.ndarray) -> list:
    """Nested [re, im] pairs; floats keep full precision."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix, dtype=complex)]


def matrix_from_json(rows, where: str) -> np.ndarray:
    try:
        parsed = [
            [complex(cell[0], cell[1]) if isinstance(cell, (list, tuple)) else complex(cell, 0.0) for cell in row]
            for row in rows
        ]
        return np.asarray(parsed, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise ValidationError(f"{where}: cannot parse matrix entries ({exc})") from exc


def resolve_pair(spec: str) -> tuple[DensityMatrix, DensityMatrix]:
    """Named pair preset or path to a JSON file holding two matrices."""
    if spec in _NAMED_PAIRS:
        return _NAMED_PAIRS[spec]()
    try:
        with open(spec, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"pair: {spec!r} is neither a named pair nor a readable file ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{spec}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, list) or len(data) != 2:
        raise ValidationError(f"pair file {spec} must hold a list of two matrices")
    try:
        rho1 = make_density_matrix(matrix_from_json(data[0], "pair[0]"))
        rho2 = make_density_matrix(matrix_from_json(data[1], "pair[1]"))
    except BackflowError as exc:
        raise ValidationError(f"pair file {spec}: {exc}") from exc
    return rho1, rho2


# --- run configuration ----------------------------------------------------


def _default_model() -> dict:
    return {"preset": "sinusoidal", "amplitude": 0.03, "frequency": 1.0}


@dataclass
class RunConfig:
    """Validated run parameters; flags override file values."""

    model: dict = field(default_factory=_default_model)
    t_max: float = TAU
    grid_steps: int = 2000
    seed: int = 12345
    samples: int = 1000
    bins: int = 50
    candidate_pairs: tuple = ()
    engine: str = "closed_form"
    output: str | None = None
    format: str = "csv"
    dims: tuple = (2, 3, 4)
    trials: int = 100
    refine_best: bool = False

    def validate(self) -> "RunConfig":
        if not isinstance(self.model, dict):
            raise ValidationError("model: must be an object with a 'preset' key")
        if not self.t_max > 0.0:
            raise ValidationError(f"t_max: must be positive, got {self.t_max}")
        if self.grid_steps < 10:
            raise ValidationError(f"grid_steps: must be >= 10, got {self.grid_steps}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValidationError(f"seed: must be an unsigned 64-bit integer, got {self.seed}")
        if self.samples < 1:
            raise ValidationError(f"samples: must be >= 1, got {self.samples}")
        if self.bins < 1:
            raise ValidationError(f"bins: must be >= 1, got {self.bins}")
        if self.trials < 1:
            raise ValidationError(f"trials: must be >= 1, got {self.trials}")
        if self.engine not in ("closed_form", "integrator"):
            raise ValidationError(f"engine: must be closed_form or integrator, got {self.engine!r}")
        if self.format not in ("csv", "json"):
            raise ValidationError(f"format: must be csv or json, got {self.format!r}")
        if not self.dims or any(int(d) < 2 for d in self.dims):
            raise ValidationError(f"dims: need dimensions >= 2, got {self.dims}")
        return self

    def echo(self) -> dict:
        """JSON-serializable copy that parse_config accepts back verbatim."""
        return {
            "model": self.model,
            "t_max": float(self.t_max),
            "grid_steps": int(self.grid_steps),
            "seed": int(self.seed),
            "samples": int(self.samples),
            "bins": int(self.bins),
            "candidate_pairs": [
                [matrix_to_json(a.entries), matrix_to_json(b.entries)] for a, b in self.candidate_pairs
            ],
            "engine": self.engine,
            "output": self.output,
            "format": self.format,
            "dims": [int(d) for d in self.dims],
            "trials": int(self.trials),
            "refine_best": bool(self.refine_best),
        }


_CONFIG_FIELDS = {
    "model",
    "t_max",
    "grid_steps",
    "seed",
    "samples",
    "bins",
    "candidate_pairs",
    "engine",
    "output",
    "format",
    "dims",
    "trials",
    "refine_best",
}


def parse_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults <- JSON file <- flag overrides, then validate."""
    data: dict = {}
    if path:
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as exc:
            raise ParseError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ParseError(f"{path}: top-level config must be a JSON object")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ValidationError(f"unknown config fields: {sorted(unknown)}")
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    pairs = []
    for i, entry in enumerate(merged.get("candidate_pairs", []) or []):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValidationError(f"candidate_pairs[{i}]: expected a [rho1, rho2] pair")
        try:
            pairs.append(
                (
                    make_density_matrix(matrix_from_json(entry[0], f"candidate_pairs[{i}][0]")),
                    make_density_matrix(matrix_from_json(entry[1], f"candidate_pairs[{i}][1]")),
                )
            )
        except BackflowError as exc:
            raise ValidationError(f"candidate_pairs[{i}]: {exc}") from exc
    merged["candidate_pairs"] = tuple(pairs)
    if "dims" in merged and merged["dims"] is not None:
        merged["dims"] = tuple(int(d) for d in merged["dims"])

    try:
        config = RunConfig(**merged)
    except TypeError as exc:
        raise ValidationError(str(exc)) from exc
    return config.validate()


# --- output ---------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".9g")


def render_csv(header, rows, footer=()) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(cell) for cell in row) for row in rows]
    lines += list(footer)
    return "\n".join(lines) + "\n"


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_text(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


@dataclass
class RunReport:
    """Orchestration record; the emitted payload excludes wall-clock timings."""

    command: str
    config: dict
    results: dict
    timings: dict
    violations: list

    def payload(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "violations": self.violations,
        }


def _print_summary(report: RunReport) -> None:
    timing = " ".join(f"{k}={v:.3f}s" for k, v in report.timings.items())
    status = "ok" if not report.violations else f"violations={report.violations}"
    print(f"[backflow {report.command}] {status} ({timing})", file=sys.stderr)


# --- commands -------------------------------------------------------------


def cmd_trajectory(config: RunConfig, pair_spec: str) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    rates = rates_from_model(config.model)
    grid = make_grid(config.t_max, config.grid_steps)
    coeffs = lambda_map_coefficients(rates, grid)
    rho1, rho2 = resolve_pair(pair_spec)
    t1 = time.perf_counter()
    traj = trace_distance_trajectory(coeffs, rho1, rho2, engine=config.engine, rates=rates)
    total_backflow = backflow(traj)
    t2 = time.perf_counter()

    results = {
        "pair": pair_spec,
        "backflow": total_backflow,
        "initial_distance": float(traj.distances[0]),
        "final_distance": float(traj.distances[-1]),
    }
    report = RunReport(
        command="trajectory",
        config=config.echo(),
        results=results,
        timings={"setup": t1 - t0, "run": t2 - t1},
        violations=[],
    )
    if config.format == "json":
        payload = report.payload()
        payload["results"] = dict(results)
        payload["results"]["grid"] = [float(t) for t in traj.grid]
        payload["results"]["distance"] = [float(d) for d in traj.distances]
        payload["results"]["sigma"] = [float(s) for s in traj.sigma]
        write_text(config.output, render_json(payload))
    else:
        rows = zip(traj.grid, traj.distances, traj.sigma)
        footer = [f"# backflow,{_fmt(total_backflow)}"]
        write_text(config.output, render_csv(["t", "distance", "sigma"], rows, footer))
    return report, 0


def cmd_measure(config: RunConfig) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    rates = rates_from_model(config.model)
    grid = make_grid(config.t_max, config.grid_steps)
    coeffs = lambda_map_coefficients(rates, grid)
    explicit = tuple(fn() for fn in _NAMED_PAIRS.values()) + tuple(config.candidate_pairs)
    strategy = MeasureStrategy(
        n_pure=config.samples,
        n_mixed=config.samples,
        explicit_pairs=explicit,
        refine=config.refine_best,
    )
    t1 = time.perf_counter()
    result = estimate_measure(coeffs, strategy, config.seed)
    t2 = time.perf_counter()

    results = {
        "estimate": result.estimate,
        "bound_type": "lower",
        "best_pair": [
            matrix_to_json(result.best_pair[0].entries),
            matrix_to_json(result.best_pair[1].entries),
        ],
        "candidate_breakdown": {k: float(v) for k, v in sorted(result.candidate_breakdown.items())},
        "samples_evaluated": result.samples_evaluated,
        "seed": result.seed,
    }
    report = RunReport(
        command="measure",
        config=config.echo(),
        results=results,
        timings={"setup": t1 - t0, "run": t2 - t1},
        violations=[],
    )
    write_text(config.output, render_json(report.payload()))
    return report, 0


def cmd_histogram(config: RunConfig) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    rates = rates_from_model(config.model)
    grid = make_grid(config.t_max, config.grid_steps)
    coeffs = lambda_map_coefficients(rates, grid)
    t1 = time.perf_counter()
    hist = histogram_backflow(coeffs, config.samples, config.bins, config.seed)
    t2 = time.perf_counter()

    results = {
        "max_sampled": hist.max_sampled,
        "reference_value": hist.reference_value,
        "gap": hist.reference_value - hist.max_sampled,
        "n_samples": hist.n_samples,
        "seed": hist.seed,
    }
    report = RunReport(
        command="histogram",
        config=config.echo(),
        results=results,
        timings={"setup": t1 - t0, "run": t2 - t1},
        violations=[],
    )
    if config.format == "json":
        payload = report.payload()
        payload["results"] = dict(results)
        payload["results"]["bin_edges"] = [float(e) for e in hist.bin_edges]
        payload["results"]["counts"] = [int(c) for c in hist.counts]
        payload["results"]["probabilities"] = [float(p) for p in hist.probabilities]
        write_text(config.output, render_json(payload))
    else:
        rows = zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts, hist.probabilities)
        footer = [
            f"# max_sampled,{_fmt(hist.max_sampled)}",
            f"# reference_value,{_fmt(hist.reference_value)}",
            f"# n_samples,{hist.n_samples}",
            f"# seed,{hist.seed}",
        ]
        write_text(
            config.output,
            render_csv(["bin_left", "bin_right", "count", "probability"], rows, footer),
        )
    return report, 0


def cmd_verify(config: RunConfig, inject_fault: str | None) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    checks = run_all(config.seed, config.dims, config.trials, inject_fault)
    t1 = time.perf_counter()
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"{status} {check.name} worst={check.worst:.6g} bound={check.bound:.6g} trials={check.trials}"
        print(line)
    violations = [check.name for check in checks if not check.passed]
    results = {
        "checks": [
            {
                "name": c.name,
                "passed": c.passed,
                "worst": c.worst,
                "bound": c.bound,
                "trials": c.trials,
            }
            for c in checks
        ],
        "n_failed": len(violations),
    }
    report = RunReport(
        command="verify",
        config=config.echo(),
        results=results,
        timings={"run": t1 - t0},
        violations=violations,
    )
    if config.output:
        write_text(config.output, render_json(report.payload()))
    return report, 0 if not violations else 2


def cmd_translate(config: RunConfig, pair_spec: str) -> tuple[RunReport, int]:
    t0 = time.perf_counter()
    rho1, rho2 = resolve_pair(pair_spec)
    hat1, hat2, construction = jointly_translate(rho1, rho2)
    t1 = time.perf_counter()

    results = {
        "pair": pair_spec,
        "overlap": construction.selection.overlap,
        "weights": [construction.selection.weight1, construction.selection.weight2],
        "norm_ratio": construction.norm_ratio,
        "epsilon_max": construction.epsilon_max,
        "epsilon": construction.epsilon,
        "shift": matrix_to_json(construction.shift.entries),
        "translated": [matrix_to_json(hat1.entries), matrix_to_json(hat2.entries)],
        "min_eigenvalues": [hat1.min_eigenvalue, hat2.min_eigenvalue],
        "distance_preserved": abs(trace_distance(hat1, hat2) - trace_distance(rho1, rho2)),
    }
    report = RunReport(
        command="translate",
        config=config.echo(),
        results=results,
        timings={"run": t1 - t0},
        violations=[],
    )
    write_text(config.output, render_json(report.payload()))
    return report, 0


# --- argument parsing -----------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="PATH", help="JSON config file")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit RNG seed")
    parser.add_argument("--samples", type=int, help="sample / candidate count")
    parser.add_argument("--grid-steps", dest="grid_steps", type=int, help="time grid steps")
    parser.add_argument("--t-max", dest="t_max", type=float, help="time horizon")
    parser.add_argument("--bins", type=int, help="histogram bin count")
    parser.add_argument("--engine", choices=["closed_form", "integrator"], help="evolution engine")
    parser.add_argument("--output", metavar="PATH", help="payload file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], help="payload format")
    parser.add_argument("--dims", metavar="N,N,...", help="dimensions for verify suites")
    parser.add_argument("--trials", type=int, help="trials per dimension for verify suites")
    parser.add_argument("--refine", action="store_true", default=None, help="simplex-refine the best pure pair")


class _Parser(argparse.ArgumentParser):
    """Usage errors are invalid input (exit 1); 2 is reserved for numerical failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="backflow",
        description="Trace-distance backflow analysis of the three-level decay model",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_traj = sub.add_parser("trajectory", help="trace distance of one pair over time")
    p_traj.add_argument("--pair", default="mpair", help="named pair (mpair|pure-ab|pure-a-plus) or JSON file")
    _add_common(p_traj)

    p_meas = sub.add_parser("measure", help="sampled lower bound on the backflow measure")
    _add_common(p_meas)

    p_hist = sub.add_parser("histogram", help="backflow histogram over random pure orthogonal pairs")
    _add_common(p_hist)

    p_ver = sub.add_parser("verify", help="run the structural property suites")
    p_ver.add_argument("--inject-fault", choices=["shift-sign"], help=argparse.SUPPRESS)
    _add_common(p_ver)

    p_trans = sub.add_parser("translate", help="shift a non-orthogonal pair into the interior")
    p_trans.add_argument("--pair", required=True, help="named pair or JSON file with two matrices")
    _add_common(p_trans)

    return parser


def _overrides_from(args: argparse.Namespace) -> dict:
    keys = ("seed", "samples", "grid_steps", "t_max", "bins", "engine", "output", "format", "trials")
    overrides = {k: getattr(args, k, None) for k in keys}
    if getattr(args, "dims", None):
        try:
            overrides["dims"] = tuple(int(d) for d in str(args.dims).split(","))
        except ValueError as exc:
            raise ValidationError(f"dims: cannot parse {args.dims!r}") from exc
    if getattr(args, "refine", None):
        overrides["refine_best"] = True
    return overrides


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config, _overrides_from(args))
        if args.command == "trajectory":
            report, code = cmd_trajectory(config, args.pair)
        elif args.command == "measure":
            report, code = cmd_measure(config)
        elif args.command == "histogram":
            report, code = cmd_histogram(config)
        elif args.command == "verify":
            report, code = cmd_verify(config, args.inject_fault)
        elif args.command == "translate":
            report, code = cmd_translate(config, args.pair)
        else:  # pragma: no cover
            raise ValidationError(f"unknown command {args.command!r}")
    except _NUMERICAL_ERRORS as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except BackflowError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    _print_summary(report)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
