"""Command-line entry point.

Subcommands:
  solve    run a solver on a config, write trace.csv + summary.txt
  gallery  list built-in instances or emit one as a config file
  compare  run majorant and baseline schemes side by side

Exit codes: 0 converged, 2 certified partial result (max_steps), 1 for
hypothesis violations (named H1/H2/crossing) and parse/validation failures.
All floats are printed with 17 significant digits so reruns are bit-identical.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baseline import AlphaCoveringProblem, alpha_iterate, compare_methods
from .config import (
    BuiltProblem,
    ConfigError,
    ProblemConfig,
    build_problem,
    gallery_config,
    gallery_names,
    load_config,
    save_config,
)
from .errors import (
    BudgetExceeded,
    CoincidenceError,
    InsufficientData,
    NegativeDiscriminant,
    NoCrossing,
    NotContractive,
)
from .solver import (
    STATUS_CONVERGED,
    STATUS_HYPOTHESIS,
    STATUS_MAX_STEPS,
    IterateTrace,
    coincidence_solve,
    rate_estimate,
)

TRACE_HEADER = "j,tau,deviation,step_norm,residual"
COMPARE_HEADER = "method,steps,status,rate_regime,rate_value"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_PARTIAL = 2


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _fmt_vec(v) -> str:
    return " ".join(_fmt(float(t)) for t in np.atleast_1d(v))


def write_trace_csv(trace: IterateTrace, path: Path) -> None:
    lines = [TRACE_HEADER]
    for r in trace.records:
        lines.append(",".join([
            str(r.j), _fmt(r.tau), _fmt(r.deviation), _fmt(r.step_norm), _fmt(r.residual)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _rate_lines(trace: IterateTrace) -> list[str]:
    try:
        regime, value = rate_estimate(trace)
        return [f"rate_regime: {regime}", f"rate_value: {_fmt(value)}"]
    except InsufficientData:
        return ["rate_regime: insufficient-data", "rate_value: nan"]


def write_summary(trace: IterateTrace, x_star, path: Path,
                  extra: list[str] | None = None) -> None:
    final = trace.final
    lines = [
        f"status: {trace.status}",
        f"steps: {trace.steps}",
        f"x_star: {_fmt_vec(x_star)}",
        f"tau0: {_fmt(trace.tau0)}",
        f"tau_star: {_fmt(trace.tau_star)}",
        f"residual: {_fmt(final.residual)}",
        f"deviation: {_fmt(final.deviation)}",
        f"deviation_bound: {_fmt(trace.tau_star - trace.tau0)}",
    ]
    lines += _rate_lines(trace)
    if trace.detail:
        lines.append(f"detail: {trace.detail}")
    if extra:
        lines += extra
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _run_solve(config_path: str, out_dir: str, tol, max_steps, strict_h2: bool) -> int:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = load_config(config_path)
        if tol is not None:
            cfg.residual_tol = tol
        if max_steps is not None:
            cfg.max_steps = max_steps
        built = build_problem(cfg)
    except NegativeDiscriminant as err:
        print(f"NegativeDiscriminant: {err}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, CoincidenceError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_FAIL

    try:
        if cfg.method == "baseline":
            return _run_baseline(built, out)
        x_star, trace = coincidence_solve(
            built.instance, residual_tol=cfg.residual_tol, max_steps=cfg.max_steps,
            h2_check="strict" if strict_h2 else "warn")
    except NoCrossing as err:
        print(f"hypothesis violation (crossing): {err}", file=sys.stderr)
        return EXIT_FAIL
    except BudgetExceeded as err:
        print(f"hypothesis violation (H1): {err}", file=sys.stderr)
        return EXIT_FAIL

    extra = []
    if built.quadratic is not None:
        extra.append(f"equation_residual: {_fmt(built.quadratic.equation_residual(x_star))}")
        extra.append(f"discriminant: {_fmt(built.quadratic.discriminant)}")
    write_trace_csv(trace, out / "trace.csv")
    write_summary(trace, x_star, out / "summary.txt", extra)

    if trace.status == STATUS_CONVERGED:
        return EXIT_OK
    if trace.status == STATUS_MAX_STEPS:
        return EXIT_PARTIAL
    if trace.status == STATUS_HYPOTHESIS:
        print(f"hypothesis violation (H2): {trace.detail}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_FAIL


def _run_baseline(built: BuiltProblem, out: Path) -> int:
    if built.quadratic is None:
        print("config error: method 'baseline' needs a quadratic instance", file=sys.stderr)
        return EXIT_FAIL
    cfg = built.config
    try:
        p = AlphaCoveringProblem.from_quadratic(built.quadratic)
        x_star, trace = alpha_iterate(
            p, np.zeros(built.quadratic.dim_x), cfg.residual_tol, cfg.max_steps)
    except NotContractive as err:
        print(f"NotContractive: {err}", file=sys.stderr)
        return EXIT_FAIL
    except BudgetExceeded as err:
        print(f"hypothesis violation (H1): {err}", file=sys.stderr)
        return EXIT_FAIL
    write_trace_csv(trace, out / "trace.csv")
    write_summary(trace, x_star, out / "summary.txt",
                  [f"alpha: {_fmt(p.alpha)}", f"beta: {_fmt(p.beta)}"])
    return EXIT_OK if trace.status == STATUS_CONVERGED else EXIT_PARTIAL


def cmd_solve(args) -> int:
    configs = args.config
    if len(configs) == 1:
        return _run_solve(configs[0], args.out, args.tol, args.max_steps, args.strict_h2)
    # Several configs: isolated output subdirectories, optionally in parallel.
    jobs = []
    for path in configs:
        sub = Path(args.out) / Path(path).stem
        jobs.append((path, str(sub), args.tol, args.max_steps, args.strict_h2))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_solve_star, jobs))
    else:
        codes = [_run_solve_star(job) for job in jobs]
    return max(codes)


def _run_solve_star(job) -> int:
    return _run_solve(*job)


def cmd_gallery(args) -> int:
    if args.action == "list":
        for name in gallery_names():
            print(name)
        return EXIT_OK
    if not args.name:
        print("gallery emit needs an instance name", file=sys.stderr)
        return EXIT_FAIL
    try:
        cfg = gallery_config(args.name)
    except KeyError as err:
        print(f"error: {err.args[0]}", file=sys.stderr)
        return EXIT_FAIL
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{args.name}.json"
    save_config(cfg, target)
    print(target)
    return EXIT_OK


def cmd_compare(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cfg = load_config(args.config[0])
        if args.tol is not None:
            cfg.residual_tol = args.tol
        if args.max_steps is not None:
            cfg.max_steps = args.max_steps
        built = build_problem(cfg)
    except NegativeDiscriminant as err:
        print(f"NegativeDiscriminant: {err}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigError, CoincidenceError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_FAIL
    if built.quadratic is None:
        print("config error: compare needs a quadratic instance", file=sys.stderr)
        return EXIT_FAIL

    report = compare_methods(built.quadratic, tol=cfg.residual_tol,
                             max_steps=cfg.max_steps)
    lines = [COMPARE_HEADER]
    for run in report.runs:
        value = "nan" if np.isnan(run.rate_value) else _fmt(run.rate_value)
        lines.append(f"{run.method},{run.steps},{run.status},{run.rate_regime},{value}")
    (out / "comparison.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if report.majorant_trace is not None:
        write_trace_csv(report.majorant_trace, out / "trace_majorant.csv")
    if report.baseline_trace is not None:
        write_trace_csv(report.baseline_trace, out / "trace_baseline.csv")

    major = report.run_for("majorant")
    if major.status == STATUS_CONVERGED:
        return EXIT_OK
    if major.status == STATUS_MAX_STEPS:
        return EXIT_PARTIAL
    return EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coincide",
        description="Solve coincidence-point problems with majorant-certified iterations.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a solver on a problem config")
    solve.add_argument("--config", required=True, nargs="+",
                       help="problem config path(s); several run independently")
    solve.add_argument("--out", default=".", help="output directory")
    solve.add_argument("--tol", type=float, default=None, help="residual tolerance override")
    solve.add_argument("--max-steps", type=int, default=None, help="step cap override")
    solve.add_argument("--strict-h2", action="store_true",
                       help="abort when the sampled derivative bound fails")
    solve.add_argument("--jobs", type=int, default=1,
                       help="parallel workers when several configs are given")
    solve.set_defaults(func=cmd_solve)

    gallery = sub.add_parser("gallery", help="list or emit built-in instances")
    gallery.add_argument("action", choices=["list", "emit"])
    gallery.add_argument("name", nargs="?", default=None)
    gallery.add_argument("--out", default=".", help="directory for emitted configs")
    gallery.set_defaults(func=cmd_gallery)

    compare = sub.add_parser("compare", help="run majorant and baseline side by side")
    compare.add_argument("--config", required=True, nargs=1)
    compare.add_argument("--out", default=".", help="output directory")
    compare.add_argument("--tol", type=float, default=None)
    compare.add_argument("--max-steps", type=int, default=None)
    compare.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
