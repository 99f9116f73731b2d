"""Command line: solve, bench, profile, list, check.

Exit codes: 0 on success (solve: every run converged), 2 when a solve run
stopped without converging, 1 on configuration, input or oracle errors.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from config import get_settings
from schemas import BenchConfigFile, ProblemRef, RunConfigFile, TrustRegionConfig
from services import bench, traces
from services.baselines import SolverOptions, UnknownSolverError, get_solver
from services.cone import ContractViolation, load_cone
from services.problem import check_problem
from services.suite import UnknownProblemError, catalog, instantiate, resolve_cone
from services.traces import RunStatus
from services.trustregion import criticality

logger = logging.getLogger(__name__)

TABLE_FLAGS = ("omega0", "omega_max", "epsilon", "eta1", "eta2", "gamma1", "gamma2")
CONE_NAMES = ("K1", "K2", "K3")
EXIT_OK, EXIT_ERROR, EXIT_NOT_CONVERGED = 0, 1, 2


def _describe_validation(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        key = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{key}: {err['msg']}")
    return "; ".join(parts)


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        return json.loads(p.read_text())
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {p}") from None
    except json.JSONDecodeError as e:
        raise ValueError(f"{p} is not valid JSON: {e}") from None


def _cone_argument(value: str) -> str | dict:
    """K1, K2 or K3 by name; anything else is read as a cone spec file."""
    if value in CONE_NAMES:
        return value
    cone = load_cone(value)
    return {**cone.to_spec(), "name": cone.name or Path(value).stem}


def _solve_overrides(args: argparse.Namespace, data: dict) -> dict:
    if args.cone is not None:
        data["cone"] = _cone_argument(args.cone)
    for key in ("problem", "n", "m", "solver", "seed"):
        value = getattr(args, key)
        if value is not None:
            data[key] = value
    if args.x0 is not None:
        data["x0"] = args.x0 if args.x0.startswith("random:") else [float(v) for v in args.x0.split(",")]
    tr = dict(data.get("trust_region", {}))
    for key in TABLE_FLAGS + ("max_iter",):
        value = getattr(args, key)
        if value is not None:
            tr[key] = value
    if tr:
        data["trust_region"] = tr
    if args.max_iter is not None:
        data["steepest_descent"] = {**data.get("steepest_descent", {}), "max_iter": args.max_iter}
    return data


def cmd_solve(args: argparse.Namespace) -> int:
    settings = get_settings()
    try:
        data = _solve_overrides(args, _load_json(args.config))
        config = RunConfigFile.model_validate(data)
    except ValidationError as e:
        print(f"invalid run configuration: {_describe_validation(e)}", file=sys.stderr)
        return EXIT_ERROR
    except (FileNotFoundError, ValueError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR

    try:
        problem = instantiate(config.problem, config.n, config.m)
        cone = resolve_cone(config.cone, problem.m)
        solver = get_solver(config.solver)
    except (UnknownProblemError, UnknownSolverError) as e:
        print(f"problem/solver: {e}", file=sys.stderr)
        return EXIT_ERROR
    except ContractViolation as e:
        print(f"cone: {e}", file=sys.stderr)
        return EXIT_ERROR

    seed = config.seed if config.seed is not None else settings.default_seed
    if config.random_count is not None:
        starts = bench.initial_points(
            ProblemRef(name=config.problem, n=problem.n, m=problem.m), config.random_count, seed
        )
    else:
        starts = [config.x0]
        if len(config.x0) != problem.n:
            print(f"x0: expected {problem.n} coordinates, got {len(config.x0)}", file=sys.stderr)
            return EXIT_ERROR

    options = SolverOptions(trust_region=config.trust_region, steepest_descent=config.steepest_descent)
    out_dir = Path(args.out) if args.out else settings.output_dir
    codes = []
    for k, x0 in enumerate(starts):
        try:
            result = solver(problem, cone, x0, options)
        except NotImplementedError as e:
            print(f"solver: {e}", file=sys.stderr)
            return EXIT_ERROR

        stem = f"{problem.name}_{config.solver}"
        jsonl = Path(config.trace_jsonl or out_dir / f"{stem}.jsonl")
        csv_path = Path(config.trace_csv or out_dir / f"{stem}.csv")
        if len(starts) > 1:
            jsonl = jsonl.with_name(f"{jsonl.stem}_{k}{jsonl.suffix}")
            csv_path = csv_path.with_name(f"{csv_path.stem}_{k}{csv_path.suffix}")
        try:
            traces.write_jsonl(result, jsonl)
            traces.write_csv(result, csv_path)
            traces.write_image_points(result, jsonl.with_suffix(".points.dat"))
        except OSError as e:
            print(f"cannot write trace: {e.filename}: {e.strerror}", file=sys.stderr)
            return EXIT_ERROR

        if args.full:
            for record in result.trace:
                print(
                    f"  k={record.k:3d} {record.status.value:<15} t={record.t: .6e} "
                    f"omega={record.omega:.4g} |s|={record.step_length:.4g} rho={record.rho}"
                )
        t_final = f"{result.final_t:.6e}" if result.final_t is not None else "n/a"
        print(
            f"{problem.name} [{config.solver}] x0={list(map(float, x0))}: status={result.status.value} "
            f"iterations={result.iterations} t={t_final} x={result.x}"
        )
        if result.status is not RunStatus.ERROR:
            report = criticality(problem, cone, result.x, config.trust_region.subproblem)
            print(f"  theta={report.theta:.6e} first_order={report.first_order_value:.6e} critical={report.is_critical}")
        if result.message:
            print(f"  {result.message}")

        if result.status is RunStatus.ERROR:
            codes.append(EXIT_ERROR)
        elif result.converged:
            codes.append(EXIT_OK)
        else:
            codes.append(EXIT_NOT_CONVERGED)

    if EXIT_ERROR in codes:
        return EXIT_ERROR
    return EXIT_NOT_CONVERGED if EXIT_NOT_CONVERGED in codes else EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    settings = get_settings()
    try:
        config = BenchConfigFile.model_validate(_load_json(args.config))
        for ref in config.problems:
            instantiate(ref.name, ref.n, ref.m)
        for name in config.solvers:
            get_solver(name)
    except ValidationError as e:
        print(f"invalid bench configuration: {_describe_validation(e)}", file=sys.stderr)
        return EXIT_ERROR
    except (FileNotFoundError, ValueError, UnknownProblemError, UnknownSolverError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR

    seed = config.seed if config.seed is not None else settings.default_seed
    if args.n_inits is not None:
        config = config.model_copy(update={"n_inits": args.n_inits})
    options = SolverOptions(trust_region=config.trust_region, steepest_descent=config.steepest_descent)
    records = bench.run_batch(config.problems, config.solvers, config.n_inits, options, seed, settings.bench_workers)

    out_dir = Path(args.out) if args.out else settings.output_dir
    try:
        records_path = bench.write_records_csv(records, config.records_csv or out_dir / "records.csv")
        summary = bench.summarize(records)
        summary_path = bench.write_summary_csv(summary, config.summary_csv or out_dir / "summary.csv")
    except OSError as e:
        print(f"cannot write bench output: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_ERROR

    for row in summary:
        iters = "-" if row.iterations is None else f"{row.iterations.mean:.1f}"
        print(f"{row.problem:<32} {row.solver:<5} converged={row.converged:>4}/{row.runs:<4} mean_iter={iters}")
    print(f"records: {records_path}\nsummary: {summary_path}")
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    settings = get_settings()
    try:
        records = bench.read_records_csv(args.records)
    except (FileNotFoundError, KeyError, ValueError) as e:
        print(f"cannot read records from {args.records}: {e}", file=sys.stderr)
        return EXIT_ERROR

    selected = records if args.all else bench.common_convergence_filter(records)
    if not selected:
        print("no records left after the common-convergence filter", file=sys.stderr)
    table = bench.performance_profile(selected, args.metric)

    out_dir = Path(args.out) if args.out else settings.output_dir
    try:
        json_path = bench.write_profile_json(table, out_dir / f"profile_{args.metric}.json")
        dat_paths = bench.write_profile_dat(table, out_dir)
    except OSError as e:
        print(f"cannot write profile: {e.filename}: {e.strerror}", file=sys.stderr)
        return EXIT_ERROR

    for solver in table.solvers:
        print(f"{solver:<8} rho(1)={table.rho(solver, 1.0):.3f} rho(max)={table.curves[solver][-1]:.3f}")
    print(f"profile: {json_path}")
    for path in dat_paths:
        print(f"data: {path}")
    return EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    for spec in catalog():
        for n, m in spec.variants:
            problem = instantiate(spec.name, n, m)
            box = spec.box(n)
            domain = f"[{box[0][0]:g}, {box[0][1]:g}]" + (f" x ... ({n} dims)" if n > 1 else "")
            note = f"  ({spec.note})" if spec.note else ""
            print(f"{spec.name:<24} n={n:<3} m={m:<3} p={problem.p:<4} {domain:<28} {problem.derivative_kind}{note}")
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    try:
        problem = instantiate(args.problem, args.n, args.m)
        summary = check_problem(problem, points=args.points, tol=args.tol, seed=args.seed)
    except UnknownProblemError as e:
        print(f"problem: {e}", file=sys.stderr)
        return EXIT_ERROR
    except ContractViolation as e:
        print(str(e), file=sys.stderr)
        return EXIT_ERROR

    hess = "n/a" if summary.max_hessian_error is None else f"{summary.max_hessian_error:.3e}"
    verdict = "PASS" if summary.passed else "FAIL"
    print(
        f"{verdict} {problem.name} n={problem.n} m={problem.m} points={summary.points} tol={summary.tol:g} "
        f"jacobian={summary.max_jacobian_error:.3e} hessian={hess}"
    )
    for report in summary.failures[:10]:
        print(f"  component {report.component} at {report.x}: jac={report.jacobian_error:.3e} hess={report.hessian_error}")
    return EXIT_OK if summary.passed else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    defaults = TrustRegionConfig()
    parser = argparse.ArgumentParser(prog="setopt", description="Trust-region solver for set-valued optimization")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG logging")
    sub = parser.add_subparsers(dest="cmd", required=True)

    ps = sub.add_parser("solve", help="Run one solver on one problem and write its trace")
    ps.add_argument("config", nargs="?", help="JSON run configuration")
    ps.add_argument("--problem")
    ps.add_argument("--n", type=int)
    ps.add_argument("--m", type=int)
    ps.add_argument("--cone", help="K1, K2, K3 or a JSON cone spec file {\"dim\": m, \"normals\": [...]}")
    ps.add_argument("--solver")
    ps.add_argument("--x0", help="comma separated point or random:<count>")
    ps.add_argument("--seed", type=int)
    ps.add_argument("--max-iter", type=int)
    for flag in TABLE_FLAGS:
        ps.add_argument(
            f"--{flag.replace('_', '-')}", dest=flag, type=float, help=f"default {getattr(defaults, flag)}"
        )
    ps.add_argument("--out", help="output directory (default: SETOPT_OUTPUT_DIR)")
    ps.add_argument("--full", action="store_true", help="print every iteration")
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("bench", help="Run a batch and write records and summary CSVs")
    pb.add_argument("config", help="JSON bench configuration")
    pb.add_argument("--n-inits", type=int)
    pb.add_argument("--out")
    pb.set_defaults(func=cmd_bench)

    pp = sub.add_parser("profile", help="Performance profile from a records CSV")
    pp.add_argument("records")
    pp.add_argument("--metric", choices=bench.METRICS, default="iterations")
    pp.add_argument("--all", action="store_true", help="skip the common-convergence filter")
    pp.add_argument("--out")
    pp.set_defaults(func=cmd_profile)

    pl = sub.add_parser("list", help="List catalog problems")
    pl.set_defaults(func=cmd_list)

    pc = sub.add_parser("check", help="Compare analytic derivatives with finite differences")
    pc.add_argument("problem")
    pc.add_argument("n", type=int)
    pc.add_argument("m", type=int)
    pc.add_argument("--points", type=int, default=100)
    pc.add_argument("--tol", type=float, default=1e-5)
    pc.add_argument("--seed", type=int, default=0)
    pc.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else getattr(logging, settings.log_level.upper(), logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
    )
    logger.debug(f"Running {args.cmd} with {vars(args)}")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
