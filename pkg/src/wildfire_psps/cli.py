"""Command-line entry point: ``wildfire-psps <command> ...``.

Exit codes: 0 success, 2 invalid input, 3 missing or unreadable files,
4 solver failure or limit reached.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .case_model import PowerCase, case_hash, load_case
from .errors import LimitReached, ParseError, PspsError, SolverError, ValidationError

log = logging.getLogger("wildfire_psps")

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_SOLVER = 0, 2, 3, 4
BUILTIN_CASES = ("toy3", "socal73")
_NOT_HASHED = {"out", "threads", "solver", "func", "command", "verbose", "resume"}


class InputMissing(PspsError):
    """A referenced input file does not exist or cannot be read."""


# -- shared helpers ------------------------------------------------------------------

def config_hash(args: argparse.Namespace) -> str:
    """Hash of the result-relevant flags (threads and output location excluded)."""
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_HASHED}
    blob = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _existing(path) -> Path:
    p = Path(path)
    if not p.is_file():
        raise InputMissing(f"input file not found: {p}")
    return p


def resolve_case(spec: str) -> PowerCase:
    """A case JSON path, or the name of a packaged case."""
    if spec in BUILTIN_CASES and not Path(spec).exists():
        from .fixtures import load_fixture

        return load_fixture(spec)
    return load_case(_existing(spec))


def read_json(path) -> dict:
    p = _existing(path)
    try:
        return json.loads(p.read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise InputMissing(f"cannot read {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: invalid JSON ({exc})") from exc


def load_scenarios(path, case: PowerCase):
    from .wildfire.scenario import check_probabilities, read_scenarios

    p = _existing(path)
    with open(p) as fh:
        first = fh.readline()
    try:
        expected = json.loads(first).get("case_hash")
    except (json.JSONDecodeError, AttributeError) as exc:
        raise ParseError(f"{p}: missing scenario header") from exc
    if expected != case_hash(case):
        raise ValidationError(f"{p} was generated for case hash {expected}, "
                              f"not {case_hash(case)}", field="case_hash")
    head, scenarios = read_scenarios(p, case)
    check_probabilities(scenarios, tol=1e-6)
    return head, scenarios


def load_plan(path, case: PowerCase):
    from .milp.blocks import ShutoffPlan

    plan, doc = ShutoffPlan.load(_existing(path))
    if doc.get("case_hash") not in (None, case_hash(case)):
        raise ValidationError(f"{path} was produced for a different case", field="case_hash")
    if plan.z.shape != (case.n_components, case.horizon + 1):
        raise ValidationError(f"{path}: plan shape {plan.z.shape} does not fit the case",
                              field="plan")
    return plan, doc


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


class Outputs:
    """Artifact directory with a manifest of every file written and its digest."""

    def __init__(self, root, command: str, cfg_hash: str):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.cfg_hash = cfg_hash
        self.written: list[Path] = []

    def path(self, name: str) -> Path:
        p = self.root / name
        self.written.append(p)
        return p

    def write_json(self, name: str, doc: dict) -> Path:
        p = self.path(name)
        p.write_text(json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n")
        return p

    def finish(self, extra: dict | None = None) -> None:
        mpath = self.root / "manifest.json"
        manifest = {"version": __version__, "runs": []}
        if mpath.exists():
            try:
                manifest = json.loads(mpath.read_text())
            except json.JSONDecodeError:
                pass
        files = {}
        for p in self.written:
            if p.exists():
                files[p.name] = hashlib.sha256(p.read_bytes()).hexdigest()
        manifest["runs"].append({"command": self.command, "config_hash": self.cfg_hash,
                                 "files": files, **(extra or {})})
        mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    raise TypeError(f"not serializable: {type(obj).__name__}")


def _clean(x):
    """NaN and infinities become None so reports stay valid JSON."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (float, np.floating)) and not math.isfinite(float(x)):
        return None
    return x


def _simulator(case: PowerCase, cell_size: float | None, sources: str = "mix"):
    from .geo_grid import build_grid
    from .wildfire.env import build_env
    from .wildfire.simulate import Simulator

    geom, maps = build_grid(case, cell_size)
    env = build_env(case, geom)
    sim = Simulator(case, geom, maps, env, exogenous=sources != "end",
                    endogenous=sources != "exo")
    return sim, geom


# -- commands --------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    from .wildfire.scenario import write_scenarios

    if args.n < 1:
        raise ValidationError("--n must be at least 1", field="n")
    case = resolve_case(args.case)
    sim, geom = _simulator(case, args.cell_size, args.sources)
    scenarios = sim.generate(args.n, args.seed, threads=args.threads, start=args.start)
    out = Outputs(args.out, "simulate", config_hash(args))
    header = {"seed": args.seed, "start": args.start, "sources": args.sources,
              "case_hash": case_hash(case), "case": case.name, "grid": geom.to_dict(),
              "config_hash": out.cfg_hash}
    path = out.path(args.name)
    write_scenarios(path, case, scenarios, header)
    rate = sum(s.disruptive for s in scenarios) / len(scenarios)
    out.finish({"disruption_rate": rate})
    print(f"wrote {len(scenarios)} scenarios to {path}; disruption rate {rate:.3f}")
    return EXIT_OK


def cmd_solve(args) -> int:
    from . import decomposition
    from .milp.extensive import solve_extensive
    from .milp.model import Limits

    case = resolve_case(args.case)
    head, scenarios = load_scenarios(args.scenarios, case)
    out = Outputs(args.out, "solve", config_hash(args))
    meta = {"case_hash": case_hash(case), "scenario_hash": decomposition.scenario_set_hash(scenarios),
            "config_hash": out.cfg_hash, "scenario_config_hash": head.get("config_hash")}
    if args.extensive:
        plan, res, _ = solve_extensive(case, scenarios, "expectation",
                                       Limits(gap=args.epsilon, time=args.time_limit),
                                       args.solver)
        meta.update(method="extensive", objective=res.objective, lower_bound=res.bound,
                    gap=res.gap, status=res.status.value)
        plan.save(out.path("plan.json"), meta)
        out.finish({"objective": res.objective})
        print(f"extensive form: objective {res.objective:.6f}, bound {res.bound:.6f}")
        return EXIT_OK
    limits = decomposition.RunLimits(max_iterations=args.max_iterations, time=args.time_limit)
    res = decomposition.run(case, scenarios, epsilon=args.epsilon, delta=args.delta,
                            cut_mode=args.cut, limits=limits, threads=args.threads,
                            backend=args.solver, checkpoint=out.path("checkpoint.json"),
                            resume=args.resume)
    res.bounds.to_csv(out.path("bounds.csv"))
    meta.update(method=f"decomposition-{args.cut}", objective=res.objective,
                lower_bound=res.lower_bound, gap=res.gap, status=res.status,
                iterations=res.iterations, n_cuts=len(res.cuts), stats=res.stats)
    if res.plan is not None:
        res.plan.save(out.path("plan.json"), _clean(meta))
    out.finish({"objective": res.objective, "gap": res.gap, "status": res.status})
    print(f"{res.status}: objective {res.objective:.6f}, lower bound {res.lower_bound:.6f}, "
          f"gap {res.gap:.3g} after {res.iterations} iterations")
    if res.status != "optimal":
        return EXIT_SOLVER
    return EXIT_OK


def cmd_evaluate(args) -> int:
    from .evaluation import PlanEvaluator, evaluate_plan, saa_study, write_reports_csv

    case = resolve_case(args.case)
    out = Outputs(args.out, "evaluate", config_hash(args))
    if args.saa:
        eval_set = None
        if args.scenarios:
            eval_set = load_scenarios(args.scenarios, case)[1]
        sim, _ = _simulator(case, args.cell_size)
        study = saa_study(case, args.saa, args.replicates, args.eval_n, args.seed, simulator=sim,
                          epsilon=args.epsilon, cut_mode=args.cut, threads=args.threads,
                          eval_scenarios=eval_set, backend=args.solver)
        study.to_csv(out.path("saa.csv"))
        best = study.best_plan()
        if best is not None:
            best.save(out.path("plan_best.json"), {"case_hash": case_hash(case),
                                                   "config_hash": out.cfg_hash})
        out.write_json("saa.json", _clean({"case_hash": case_hash(case), "config_hash": out.cfg_hash,
                                           "table": study.table()}))
        out.finish()
        for row in study.table():
            print(f"n={row['size']}: LB {row['lb_mean']:.3f} ± {row['lb_ci']:.3f}, "
                  f"UB {row['ub_mean']:.3f} ± {row['ub_ci']:.3f}")
        return EXIT_OK
    if not args.plan or not args.scenarios:
        raise ValidationError("evaluate needs --plan and --scenarios (or --saa)", field="plan")
    _, scenarios = load_scenarios(args.scenarios, case)
    ev = PlanEvaluator(case, args.solver)
    reports = []
    ref = None
    if args.reference:
        ref_plan, _ = load_plan(args.reference, case)
        ref = evaluate_plan(case, ref_plan, scenarios, tag="reference", evaluator=ev,
                            threads=args.threads).g_n
    for p in args.plan:
        plan, _ = load_plan(p, case)
        reports.append(evaluate_plan(case, plan, scenarios, tag=Path(p).stem, evaluator=ev,
                                     threads=args.threads, reference_g=ref))
    write_reports_csv(out.path("evaluation.csv"), reports)
    out.write_json("evaluation.json", _clean({"case_hash": case_hash(case),
                                              "config_hash": out.cfg_hash,
                                              "reports": [r.to_dict() for r in reports]}))
    out.finish()
    for r in reports:
        print(f"{r.tag}: g_n {r.g_n:.6f}, worst case {r.worst_case:.6f}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    from . import benchmarks
    from .evaluation import PlanEvaluator, evaluate_plan, write_reports_csv
    from .plotting import cost_scatter

    case = resolve_case(args.case)
    _, scenarios = load_scenarios(args.scenarios, case)
    test = load_scenarios(args.test_scenarios, case)[1] if args.test_scenarios else scenarios
    star, _ = load_plan(args.plan, case)
    out = Outputs(args.out, "benchmark", config_hash(args))
    ev = PlanEvaluator(case, args.solver)
    ref = evaluate_plan(case, star, test, tag="X*", evaluator=ev, threads=args.threads)
    ref.reference_g = ref.g_n
    reports, failures, summary = [], {}, {}

    def attempt(name, fn):
        try:
            return fn()
        except PspsError as exc:
            failures[name] = str(exc)
            log.warning("benchmark %s failed: %s", name, exc)
            return None

    det = attempt("det", lambda: benchmarks.solve_deterministic(case, backend=args.solver))
    if det is not None:
        reports.append(evaluate_plan(case, det.plan, test, tag="X_det", evaluator=ev,
                                     threads=args.threads, reference_g=ref.g_n))
    ws = attempt("ws", lambda: benchmarks.solve_wait_and_see(case, test, backend=args.solver,
                                                             threads=args.threads))
    if ws is not None:
        summary["ws_g_star"] = ws.g_star
    risk = benchmarks.compute_risk_table(case, scenarios)
    sweep = attempt("rb", lambda: benchmarks.alpha_sweep(case, risk, args.alphas, test,
                                                         reference_g=ref.g_n, backend=args.solver,
                                                         threads=args.threads))
    if sweep is not None:
        benchmarks.write_sweep_csv(out.path("alpha_sweep.csv"), sweep)
        reports += [rep for _, _, rep in sweep]
    ro = attempt("ro", lambda: benchmarks.solve_robust(
        case, scenarios, backend=args.solver, threads=args.threads,
        ws_values=ws.values if ws is not None and test is scenarios else None))
    if ro is not None:
        reports.append(evaluate_plan(case, ro.plan, test, tag="X_ro", evaluator=ev,
                                     threads=args.threads, reference_g=ref.g_n))
        summary["ro_subset"] = ro.extra.get("subset")
    reports.append(ref)
    write_reports_csv(out.path("benchmark.csv"), reports)
    cost_scatter([ref] + reports[:-1], out.path("cost_scatter.svg"))
    out.write_json("benchmark.json", _clean({
        "case_hash": case_hash(case), "config_hash": out.cfg_hash, "failures": failures,
        **summary, "reports": [r.to_dict() for r in reports]}))
    out.finish({"failures": sorted(failures)})
    for r in reports:
        print(f"{r.tag:>8}: g_n {r.g_n:12.4f}  RRI {r.rri():+.4f}")
    if "ws_g_star" in summary:
        print(f"      ws: g_n* {summary['ws_g_star']:12.4f}")
    return EXIT_SOLVER if len(failures) == 4 else EXIT_OK


def cmd_sensitivity(args) -> int:
    from .evaluation import sensitivity_csv, sensitivity_dp

    case = resolve_case(args.case)
    _, scenarios = load_scenarios(args.scenarios, case)
    test = load_scenarios(args.test_scenarios, case)[1] if args.test_scenarios else scenarios
    out = Outputs(args.out, "sensitivity", config_hash(args))
    rows = sensitivity_dp(case, scenarios, args.dp, test, epsilon=args.epsilon, cut_mode=args.cut,
                          threads=args.threads, backend=args.solver)
    sensitivity_csv(out.path("sensitivity.csv"), rows)
    out.finish()
    for r in rows:
        print(f"dp {r.dp:+.3f}: p_quiet {r.p_quiet:.3f}, objective {r.objective:.4f}, "
              f"g_n {r.report.g_n:.4f}")
    return EXIT_OK


def cmd_interact(args) -> int:
    from .evaluation import interaction_study

    if args.n < 1 or args.eval_n < 1:
        raise ValidationError("--n and --eval-n must be at least 1", field="n")
    case = resolve_case(args.case)
    out = Outputs(args.out, "interact", config_hash(args))
    study = interaction_study(case, args.n, args.seed, args.eval_n, epsilon=args.epsilon,
                              cut_mode=args.cut, threads=args.threads, backend=args.solver)
    rows = study.table()
    with open(out.path("interaction.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for tag, plan in study.plans.items():
        plan.save(out.path(f"plan_{tag}.json"), {"case_hash": case_hash(case),
                                                  "config_hash": out.cfg_hash})
    out.finish()
    for row in rows:
        print(f"{row['plan']:>6} on {row['test_set']:>3}: g_n {row['g_n']:.4f}, "
              f"damage {row['damage']:.4f}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import cost_scatter, network_snapshot, saa_bars

    out = Outputs(args.out, "plot", config_hash(args))
    made = 0
    if args.plan:
        if not args.case:
            raise ValidationError("--plan needs --case", field="case")
        case = resolve_case(args.case)
        plan, _ = load_plan(args.plan, case)
        periods = args.period or [case.horizon]
        for t in periods:
            if not 1 <= t <= case.horizon:
                raise ValidationError(f"period {t} outside 1..{case.horizon}", field="period")
            off = network_snapshot(case, plan, t, out.path(f"network_t{t}.svg"))
            print(f"period {t}: {len(off)} lines off")
            made += 1
    if args.saa:
        doc = read_json(args.saa)
        table = doc.get("table") or []
        if not table:
            raise InputMissing(f"{args.saa}: empty SAA table")
        saa_bars(table, out.path("saa_bounds.svg"))
        made += 1
    if args.report:
        from .evaluation import EvaluationReport

        doc = read_json(args.report)
        reps = []
        for r in doc.get("reports") or []:
            ps = r["per_scenario"]
            p = np.array(ps["p"], dtype=float)
            reps.append(EvaluationReport(r["plan"], p, np.ones(len(p), dtype=bool),
                                         np.array(ps["pre"]), np.array(ps["post"]),
                                         np.array(ps["damage"])))
        if not reps or not len(reps[0].cost):
            raise InputMissing(f"{args.report}: report holds no scenarios")
        cost_scatter(reps, out.path("cost_scatter.svg"))
        made += 1
    if not made:
        raise InputMissing("nothing to plot: pass --plan, --saa or --report")
    out.finish()
    return EXIT_OK


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--solver", choices=("highs", "scipy"), default=None,
                        help="MILP backend (default: $WILDFIRE_PSPS_SOLVER or highs)")
    common.add_argument("-v", "--verbose", action="store_true")

    solve_opts = argparse.ArgumentParser(add_help=False)
    solve_opts.add_argument("--epsilon", type=float, default=0.01, help="relative stopping gap")
    solve_opts.add_argument("--cut", choices=("smc", "lc"), default="smc")

    p = argparse.ArgumentParser(prog="wildfire-psps",
                                description="Wildfire-aware de-energization planning")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="sample disruption scenarios")
    s.add_argument("--case", required=True, help="case JSON or packaged name (toy3, socal73)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--start", type=int, default=0, help="first scenario stream index")
    s.add_argument("--cell-size", type=float, default=None)
    s.add_argument("--sources", choices=("mix", "exo", "end"), default="mix")
    s.add_argument("--name", default="scenarios.jsonl")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", parents=[common, solve_opts], help="solve the two-stage model")
    s.add_argument("--case", required=True)
    s.add_argument("--scenarios", required=True)
    s.add_argument("--delta", type=float, default=1e-4, help="square-minimization slack")
    s.add_argument("--extensive", action="store_true", help="solve one MILP instead")
    s.add_argument("--max-iterations", type=int, default=500)
    s.add_argument("--time-limit", type=float, default=math.inf)
    s.add_argument("--resume", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("evaluate", parents=[common, solve_opts],
                       help="evaluate plans out of sample or run an SAA study")
    s.add_argument("--case", required=True)
    s.add_argument("--plan", action="append", help="plan file (repeatable)")
    s.add_argument("--reference", help="plan whose g_n is the RRI reference")
    s.add_argument("--scenarios", help="test scenarios")
    s.add_argument("--saa", type=_int_list, help="comma-separated SAA sample sizes")
    s.add_argument("--replicates", type=int, default=5)
    s.add_argument("--eval-n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cell-size", type=float, default=None)
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("benchmark", parents=[common], help="compare against benchmark plans")
    s.add_argument("--case", required=True)
    s.add_argument("--scenarios", required=True, help="in-sample scenarios")
    s.add_argument("--test-scenarios", help="evaluation scenarios (default: in-sample)")
    s.add_argument("--plan", required=True, help="two-stage plan X*")
    s.add_argument("--alphas", type=_float_list,
                   default=[round(0.1 * k, 1) for k in range(10)])
    s.set_defaults(func=cmd_benchmark)

    s = sub.add_parser("sensitivity", parents=[common, solve_opts],
                       help="re-solve with shifted no-disruption probability")
    s.add_argument("--case", required=True)
    s.add_argument("--scenarios", required=True)
    s.add_argument("--test-scenarios")
    s.add_argument("--dp", type=_float_list, required=True)
    s.set_defaults(func=cmd_sensitivity)

    s = sub.add_parser("interact", parents=[common, solve_opts],
                       help="exogenous/endogenous interaction experiment")
    s.add_argument("--case", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--eval-n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_interact)

    s = sub.add_parser("plot", parents=[common], help="draw SVG figures")
    s.add_argument("--case")
    s.add_argument("--plan")
    s.add_argument("--period", type=int, action="append")
    s.add_argument("--saa", help="saa.json from evaluate --saa")
    s.add_argument("--report", help="evaluation.json or benchmark.json")
    s.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_VALIDATION
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except InputMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, ParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SolverError, LimitReached) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
