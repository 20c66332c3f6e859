"""Command-line entry point.

Exit codes: 0 success, 2 infeasible or attack detected / not disruptive,
1 usage or input error. Every ``--flag`` can also be set through an
environment variable ``SDATTACK_<FLAG>`` (dashes become underscores), e.g.
``SDATTACK_TOL_RANK=1e-10``; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path


from . import artifacts
from .analyzer import check_assumption1
from .attack import synthesize
from .errors import InconsistentSystem, InfeasibleEta, NoRedundancy, SDAttackError, ScenarioError
from .lifting import lift
from .numlin import Tolerances
from .scenarios import DEMOS, builtin, load_scenario
from .sim import simulate_error, verify

log = logging.getLogger("sdattack")

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
ENV_PREFIX = "SDATTACK_"


def _env(flag, default=None):
    return os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"), default)


def _dump(obj):
    return json.dumps(artifacts._jsonable(obj), indent=2)


def _scenario_from_args(args):
    if getattr(args, "name", None):
        sc = builtin(args.name)
    elif args.scenario:
        sc = load_scenario(args.scenario)
    else:
        raise ScenarioError("--scenario", "required")
    tol = sc.tolerances
    if args.tol_rank is not None or args.tol_residual is not None:
        tol = Tolerances(
            rank_rtol=float(args.tol_rank) if args.tol_rank is not None else tol.rank_rtol,
            residual_atol=float(args.tol_residual) if args.tol_residual is not None else tol.residual_atol,
        )
    t_star = None
    if args.t_star is not None:
        try:
            t_star = "auto" if args.t_star == "auto" else Fraction(args.t_star)
        except (ValueError, ZeroDivisionError):
            raise ScenarioError("--t-star", f"expected 'auto' or p/q, got {args.t_star!r}") from None
        if t_star != "auto" and not 0 < t_star <= 1:
            raise ScenarioError("--t-star", "must lie in (0, 1]")
    return sc.with_overrides(
        tolerances=tol,
        t_star=t_star,
        clusters=int(args.clusters) if args.clusters is not None else None,
        stealth_tol=float(args.stealth_tol) if args.stealth_tol is not None else None,
        fine_steps=int(args.fine_steps) if args.fine_steps is not None else None,
    )


def _out_dir(args, required=True):
    if args.out is None:
        if required:
            raise ScenarioError("--out", "required for this command")
        return None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- pipeline steps (usable from Python as well) -----------------------------


def analyze(scenario):
    lifted = lift(scenario.system, scenario.design_grid())
    report = check_assumption1(lifted, scenario.t_star, scenario.tolerances)
    return lifted, report


def plan_for(scenario, lifted=None, report=None):
    if lifted is None or report is None:
        lifted, report = analyze(scenario)
    if not report.feasible:
        raise _infeasible(report)
    return synthesize(lifted, report.t_star if scenario.t_star == "auto" else scenario.t_star,
                      scenario.thresholds, scenario.clusters, scenario.tolerances)


class Infeasible(SDAttackError):
    def __init__(self, items, detail=""):
        super().__init__(f"feasibility condition(s) {', '.join(items)} fail{': ' + detail if detail else ''}")
        self.items = items


def _infeasible(report):
    names = {"a": "(a) ker CPi is trivial", "b": "(b) ker CPi inside ker Phi_star",
             "c": "(c) im CAbar not inside im CPi"}
    return Infeasible(report.failing_items(), "; ".join(names[i] for i in report.failing_items()))


def run_pipeline(scenario, out_dir, figures=True):
    """analyze -> synthesize -> simulate -> verify, writing every artifact."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario.dump(out / "scenario.json")
    lifted, report = analyze(scenario)
    artifacts.write_json(out / "analysis.json", report.to_dict())
    if not report.feasible:
        return {"name": scenario.name, "feasible": False, "failing_items": report.failing_items()}, EXIT_FAIL
    plan = plan_for(scenario, lifted, report)
    artifacts.write_plan(plan, out / "plan.json", out / "plan.csv")
    trace = simulate_error(scenario.system, scenario.true_grid(), plan, scenario.fine_steps)
    artifacts.write_trace(trace, out / "trace.csv")
    result = verify(trace, plan, scenario.stealth_tol)
    artifacts.write_json(out / "verification.json", result.to_dict())
    if figures:
        from .plotting import render_figures

        render_figures(trace, plan, out)
    summary = {
        "name": scenario.name,
        "feasible": True,
        "t_star": str(report.t_star),
        "rank_CPi": report.rank_CPi,
        "kappa_1": float(plan.kappa[0]) if plan.K else None,
        "stealthy": result.stealthy,
        "disruptive": result.disruptive,
        "max_sampled_residual": result.max_sampled_residual,
        "first_detection_sample": result.first_detection_sample,
        "out": str(out),
    }
    return summary, EXIT_OK if result.passed else EXIT_FAIL


# --- commands -----------------------------------------------------------------


def cmd_analyze(args):
    sc = _scenario_from_args(args)
    _, report = analyze(sc)
    d = report.to_dict()
    print(_dump(d))
    out = _out_dir(args, required=False)
    if out is not None:
        artifacts.write_json(out / "analysis.json", d)
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_synthesize(args):
    sc = _scenario_from_args(args)
    out = _out_dir(args)
    plan = plan_for(sc)
    artifacts.write_plan(plan, out / "plan.json", out / "plan.csv")
    print(_dump({"clusters": plan.K, "holds": len(plan.a_bar), "t_star": plan.t_star[:1],
                 "kappa": plan.kappa[:5], "plan": str(out / "plan.json")}))
    return EXIT_OK


def _plan_path(args, out):
    if args.plan:
        return Path(args.plan)
    if out is not None and (out / "plan.json").exists():
        return out / "plan.json"
    raise ScenarioError("--plan", "required (no plan.json in --out)")


def cmd_simulate(args):
    sc = _scenario_from_args(args)
    out = _out_dir(args)
    path = _plan_path(args, out)
    if not path.exists():
        raise ScenarioError("--plan", f"file not found: {path}")
    plan = artifacts.load_plan(path)
    trace = simulate_error(sc.system, sc.true_grid(), plan, sc.fine_steps)
    artifacts.write_trace(trace, out / "trace.csv")
    written = [str(out / "trace.csv")]
    if not args.no_figures:
        from .plotting import render_figures

        written += [str(p) for p in render_figures(trace, plan, out)]
    print(_dump({"points": len(trace.times), "samples": int(trace.is_sensing.sum()), "written": written}))
    return EXIT_OK


def cmd_verify(args):
    sc = _scenario_from_args(args)
    out = _out_dir(args, required=False)
    plan_path = _plan_path(args, out)
    trace_path = Path(args.trace) if args.trace else (out / "trace.csv" if out else None)
    for flag, p in (("--plan", plan_path), ("--trace", trace_path)):
        if p is None or not p.exists():
            raise ScenarioError(flag, f"file not found: {p}")
    plan = artifacts.load_plan(plan_path)
    trace = artifacts.load_trace(trace_path, sys=sc.system, holds=plan.a_bar, T_a=sc.true_grid().T_a)
    result = verify(trace, plan, sc.stealth_tol, scaled=not args.absolute)
    d = result.to_dict()
    if not args.raw:
        d.pop("residuals")
    print(_dump(d))
    if out is not None:
        artifacts.write_json(out / "verification.json", result.to_dict())
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_demo(args):
    if args.list:
        for name in DEMOS:
            print(f"{name:16s} {builtin(name).description}")
        return EXIT_OK
    if not args.name:
        raise ScenarioError("name", f"choose from {', '.join(DEMOS)}")
    try:
        builtin(args.name)
    except KeyError as exc:
        raise ScenarioError("name", str(exc.args[0])) from None
    sc = _scenario_from_args(args)
    out = Path(args.out or f"out/{sc.name}")
    summary, code = run_pipeline(sc, out, figures=not args.no_figures)
    print(_dump(summary))
    return code


def cmd_run(args):
    sc = _scenario_from_args(args)
    out = _out_dir(args)
    summary, code = run_pipeline(sc, out, figures=not args.no_figures)
    print(_dump(summary))
    return code


def _batch_job(job):
    path, out, figures = job
    try:
        return run_pipeline(load_scenario(path), out, figures)
    except SDAttackError as exc:
        return {"scenario": str(path), "error": str(exc)}, EXIT_USAGE


def cmd_batch(args):
    out = _out_dir(args)
    paths = [Path(p) for p in args.files]
    jobs = [(p, out / p.stem, not args.no_figures) for p in paths]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(_batch_job, jobs))
    print(_dump([s for s, _ in results]))
    return max((c for _, c in results), default=EXIT_OK)


def cmd_check(args):
    from .selfcheck import run_checks

    ok = run_checks(seed=args.seed, count=args.count, clusters=args.clusters or 10)
    return EXIT_OK if ok else EXIT_FAIL


# --- parser ---------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", default=_env("scenario"), help="scenario JSON file")
    common.add_argument("--out", default=_env("out"), help="output directory")
    common.add_argument("--tol-rank", default=_env("tol-rank"), help="relative singular-value cutoff")
    common.add_argument("--tol-residual", default=_env("tol-residual"), help="absolute residual bound")
    common.add_argument("--stealth-tol", default=_env("stealth-tol"), help="sample residual bound")
    common.add_argument("--fine-steps", default=_env("fine-steps"), help="plot points per hold")
    common.add_argument("--clusters", default=_env("clusters"), help="number of clusters K")
    common.add_argument("--t-star", default=_env("t-star"), help="disruption time: auto or p/q")
    common.add_argument("--seed", type=int, default=int(_env("seed", "0")), help="seed for randomized checks")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sdattack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="check feasibility conditions")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", parents=[common], help="build the attack plan")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("simulate", parents=[common], help="simulate a plan on the (true) clock")
    p.add_argument("--plan", default=_env("plan"))
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="check stealth and disruption on a trace")
    p.add_argument("--plan", default=_env("plan"))
    p.add_argument("--trace", default=_env("trace"))
    p.add_argument("--absolute", action="store_true", help="unscaled residual test")
    p.add_argument("--raw", action="store_true", help="print every sample residual")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", parents=[common], help="run a built-in scenario end to end")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("run", parents=[common], help="run a scenario file end to end")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("batch", parents=[common], help="run several scenario files concurrently")
    p.add_argument("files", nargs="+", help="scenario JSON files")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("check", parents=[common], help="randomized property self-check")
    p.add_argument("--count", type=int, default=50)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (NoRedundancy, InfeasibleEta) as exc:
        print(f"infeasible: condition (a)/(b): {exc}", file=sys.stderr)
        return EXIT_FAIL
    except InconsistentSystem as exc:
        print(f"infeasible: condition (c): {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SDAttackError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
