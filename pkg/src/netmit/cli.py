"""Command-line front end.

Subcommands: generate, plan, mitigate, budgets, sweep, variance.
Exit codes: 0 success, 2 validation error, 3 goal unreachable,
4 resource limit hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    ExperimentConfig, coverage_table, run_sweep, variance_report, write_csv,
    _jsonable,
)
from .mitigation import SearchOptions, min_mitigation_budget, pareto_frontier
from .model import INF, ModelError
from .modelio import ModelLoadError, load_model
from .planner import AttackPlanner
from .scengen import GenParams, generate_files

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNREACHABLE = 3
EXIT_RESOURCE = 4


def _model_args(p):
    p.add_argument("model_dir", type=Path,
                   help="directory with topology.json, vulns.json and "
                        "optionally fixes.json, actions.json")
    p.add_argument("--attacker-budget", type=float, default=INF)


def _limit_args(p):
    p.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")
    p.add_argument("--mem-limit", type=float, default=None, metavar="MIB")


def _ablation_args(p):
    p.add_argument("--no-sss", action="store_true",
                   help="disable stubborn-set branching restriction")
    p.add_argument("--no-sleep-sets", action="store_true")
    p.add_argument("--no-ofix", action="store_true",
                   help="disable the cheapest-strategy-per-state cache")
    p.add_argument("--no-oatt", action="store_true",
                   help="disable the attack-plan cache and plan reuse")
    p.add_argument("--no-c0", action="store_true",
                   help="disable pruning against the cheapest p*=0 strategy")


def _options(args):
    mem = int(args.mem_limit * 1024 * 1024) if args.mem_limit else None
    return SearchOptions(
        use_sss=not args.no_sss,
        use_sleep_sets=not args.no_sleep_sets,
        use_ofix=not args.no_ofix,
        use_oatt=not args.no_oatt,
        use_c0=not args.no_c0,
        time_limit=args.time_limit,
        memory_limit=mem,
    )


def _load(args, mitigation_budget=INF):
    d = args.model_dir
    fixes = d / "fixes.json" if (d / "fixes.json").exists() else None
    actions = d / "actions.json" if (d / "actions.json").exists() else None
    return load_model(d / "topology.json", d / "vulns.json", fixes, actions,
                      attacker_budget=args.attacker_budget,
                      mitigation_budget=mitigation_budget)


def _emit(args, payload, text_fn):
    if args.json:
        json.dump(_jsonable(payload), sys.stdout, indent=2, sort_keys=True)
        print()
    else:
        text_fn(payload)


def cmd_generate(args):
    params = GenParams(
        n_hosts=args.hosts, seed=args.seed,
        alpha_hosts=args.alpha_hosts, alpha_vulns=args.alpha_vulns,
        lambda_vulns=args.lambda_vulns, lambda_patches=args.lambda_patches,
        port_fraction=args.port_fraction,
    )
    out = generate_files(params, args.out)
    print("wrote %s" % out)
    return EXIT_OK


def cmd_plan(args):
    task = _load(args)
    plan = AttackPlanner(task.pentest).critical_attack_path(task.initial_network)
    if plan is None:
        if args.json:
            print(json.dumps({"p_star": 0.0, "plan": None}))
        else:
            print("goal unreachable (p* = 0)")
        return EXIT_UNREACHABLE

    def text(payload):
        print("p* = %.6g   budget spent = %g" % (plan.success_probability,
                                                 plan.budget_spent))
        for step in plan.steps:
            print("  %s" % step)

    _emit(args, {"p_star": plan.success_probability,
                 "budget_spent": plan.budget_spent,
                 "plan": list(plan.steps)}, text)
    return EXIT_OK


def cmd_budgets(args):
    task = _load(args)
    planner = AttackPlanner(task.pentest)
    b_a = planner.min_attack_budget(task.initial_network)
    b_m = min_mitigation_budget(task) if b_a < INF else INF

    def text(payload):
        print("min attacker budget:   %s" % ("inf" if b_a == INF else "%g" % b_a))
        print("min mitigation budget: %s" % ("inf" if b_m == INF else "%g" % b_m))

    _emit(args, {"min_attack_budget": b_a, "min_mitigation_budget": b_m}, text)
    return EXIT_UNREACHABLE if b_a == INF else EXIT_OK


def cmd_mitigate(args):
    task = _load(args, mitigation_budget=args.mitigation_budget)
    result = pareto_frontier(task, _options(args))

    def text(payload):
        print("%-10s %-10s fixes" % ("cost", "p*"))
        for e in result.entries:
            print("%-10g %-10.6g %s" % (e.cost, e.residual_probability,
                                        " ".join(e.strategy.fixes) or "(none)"))
        if not result.complete:
            print("warning: search hit a resource limit; frontier may be partial")

    _emit(args, result.to_jsonable(), text)
    return EXIT_OK if result.complete else EXIT_RESOURCE


def _config(args):
    options = {}
    for flag, key in (("no_sss", "use_sss"), ("no_sleep_sets", "use_sleep_sets"),
                      ("no_ofix", "use_ofix"), ("no_oatt", "use_oatt"),
                      ("no_c0", "use_c0")):
        if getattr(args, flag):
            options[key] = False
    return ExperimentConfig(
        host_counts=tuple(args.hosts),
        gamma_m=tuple(args.gamma_m),
        gamma_a=tuple(args.gamma_a),
        seeds=tuple(range(args.seed, args.seed + args.repetitions)),
        time_limit=args.time_limit or 60.0,
        memory_limit=int((args.mem_limit or 512) * 1024 * 1024),
        workers=args.workers,
        options=options,
    )


def cmd_sweep(args):
    config = _config(args)
    records = run_sweep(config, progress=None if args.json else _progress)
    if args.out:
        write_csv(records, args.out, config)
    table = coverage_table(records)

    def text(payload):
        print("%-8s %-8s %-8s" % ("gamma_m", "gamma_a", "coverage"))
        for (gm, ga), cell in table.items():
            print("%-8g %-8g %d/%d" % (gm, ga, cell["solved"], cell["total"]))

    _emit(args, {"coverage": {"%g,%g" % k: v for k, v in table.items()},
                 "records": [r.row() for r in records]}, text)
    return EXIT_OK


def _progress(rec):
    print("%s gm=%g ga=%g %s (%.1fs, %d nodes)"
          % (rec.instance, rec.gamma_m, rec.gamma_a,
             "ok" if rec.solved else "FAIL", rec.wall_time, rec.nodes_expanded),
          file=sys.stderr)


def cmd_variance(args):
    config = _config(args)
    report, records = variance_report(config)
    if args.out:
        write_csv(records, args.out, config)

    def text(payload):
        for cell, stats in report.items():
            n = stats["nodes_expanded"]
            print("%s coverage=%.2f nodes: min=%g q1=%g med=%g q3=%g max=%g mean=%g"
                  % (cell, stats["coverage"], n["min"], n["q1"], n["median"],
                     n["q3"], n["max"], n["mean"]))

    _emit(args, report, text)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog="netmit",
        description="Attack-path planning and Pareto-optimal mitigation search")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="emit a synthetic scenario")
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--hosts", type=int, default=40)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--alpha-hosts", type=float, default=10.0)
    g.add_argument("--alpha-vulns", type=float, default=5.0)
    g.add_argument("--lambda-vulns", type=float, default=3.0)
    g.add_argument("--lambda-patches", type=float, default=2.0)
    g.add_argument("--port-fraction", type=float, default=0.5)
    g.set_defaults(fn=cmd_generate)

    pl = sub.add_parser("plan", help="compute the critical attack path")
    _model_args(pl)
    pl.set_defaults(fn=cmd_plan)

    b = sub.add_parser("budgets", help="minimal attacker/defender budgets")
    _model_args(b)
    b.set_defaults(fn=cmd_budgets)

    m = sub.add_parser("mitigate", help="compute the mitigation Pareto frontier")
    _model_args(m)
    m.add_argument("--mitigation-budget", type=float, default=INF)
    _limit_args(m)
    _ablation_args(m)
    m.set_defaults(fn=cmd_mitigate)

    for name, fn, help_ in (("sweep", cmd_sweep, "budget-factor coverage sweep"),
                            ("variance", cmd_variance,
                             "multi-seed distribution report")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--hosts", type=int, nargs="+", default=[40])
        s.add_argument("--gamma-m", type=float, nargs="+", default=[1.0, 2.5])
        s.add_argument("--gamma-a", type=float, nargs="+", default=[2.5])
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--repetitions", type=int, default=3 if name == "sweep" else 5)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--out", type=Path, default=None, help="RunRecord CSV path")
        _limit_args(s)
        _ablation_args(s)
        s.set_defaults(fn=fn)

    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ModelLoadError, ModelError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
