"""Experiment harness: budget-scaling sweeps and multi-seed variance reports.

A sweep cell is (host count, seed, gamma_m, gamma_a).  For each cell the
harness generates an instance, resolves the budget factors against the
minimal attacker/defender budgets, runs the frontier search under
cooperative time/memory limits, and emits one RunRecord.  Coverage per
(gamma_m, gamma_a) cell is solved-count / total.  Records go to CSV with a
fixed column order and a provenance header line, so every row is
reproducible from (instance id, seed, flags) alone.
"""

from __future__ import annotations

import csv
import json
import math
import tempfile
import time
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .model import INF
from .mitigation import (
    ParetoSearch, SearchOptions, min_mitigation_budget, replace_attacker_budget,
)
from .planner import AttackPlanner
from .scengen import GenParams, generate_task

GAMMA_DEFAULTS = (1.0, 2.5, 5.0, 7.5, 10.0, INF)

CSV_COLUMNS = (
    "instance", "seed", "gamma_m", "gamma_a", "solved", "wall_time",
    "peak_rss", "frontier_size", "nodes_expanded", "planner_calls",
)


@dataclass
class ExperimentConfig:
    """Grid of sweep cells plus per-run limits and pruning toggles."""

    host_counts: tuple = (40,)
    gamma_m: tuple = (1.0, 2.5)
    gamma_a: tuple = (2.5,)
    seeds: tuple = (0, 1, 2)
    time_limit: float = 60.0
    memory_limit: int = 512 * 1024 * 1024
    workers: int = 1
    gen_overrides: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)  # SearchOptions overrides

    def __post_init__(self):
        for g in tuple(self.gamma_m) + tuple(self.gamma_a):
            if g < 1.0:
                raise ValueError("budget factors must be >= 1 (or inf)")
        if self.time_limit <= 0 or self.memory_limit <= 0:
            raise ValueError("limits must be positive")
        if len(self.seeds) < 1:
            raise ValueError("at least one seed required")


@dataclass
class RunRecord:
    instance: str
    seed: int
    gamma_m: float
    gamma_a: float
    solved: bool
    wall_time: float
    peak_rss: int
    frontier_size: int
    nodes_expanded: int
    planner_calls: int
    error: str = ""

    def row(self):
        return [self.instance, self.seed, _num(self.gamma_m), _num(self.gamma_a),
                int(self.solved), "%.3f" % self.wall_time, self.peak_rss,
                self.frontier_size, self.nodes_expanded, self.planner_calls]


def _num(x):
    return "inf" if x == INF else ("%g" % x)


def _jsonable(obj):
    """Recursively replace non-finite floats so json stays standard."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else "-inf"
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def resolve_budgets(task, gamma_m, gamma_a):
    """(attacker budget, mitigation budget) from the scaling factors.

    Factors multiply the minimal budgets: the smallest attacker budget with
    non-zero success probability, and the smallest strategy cost that lowers
    it.  An infinite factor passes infinity through.
    """
    planner = AttackPlanner(task.pentest)
    b_a_min = planner.min_attack_budget(task.initial_network)
    if b_a_min == INF:
        return INF, INF, b_a_min, INF
    b_m_min = min_mitigation_budget(task)
    b_a = INF if gamma_a == INF else gamma_a * b_a_min
    b_m = INF if (gamma_m == INF or b_m_min == INF) else gamma_m * b_m_min
    return b_a, b_m, b_a_min, b_m_min


def run_cell(n_hosts, seed, gamma_m, gamma_a, time_limit, memory_limit,
             gen_overrides=None, options=None, workdir=None):
    """Generate one instance and run the frontier search on it."""
    instance = "H%d-s%d" % (n_hosts, seed)
    params = GenParams(n_hosts=n_hosts, seed=seed, **(gen_overrides or {}))
    tmp = None
    if workdir is None:
        tmp = tempfile.TemporaryDirectory(prefix="netmit-")
        workdir = tmp.name
    try:
        t0 = time.monotonic()
        task = generate_task(params, Path(workdir) / instance)
        b_a, b_m, b_a_min, _ = resolve_budgets(task, gamma_m, gamma_a)
        if b_a_min == INF:
            return RunRecord(instance, seed, gamma_m, gamma_a, False,
                             time.monotonic() - t0, _rss(), 0, 0, 0,
                             error="goal unreachable")
        from .model import MitigationTask
        task = MitigationTask(
            pentest=replace_attacker_budget(task.pentest, b_a),
            initial_network=task.initial_network,
            fixes=task.fixes,
            mitigation_budget=b_m,
        )
        opts = SearchOptions(time_limit=time_limit, memory_limit=memory_limit,
                             **(options or {}))
        result = ParetoSearch(task, opts).run()
        return RunRecord(
            instance, seed, gamma_m, gamma_a, result.complete,
            time.monotonic() - t0, _rss(), len(result.entries),
            result.stats.nodes_expanded, result.stats.planner_calls,
            error="" if result.complete else "resource limit")
    finally:
        if tmp is not None:
            tmp.cleanup()


def _rss():
    import psutil
    return psutil.Process().memory_info().rss


def _cell_worker(args):
    return run_cell(*args)


def run_sweep(config, progress=None):
    """All grid cells; returns the RunRecord list in grid order."""
    cells = [(h, s, gm, ga, config.time_limit, config.memory_limit,
              config.gen_overrides, config.options)
             for h in config.host_counts
             for s in config.seeds
             for gm in config.gamma_m
             for ga in config.gamma_a]
    records = []
    if config.workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for rec in pool.map(_cell_worker, cells):
                records.append(rec)
                if progress:
                    progress(rec)
    else:
        for c in cells:
            rec = _cell_worker(c)
            records.append(rec)
            if progress:
                progress(rec)
    return records


def coverage_table(records):
    """(gamma_m, gamma_a) -> solved fraction, exact counts."""
    cells = {}
    for r in records:
        k = (r.gamma_m, r.gamma_a)
        solved, total = cells.get(k, (0, 0))
        cells[k] = (solved + int(r.solved), total + 1)
    return {k: {"solved": s, "total": t, "coverage": s / t}
            for k, (s, t) in sorted(cells.items())}


def write_csv(records, path, config=None):
    """Fixed-column CSV with a leading provenance comment line."""
    with open(path, "w", newline="") as fh:
        prov = {"columns": list(CSV_COLUMNS)}
        if config is not None:
            prov["config"] = _jsonable(asdict(config))
        fh.write("# %s\n" % json.dumps(prov, sort_keys=True))
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.row())


def _quantile(values, q):
    """Linear-interpolation quantile of a non-empty sorted list."""
    if len(values) == 1:
        return values[0]
    pos = q * (len(values) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    return values[lo] + (values[hi] - values[lo]) * (pos - lo)


def summarize(values):
    vs = sorted(values)
    return {
        "raw": list(values),
        "min": vs[0],
        "q1": _quantile(vs, 0.25),
        "median": _quantile(vs, 0.5),
        "q3": _quantile(vs, 0.75),
        "max": vs[-1],
        "mean": sum(vs) / len(vs),
    }


def variance_report(config):
    """Per-host-count distributions over seeds.

    Raw per-seed values are always included next to the aggregates so the
    statistics can be recomputed downstream.
    """
    if len(config.seeds) < 2:
        raise ValueError("variance report needs at least 2 seeds")
    records = run_sweep(config)
    report = {}
    for h in config.host_counts:
        cell = [r for r in records if r.instance.startswith("H%d-" % h)]
        report["H%d" % h] = {
            "seeds": list(config.seeds),
            "coverage": sum(int(r.solved) for r in cell) / len(cell),
            "nodes_expanded": summarize([r.nodes_expanded for r in cell]),
            "wall_time": summarize([r.wall_time for r in cell]),
            "frontier_size": summarize([r.frontier_size for r in cell]),
        }
    return report, records
