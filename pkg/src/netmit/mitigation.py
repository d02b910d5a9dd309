"""Pareto-frontier mitigation search.

Depth-first tree search over fix-action sequences, wrapped in iterative
deepening over the mitigation budget.  Pruning machinery:

* C0   -- cost of the cheapest strategy found with residual probability 0;
          anything costlier is dominated.
* Ofix -- network state -> cheapest discovered strategy cost; costlier
          revisits are pruned.
* Oatt -- network state -> (attack plan, residual probability); spares
          repeated attack searches, including reuse of the parent state's
          plan when it survives the newest fix.
* sleep sets -- skip permutations of commutative fixes.
* strong stubborn sets -- branch only over fixes that can help invalidate
          the current critical attack path.

The recursion is run on an explicit stack; depth is bounded by
budget / min fix cost, not by the interpreter's call stack.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .model import (
    EPS, INF, MitigationStrategy, NetworkState,
    apply_fix, fix_applicable,
)
from .planner import AttackPlanner
from .relations import (
    EmptyLandmark, compute_relations, compute_stubborn_set,
    path_invalidation_literals,
)


class ResourceLimitExceeded(Exception):
    pass


@dataclass
class SearchOptions:
    """Pruning toggles, IDS growth factor and cooperative resource limits."""

    budget_growth: float = 2.0          # IDS budget multiplier per round
    use_sss: bool = True
    use_sleep_sets: bool = True
    use_ofix: bool = True
    use_oatt: bool = True
    use_c0: bool = True
    prune_useless_outcomes: bool = True
    time_limit: float | None = None     # seconds, wall clock
    memory_limit: int | None = None     # bytes, process RSS


@dataclass
class SearchStats:
    nodes_expanded: int = 0
    planner_calls: int = 0
    cache_hits: int = 0
    parent_plan_reuses: int = 0
    ids_rounds: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class FrontierEntry:
    strategy: MitigationStrategy
    cost: float
    residual_probability: float


@dataclass
class FrontierResult:
    entries: list
    complete: bool
    stats: SearchStats

    def to_jsonable(self):
        return {
            "frontier": [
                {"cost": e.cost, "p_star": e.residual_probability,
                 "fixes": list(e.strategy.fixes)}
                for e in self.entries
            ],
            "incomplete": not self.complete,
            "stats": {
                "nodes_expanded": self.stats.nodes_expanded,
                "planner_calls": self.stats.planner_calls,
                "cache_hits": self.stats.cache_hits,
                "parent_plan_reuses": self.stats.parent_plan_reuses,
                "ids_rounds": self.stats.ids_rounds,
                "wall_time": self.stats.wall_time,
            },
        }


def dominates(e1, e2):
    """Strategy dominance on (cost, residual probability) pairs."""
    c1, p1 = e1
    c2, p2 = e2
    return (p1 < p2 - EPS and c1 <= c2 + EPS) or (p1 <= p2 + EPS and c1 < c2 - EPS)


def frontier_insert(frontier, candidate):
    """Insert a candidate entry unless dominated; drop members it dominates.

    One representative is kept per (cost, p*) point: an exact duplicate of an
    existing point is ignored.  The frontier stays sorted by cost.
    """
    cp = (candidate.cost, candidate.residual_probability)
    for e in frontier:
        if dominates((e.cost, e.residual_probability), cp):
            return frontier
        if (abs(e.cost - candidate.cost) <= EPS
                and abs(e.residual_probability - candidate.residual_probability) <= EPS):
            return frontier
    kept = [e for e in frontier if not dominates(cp, (e.cost, e.residual_probability))]
    kept.append(candidate)
    kept.sort(key=lambda e: e.cost)
    return kept


class _Limits:
    """Cooperative wall-clock / memory guard, checked once per node."""

    def __init__(self, opts):
        self.deadline = (time.monotonic() + opts.time_limit
                         if opts.time_limit is not None else None)
        self.memory_limit = opts.memory_limit
        self._proc = None
        if self.memory_limit is not None:
            import psutil
            self._proc = psutil.Process()
        self._tick = 0

    def check(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise ResourceLimitExceeded("time limit exceeded")
        if self._proc is not None:
            self._tick += 1
            if self._tick % 64 == 0 and self._proc.memory_info().rss > self.memory_limit:
                raise ResourceLimitExceeded("memory limit exceeded")


@dataclass
class _Frame:
    """One node of the explicit DFS stack."""

    net: NetworkState
    sigma: tuple            # fix indices
    cost: float
    sleep: frozenset        # fix indices skipped at this node
    branch: list            # ordered fix indices branched over
    next_i: int = 0


class ParetoSearch:
    """Stateful search over one mitigation task."""

    def __init__(self, task, opts=None):
        self.task = task
        self.opts = opts or SearchOptions()
        self.planner = AttackPlanner(
            task.pentest, prune_useless=self.opts.prune_useless_outcomes)
        self.fixes = list(task.fixes)
        self.relations = compute_relations(self.fixes)
        self.stats = SearchStats()
        # global caches, shared across IDS rounds
        self.c_zero = INF
        self.ofix = {}   # net mask -> cheapest strategy cost
        self.oatt = {}   # net mask -> (plan or None, p_star)
        self.cut_off = False
        self.frontier = []
        self.limits = _Limits(self.opts)

    # -- node evaluation ---------------------------------------------------

    def _evaluate(self, net, parent_net, cost, sigma):
        """p* and plan for net, via parent-plan reuse, Oatt, or the planner."""
        self.stats.nodes_expanded += 1
        self.limits.check()
        key = net.mask
        plan = p = None
        if self.opts.use_oatt and parent_net is not None:
            parent_hit = self.oatt.get(parent_net.mask)
            if parent_hit is not None and parent_hit[0] is not None:
                if self.planner.plan_still_valid(net, parent_hit[0]):
                    plan, p = parent_hit
                    self.stats.parent_plan_reuses += 1
        if p is None and self.opts.use_oatt:
            hit = self.oatt.get(key)
            if hit is not None:
                plan, p = hit
                self.stats.cache_hits += 1
        if p is None:
            plan = self.planner.critical_attack_path(net)
            p = plan.success_probability if plan is not None else 0.0
            self.stats.planner_calls += 1
        entry = FrontierEntry(self._strategy(sigma), cost, p)
        self.frontier = frontier_insert(self.frontier, entry)
        if self.opts.use_ofix:
            old = self.ofix.get(key)
            if old is None or cost < old[0] - EPS:
                self.ofix[key] = (cost, sigma)
        if self.opts.use_oatt and key not in self.oatt:
            self.oatt[key] = (plan, p)
        if p <= EPS:
            if cost < self.c_zero:
                self.c_zero = cost
            return plan, p, True
        return plan, p, False

    def _strategy(self, sigma):
        return MitigationStrategy(
            tuple(self.fixes[i].id for i in sigma),
            math.fsum(self.fixes[i].cost for i in sigma))

    def _branch_list(self, net, plan):
        """Fix indices to branch over, in fix-list order."""
        app = [i for i, f in enumerate(self.fixes) if fix_applicable(net, f)]
        if not self.opts.use_sss or plan is None:
            return app
        want_added, want_removed = path_invalidation_literals(plan, self.planner.by_id)
        try:
            _, restricted = compute_stubborn_set(
                net, want_added, want_removed, self.relations, self.fixes)
        except EmptyLandmark:
            # no fix can touch the current attack path: every extension is
            # dominated by the current strategy
            return []
        return [i for i in app if i in restricted]

    # -- the DFS round -----------------------------------------------------

    def _round(self, budget):
        root_net = self.task.initial_network
        plan, p, zero = self._evaluate(root_net, None, 0.0, ())
        if zero:
            return
        stack = [_Frame(root_net, (), 0.0, frozenset(),
                        self._branch_list(root_net, plan))]
        while stack:
            frame = stack[-1]
            if frame.next_i >= len(frame.branch):
                stack.pop()
                continue
            idx = frame.next_i
            i = frame.branch[idx]
            frame.next_i += 1
            fix = self.fixes[i]
            succ_cost = frame.cost + fix.cost
            if self.opts.use_c0 and succ_cost > self.c_zero + EPS:
                continue
            if self.opts.use_sleep_sets and i in frame.sleep:
                continue
            succ_net = apply_fix(frame.net, fix)
            if succ_net.mask == frame.net.mask:
                continue  # no-op application: same state at higher cost
            if self.opts.use_ofix:
                known = self.ofix.get(succ_net.mask)
                if known is not None and succ_cost > known[0] + EPS:
                    continue
            if succ_cost > budget + EPS:
                self.cut_off = True
                continue
            if self.opts.use_sleep_sets:
                sleep = frozenset(
                    j for j in (frame.sleep | set(frame.branch[:idx]))
                    if self.relations.commutative(i, j))
            else:
                sleep = frozenset()
            sigma = frame.sigma + (i,)
            plan, p, zero = self._evaluate(succ_net, frame.net, succ_cost, sigma)
            if zero:
                continue
            stack.append(_Frame(succ_net, sigma, succ_cost, sleep,
                                self._branch_list(succ_net, plan)))

    # -- IDS driver --------------------------------------------------------

    def run(self):
        t0 = time.monotonic()
        complete = True
        try:
            max_budget = self.task.mitigation_budget
            if not self.fixes:
                self._evaluate(self.task.initial_network, None, 0.0, ())
            else:
                budget = min(max(f.cost for f in self.fixes), max_budget)
                while True:
                    self.stats.ids_rounds += 1
                    self.cut_off = False
                    self._round(budget)
                    if self.c_zero < INF:
                        break
                    if not self.cut_off:
                        break
                    if budget >= max_budget - EPS:
                        break
                    budget = min(budget * self.opts.budget_growth, max_budget)
        except ResourceLimitExceeded:
            complete = False
        self.stats.wall_time = time.monotonic() - t0
        return FrontierResult(list(self.frontier), complete, self.stats)


def pareto_frontier(task, opts=None):
    """Pareto frontier of mitigation strategies for a mitigation task."""
    return ParetoSearch(task, opts).run()


def min_mitigation_budget(task, opts=None):
    """Minimal strategy cost lowering p* below its initial value.

    The attacker budget is fixed to the minimal budget yielding a non-zero
    success probability.  Network states are explored in cost order with
    stubborn-set-restricted branching; the first state whose residual
    probability drops below the baseline gives the answer.  +inf when no
    strategy lowers it.
    """
    import heapq

    opts = opts or SearchOptions()
    planner = AttackPlanner(task.pentest,
                            prune_useless=opts.prune_useless_outcomes)
    net0 = task.initial_network
    b_min = planner.min_attack_budget(net0)
    if b_min == INF:
        return INF
    pentest = replace_attacker_budget(task.pentest, b_min)
    planner = AttackPlanner(pentest, prune_useless=opts.prune_useless_outcomes)
    p0 = planner.p_star(net0)
    if p0 <= EPS:
        return INF
    fixes = list(task.fixes)
    relations = compute_relations(fixes)
    limits = _Limits(opts)

    base_plan = planner.critical_attack_path(net0)
    heap = [(0.0, 0, net0.mask, net0, base_plan)]
    counter = 1
    best_cost = {net0.mask: 0.0}
    while heap:
        cost, _, _, net, parent_plan = heapq.heappop(heap)
        limits.check()
        if cost > best_cost.get(net.mask, INF) + EPS:
            continue
        if parent_plan is not None and planner.plan_still_valid(net, parent_plan):
            plan = parent_plan
        else:
            plan = planner.critical_attack_path(net)
            p = plan.success_probability if plan is not None else 0.0
            if p < p0 - EPS:
                return cost
        if plan is None:
            continue
        if opts.use_sss:
            want_added, want_removed = path_invalidation_literals(plan, planner.by_id)
            try:
                _, restricted = compute_stubborn_set(
                    net, want_added, want_removed, relations, fixes)
            except EmptyLandmark:
                continue
            branch = sorted(restricted)
        else:
            branch = [i for i, f in enumerate(fixes) if fix_applicable(net, f)]
        for i in branch:
            f = fixes[i]
            if not fix_applicable(net, f):
                continue
            succ = apply_fix(net, f)
            if succ.mask == net.mask:
                continue
            succ_cost = cost + f.cost
            if succ_cost >= best_cost.get(succ.mask, INF) - EPS:
                continue
            best_cost[succ.mask] = succ_cost
            heapq.heappush(heap, (succ_cost, counter, succ.mask, succ, plan))
            counter += 1
    return INF


def replace_attacker_budget(pentest, budget):
    """Copy of a pentest task with a different attacker budget."""
    from .model import AttackerState, PenTestTask
    return PenTestTask(
        vocab=pentest.vocab,
        actions=pentest.actions,
        initial_attacker=AttackerState(pentest.initial_attacker.mask, budget),
        goal=pentest.goal,
        attacker_budget=budget,
    )
