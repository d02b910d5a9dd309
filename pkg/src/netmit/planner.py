"""Critical attack path computation.

Stochastic attacker actions are compiled away by the all-outcome
determinization: one deterministic action per (action, outcome) pair with
weight -ln p(outcome).  Minimal-weight goal-reaching sequences then are
maximum-success-probability attack paths.  The search is uniform-cost over
(attacker props, remaining budget) nodes with dominance pruning; the budget
is a feasibility resource, not part of the objective.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .model import (
    EPS, INF, AttackerState,
    apply_masks, goal_satisfied, mask_satisfies,
)


class DetAction:
    """Deterministic image of one (attacker action, outcome) pair."""

    __slots__ = ("id", "source_action", "outcome_index", "budget_cost", "log_cost",
                 "pre_net_pos", "pre_net_neg", "pre_att_pos", "pre_att_neg",
                 "add_mask", "del_mask", "postcondition")

    def __init__(self, action, outcome_index):
        o = action.outcomes[outcome_index]
        self.id = "%s#%d" % (action.id, outcome_index)
        self.source_action = action.id
        self.outcome_index = outcome_index
        self.budget_cost = action.cost
        self.log_cost = -math.log(o.probability) if o.probability < 1.0 else 0.0
        self.pre_net_pos = action.pre_net_pos
        self.pre_net_neg = action.pre_net_neg
        self.pre_att_pos = action.pre_att_pos
        self.pre_att_neg = action.pre_att_neg
        self.add_mask = o.add_mask
        self.del_mask = o.del_mask
        self.postcondition = o.postcondition

    def __repr__(self):
        return "DetAction(%s)" % self.id


@dataclass(frozen=True)
class AttackPlan:
    """Critical attack path: determinized steps, probability, budget spent."""

    steps: tuple
    success_probability: float
    budget_spent: float

    def __len__(self):
        return len(self.steps)


def determinize(task):
    """One DetAction per (action, outcome) pair, in stable input order."""
    det = []
    for a in task.actions:
        for i in range(len(a.outcomes)):
            det.append(DetAction(a, i))
    return det


def _useful(det, task, all_det):
    """Whether a determinized action can ever contribute to a plan.

    Outcomes that add nothing and delete only propositions that never occur
    negated in the goal or in any attacker precondition cannot appear on an
    optimal path: dropping the step yields a no-worse path.
    """
    if det.add_mask:
        return True
    if det.del_mask & task.goal_neg:
        return True
    for other in all_det:
        if det.del_mask & other.pre_att_neg:
            return True
    return False


class AttackPlanner:
    """Critical-path planner for one pentest task.

    Construct-and-run: instances hold only immutable task data plus the
    determinization, so concurrent planners on disjoint network states are
    safe.
    """

    def __init__(self, task, prune_useless=True):
        self.task = task
        self.det_actions = determinize(task)
        self.by_id = {d.id: d for d in self.det_actions}
        if prune_useless:
            self.search_actions = [d for d in self.det_actions
                                   if _useful(d, task, self.det_actions)]
        else:
            self.search_actions = list(self.det_actions)
        self.chain_mode = self._chain_structured(task.goal_pos, task.goal_neg)

    # -- internals ---------------------------------------------------------

    def _chain_structured(self, goal_pos, goal_neg):
        """Whether optimal plans are proposition chains.

        Holds when effects only add, attacker preconditions are at most one
        positive literal, and the goal is one positive literal.  Then every
        plan contains a precondition-to-goal chain that is itself a plan of
        no worse weight and budget, so search can run over single
        propositions instead of proposition sets.  Instantiated network
        models have this shape; hand-built tasks may not.
        """
        if goal_neg or bin(goal_pos).count("1") != 1:
            return False
        for d in self.search_actions:
            if d.del_mask or d.pre_att_neg:
                return False
            if bin(d.pre_att_pos).count("1") > 1:
                return False
        return True

    def _search_chain(self, net, weight, goal_pos, budget0):
        """Dijkstra over single attacker propositions; see _chain_structured."""
        task = self.task
        start_mask = task.initial_attacker.mask
        enabled = self._enabled(net)
        by_prop, always = self._triggers(enabled)
        if budget0 is None:
            budget0 = task.initial_attacker.remaining_budget

        heap = []
        m = start_mask
        while m:
            low = m & -m
            heap.append((0.0, 0.0, (), low))
            m ^= low
        for d in always:
            if budget0 < d.budget_cost - EPS:
                continue
            ma = d.add_mask
            while ma:
                low = ma & -ma
                heap.append((weight(d), d.budget_cost, (d.id,), low))
                ma ^= low
        heapq.heapify(heap)
        seen = {}
        while heap:
            g, spent, steps, prop = heapq.heappop(heap)
            if prop & goal_pos:
                return (g, spent, steps)
            entries = seen.setdefault(prop, [])
            if any(g0 <= g + 1e-12 and s0 <= spent + 1e-12 for g0, s0 in entries):
                continue
            entries[:] = [(g0, s0) for g0, s0 in entries
                          if not (g <= g0 + 1e-12 and spent <= s0 + 1e-12)]
            entries.append((g, spent))
            for d in by_prop.get(prop.bit_length() - 1, ()):
                nspent = spent + d.budget_cost
                if budget0 < nspent - EPS:
                    continue
                ng = g + weight(d)
                nsteps = steps + (d.id,)
                ma = d.add_mask
                while ma:
                    low = ma & -ma
                    ma ^= low
                    entries2 = seen.get(low)
                    if entries2 and any(g0 <= ng + 1e-12 and s0 <= nspent + 1e-12
                                        for g0, s0 in entries2):
                        continue
                    heapq.heappush(heap, (ng, nspent, nsteps, low))
        return None

    def _enabled(self, net):
        """Determinized actions whose network precondition holds in net.

        The network state is fixed for the whole attack search, so this is
        evaluated once per planner call.
        """
        return [d for d in self.search_actions
                if mask_satisfies(net.mask, d.pre_net_pos, d.pre_net_neg)]

    def _triggers(self, enabled):
        """Index enabled actions by one positive attacker precondition.

        Successor generation only needs to consider actions triggered by a
        proposition the attacker already holds (or actions with no positive
        attacker precondition at all).
        """
        by_prop = {}
        always = []
        for d in enabled:
            m = d.pre_att_pos
            if not m:
                always.append(d)
                continue
            idx = (m & -m).bit_length() - 1  # lowest required prop
            by_prop.setdefault(idx, []).append(d)
        return by_prop, always

    def _search(self, net, weight, target_test, budget0=None):
        """Uniform-cost search; returns (weight, spent, steps) or None.

        weight(det) gives the edge weight (log cost for probability search,
        budget cost for minimal-budget search); ties break on budget spent,
        then lexicographically on the step-id sequence.
        """
        task = self.task
        start = task.initial_attacker
        if target_test(start.mask):
            return (0.0, 0.0, ())
        enabled = self._enabled(net)
        by_prop, always = self._triggers(enabled)
        if budget0 is None:
            budget0 = start.remaining_budget

        heap = [(0.0, 0.0, (), start.mask)]
        # mask -> list of non-dominated (g, spent) already expanded
        seen = {}
        while heap:
            g, spent, steps, mask = heapq.heappop(heap)
            if target_test(mask):
                return (g, spent, steps)
            entries = seen.setdefault(mask, [])
            if any(g0 <= g + 1e-12 and s0 <= spent + 1e-12 for g0, s0 in entries):
                continue
            entries[:] = [(g0, s0) for g0, s0 in entries
                          if not (g <= g0 + 1e-12 and spent <= s0 + 1e-12)]
            entries.append((g, spent))

            candidates = list(always)
            m = mask
            while m:
                low = m & -m
                candidates.extend(by_prop.get(low.bit_length() - 1, ()))
                m ^= low
            remaining = budget0 - spent
            for d in candidates:
                if not mask_satisfies(mask, d.pre_att_pos, d.pre_att_neg):
                    continue
                if remaining < d.budget_cost - EPS:
                    continue
                nmask = apply_masks(mask, d.add_mask, d.del_mask)
                if nmask == mask:
                    continue  # no-progress step can never pay off
                ng = g + weight(d)
                nspent = spent + d.budget_cost
                entries = seen.get(nmask)
                if entries and any(g0 <= ng + 1e-12 and s0 <= nspent + 1e-12
                                   for g0, s0 in entries):
                    continue
                heapq.heappush(heap, (ng, nspent, steps + (d.id,), nmask))
        return None

    # -- public operations -------------------------------------------------

    def _goal_search(self, net, weight, budget0=None):
        goal_pos, goal_neg = self.task.goal_pos, self.task.goal_neg
        if mask_satisfies(self.task.initial_attacker.mask, goal_pos, goal_neg):
            return (0.0, 0.0, ())
        if self.chain_mode:
            return self._search_chain(net, weight, goal_pos, budget0)
        return self._search(net, weight,
                            lambda mask: mask_satisfies(mask, goal_pos, goal_neg),
                            budget0=budget0)

    def critical_attack_path(self, net):
        """Max-probability budget-feasible attack plan, or None."""
        hit = self._goal_search(net, lambda d: d.log_cost)
        if hit is None:
            return None
        g, spent, steps = hit
        return AttackPlan(steps, math.exp(-g), spent)

    def p_star(self, net):
        plan = self.critical_attack_path(net)
        return plan.success_probability if plan is not None else 0.0

    def min_attack_budget(self, net):
        """Minimal summed action cost of any goal-reaching sequence."""
        hit = self._goal_search(net, lambda d: d.budget_cost, budget0=INF)
        return hit[0] if hit is not None else INF

    def plan_still_valid(self, net, plan):
        """Replay the plan's steps under ``net``; True iff it reaches the goal."""
        att = self.task.initial_attacker
        for step_id in plan.steps:
            d = self.by_id.get(step_id)
            if d is None:
                return False
            if not mask_satisfies(net.mask, d.pre_net_pos, d.pre_net_neg):
                return False
            if not mask_satisfies(att.mask, d.pre_att_pos, d.pre_att_neg):
                return False
            if att.remaining_budget < d.budget_cost - EPS:
                return False
            att = AttackerState(apply_masks(att.mask, d.add_mask, d.del_mask),
                                att.remaining_budget - d.budget_cost)
        return goal_satisfied(att, self.task.goal)


def critical_attack_path(task, net, prune_useless=True):
    return AttackPlanner(task, prune_useless).critical_attack_path(net)


def p_star(task, net):
    return AttackPlanner(task).p_star(net)


def min_attack_budget(task, net):
    return AttackPlanner(task).min_attack_budget(net)


def plan_still_valid(task, net, plan):
    return AttackPlanner(task).plan_still_valid(net, plan)
