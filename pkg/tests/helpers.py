"""Shared test utilities: random instance generators and brute-force oracles.

The oracles deliberately share no search code with the package: attack
probabilities come from exhaustive DFS over action sequences, frontiers from
exhaustive enumeration of applicable fix sequences.
"""

import random

from netmit.model import (
    INF, AttackerAction, AttackerState, FixAction, MitigationTask,
    NetworkState, Outcome, PenTestTask, Vocabulary,
    action_applicable, apply_fix, fix_applicable, goal_satisfied,
    mask_satisfies, neg, pos,
)

PROBS = (0.2, 0.5, 0.8, 0.9, 1.0)
COSTS = (0.5, 1.0, 2.0, 3.0)


def random_pentest(rng, n_att=6, n_net=4, n_actions=8, allow_deletes=True,
                   vocab=None):
    """Small arbitrary attacker task plus a network state to plan against."""
    vocab = vocab or Vocabulary()
    att = [vocab.prop("a", i) for i in range(rng.randint(2, n_att))]
    net = [vocab.prop("n", i) for i in range(rng.randint(1, n_net))]
    actions = []
    for k in range(rng.randint(1, n_actions)):
        pre_net = []
        for p in net:
            r = rng.random()
            if r < 0.2:
                pre_net.append(pos(p))
            elif r < 0.3:
                pre_net.append(neg(p))
        pre_att = []
        for p in rng.sample(att, rng.randint(0, min(2, len(att)))):
            pre_att.append(neg(p) if rng.random() < 0.2 else pos(p))
        post = []
        for p in rng.sample(att, rng.randint(1, min(3, len(att)))):
            if allow_deletes and rng.random() < 0.2:
                post.append(neg(p))
            else:
                post.append(pos(p))
        p_succ = rng.choice(PROBS)
        if p_succ >= 1.0:
            outcomes = [Outcome(1.0, post)]
        else:
            outcomes = [Outcome(p_succ, post), Outcome(1.0 - p_succ, ())]
        actions.append(AttackerAction("act%d" % k, pre_net, pre_att,
                                      rng.choice(COSTS), outcomes))
    initial = rng.sample(att, rng.randint(0, max(1, len(att) // 2)))
    goal = [pos(p) for p in rng.sample(att, rng.randint(1, 2))]
    if rng.random() < 0.15:
        goal.append(neg(rng.choice(att)))
    budget = rng.choice((INF, INF, 2.0, 4.0, 8.0))
    task = PenTestTask(vocab=vocab, actions=actions,
                       initial_attacker=AttackerState.of(initial),
                       goal=goal, attacker_budget=budget)
    net_state = NetworkState.of([p for p in net if rng.random() < 0.7])
    return task, net_state


def oracle_p_star(task, net):
    """Exhaustive max-probability over action/outcome sequences.

    Optimal plans never need to revisit an attacker proposition set (loop
    removal cannot hurt), so the DFS forbids repeats along a path.
    """
    goal = task.goal
    best = [0.0]

    def rec(att, prob, path_masks):
        if goal_satisfied(att, goal):
            best[0] = max(best[0], prob)
            return
        if prob <= best[0]:
            return  # no deeper extension can beat the incumbent
        for a in task.actions:
            if not action_applicable(net, att, a):
                continue
            remaining = att.remaining_budget - a.cost
            for o in a.outcomes:
                nmask = (att.mask & ~o.del_mask) | o.add_mask
                if nmask == att.mask or nmask in path_masks:
                    continue
                rec(AttackerState(nmask, remaining), prob * o.probability,
                    path_masks | {nmask})

    start = task.initial_attacker
    rec(start, 1.0, {start.mask})
    return best[0]


def oracle_min_budget(task, net):
    """Exhaustive minimal total action cost to reach the goal."""
    goal = task.goal
    best = [INF]

    def rec(att, spent, path_masks):
        if spent >= best[0]:
            return
        if goal_satisfied(att, goal):
            best[0] = spent
            return
        for a in task.actions:
            if not mask_satisfies(net.mask, a.pre_net_pos, a.pre_net_neg):
                continue
            if not mask_satisfies(att.mask, a.pre_att_pos, a.pre_att_neg):
                continue
            for o in a.outcomes:
                nmask = (att.mask & ~o.del_mask) | o.add_mask
                if nmask == att.mask or nmask in path_masks:
                    continue
                rec(AttackerState(nmask, att.remaining_budget),
                    spent + a.cost, path_masks | {nmask})

    start = AttackerState(task.initial_attacker.mask, INF)
    rec(start, 0.0, {start.mask})
    return best[0]


def random_mitigation(rng, n_fixes=6, n_a_max=4, n_b_max=3, vocab=None):
    """Small mitigation task where fixes only ever hurt the attacker.

    Network propositions come in three pools: `a` props appear positively in
    attack preconditions (fixes may delete them), `b` props appear negatively
    (fixes may add them), and one gate per fix makes every fix applicable at
    most once.  Fixes never enable attacks, which is also the shape produced
    by model instantiation, so parent attack plans stay exact under reuse.
    """
    vocab = vocab or Vocabulary()
    n_a = rng.randint(1, n_a_max)
    n_b = rng.randint(1, n_b_max)
    a_props = [vocab.prop("na", i) for i in range(n_a)]
    b_props = [vocab.prop("nb", i) for i in range(n_b)]
    att = [vocab.prop("a", i) for i in range(rng.randint(2, 5))]

    actions = []
    for k in range(rng.randint(1, 10)):
        pre_net = [pos(p) for p in a_props if rng.random() < 0.5]
        pre_net += [neg(p) for p in b_props if rng.random() < 0.4]
        pre_att = [pos(p) for p in
                   rng.sample(att, rng.randint(0, min(2, len(att))))]
        post = [pos(p) for p in rng.sample(att, rng.randint(1, 2))]
        p_succ = rng.choice(PROBS)
        if p_succ >= 1.0:
            outcomes = [Outcome(1.0, post)]
        else:
            outcomes = [Outcome(p_succ, post), Outcome(1.0 - p_succ, ())]
        actions.append(AttackerAction("act%d" % k, pre_net, pre_att,
                                      rng.choice(COSTS), outcomes))
    initial_att = rng.sample(att, rng.randint(1, max(1, len(att) // 2)))
    goal = [pos(rng.choice(att))]
    pentest = PenTestTask(vocab=vocab, actions=actions,
                          initial_attacker=AttackerState.of(initial_att),
                          goal=goal,
                          attacker_budget=rng.choice((INF, INF, 3.0, 6.0)))

    n = rng.randint(1, n_fixes)
    gates = [vocab.prop("g", i) for i in range(n)]
    fixes = []
    for i in range(n):
        pre = [neg(gates[i])]
        # occasional enabling chains and config requirements
        if i > 0 and rng.random() < 0.3:
            pre.append(pos(gates[rng.randrange(i)]))
        if rng.random() < 0.3:
            pre.append(pos(rng.choice(a_props)))
        post = [pos(gates[i])]
        for p in a_props:
            if rng.random() < 0.4:
                post.append(neg(p))
        for p in b_props:
            if rng.random() < 0.3:
                post.append(pos(p))
        fixes.append(FixAction("fix%d" % i, pre, post,
                               rng.choice((1.0, 2.0, 3.0, 5.0))))

    init_net = [p for p in a_props if rng.random() < 0.85]
    init_net += [p for p in b_props if rng.random() < 0.2]
    return MitigationTask(
        pentest=pentest,
        initial_network=NetworkState.of(init_net),
        fixes=fixes,
        mitigation_budget=rng.choice((INF, INF, 4.0, 8.0)),
    )


def oracle_frontier(task):
    """Non-dominated (cost, p*) points by exhaustive sequence enumeration."""
    from netmit.mitigation import dominates

    points = []
    seen = set()

    def rec(net, cost, used):
        key = (net.mask, round(cost, 9))
        if key in seen:
            return
        seen.add(key)
        points.append((cost, oracle_p_star(task.pentest, net)))
        for i, f in enumerate(task.fixes):
            if i in used or not fix_applicable(net, f):
                continue
            if cost + f.cost > task.mitigation_budget + 1e-9:
                continue
            rec(apply_fix(net, f), cost + f.cost, used | {i})

    rec(task.initial_network, 0.0, frozenset())
    front = []
    for cp in sorted(points):
        if any(dominates(q, cp) for q in front):
            continue
        if any(abs(q[0] - cp[0]) <= 1e-9 and abs(q[1] - cp[1]) <= 1e-9
               for q in front):
            continue
        front = [q for q in front if not dominates(cp, q)] + [cp]
    return sorted(front)


def frontier_points(result):
    return sorted((e.cost, e.residual_probability) for e in result.entries)


def same_points(xs, ys, tol=1e-9):
    if len(xs) != len(ys):
        return False
    return all(abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol
               for a, b in zip(sorted(xs), sorted(ys)))
