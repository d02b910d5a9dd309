"""Static fix-action pair analysis and stubborn-set computation.

Relations (disables / conflicts / enables / interferes / commutative) are
computed once per task from the fix-actions' syntactic pre/post literals.
The stubborn set restricts fix-level branching to actions that can help
invalidate the current critical attack path, closed under interference and
necessary enabling.
"""

from __future__ import annotations

from .model import fix_applicable


class EmptyLandmark(Exception):
    """No fix-action can negate any precondition of the current attack path."""


class ActionRelations:
    """Pairwise relations over a fixed fix-action list, index-based."""

    def __init__(self, fixes):
        self.fixes = list(fixes)
        n = len(self.fixes)
        self.disables = [set() for _ in range(n)]       # i disables j
        self.conflicts = [set() for _ in range(n)]      # symmetric
        self.enables = [set() for _ in range(n)]        # i enables j
        self.interferes = [set() for _ in range(n)]     # symmetric; inf(f)
        self.commutes = [set() for _ in range(n)]       # symmetric

        for i, fi in enumerate(self.fixes):
            for j, fj in enumerate(self.fixes):
                if i == j:
                    continue
                if (fi.add_mask & fj.pre_neg) or (fi.del_mask & fj.pre_pos):
                    self.disables[i].add(j)
                if (fi.add_mask & fj.del_mask) or (fi.del_mask & fj.add_mask):
                    self.conflicts[i].add(j)
                if (fi.add_mask & fj.pre_pos) or (fi.del_mask & fj.pre_neg):
                    self.enables[i].add(j)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                if j in self.conflicts[i] or j in self.disables[i] or i in self.disables[j]:
                    self.interferes[i].add(j)
                elif j not in self.enables[i] and i not in self.enables[j]:
                    self.commutes[i].add(j)

    def commutative(self, i, j):
        return j in self.commutes[i]

    def interfere(self, i, j):
        return j in self.interferes[i]


def compute_relations(fixes):
    return ActionRelations(fixes)


def path_invalidation_literals(plan, by_id):
    """Literals whose achievement breaks some step of the attack plan.

    A positive network precondition p of a path step contributes the literal
    !p; a negative precondition !q contributes q.  Attacker preconditions are
    skipped: fixes only write network propositions and can never achieve
    them.  Returned as (target_pos_mask, target_neg_mask): propositions whose
    addition resp. removal invalidates the path.
    """
    want_added = 0   # adding any of these props breaks a step (negated pre)
    want_removed = 0  # removing any of these props breaks a step (positive pre)
    for step_id in plan.steps:
        d = by_id[step_id]
        want_removed |= d.pre_net_pos
        want_added |= d.pre_net_neg
    return want_added, want_removed


def landmark(target_added, target_removed, fixes):
    """Disjunctive action landmark: fixes achieving any invalidation literal."""
    lm = set()
    for i, f in enumerate(fixes):
        if (f.add_mask & target_added) or (f.del_mask & target_removed):
            lm.add(i)
    if not lm:
        raise EmptyLandmark()
    return lm


def necessary_enabling_set(fix_index, net, fixes):
    """Achievers of one unsatisfied precondition literal of an inapplicable fix.

    The literal is chosen deterministically (smallest proposition index among
    unsatisfied ones, positives before negatives at equal index).  May be
    empty, in which case the fix is permanently inapplicable from net.
    """
    f = fixes[fix_index]
    if fix_applicable(net, f):
        raise ValueError("fix %s is applicable; no enabling set needed" % f.id)
    missing_pos = f.pre_pos & ~net.mask       # props required but absent
    blocking_neg = f.pre_neg & net.mask       # props required absent but present
    achievers = set()
    choice_pos = choice_neg = None
    if missing_pos:
        choice_pos = (missing_pos & -missing_pos)
    if blocking_neg:
        choice_neg = (blocking_neg & -blocking_neg)
    if choice_pos is not None and (choice_neg is None or choice_pos < choice_neg):
        for i, g in enumerate(fixes):
            if g.add_mask & choice_pos:
                achievers.add(i)
    else:
        for i, g in enumerate(fixes):
            if g.del_mask & choice_neg:
                achievers.add(i)
    return achievers


def compute_stubborn_set(net, target_added, target_removed, relations, fixes):
    """Fixpoint closure of the landmark under interference / enabling.

    Returns (stubborn, restricted_app): the full set and its intersection
    with app(net), both as index sets.
    """
    stubborn = set(landmark(target_added, target_removed, fixes))
    frontier = list(stubborn)
    while frontier:
        i = frontier.pop()
        f = fixes[i]
        if fix_applicable(net, f):
            new = relations.interferes[i] - stubborn
        else:
            new = necessary_enabling_set(i, net, fixes) - stubborn
        stubborn |= new
        frontier.extend(new)
    restricted = {i for i in stubborn if fix_applicable(net, fixes[i])}
    return stubborn, restricted
