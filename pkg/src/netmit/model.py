"""Core network/attacker model: propositions, states, actions and their
pure transition semantics.

Network propositions describe topology and configuration (subnet, haclz,
vul_exists, ...); attacker propositions describe the attacker's progress
(compromised, zcompromised, ...).  Attacker actions read both partitions but
write only the attacker partition; fix-actions read and write only the
network partition.

Propositions are interned per :class:`Vocabulary` and assigned bit indices,
so proposition sets are plain integer bitmasks.  All model objects are
treated as immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

COMPROMISE_TYPES = ("confidentiality", "integrity", "availability")

#: tolerance for budget / cost / probability comparisons
EPS = 1e-9

INF = float("inf")


class ModelError(ValueError):
    """Raised on malformed model objects (bad probabilities, costs, ...)."""


class Proposition:
    """An interned ground atom, e.g. ``haclz(internet, dmz, 443, tcp)``.

    Instances are created through :meth:`Vocabulary.prop`; within one
    vocabulary, structurally equal propositions are the same object, so
    identity comparison and the default hash are correct.
    """

    __slots__ = ("predicate", "args", "index")

    def __init__(self, predicate, args, index):
        self.predicate = predicate
        self.args = tuple(args)
        self.index = index

    @property
    def key(self):
        return (self.predicate, self.args)

    @property
    def mask(self):
        return 1 << self.index

    def __repr__(self):
        if not self.args:
            return self.predicate
        return "%s(%s)" % (self.predicate, ",".join(str(a) for a in self.args))


class Vocabulary:
    """Interning table assigning each proposition a stable bit index."""

    def __init__(self):
        self._by_key = {}
        self._props = []

    def prop(self, predicate, *args):
        key = (predicate, tuple(str(a) for a in args))
        p = self._by_key.get(key)
        if p is None:
            p = Proposition(key[0], key[1], len(self._props))
            self._by_key[key] = p
            self._props.append(p)
        return p

    def lookup(self, predicate, *args):
        """Return the proposition if it was interned, else None."""
        return self._by_key.get((predicate, tuple(str(a) for a in args)))

    def by_index(self, index):
        return self._props[index]

    def props_in(self, mask):
        """Decode a bitmask into the propositions it contains."""
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self._props[i])
            mask >>= 1
            i += 1
        return out

    def __len__(self):
        return len(self._props)

    def __iter__(self):
        return iter(self._props)


@dataclass(frozen=True)
class Literal:
    proposition: Proposition
    negated: bool = False

    def negate(self):
        return Literal(self.proposition, not self.negated)

    def __repr__(self):
        return ("!" if self.negated else "") + repr(self.proposition)


def pos(prop):
    return Literal(prop, False)


def neg(prop):
    return Literal(prop, True)


def literal_masks(literals):
    """Compile a literal conjunction into (positive, negative) bitmasks."""
    p = n = 0
    for lit in literals:
        if lit.negated:
            n |= lit.proposition.mask
        else:
            p |= lit.proposition.mask
    return p, n


def mask_satisfies(mask, pos_mask, neg_mask):
    return (mask & pos_mask) == pos_mask and not (mask & neg_mask)


def apply_masks(mask, add_mask, del_mask):
    return (mask & ~del_mask) | add_mask


@dataclass(frozen=True)
class NetworkState:
    """A set of true network propositions (closed world), as a bitmask."""

    mask: int = 0

    @classmethod
    def of(cls, props):
        m = 0
        for p in props:
            m |= p.mask
        return cls(m)

    def holds(self, prop):
        return bool(self.mask & prop.mask)

    def satisfies(self, literals):
        p, n = literal_masks(literals)
        return mask_satisfies(self.mask, p, n)

    def props(self, vocab):
        return vocab.props_in(self.mask)


@dataclass(frozen=True)
class AttackerState:
    """Attacker proposition set plus the remaining action budget."""

    mask: int = 0
    remaining_budget: float = INF

    @classmethod
    def of(cls, props, remaining_budget=INF):
        m = 0
        for p in props:
            m |= p.mask
        return cls(m, remaining_budget)

    def holds(self, prop):
        return bool(self.mask & prop.mask)


class Outcome:
    """One stochastic outcome of an attacker action."""

    __slots__ = ("probability", "postcondition", "add_mask", "del_mask")

    def __init__(self, probability, postcondition=()):
        if not (0.0 < probability <= 1.0 + EPS):
            raise ModelError("outcome probability must lie in (0, 1]: %r" % probability)
        self.probability = min(probability, 1.0)
        self.postcondition = tuple(postcondition)
        add = rem = 0
        for lit in self.postcondition:
            if lit.negated:
                rem |= lit.proposition.mask
            else:
                add |= lit.proposition.mask
        self.add_mask = add
        self.del_mask = rem

    def __repr__(self):
        return "Outcome(p=%g, post=%r)" % (self.probability, list(self.postcondition))


class AttackerAction:
    """Probabilistic attacker action.

    ``artificial`` marks bookkeeping actions (zone-compromise derivation)
    which are allowed to have cost 0 and thus never consume budget.
    """

    __slots__ = (
        "id", "pre_net", "pre_att", "cost", "outcomes", "artificial",
        "pre_net_pos", "pre_net_neg", "pre_att_pos", "pre_att_neg",
    )

    def __init__(self, id, pre_net, pre_att, cost, outcomes, artificial=False):
        self.id = id
        self.pre_net = tuple(pre_net)
        self.pre_att = tuple(pre_att)
        self.cost = float(cost)
        self.outcomes = tuple(outcomes)
        self.artificial = artificial
        if self.cost <= 0 and not artificial:
            raise ModelError("action %s: cost must be positive" % id)
        if self.cost < 0:
            raise ModelError("action %s: negative cost" % id)
        total = sum(o.probability for o in self.outcomes)
        if abs(total - 1.0) > 1e-9:
            raise ModelError(
                "action %s: outcome probabilities sum to %r, expected 1" % (id, total))
        self.pre_net_pos, self.pre_net_neg = literal_masks(self.pre_net)
        self.pre_att_pos, self.pre_att_neg = literal_masks(self.pre_att)

    def __repr__(self):
        return "AttackerAction(%s)" % self.id


class FixAction:
    """Deterministic, positively priced network-state transformer."""

    __slots__ = ("id", "pre", "post", "cost",
                 "pre_pos", "pre_neg", "add_mask", "del_mask")

    def __init__(self, id, pre, post, cost):
        self.id = id
        self.pre = tuple(pre)
        self.post = tuple(post)
        self.cost = float(cost)
        if self.cost <= 0:
            raise ModelError("fix %s: cost must be positive" % id)
        self.pre_pos, self.pre_neg = literal_masks(self.pre)
        add = rem = 0
        for lit in self.post:
            if lit.negated:
                rem |= lit.proposition.mask
            else:
                add |= lit.proposition.mask
        self.add_mask = add
        self.del_mask = rem

    def __repr__(self):
        return "FixAction(%s)" % self.id


@dataclass
class PenTestTask:
    """Attacker-side task: actions, initial attacker state, goal, budget."""

    vocab: Vocabulary
    actions: list
    initial_attacker: AttackerState
    goal: tuple
    attacker_budget: float = INF

    goal_pos: int = field(init=False, default=0)
    goal_neg: int = field(init=False, default=0)

    def __post_init__(self):
        self.goal = tuple(self.goal)
        if self.attacker_budget < 0:
            raise ModelError("attacker budget must be non-negative")
        # the initial state's remaining budget is the task budget
        self.initial_attacker = AttackerState(self.initial_attacker.mask,
                                              self.attacker_budget)
        self.goal_pos, self.goal_neg = literal_masks(self.goal)
        ids = [a.id for a in self.actions]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate attacker action ids")

    def action_by_id(self, action_id):
        for a in self.actions:
            if a.id == action_id:
                return a
        raise KeyError(action_id)


@dataclass
class MitigationTask:
    """Defender-side task wrapping a pentest task."""

    pentest: PenTestTask
    initial_network: NetworkState
    fixes: list
    mitigation_budget: float = INF

    def __post_init__(self):
        if self.mitigation_budget <= 0:
            raise ModelError("mitigation budget must be positive")
        ids = [f.id for f in self.fixes]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate fix ids")

    def fix_by_id(self, fix_id):
        for f in self.fixes:
            if f.id == fix_id:
                return f
        raise KeyError(fix_id)


@dataclass(frozen=True)
class MitigationStrategy:
    """An ordered fix sequence with its summed application cost."""

    fixes: tuple
    cost: float

    @classmethod
    def of(cls, fix_actions):
        fix_actions = tuple(fix_actions)
        return cls(tuple(f.id for f in fix_actions),
                   math.fsum(f.cost for f in fix_actions))

    @classmethod
    def empty(cls):
        return cls((), 0.0)


# --- transition semantics -------------------------------------------------

def action_applicable(net, att, action):
    """True iff both preconditions hold and the budget covers the cost."""
    return (mask_satisfies(net.mask, action.pre_net_pos, action.pre_net_neg)
            and mask_satisfies(att.mask, action.pre_att_pos, action.pre_att_neg)
            and att.remaining_budget >= action.cost - EPS)


def apply_outcome(att, action, outcome):
    """Apply one outcome of ``action`` to the attacker state.

    The caller is responsible for applicability; spending past the budget is
    a contract violation.
    """
    if att.remaining_budget < action.cost - EPS:
        raise ModelError("budget underflow applying %s" % action.id)
    remaining = att.remaining_budget - action.cost
    if remaining != INF and remaining < 0:
        remaining = 0.0
    return AttackerState(apply_masks(att.mask, outcome.add_mask, outcome.del_mask),
                         remaining)


def goal_satisfied(att, goal):
    p, n = literal_masks(goal)
    return mask_satisfies(att.mask, p, n)


def fix_applicable(net, fix):
    return mask_satisfies(net.mask, fix.pre_pos, fix.pre_neg)


def app_set(net, fixes):
    """Applicable fixes, in input-list order."""
    return [f for f in fixes if fix_applicable(net, f)]


def apply_fix(net, fix):
    if not fix_applicable(net, fix):
        raise ModelError("fix %s not applicable" % fix.id)
    return NetworkState(apply_masks(net.mask, fix.add_mask, fix.del_mask))


def apply_strategy(net, fixes):
    """Left fold of apply_fix over a fix-action sequence."""
    state = net
    for i, f in enumerate(fixes):
        if not fix_applicable(state, f):
            raise ModelError("strategy step %d (%s) not applicable" % (i, f.id))
        state = apply_fix(state, f)
    return state
