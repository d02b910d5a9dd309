"""Network attack-path planning and Pareto-optimal mitigation search."""

from .model import (
    EPS, INF,
    AttackerAction, AttackerState, FixAction, Literal, MitigationStrategy,
    MitigationTask, ModelError, NetworkState, Outcome, PenTestTask,
    Proposition, Vocabulary,
    neg, pos,
    action_applicable, apply_fix, apply_outcome, apply_strategy, app_set,
    fix_applicable, goal_satisfied,
)
from .planner import (
    AttackPlan, AttackPlanner, DetAction,
    critical_attack_path, determinize, min_attack_budget, p_star,
    plan_still_valid,
)
from .mitigation import (
    FrontierEntry, FrontierResult, ParetoSearch, SearchOptions, SearchStats,
    dominates, frontier_insert, min_mitigation_budget, pareto_frontier,
)
from .modelio import ModelLoadError, load_model
from .scengen import GenParams, generate_files, generate_task

__all__ = [name for name in dir() if not name.startswith("_")]
