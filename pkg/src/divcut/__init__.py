"""One-dimensional cutting stock with divisible (weldable) items."""

from .model import (
    CuttingPlan,
    Division,
    Instance,
    InstanceError,
    Item,
    Params,
    PlacedResidual,
    PlanStats,
    StockPattern,
    Violation,
    check_plan_feasibility,
    compute_stats,
    make_instance,
    plan_cost,
    validate_instance,
)
from .heuristic import solve_heuristic

__all__ = [
    "CuttingPlan",
    "Division",
    "Instance",
    "InstanceError",
    "Item",
    "Params",
    "PlacedResidual",
    "PlanStats",
    "StockPattern",
    "Violation",
    "check_plan_feasibility",
    "compute_stats",
    "make_instance",
    "plan_cost",
    "solve_heuristic",
    "validate_instance",
]
