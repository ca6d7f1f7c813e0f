"""Differentiable relaxation and gradient-based planning."""
from .graph import GraphBuilder, RelaxedGraph
from .planner import (
    MPCResult, PlanParameters, PlanResult, execute_plan, plan_mpc, plan_slp,
)
from .relax import MEAN, REPARAM, RelaxedModel, RolloutGraph
from .tnorm import GODEL, PRODUCT, TNorm, get_tnorm, register_tnorm

__all__ = ["GraphBuilder", "RelaxedGraph", "MPCResult", "PlanParameters",
           "PlanResult", "execute_plan", "plan_mpc", "plan_slp", "MEAN", "REPARAM",
           "RelaxedModel", "RolloutGraph", "GODEL", "PRODUCT", "TNorm", "get_tnorm",
           "register_tnorm"]
