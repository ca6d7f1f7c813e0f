"""Gradient-based open-loop planning and receding-horizon control."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..engine.rng import RandomSource
from ..env import Environment, json_value
from ..model import Member
from .relax import MEAN, RelaxedModel, RolloutGraph


@dataclass
class PlanParameters:
    horizon: Optional[int] = None   # defaults to the instance horizon
    step_size: float = 0.1
    budget: int = 500
    seed: int = 0
    tau: float = 0.1
    tnorm: str = "product"
    noise: str = MEAN
    init_noise: float = 0.0         # scale of a seeded uniform perturbation
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class PlanResult:
    actions: List[Dict[str, object]]     # executable, one mapping per step
    relaxed: np.ndarray                  # (steps, actions) decision variables
    objective: float
    objective_trace: List[float]         # best objective so far, per evaluation
    raw_trace: List[float] = field(default_factory=list)

    def to_json(self, **extra) -> str:
        data = dict(extra)
        data.update(horizon=len(self.actions), objective=self.objective,
                    objective_trace=self.objective_trace,
                    actions=[json_value(a) for a in self.actions])
        return json.dumps(data, indent=2)


def _box(model, keys):
    lo, hi = [], []
    for k in keys:
        prange = model.range_of(k)
        if prange == "bool":
            a, b = 0.0, 1.0
        elif prange in ("int", "real"):
            a, b = model.bounds.get(k, (-math.inf, math.inf))
        else:
            raise ValueError(f"enum action {k} cannot be planned for")
        lo.append(float(a))
        hi.append(float(b))
    return np.array(lo), np.array(hi)


def _default_row(model, keys, lo, hi) -> np.ndarray:
    row = []
    for k in keys:
        v = model.fluents[k].default
        row.append(float(v) if not isinstance(v, Member) else 0.0)
    return np.clip(np.array(row, dtype=float), lo, hi)


class _Problem:
    """Decision-variable bookkeeping shared by SLP and MPC."""

    def __init__(self, relaxed: RelaxedModel, params: PlanParameters) -> None:
        self.relaxed = relaxed
        self.params = params
        model = relaxed.model
        self.keys = relaxed.action_keys
        self.lo, self.hi = _box(model, self.keys)
        self.default_row = _default_row(model, self.keys, self.lo, self.hi)

    def initial(self, steps: int, rng: RandomSource) -> np.ndarray:
        x = np.tile(self.default_row, (steps, 1))
        if self.params.init_noise > 0.0:
            u = np.array([[rng.uniform() for _ in self.keys] for _ in range(steps)])
            x = x + self.params.init_noise * (2.0 * u - 1.0)
        return np.clip(x, self.lo, self.hi)

    def executable(self, x: np.ndarray) -> List[Dict[str, object]]:
        model = self.relaxed.model
        plan = []
        for row in x:
            step = {}
            for k, v, lo, hi in zip(self.keys, row, self.lo, self.hi):
                prange = model.range_of(k)
                if prange == "bool":
                    step[k] = bool(v >= 0.5)
                elif prange == "int":
                    step[k] = int(min(max(math.floor(v + 0.5), lo), hi))
                else:
                    step[k] = float(min(max(v, lo), hi))
            plan.append(step)
        return plan

    def optimize(self, rollout: RolloutGraph, state, x0: np.ndarray,
                 rng: RandomSource):
        """Projected Adam ascent; returns (best x, best value, traces)."""
        p = self.params
        x = np.clip(np.array(x0, dtype=float), self.lo, self.hi)
        m = np.zeros_like(x)
        v = np.zeros_like(x)
        reparam = bool(rollout.noise_kinds)
        fixed_noise = rollout.draw_noise(rng) if reparam else []
        best_x, best = x.copy(), -math.inf
        trace, raw = [], []
        b1, b2 = p.beta1, p.beta2
        for it in range(1, p.budget + 1):
            noise = rollout.draw_noise(rng) if reparam else fixed_noise
            value, grad = rollout.value_and_grad(state, x, noise)
            if value > best:
                best, best_x = value, x.copy()
            raw.append(value)
            trace.append(best)
            m = b1 * m + (1.0 - b1) * grad
            v = b2 * v + (1.0 - b2) * grad * grad
            mhat = m / (1.0 - b1 ** it)
            vhat = v / (1.0 - b2 ** it)
            x = np.clip(x + p.step_size * mhat / (np.sqrt(vhat) + p.eps), self.lo, self.hi)
        value = rollout.objective(state, x, fixed_noise)
        raw.append(value)
        if value > best:
            best, best_x = value, x.copy()
        trace.append(best)
        return best_x, best, trace, raw


def plan_slp(grounded, params: Optional[PlanParameters] = None, *,
             state: Optional[Dict[str, object]] = None,
             relaxed: Optional[RelaxedModel] = None,
             init: Optional[np.ndarray] = None) -> PlanResult:
    """Optimise one open-loop action sequence over the planning horizon.

    With ``budget=0`` the initial plan is returned unchanged.
    """
    params = params or PlanParameters()
    relaxed = relaxed or RelaxedModel(grounded, params.tnorm, params.tau, params.noise)
    steps = params.horizon or grounded.horizon
    if steps < 1:
        raise ValueError("planning horizon must be at least 1")
    problem = _Problem(relaxed, params)
    rng = RandomSource(params.seed)
    x0 = problem.initial(steps, rng) if init is None else np.array(init, dtype=float)
    s0 = relaxed.state_vector(state if state is not None else grounded.init_state)
    rollout = relaxed.rollout(steps)
    x, best, trace, raw = problem.optimize(rollout, s0, x0, rng)
    return PlanResult(problem.executable(x), x, best, trace, raw)


@dataclass
class MPCResult:
    actions: List[Dict[str, object]]
    rewards: List[float]
    planned_objectives: List[float]
    records: List[Dict[str, object]] = field(default_factory=list)

    @property
    def total_return(self) -> float:
        return float(sum(self.rewards))


def plan_mpc(env: Environment, lookahead: int,
             params: Optional[PlanParameters] = None, *,
             relaxed: Optional[RelaxedModel] = None, reset: bool = True,
             log=None) -> MPCResult:
    """Replan from the true state every step and execute the first action.

    The lookahead is truncated near the end of the horizon, and each replan
    is warm-started from the previous solution shifted by one step.
    """
    from ..env import trajectory_record
    if lookahead < 1:
        raise ValueError("lookahead must be at least 1")
    params = params or PlanParameters()
    model = env.model
    relaxed = relaxed or RelaxedModel(model, params.tnorm, params.tau, params.noise)
    problem = _Problem(relaxed, params)
    rng = RandomSource(params.seed)
    if reset:
        env.reset()
    result = MPCResult([], [], [])
    x = None
    while not env.done:
        steps = min(lookahead, env.horizon - env.t)
        if x is None:
            x = problem.initial(steps, rng)
        else:
            x = np.vstack([x[1:], problem.default_row[None, :]])[:steps]
        rollout = relaxed.rollout(steps)
        x, best, _, _ = problem.optimize(rollout, relaxed.state_vector(env.state), x, rng)
        action = problem.executable(x[:1])[0]
        t = env.t
        outcome = env.step(action)
        result.actions.append(action)
        result.rewards.append(outcome.reward)
        result.planned_objectives.append(best)
        result.records.append(trajectory_record(t, env.last_actions, outcome))
        if log is not None:
            log(f"step {t}: planned objective {best:.6f}, reward {outcome.reward:.4f}")
    return result


def execute_plan(env: Environment, actions: List[Dict[str, object]],
                 reset: bool = True) -> float:
    """Run an open-loop plan in the true environment; returns the total reward."""
    if reset:
        env.reset()
    total = 0.0
    for step in actions:
        if env.done:
            break
        total += env.step(step).reward
    return total


def parameters_dict(params: PlanParameters) -> Dict[str, object]:
    return asdict(params)
