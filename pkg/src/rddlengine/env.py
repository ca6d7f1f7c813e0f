"""Episodic environment over a grounded model.

A step runs four phases: action checking and default filling, evaluation
of every CPF in the cached dependency order, reward, then state invariants
and the termination block on the new state.  The valuation passed to the
compiled expressions is a flat dict; next-state entries carry a prime.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional

from .engine.evaluator import EvalContext, compile_expr
from .engine.rng import RandomSource
from .errors import (
    ActionError, EpisodeStateError, EvaluationError, PreconditionViolation,
    GroundingError, StateInvariantViolation, ValidationError,
)
from .grounder import GroundedModel, ground
from .model import (
    ACTION, DERIVED, INTERM, INT_MAX, INT_MIN, OBSERV, STATE, Member,
    format_value,
)
from .parser import parse
from .scheduler import references, schedule
from .spaces import SpaceDescriptor, space_for
from .validation import has_errors, validate

HORIZON = "horizon"
TERMINATION = "termination-block"
INVARIANT = "invariant-violation"


@dataclass
class StepOutcome:
    observation: Dict[str, object]
    reward: float
    done: bool
    info: Dict[str, object] = field(default_factory=dict)

    def __iter__(self):
        return iter((self.observation, self.reward, self.done, self.info))


# ---------------------------------------------------------------------------
# value coercion


def _coercer(prange: str, key: str):
    def as_real(v):
        if isinstance(v, bool):
            return 1.0 if v else 0.0
        if isinstance(v, (int, float)):
            v = float(v)
            if math.isfinite(v):
                return v
            raise EvaluationError(f"{key} received non-finite value {v}")
        raise EvaluationError(f"{key} expects a real value, got {v!r}")

    def as_int(v):
        if isinstance(v, bool):
            return int(v)
        if isinstance(v, int):
            if INT_MIN <= v <= INT_MAX:
                return v
            raise EvaluationError(f"{key} received out-of-range integer {v}")
        raise EvaluationError(f"{key} expects an int value, got {v!r}")

    def as_bool(v):
        if isinstance(v, bool):
            return v
        raise EvaluationError(f"{key} expects a bool value, got {v!r}")

    def as_member(v):
        if isinstance(v, Member) and v.type_name == prange:
            return v
        raise EvaluationError(f"{key} expects a {prange} value, got {v!r}")

    return {"real": as_real, "int": as_int, "bool": as_bool}.get(prange, as_member)


def _action_value(prange: str, value, members):
    """Interpret a user-supplied action value; None if it has the wrong type."""
    if hasattr(value, "item") and not isinstance(value, (bool, int, float)):
        value = value.item()   # numpy scalars
    if prange == "bool":
        if isinstance(value, bool):
            return value
        if isinstance(value, int) and value in (0, 1):
            return bool(value)
        return None
    if prange == "int":
        if isinstance(value, bool):
            return int(value)
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
        return None
    if prange == "real":
        if isinstance(value, (int, float)) and not isinstance(value, bool) \
                and math.isfinite(value):
            return float(value)
        return None
    if isinstance(value, Member):
        return value if value in members else None
    if isinstance(value, str):
        name = value[1:] if value.startswith("@") else value
        return next((m for m in members if m.name == name), None)
    return None


class _Compiled:
    """Closures for every expression of a grounded model."""

    def __init__(self, model: GroundedModel) -> None:
        order = schedule(model)
        self.cpfs = [(k, compile_expr(model.cpfs[k]), _coercer(model.range_of(k), k))
                     for k in order]
        self.reward = compile_expr(model.reward)
        self.preconditions = [compile_expr(e) for e in model.preconditions]
        self.invariants = [compile_expr(e) for e in model.invariants]
        self.termination = [compile_expr(e) for e in model.termination]


# ---------------------------------------------------------------------------


class Environment:
    """Agent-facing simulator for one grounded instance."""

    def __init__(self, model: GroundedModel, seed: int = 0,
                 enforce_preconditions: bool = False,
                 visualizer: Optional[Callable[["Environment"], object]] = None) -> None:
        self.model = model
        self.order = schedule(model)
        self.enforce_preconditions = enforce_preconditions
        self.visualizer = visualizer
        self.rng = RandomSource(seed)
        self._ctx = EvalContext(self.rng)
        self._fns = _Compiled(model)
        self._states = model.states
        self._actions = model.actions
        self._observs = model.observations
        self._defaults = model.action_defaults()
        self._base = dict(model.non_fluent_values)
        self._pre_refs = [references(e) for e in model.preconditions]
        self._action_space = SpaceDescriptor(
            (k, space_for(model.range_of(k), model.bounds.get(k),
                          model.type_members.get(model.range_of(k))))
            for k in self._actions)
        visible = self._observs if model.is_pomdp else self._states
        self._observation_space = SpaceDescriptor(
            (k, space_for(model.range_of(k), None,
                          model.type_members.get(model.range_of(k))))
            for k in visible)
        self.reset()

    # -- construction -----------------------------------------------------

    @classmethod
    def from_sources(cls, domain_source: str, instance_source: str = "", *,
                     seed: int = 0, enforce_preconditions: bool = False,
                     instance: Optional[str] = None, domain_name: Optional[str] = None,
                     instance_name: Optional[str] = None) -> "Environment":
        doc = parse(domain_source, domain_name)
        if instance_source:
            doc = doc.merge(parse(instance_source, instance_name))
        if doc.domain is None:
            raise GroundingError("no domain block supplied")
        inst = doc.instance(instance)
        diagnostics = validate(doc.domain, inst)
        if has_errors(diagnostics):
            raise ValidationError(diagnostics)
        env = cls(ground(doc.domain, inst), seed=seed,
                  enforce_preconditions=enforce_preconditions)
        env.diagnostics = list(doc.diagnostics) + diagnostics
        return env

    @classmethod
    def from_files(cls, domain_path, instance_path=None, **kwargs) -> "Environment":
        domain_path = Path(domain_path)
        inst_text = Path(instance_path).read_text(encoding="utf-8") if instance_path \
            else ""
        return cls.from_sources(domain_path.read_text(encoding="utf-8"), inst_text,
                                domain_name=str(domain_path),
                                instance_name=str(instance_path) if instance_path
                                else None, **kwargs)

    # -- properties -------------------------------------------------------

    @property
    def horizon(self) -> int:
        return self.model.horizon

    @property
    def discount(self) -> float:
        return self.model.discount

    @property
    def num_concurrent_actions(self) -> int:
        if self.model.max_nondef_actions is None:
            return len(self._actions)
        return self.model.max_nondef_actions

    @property
    def action_space(self) -> SpaceDescriptor:
        return self._action_space

    @property
    def observation_space(self) -> SpaceDescriptor:
        return self._observation_space

    @property
    def is_pomdp(self) -> bool:
        return self.model.is_pomdp

    @property
    def done(self) -> bool:
        return self._done

    def seed(self, seed: int) -> None:
        self.rng = RandomSource(seed)
        self._ctx = EvalContext(self.rng)

    # -- episode ----------------------------------------------------------

    def reset(self) -> Dict[str, object]:
        self.state = dict(self.model.init_state)
        self.t = 0
        self._done = False
        self._poisoned = False
        self.last_observation: Dict[str, object]
        post = dict(self._base)
        post.update(self.state)
        self._check_invariants(post, {"t": 0})
        if self.is_pomdp:
            self.last_observation = {k: None for k in self._observs}
        else:
            self.last_observation = dict(self.state)
        return dict(self.last_observation)

    def _check_invariants(self, values, info) -> None:
        for i, fn in enumerate(self._fns.invariants):
            if not _run(fn, values, self._ctx):
                self._poisoned = True
                info["reason"] = INVARIANT
                err = StateInvariantViolation(f"state invariant {i} violated",
                                              self.model.invariants[i].loc)
                err.info = info
                raise err

    def _prepare_actions(self, actions: Mapping, info) -> Dict[str, object]:
        unknown = sorted(k for k in actions if k not in self._defaults)
        if unknown:
            raise ActionError(f"unknown action fluent(s): {', '.join(unknown)}")
        if self.model.max_nondef_actions is not None \
                and len(actions) > self.model.max_nondef_actions:
            raise ActionError(f"{len(actions)} actions supplied, at most "
                              f"{self.model.max_nondef_actions} allowed")
        warnings: List[str] = info["warnings"]
        applied = dict(self._defaults)
        for k, raw in actions.items():
            prange = self.model.range_of(k)
            value = _action_value(prange, raw, self.model.type_members.get(prange, ()))
            if value is None:
                raise ActionError(f"{k} expects a {prange} value, got {raw!r}")
            lo, hi = self.model.bounds.get(k, (-math.inf, math.inf))
            if not isinstance(value, Member) and not lo <= value <= hi:
                message = f"{k} = {value} outside bounds [{lo}, {hi}]"
                if self.enforce_preconditions:
                    raise PreconditionViolation(message)
                warnings.append(message + "; default used")
                continue
            applied[k] = value
        values = dict(self._base)
        values.update(self.state)
        values.update(applied)
        for i, fn in enumerate(self._fns.preconditions):
            if _run(fn, values, self._ctx):
                continue
            loc = self.model.preconditions[i].loc
            if self.enforce_preconditions:
                raise PreconditionViolation(f"action precondition {i} violated", loc)
            offending = sorted(k for k in self._pre_refs[i] if k in actions)
            for k in offending:
                applied[k] = values[k] = self._defaults[k]
            warnings.append(f"action precondition {i} violated; default used for "
                            + (", ".join(offending) or "no supplied action"))
        if any(not _run(fn, values, self._ctx) for fn in self._fns.preconditions):
            applied = dict(self._defaults)
            warnings.append("actions still violate preconditions; all defaults used")
        return applied

    def step(self, actions: Optional[Mapping] = None) -> StepOutcome:
        if self._poisoned:
            raise EpisodeStateError("episode ended by a state invariant violation; "
                                    "call reset()")
        if self._done:
            raise EpisodeStateError("episode is done; call reset()")
        info: Dict[str, object] = {"t": self.t, "warnings": []}
        applied = self._prepare_actions(actions or {}, info)
        ctx = self._ctx
        ctx.new_pass()
        values = dict(self._base)
        values.update(self.state)
        values.update(applied)
        for key, fn, coerce in self._fns.cpfs:
            values[key] = coerce(fn(values, ctx))
        reward = self._fns.reward(values, ctx)
        if isinstance(reward, Member) or not math.isfinite(reward):
            raise EvaluationError(f"reward must be a finite number, got {reward!r}",
                                  self.model.reward.loc)
        reward = float(reward)
        new_state = {s: values[s + "'"] for s in self._states}
        post = dict(self._base)
        post.update(new_state)
        self._check_invariants(post, info)
        self.state = new_state
        self.t += 1
        terminated = any([_run(fn, post, ctx) for fn in self._fns.termination])
        if terminated:
            info["reason"] = TERMINATION
        elif self.t >= self.horizon:
            info["reason"] = HORIZON
        self._done = terminated or self.t >= self.horizon
        if self.is_pomdp:
            obs = {k: values[k] for k in self._observs}
        else:
            obs = dict(new_state)
        self.last_observation = obs
        self.last_actions = applied
        if self.visualizer is not None:
            self.visualizer(self)
        return StepOutcome(dict(obs), reward, self._done, info)

    def render_text(self) -> str:
        return "\n".join(f"{k} = {format_value(self.last_observation[k])}"
                         for k in sorted(self.last_observation))

    def sample_action(self, rng: RandomSource) -> Dict[str, object]:
        """Random action mapping that respects the concurrency limit."""
        keys = list(self._actions)
        limit = self.num_concurrent_actions
        if limit < len(keys):
            chosen = []
            pool = list(keys)
            for _ in range(limit):
                chosen.append(pool.pop(rng.integers(0, len(pool) - 1)))
            keys = [k for k in self._actions if k in chosen]
        return {k: self._action_space[k].sample(rng) for k in keys}


def _run(fn, values, ctx):
    try:
        return fn(values, ctx)
    except KeyError as err:
        raise EvaluationError(f"{err.args[0]} is not available in this context") \
            from None


def make_environment(domain_source: str, instance_source: str = "", seed: int = 0,
                     enforce_preconditions: bool = False, **kwargs) -> Environment:
    return Environment.from_sources(domain_source, instance_source, seed=seed,
                                    enforce_preconditions=enforce_preconditions,
                                    **kwargs)


# ---------------------------------------------------------------------------
# trajectories


def json_value(value):
    if value is None or isinstance(value, (bool, int)):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, Member):
        return "@" + value.name
    if isinstance(value, (list, tuple)):
        return [json_value(v) for v in value]
    if isinstance(value, dict):
        return {k: json_value(v) for k, v in value.items()}
    return str(value)


def trajectory_record(t: int, actions: Mapping, outcome: StepOutcome,
                      episode: Optional[int] = None) -> Dict[str, object]:
    record: Dict[str, object] = {}
    if episode is not None:
        record["episode"] = episode
    record.update(t=t, actions=json_value(dict(actions)),
                  observation=json_value(outcome.observation),
                  reward=outcome.reward, done=outcome.done,
                  info=json_value({k: v for k, v in outcome.info.items() if k != "t"}))
    return record


def dumps_record(record) -> str:
    return json.dumps(record, separators=(",", ":"))


Policy = Callable[[Dict[str, object], Environment], Mapping]


def run_episode(env: Environment, policy: Policy, episode: Optional[int] = None):
    """Roll out one episode; returns (records, total reward)."""
    obs = env.reset()
    records, total = [], 0.0
    while not env.done:
        t = env.t
        actions = policy(obs, env)
        outcome = env.step(actions)
        records.append(trajectory_record(t, env.last_actions, outcome, episode))
        total += outcome.reward
        obs = outcome.observation
    return records, total


__all__ = ["Environment", "StepOutcome", "make_environment", "run_episode",
           "trajectory_record", "dumps_record", "json_value", "ACTION", "STATE",
           "OBSERV", "INTERM", "DERIVED"]
