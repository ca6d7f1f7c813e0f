"""Differentiable relaxation of a grounded model into rollout graphs.

Boolean values become reals in [0, 1]:

* ``a & b`` is ``T(a, b)``, ``~a`` is ``1 - a`` and ``a | b`` is
  ``1 - T(1 - a, 1 - b)``; ``forall`` nests ``T`` to the right.
* ``a > b`` and ``a >= b`` become ``sigmoid((a - b) / tau)``, ``==`` becomes
  ``sech^2((b - a) / tau)``.
* ``if c then a else b`` becomes ``c * a + (1 - c) * b``.

Random draws are replaced by their mean, or under ``noise="reparam"`` by a
location-scale transform of noise that is fixed for one rollout.
Termination is relaxed into a survival factor that multiplies later rewards.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..engine import distributions as D
from ..errors import RelaxationError
from ..model import (
    OBSERV, ArgExtreme, Binary, Call, Const, Dist, DynamicRef, EnumShift, Expr,
    GroundDiscrete, GroundMatrix, GroundVectorDist, If, Member, Nary, Unary, Var,
)
from ..scheduler import schedule
from .graph import GraphBuilder, RelaxedGraph
from .tnorm import TNorm, get_tnorm

MEAN = "mean"
REPARAM = "reparam"
_UNARY = {"abs", "sgn", "round", "floor", "ceil", "sqrt", "exp", "ln", "sin",
          "cos", "tan"}
MAX_DET_SIZE = 6


@dataclass
class RolloutGraph:
    """A relaxed rollout of fixed length.

    Input layout: initial state (``state_keys`` order), then the actions of
    every step in row-major ``(step, action)`` order, then noise slots.
    """
    graph: RelaxedGraph
    horizon: int
    state_keys: Tuple[str, ...]
    action_keys: Tuple[str, ...]
    noise_kinds: Tuple[str, ...]

    @property
    def n_actions(self) -> int:
        return self.horizon * len(self.action_keys)

    def pack(self, state: Sequence[float], actions: np.ndarray,
             noise: Sequence[float] = ()) -> List[float]:
        return list(state) + np.asarray(actions, dtype=float).ravel().tolist() + list(noise)

    def draw_noise(self, rng) -> List[float]:
        out = []
        for kind in self.noise_kinds:
            if kind == "normal":
                out.append(D.standard_normal(rng))
            elif kind == "uniform":
                out.append(rng.uniform())
            else:
                out.append(D.exponential(rng, 1.0))
        return out

    def objective(self, state, actions, noise=()) -> float:
        return self.graph.forward(self.pack(state, actions, noise))

    def value_and_grad(self, state, actions, noise=()) -> Tuple[float, np.ndarray]:
        """Objective and its gradient with respect to the action tensor."""
        value, grad = self.graph.value_and_grad(self.pack(state, actions, noise))
        s = len(self.state_keys)
        return value, grad[s:s + self.n_actions].reshape(self.horizon,
                                                         len(self.action_keys))


class RelaxedModel:
    """Relaxation settings bound to a grounded model; builds rollout graphs."""

    def __init__(self, grounded, tnorm="product", tau: float = 0.1,
                 noise: str = MEAN) -> None:
        if not tau > 0.0:
            raise RelaxationError(f"temperature must be positive, got {tau}")
        if noise not in (MEAN, REPARAM):
            raise RelaxationError(f"unknown noise policy {noise!r}")
        self.model = grounded
        self.tnorm: TNorm = get_tnorm(tnorm)
        self.tau = float(tau)
        self.noise = noise
        self.order = [k for k in schedule(grounded)
                      if grounded.cpf_class(k) != OBSERV]
        self.state_keys = tuple(grounded.states)
        self.action_keys = tuple(grounded.actions)
        self._graphs: Dict[int, RolloutGraph] = {}
        self.rollout(1)   # surface relaxation errors at construction

    def state_vector(self, state) -> List[float]:
        out = []
        for k in self.state_keys:
            v = state[k]
            if isinstance(v, Member):
                raise RelaxationError(f"enum-valued state {k} cannot be relaxed")
            out.append(float(v))
        return out

    def rollout(self, horizon: int) -> RolloutGraph:
        if horizon < 1:
            raise RelaxationError("rollout length must be at least 1")
        g = self._graphs.get(horizon)
        if g is None:
            g = self._graphs[horizon] = _Builder(self).build(horizon)
        return g


class _Builder:

    def __init__(self, rm: RelaxedModel) -> None:
        self.rm = rm
        self.b = GraphBuilder()
        self.noise_kinds: List[str] = []

    def build(self, horizon: int) -> RolloutGraph:
        rm, b, model = self.rm, self.b, self.rm.model
        state = {k: b.input(f"state {k}") for k in rm.state_keys}
        actions = [{k: b.input(f"step {t} action {k}") for k in rm.action_keys}
                   for t in range(horizon)]
        objective = alive = None
        for t in range(horizon):
            env = dict(state)
            env.update(actions[t])
            for key in rm.order:
                b.label = f"step {t}, {key}"
                env[key] = self.relax(model.cpfs[key], env)
            b.label = f"step {t}, reward"
            r = self.relax(model.reward, env)
            if alive is not None:
                r = b.op("mul", alive, r)
            if model.discount != 1.0:
                r = b.op("mul", b.const(model.discount ** t), r)
            objective = r if objective is None else b.op("add", objective, r)
            state = {k: env[k + "'"] for k in rm.state_keys}
            if model.termination and t + 1 < horizon:
                b.label = f"step {t}, termination"
                ended = self.any_of([self.relax(c, state) for c in model.termination])
                keep = b.op("one_minus", ended)
                alive = keep if alive is None else b.op("mul", alive, keep)
        graph = b.build(objective)
        return RolloutGraph(graph, horizon, rm.state_keys, rm.action_keys,
                            tuple(self.noise_kinds))

    # -- connectives --------------------------------------------------------

    def all_of(self, xs: List[int]) -> int:
        if not xs:
            return self.b.const(1.0)
        acc = xs[-1]
        for x in reversed(xs[:-1]):
            acc = self.b.tnorm(self.rm.tnorm, x, acc)
        return acc

    def any_of(self, xs: List[int]) -> int:
        b = self.b
        if not xs:
            return b.const(0.0)
        return b.op("one_minus", self.all_of([b.op("one_minus", x) for x in xs]))

    def implies(self, a: int, c: int) -> int:
        b = self.b
        return b.op("one_minus", b.tnorm(self.rm.tnorm, a, b.op("one_minus", c)))

    def _scaled(self, diff: int) -> int:
        return self.b.op("div", diff, self.b.const(self.rm.tau))

    # -- expressions --------------------------------------------------------

    def relax(self, e: Expr, env: Dict[str, int]) -> int:
        b = self.b
        if isinstance(e, Const):
            if isinstance(e.value, Member):
                raise RelaxationError(f"enum value {e.value} cannot be relaxed", e.loc)
            return b.const(float(e.value))
        if isinstance(e, Var):
            if e.key not in env:
                raise RelaxationError(f"{e.key} is not available to the relaxed "
                                      "rollout", e.loc)
            return env[e.key]
        if isinstance(e, Unary):
            a = self.relax(e.arg, env)
            return b.op("one_minus" if e.op == "~" else "neg", a)
        if isinstance(e, Binary):
            return self._binary(e, env)
        if isinstance(e, Call):
            args = [self.relax(a, env) for a in e.args]
            if e.func in _UNARY:
                return b.op(e.func, *args)
            if e.func in ("pow", "min", "max"):
                return b.op(e.func, *args)
            raise RelaxationError(f"function {e.func} cannot be relaxed", e.loc)
        if isinstance(e, If):
            c = self.relax(e.cond, env)
            return b.op("ite", c, self.relax(e.then, env), self.relax(e.else_, env))
        if isinstance(e, Nary):
            xs = [self.relax(a, env) for a in e.args]
            if e.op == "&":
                return self.all_of(xs)
            if e.op == "|":
                return self.any_of(xs)
            if not xs:
                return b.const(0.0 if e.op == "+" else 1.0)
            fn = {"+": "add", "*": "mul", "min": "min", "max": "max", "avg": "add"}[e.op]
            acc = xs[0]
            for x in xs[1:]:
                acc = b.op(fn, acc, x)
            if e.op == "avg":
                acc = b.op("div", acc, b.const(float(len(xs))))
            return acc
        if isinstance(e, Dist):
            return self._dist(e, env)
        if isinstance(e, GroundVectorDist):
            return self._vector(e, env)
        if isinstance(e, GroundMatrix):
            if e.op != "det":
                raise RelaxationError("matrix inverse cannot be relaxed", e.loc)
            if len(e.matrix) > MAX_DET_SIZE:
                raise RelaxationError(f"det of a {len(e.matrix)}x{len(e.matrix)} "
                                      f"matrix exceeds the relaxable size "
                                      f"{MAX_DET_SIZE}", e.loc)
            cells = [[self.relax(x, env) for x in row] for row in e.matrix]
            return self._det(cells)
        if isinstance(e, ArgExtreme):
            raise RelaxationError(f"{e.op} over an enum type cannot be relaxed", e.loc)
        if isinstance(e, EnumShift):
            raise RelaxationError("next/prev over an enum type cannot be relaxed", e.loc)
        if isinstance(e, GroundDiscrete):
            raise RelaxationError("enum-valued Discrete draw cannot be relaxed", e.loc)
        if isinstance(e, DynamicRef):
            raise RelaxationError(f"nested indexing into {e.name} cannot be relaxed",
                                  e.loc)
        raise RelaxationError(f"{type(e).__name__} node cannot be relaxed",
                              getattr(e, "loc", None))

    def _binary(self, e: Binary, env) -> int:
        b, op = self.b, e.op
        x, y = self.relax(e.left, env), self.relax(e.right, env)
        arith = {"+": "add", "-": "sub", "*": "mul", "/": "div"}
        if op in arith:
            return b.op(arith[op], x, y)
        if op in (">", ">="):
            return b.op("sigmoid", self._scaled(b.op("sub", x, y)))
        if op in ("<", "<="):
            return b.op("sigmoid", self._scaled(b.op("sub", y, x)))
        if op == "==":
            return b.op("sech2", self._scaled(b.op("sub", y, x)))
        if op == "~=":
            return b.op("one_minus", b.op("sech2", self._scaled(b.op("sub", y, x))))
        if op in ("&", "^"):
            return b.tnorm(self.rm.tnorm, x, y)
        if op == "|":
            return self.any_of([x, y])
        if op == "=>":
            return self.implies(x, y)
        if op == "<=>":
            return b.tnorm(self.rm.tnorm, self.implies(x, y), self.implies(y, x))
        raise RelaxationError(f"operator {op} cannot be relaxed", e.loc)

    def _noise(self, kind: str) -> int:
        self.noise_kinds.append(kind)
        return self.b.input(f"noise {len(self.noise_kinds) - 1} ({kind})")

    def _dist(self, e: Dist, env) -> int:
        b, fam = self.b, e.family
        args = [self.relax(a, env) for a in e.args]
        reparam = self.rm.noise == REPARAM
        if fam in ("KronDelta", "DiracDelta", "Bernoulli", "Poisson"):
            return args[0]
        if fam == "Normal":
            if reparam:
                return b.op("add", args[0], b.op("mul", b.op("sqrt", args[1]),
                                                 self._noise("normal")))
            return args[0]
        if fam == "Uniform":
            if reparam:
                width = b.op("sub", args[1], args[0])
                return b.op("add", args[0], b.op("mul", width, self._noise("uniform")))
            return b.op("mul", b.const(0.5), b.op("add", args[0], args[1]))
        if fam == "Exponential":
            if reparam:
                return b.op("mul", args[0], self._noise("exponential"))
            return args[0]
        if fam in ("Gamma", "Binomial"):
            return b.op("mul", args[0], args[1])
        if fam == "Beta":
            return b.op("div", args[0], b.op("add", args[0], args[1]))
        if fam == "Student":
            return b.const(0.0)
        raise RelaxationError(f"{fam} draw cannot be relaxed", e.loc)

    def _vector(self, e: GroundVectorDist, env) -> int:
        b, k = self.b, e.component
        if e.family == "MultivariateNormal":
            return self.relax(e.vectors[0][k], env)
        if e.family == "Dirichlet":
            alpha = [self.relax(a, env) for a in e.vectors[0]]
            total = alpha[0]
            for a in alpha[1:]:
                total = b.op("add", total, a)
            return b.op("div", alpha[k], total)
        trials = self.relax(e.vectors[0], env)
        return b.op("mul", trials, self.relax(e.vectors[1][k], env))

    def _det(self, cells) -> int:
        b = self.b
        n = len(cells)
        if n == 1:
            return cells[0][0]
        acc = None
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for row in cells[1:]]
            term = b.op("mul", cells[0][j], self._det(minor))
            if acc is None:
                acc = term
            else:
                acc = b.op("add" if j % 2 == 0 else "sub", acc, term)
        return acc
