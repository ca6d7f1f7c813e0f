"""Instantiate a lifted domain against an instance.

Grounding substitutes objects for parameters, expands aggregations into
explicit n-ary nodes, folds non-fluents and other constant subtrees, and
resolves the overloaded ``^`` operator by operand type.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import EvaluationError, GroundingError, RDDLTypeError
from .model import (
    ACTION, NON_FLUENT, OBSERV, STATE, Aggregate, ArgExtreme,
    Binary, Call, Const, DiscreteDist, Dist, DynamicRef, EnumLit, EnumShift,
    Expr, FluentRef, GroundDiscrete, GroundMatrix, GroundVectorDist, If,
    InstanceModel, LiftedModel, MatrixOp, Member, Nary, ParamRef, Unary, Var,
    VectorDist, walk,
)

NUMERIC = ("int", "real")
_AGG_OPS = {"sum": "+", "prod": "*", "min": "min", "max": "max", "avg": "avg",
            "forall": "&", "exists": "|"}
_REL_FLIP = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}


def mangle(name: str, objects: Sequence[str] = ()) -> str:
    """Exposed name of a grounded fluent: ``name___o1__o2``."""
    if not objects:
        return name
    return name + "___" + "__".join(objects)


@dataclass(frozen=True)
class GroundedFluent:
    name: str
    lifted: str
    args: Tuple[str, ...]
    fluent_class: str
    range: str
    default: object = None


@dataclass
class GroundedModel:
    """A factored model over explicit per-object fluents.

    Valuation keys are grounded names; next-state keys add a trailing prime.
    ``cpfs`` maps every CPF target key to its grounded expression.
    """
    domain_name: str
    instance_name: str
    fluents: Dict[str, GroundedFluent]
    cpfs: Dict[str, Expr]
    reward: Expr
    preconditions: Tuple[Expr, ...]
    invariants: Tuple[Expr, ...]
    termination: Tuple[Expr, ...]
    bounds: Dict[str, Tuple[float, float]]
    horizon: int
    discount: float
    max_nondef_actions: Optional[int]
    init_state: Dict[str, object]
    non_fluent_values: Dict[str, object]
    type_members: Dict[str, Tuple[Member, ...]]
    warnings: List[str] = field(default_factory=list)
    order: Optional[object] = None   # EvaluationOrder, set by the scheduler

    def keys_of(self, fluent_class: str) -> List[str]:
        return [k for k, f in self.fluents.items() if f.fluent_class == fluent_class]

    @property
    def states(self) -> List[str]:
        return self.keys_of(STATE)

    @property
    def actions(self) -> List[str]:
        return self.keys_of(ACTION)

    @property
    def observations(self) -> List[str]:
        return self.keys_of(OBSERV)

    @property
    def is_pomdp(self) -> bool:
        return any(f.fluent_class == OBSERV for f in self.fluents.values())

    def range_of(self, key: str) -> str:
        return self.fluents[key.rstrip("'")].range

    def action_defaults(self) -> Dict[str, object]:
        return {k: self.fluents[k].default for k in self.actions}

    def cpf_class(self, target: str) -> str:
        return self.fluents[target.rstrip("'")].fluent_class


# ---------------------------------------------------------------------------
# static types of grounded expressions


def _promote(*kinds: str) -> str:
    return "real" if any(k == "real" for k in kinds) else "int"


def infer_type(e: Expr, range_of) -> str:
    """Static range of a grounded expression: bool, int, real or a type name.

    ``range_of`` maps a valuation key to its declared range.
    """
    if isinstance(e, Const):
        v = e.value
        if isinstance(v, bool):
            return "bool"
        if isinstance(v, int):
            return "int"
        if isinstance(v, float):
            return "real"
        return v.type_name
    if isinstance(e, Var):
        return range_of(e.key)
    if isinstance(e, Unary):
        if e.op == "~":
            return "bool"
        return _promote(infer_type(e.arg, range_of))
    if isinstance(e, Binary):
        if e.op in ("+", "-", "*"):
            return _promote(infer_type(e.left, range_of), infer_type(e.right, range_of))
        if e.op == "/":
            return "real"
        return "bool"
    if isinstance(e, Call):
        if e.func in ("round", "floor", "ceil"):
            return "int"
        if e.func in ("abs", "sgn", "min", "max"):
            return _promote(*(infer_type(a, range_of) for a in e.args))
        return "real"
    if isinstance(e, If):
        a, b = infer_type(e.then, range_of), infer_type(e.else_, range_of)
        if a == b:
            return a
        if a in NUMERIC + ("bool",) and b in NUMERIC + ("bool",):
            return _promote(a, b)
        return a
    if isinstance(e, Nary):
        if e.op in ("&", "|"):
            return "bool"
        if e.op == "avg":
            return "real"
        return _promote(*(infer_type(a, range_of) for a in e.args))
    if isinstance(e, ArgExtreme):
        return e.cases[0][0].type_name
    if isinstance(e, EnumShift):
        return e.members[0].type_name
    if isinstance(e, DynamicRef):
        return range_of(e.table[0][1])
    if isinstance(e, Dist):
        if e.family == "Bernoulli":
            return "bool"
        if e.family in ("Poisson", "Binomial"):
            return "int"
        if e.family == "KronDelta":
            return infer_type(e.args[0], range_of)
        return "real"
    if isinstance(e, GroundDiscrete):
        return e.members[0].type_name
    if isinstance(e, GroundVectorDist):
        return "int" if e.family == "Multinomial" else "real"
    if isinstance(e, GroundMatrix):
        return "real"
    raise RDDLTypeError(f"cannot type {type(e).__name__} node", getattr(e, "loc", None))


def promote_if(e: If, range_of) -> If:
    """Make both branches of a numeric conditional carry its promoted type.

    An int (or bool) branch next to a real one is widened by adding an exact
    zero, so the value of the conditional never depends on which branch ran.
    """
    target = infer_type(e, range_of)
    if target not in NUMERIC:
        return e
    zero = Const(0.0 if target == "real" else 0)
    branches = []
    for b in (e.then, e.else_):
        kind = infer_type(b, range_of)
        if kind != target and kind in NUMERIC + ("bool",):
            b = Binary("+", b, zero, b.loc)
        branches.append(b)
    return If(e.cond, branches[0], branches[1], e.loc)


def _literal_value(expr: Expr, prange: str, members: Dict[str, Dict[str, Member]],
                   where: str):
    if isinstance(expr, EnumLit):
        m = members.get(prange, {}).get(expr.name)
        if m is None:
            raise GroundingError(f"{where}: @{expr.name} is not a {prange}", expr.loc)
        return m
    if not isinstance(expr, Const):
        raise GroundingError(f"{where}: value must be a literal", expr.loc)
    v = expr.value
    if prange == "real" and isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if prange == "int" and isinstance(v, int) and not isinstance(v, bool):
        return v
    if prange == "bool" and isinstance(v, bool):
        return v
    raise RDDLTypeError(f"{where}: type mismatch, {v!r} is not a valid {prange} value",
                        expr.loc)


# ---------------------------------------------------------------------------
# the grounder


class _Grounder:

    def __init__(self, lifted: LiftedModel, instance: InstanceModel) -> None:
        self.lifted = lifted
        self.instance = instance
        self.warnings: List[str] = []
        self._sites: Dict[tuple, str] = {}
        self._build_types()
        self._build_fluents()

    # -- tables -----------------------------------------------------------

    def _build_types(self) -> None:
        declared = dict(self.instance.objects)
        self.type_members: Dict[str, Tuple[Member, ...]] = {}
        for t in self.lifted.types:
            names = t.members if t.kind == "enum" else declared.get(t.name, ())
            self.type_members[t.name] = tuple(
                Member(t.name, i, n) for i, n in enumerate(names))
        for type_name in declared:
            if type_name not in self.type_members:
                raise GroundingError(f"objects given for undeclared type {type_name!r}",
                                     self.instance.loc)
        self.members_by_name = {t: {m.name: m for m in ms}
                                for t, ms in self.type_members.items()}
        self.literals: Dict[str, List[Member]] = {}
        for ms in self.type_members.values():
            for m in ms:
                self.literals.setdefault(m.name, []).append(m)

    def _member(self, type_name: str, name: str, loc=None) -> Member:
        m = self.members_by_name.get(type_name, {}).get(name)
        if m is None:
            raise GroundingError(f"undeclared object {name!r} of type {type_name!r}", loc)
        return m

    def _build_fluents(self) -> None:
        self.fluents: Dict[str, GroundedFluent] = {}
        owner: Dict[str, Tuple[str, tuple]] = {}
        for v in self.lifted.pvariables:
            default = None
            if v.default is not None:
                default = _literal_value(v.default, v.range, self.members_by_name,
                                         f"default of {v.name}")
            pools = [self.type_members[t] for t in v.param_types]
            for combo in itertools.product(*pools):
                args = tuple(m.name for m in combo)
                key = mangle(v.name, args)
                if key in owner:
                    other = owner[key]
                    raise GroundingError(
                        f"grounded name {key!r} produced by both "
                        f"{_show(*other)} and {_show(v.name, args)}", v.loc)
                owner[key] = (v.name, args)
                self.fluents[key] = GroundedFluent(key, v.name, args, v.fluent_class,
                                                   v.range, default)
        self.non_fluent_values = {k: f.default for k, f in self.fluents.items()
                                  if f.fluent_class == NON_FLUENT}
        for a in self.instance.non_fluent_values:
            key = self._assignment_key(a, NON_FLUENT, "non-fluents")
            self.non_fluent_values[key] = _literal_value(
                a.value, self.fluents[key].range, self.members_by_name, key)
        self.init_state = {k: f.default for k, f in self.fluents.items()
                           if f.fluent_class == STATE}
        for a in self.instance.init_state:
            key = self._assignment_key(a, STATE, "init-state")
            self.init_state[key] = _literal_value(
                a.value, self.fluents[key].range, self.members_by_name, key)

    def _assignment_key(self, a, fluent_class: str, what: str) -> str:
        var = self.lifted.variables.get(a.name)
        if var is None:
            raise GroundingError(f"{what} assigns undeclared fluent {a.name!r}", a.loc)
        if var.fluent_class != fluent_class:
            raise GroundingError(f"{what} entry for {var.fluent_class} {a.name!r}; only "
                                 f"{fluent_class}s may be assigned here", a.loc)
        if len(a.args) != len(var.param_types):
            raise GroundingError(f"{a.name!r} takes {len(var.param_types)} argument(s)",
                                 a.loc)
        for arg, t in zip(a.args, var.param_types):
            self._member(t, arg, a.loc)
        return mangle(a.name, a.args)

    def range_of(self, key: str) -> str:
        return self.fluents[key.rstrip("'")].range

    # -- expressions ------------------------------------------------------

    def fold(self, e: Expr) -> Expr:
        """Replace ``e`` by a constant when all its children are constants."""
        if isinstance(e, (Const, Var, Dist, GroundDiscrete, GroundVectorDist)):
            return e
        if not all(isinstance(c, Const) for c in e.children()):
            return e
        from .engine.evaluator import evaluate
        try:
            value = evaluate(e, {}, None)
        except (EvaluationError, KeyError, TypeError):
            return e   # the error surfaces only if the branch is evaluated
        return Const(value, e.loc)

    def ground(self, e: Expr, env: Dict[str, Member]) -> Expr:
        g = self._ground(e, env)
        return self.fold(g)

    def _ground(self, e: Expr, env: Dict[str, Member]) -> Expr:
        if isinstance(e, Const):
            return e
        if isinstance(e, ParamRef):
            if e.name not in env:
                raise GroundingError(f"unbound parameter {e.name}", e.loc)
            return Const(env[e.name], e.loc)
        if isinstance(e, EnumLit):
            found = self.literals.get(e.name, [])
            if not found:
                raise GroundingError(f"@{e.name} is not a declared member or object",
                                     e.loc)
            if len(found) > 1:
                raise GroundingError(f"@{e.name} is ambiguous between types "
                                     f"{', '.join(m.type_name for m in found)}", e.loc)
            return Const(found[0], e.loc)
        if isinstance(e, FluentRef):
            return self._ground_ref(e, env)
        if isinstance(e, Unary):
            return self.fold(Unary(e.op, self.ground(e.arg, env), e.loc))
        if isinstance(e, Binary):
            return self._ground_binary(e, env)
        if isinstance(e, Call):
            args = tuple(self.ground(a, env) for a in e.args)
            if e.func in ("next", "prev"):
                return self._enum_shift(e, args[0])
            return self.fold(Call(e.func, args, e.loc))
        if isinstance(e, If):
            cond = self.ground(e.cond, env)
            if isinstance(cond, Const) and isinstance(cond.value, bool):
                return self.ground(e.then if cond.value else e.else_, env)
            return self.fold(promote_if(If(cond, self.ground(e.then, env),
                                           self.ground(e.else_, env), e.loc),
                                        self.range_of))
        if isinstance(e, Aggregate):
            return self._ground_aggregate(e, env)
        if isinstance(e, Dist):
            return Dist(e.family, tuple(self.ground(a, env) for a in e.args), e.loc)
        if isinstance(e, DiscreteDist):
            members = tuple(self._member(e.type_name, k, e.loc) for k, _ in e.cases)
            probs = tuple(self.ground(p, env) for _, p in e.cases)
            return GroundDiscrete(members, probs, e.loc)
        if isinstance(e, VectorDist):
            return self._ground_vector(e, env)
        if isinstance(e, MatrixOp):
            return self._ground_matrix(e, env)
        raise GroundingError(f"cannot ground {type(e).__name__} node",
                             getattr(e, "loc", None))

    def _ground_ref(self, e: FluentRef, env) -> Expr:
        var = self.lifted.variables.get(e.name)
        if var is None:
            raise GroundingError(f"reference to undeclared fluent {e.name!r}", e.loc)
        if len(e.args) != len(var.param_types):
            raise GroundingError(f"{e.name!r} takes {len(var.param_types)} argument(s)",
                                 e.loc)
        args = [self.ground(a, env) for a in e.args]
        suffix = "'" if e.primed else ""
        if all(isinstance(a, Const) for a in args):
            names = []
            for a, t in zip(args, var.param_types):
                m = a.value
                if not isinstance(m, Member) or m.type_name != t:
                    raise RDDLTypeError(f"argument {m!r} of {e.name!r} is not a {t}",
                                        e.loc)
                names.append(m.name)
            key = mangle(e.name, names)
            if var.fluent_class == NON_FLUENT:
                return Const(self.non_fluent_values[key], e.loc)
            return Var(key + suffix, e.loc)
        # nested indexing: the argument objects are only known at run time
        pools = [self.type_members[t] for t in var.param_types]
        table = tuple((tuple(m.name for m in combo),
                       mangle(e.name, [m.name for m in combo]) + suffix)
                      for combo in itertools.product(*pools))
        return DynamicRef(e.name, tuple(args), table, e.loc)

    def _ground_binary(self, e: Binary, env) -> Expr:
        left = self.ground(e.left, env)
        op = e.op
        if op in ("&", "|", "^", "=>"):
            # constant left operands decide Boolean connectives outright
            if isinstance(left, Const) and isinstance(left.value, bool):
                if op in ("&", "^") and not left.value:
                    return Const(False, e.loc)
                if op == "|" and left.value:
                    return Const(True, e.loc)
                if op == "=>" and not left.value:
                    return Const(True, e.loc)
        right = self.ground(e.right, env)
        if op == "^":
            kinds = (infer_type(left, self.range_of), infer_type(right, self.range_of))
            if kinds == ("bool", "bool"):
                op = "&"
            elif all(k in NUMERIC + ("bool",) for k in kinds):
                return self.fold(Call("pow", (left, right), e.loc))
            else:
                raise RDDLTypeError(f"operands of ^ have types {kinds[0]} and {kinds[1]}",
                                    e.loc)
        if op in ("&", "|") and isinstance(right, Const) and isinstance(right.value, bool):
            if (op == "&") == right.value:
                return left   # x & true, x | false
            return Const(right.value, e.loc)
        return self.fold(Binary(op, left, right, e.loc))

    def _enum_shift(self, e: Call, arg: Expr) -> Expr:
        t = infer_type(arg, self.range_of)
        members = self.type_members.get(t)
        if not members:
            raise RDDLTypeError(f"{e.func} needs an enum or object value, got {t}", e.loc)
        return self.fold(EnumShift(1 if e.func == "next" else -1, members, arg, e.loc))

    def _expand(self, params, env, loc):
        pools = []
        for p, t in params:
            if t not in self.type_members:
                raise GroundingError(f"parameter {p} has undeclared type {t!r}", loc)
            pools.append(self.type_members[t])
        for combo in itertools.product(*pools):
            inner = dict(env)
            inner.update(zip((p for p, _ in params), combo))
            yield combo, inner

    def _ground_aggregate(self, e: Aggregate, env) -> Expr:
        if e.op in ("argmax", "argmin"):
            cases = tuple((combo[0], self.ground(e.body, inner))
                          for combo, inner in self._expand(e.params, env, e.loc))
            if not cases:
                raise GroundingError(f"{e.op} over an empty type", e.loc)
            return self.fold(ArgExtreme(e.op, cases, e.loc))
        op = _AGG_OPS[e.op]
        terms = []
        for _, inner in self._expand(e.params, env, e.loc):
            t = self.ground(e.body, inner)
            if op in ("&", "|") and isinstance(t, Const):
                if t.value is (op == "|"):
                    return Const(t.value, e.loc)   # decided
                continue                           # neutral element
            terms.append(t)
        if op in ("&", "|") and not terms:
            return Const(op == "&", e.loc)
        if len(terms) == 1 and op in ("&", "|", "min", "max"):
            return terms[0]
        return self.fold(Nary(op, tuple(terms), e.loc))

    def _site(self, key: tuple) -> str:
        if key not in self._sites:
            self._sites[key] = f"{key[0]}#{len(self._sites)}"
        return self._sites[key]

    def _select(self, exprs, types, env, loc) -> List[int]:
        out = []
        for sel, t in zip(exprs, types):
            g = self.ground(sel, env)
            if not isinstance(g, Const) or not isinstance(g.value, Member) \
                    or g.value.type_name != t:
                raise GroundingError(f"component selector must be a {t} object "
                                     "known at grounding time", loc)
            out.append(g.value.index)
        return out

    def _ground_vector(self, e: VectorDist, env) -> Expr:
        fam = e.family
        if fam == "MultivariateNormal":
            if len(e.params) != 2 or e.params[0][1] != e.params[1][1] or len(e.args) != 2:
                raise GroundingError(
                    "MultivariateNormal_{?i : T, ?j : T}[mean(?i), cov(?i, ?j)] "
                    "expected", e.loc)
            (pi, t), (pj, _) = e.params
            pool = self.type_members[t]
            mean = tuple(self.ground(e.args[0], {**env, pi: m}) for m in pool)
            cov = tuple(tuple(self.ground(e.args[1], {**env, pi: a, pj: b})
                              for b in pool) for a in pool)
            vectors: tuple = (mean, cov)
        elif fam in ("Dirichlet", "Multinomial"):
            want = 1 if fam == "Dirichlet" else 2
            if len(e.params) != 1 or len(e.args) != want:
                shape = "[alpha(?i)]" if fam == "Dirichlet" else "[trials, prob(?i)]"
                raise GroundingError(f"{fam}_{{?i : T}}{shape} expected", e.loc)
            (p, t), = e.params
            pool = self.type_members[t]
            vec = tuple(self.ground(e.args[-1], {**env, p: m}) for m in pool)
            vectors = (vec,) if fam == "Dirichlet" else (self.ground(e.args[0], env), vec)
        else:
            raise GroundingError(f"unknown vector distribution {fam!r}", e.loc)
        (k,) = self._select(e.select, [e.params[0][1]], env, e.loc)
        return GroundVectorDist(fam, self._site((fam, vectors)), vectors, k, e.loc)

    def _ground_matrix(self, e: MatrixOp, env) -> Expr:
        (pr, tr), (pc, tc) = e.params
        rows, cols = self.type_members[tr], self.type_members[tc]
        if len(rows) != len(cols) or not rows:
            raise GroundingError(f"{e.op} needs a non-empty square matrix, got "
                                 f"{len(rows)}x{len(cols)}", e.loc)
        matrix = tuple(tuple(self.ground(e.body, {**env, pr: a, pc: b}) for b in cols)
                       for a in rows)
        component = None
        if e.op == "inverse":
            component = tuple(self._select(e.select, (tr, tc), env, e.loc))
        site = self._site((e.op, matrix))
        return self.fold(GroundMatrix(e.op, site, matrix, component, e.loc))

    # -- whole model ------------------------------------------------------

    def run(self) -> GroundedModel:
        lifted, inst = self.lifted, self.instance
        cpfs: Dict[str, Expr] = {}
        for cpf in lifted.cpfs:
            var = lifted.variables[cpf.name]
            params = tuple(zip(cpf.params, var.param_types))
            for combo, env in self._expand(params, {}, cpf.loc):
                key = mangle(cpf.name, [m.name for m in combo])
                cpfs[key + ("'" if cpf.primed else "")] = self.ground(cpf.expr, env)
        reward = self.ground(lifted.reward, {}) if lifted.reward is not None \
            else Const(0.0)
        pre = tuple(self.ground(x, {}) for x in lifted.preconditions)
        inv = tuple(self.ground(x, {}) for x in lifted.invariants)
        term = tuple(self.ground(x, {}) for x in lifted.termination)
        for block, exprs in (("action precondition", pre),
                             ("state invariant", inv), ("termination", term)):
            for x in exprs:
                if infer_type(x, self.range_of) != "bool":
                    raise RDDLTypeError(f"{block} must be Boolean", x.loc)
        actions = [k for k, f in self.fluents.items() if f.fluent_class == ACTION]
        bounds = extract_bounds(pre, {k: self.fluents[k].range for k in actions},
                                self.warnings)
        if inst.horizon is None or inst.horizon < 1:
            raise GroundingError("instance horizon must be a positive integer", inst.loc)
        return GroundedModel(
            domain_name=lifted.name,
            instance_name=inst.name,
            fluents=self.fluents,
            cpfs=cpfs,
            reward=reward,
            preconditions=pre,
            invariants=inv,
            termination=term,
            bounds=bounds,
            horizon=inst.horizon,
            discount=inst.discount,
            max_nondef_actions=inst.max_nondef_actions,
            init_state=self.init_state,
            non_fluent_values=self.non_fluent_values,
            type_members=self.type_members,
            warnings=self.warnings,
        )


def _show(name, args) -> str:
    return f"{name}({', '.join(args)})" if args else name


def ground(lifted: LiftedModel, instance: InstanceModel) -> GroundedModel:
    """Ground ``lifted`` for ``instance``; see :class:`GroundedModel`."""
    return _Grounder(lifted, instance).run()


# ---------------------------------------------------------------------------
# action bounds


def _conjuncts(e: Expr):
    if isinstance(e, Nary) and e.op == "&":
        for a in e.args:
            yield from _conjuncts(a)
    elif isinstance(e, Binary) and e.op == "&":
        yield from _conjuncts(e.left)
        yield from _conjuncts(e.right)
    else:
        yield e


def extract_bounds(preconditions: Sequence[Expr], action_ranges: Dict[str, str],
                   warnings: Optional[List[str]] = None) -> Dict[str, Tuple[float, float]]:
    """Box bounds for numeric actions from ``action OP bound`` preconditions.

    Strict bounds on integer actions tighten by one; real bounds are stored
    closed.  Conjunctions are searched conjunct by conjunct.  Every
    precondition stays a runtime check whether or not it yields a bound.
    """
    bounds = {k: (-math.inf, math.inf) for k, r in action_ranges.items()
              if r in NUMERIC}
    for pre in preconditions:
        for c in _conjuncts(pre):
            if not isinstance(c, Binary) or c.op not in _REL_FLIP:
                continue
            op, lhs, rhs = c.op, c.left, c.right
            if not (isinstance(lhs, Var) and lhs.key in bounds):
                if isinstance(rhs, Var) and rhs.key in bounds:
                    op, lhs, rhs = _REL_FLIP[op], rhs, lhs
                else:
                    continue
            key = lhs.key
            if not isinstance(rhs, Const) or isinstance(rhs.value, (bool, Member)):
                if warnings is not None and not any(
                        isinstance(n, Var) and n.key in action_ranges for n in walk(rhs)):
                    warnings.append(f"bound on {key} is not a constant at grounding "
                                    "time; treated as a runtime-only precondition")
                continue
            value = rhs.value
            is_int = action_ranges[key] == "int"
            if is_int:
                if op == "<":
                    value = math.ceil(value) - 1
                elif op == ">":
                    value = math.floor(value) + 1
                elif op == "<=":
                    value = math.floor(value)
                else:
                    value = math.ceil(value)
            else:
                value = float(value)
            lo, hi = bounds[key]
            if op in (">", ">="):
                lo = max(lo, value)
            else:
                hi = min(hi, value)
            if lo > hi:
                raise GroundingError(f"preconditions leave no legal value for {key} "
                                     f"(lower {lo} > upper {hi})", c.loc)
            bounds[key] = (lo, hi)
    return bounds
