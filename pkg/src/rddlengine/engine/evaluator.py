"""Evaluation of grounded expressions.

Expressions are compiled once into nested closures ``fn(values, ctx)``;
``values`` maps valuation keys (grounded names, next-state keys carry a
trailing prime) to runtime values and ``ctx`` carries the random source plus
the per-pass cache used by joint draws and matrix operations.
"""
from __future__ import annotations

import math
import operator
from typing import Callable, Dict, Mapping

from ..errors import EvaluationError, RDDLError
from ..model import (
    INT_MAX, INT_MIN, ArgExtreme, Binary, Call, Const, DynamicRef, EnumShift,
    Expr, GroundDiscrete, GroundMatrix, GroundVectorDist, If, Member, Nary,
    Unary, Var, Dist,
)
from . import distributions as D
from . import matrix as M
from .rng import RandomSource

Compiled = Callable[[Mapping, "EvalContext"], object]


class EvalContext:
    __slots__ = ("rng", "cache")

    def __init__(self, rng: RandomSource) -> None:
        self.rng = rng
        self.cache: Dict[str, object] = {}

    def new_pass(self) -> None:
        self.cache.clear()


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _checked(x, loc):
    if isinstance(x, float):
        if not math.isfinite(x):
            raise EvaluationError(f"non-finite result {x}", loc)
    elif isinstance(x, int) and not isinstance(x, bool):
        if not INT_MIN <= x <= INT_MAX:
            raise EvaluationError("integer overflow", loc)
    return x


def _arith_operand(x, loc):
    if isinstance(x, Member):
        raise EvaluationError(f"arithmetic on enum value {x}", loc)
    return x


def _need_bool(x, loc):
    if not isinstance(x, bool):
        raise EvaluationError(f"Boolean operand required, got {x!r}", loc)
    return x


_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul}
_REL = {"<": operator.lt, ">": operator.gt, "<=": operator.le,
        ">=": operator.ge, "==": operator.eq, "~=": operator.ne}


def _compile_binary(e: Binary) -> Compiled:
    lf, rf = compile_expr(e.left), compile_expr(e.right)
    op, loc = e.op, e.loc
    if op in _ARITH:
        fn = _ARITH[op]

        def arith(v, c):
            a = _arith_operand(lf(v, c), loc)
            b = _arith_operand(rf(v, c), loc)
            r = fn(a, b)
            if isinstance(r, float):
                if not math.isfinite(r):
                    raise EvaluationError(f"non-finite result of {op}", loc)
            elif not INT_MIN <= r <= INT_MAX:
                raise EvaluationError("integer overflow", loc)
            return r
        return arith
    if op == "/":
        def div(v, c):
            a = _arith_operand(lf(v, c), loc)
            b = _arith_operand(rf(v, c), loc)
            if b == 0:
                raise EvaluationError("division by zero", loc)
            try:
                r = a / b
            except OverflowError:
                raise EvaluationError("overflow in division", loc) from None
            if not math.isfinite(r):
                raise EvaluationError("non-finite result of /", loc)
            return r
        return div
    if op in _REL:
        fn = _REL[op]
        if op in ("==", "~="):
            return lambda v, c: fn(lf(v, c), rf(v, c))

        def rel(v, c):
            a, b = lf(v, c), rf(v, c)
            if isinstance(a, Member) != isinstance(b, Member):
                raise EvaluationError("cannot order an enum value against a number",
                                      loc)
            return fn(a, b)
        return rel
    if op in ("&", "^"):
        return lambda v, c: _need_bool(lf(v, c), loc) & _need_bool(rf(v, c), loc)
    if op == "|":
        return lambda v, c: _need_bool(lf(v, c), loc) | _need_bool(rf(v, c), loc)
    if op == "=>":
        return lambda v, c: (not _need_bool(lf(v, c), loc)) | _need_bool(rf(v, c), loc)
    if op == "<=>":
        return lambda v, c: _need_bool(lf(v, c), loc) == _need_bool(rf(v, c), loc)
    raise EvaluationError(f"unknown operator {op!r}", loc)


def _real_fn(name, fn, domain_ok=None, message=""):
    def apply(x, loc):
        x = _arith_operand(x, loc)
        if domain_ok is not None and not domain_ok(x):
            raise EvaluationError(f"{name} {message} (argument {x})", loc)
        try:
            r = fn(x)
        except (OverflowError, ValueError):
            raise EvaluationError(f"{name} failed for argument {x}", loc) from None
        return _checked(r, loc)
    return apply


def _sgn(x):
    s = (x > 0) - (x < 0)
    return float(s) if isinstance(x, float) else s


def _extreme(pick, xs):
    """min/max with the promoted result type of its operands."""
    r = pick(xs)
    if any(isinstance(x, float) for x in xs):
        return float(r)
    return int(r)


def _pow(a, b, loc):
    a = float(_arith_operand(a, loc))
    b = float(_arith_operand(b, loc))
    if a == 0.0 and b < 0.0:
        raise EvaluationError("zero raised to a negative power", loc)
    if a < 0.0 and b != math.floor(b):
        raise EvaluationError("negative base with fractional exponent", loc)
    try:
        r = math.pow(a, b)
    except OverflowError:
        raise EvaluationError("overflow in pow", loc) from None
    return _checked(r, loc)


_UNARY_FUNCS = {
    "abs": _real_fn("abs", abs),
    "sgn": _real_fn("sgn", _sgn),
    "round": _real_fn("round", lambda x: int(math.floor(x + 0.5))),
    "floor": _real_fn("floor", math.floor),
    "ceil": _real_fn("ceil", math.ceil),
    "sqrt": _real_fn("sqrt", math.sqrt, lambda x: x >= 0, "of a negative number"),
    "exp": _real_fn("exp", math.exp),
    "ln": _real_fn("ln", math.log, lambda x: x > 0, "of a non-positive number"),
    "sin": _real_fn("sin", math.sin),
    "cos": _real_fn("cos", math.cos),
    "tan": _real_fn("tan", math.tan),
}


def _compile_call(e: Call) -> Compiled:
    args = [compile_expr(a) for a in e.args]
    loc = e.loc
    if e.func in _UNARY_FUNCS:
        fn = _UNARY_FUNCS[e.func]
        (af,) = args
        return lambda v, c: fn(af(v, c), loc)
    af, bf = args
    if e.func == "pow":
        return lambda v, c: _pow(af(v, c), bf(v, c), loc)
    if e.func in ("min", "max"):
        pick = min if e.func == "min" else max
        return lambda v, c: _extreme(pick, [_arith_operand(af(v, c), loc),
                                            _arith_operand(bf(v, c), loc)])
    raise EvaluationError(f"unknown function {e.func!r}", loc)


def _compile_nary(e: Nary) -> Compiled:
    fs = tuple(compile_expr(a) for a in e.args)
    loc = e.loc
    op = e.op
    if op in ("+", "*", "avg"):
        if not fs:
            if op == "avg":
                raise EvaluationError("average over an empty set", loc)
            unit = 0 if op == "+" else 1
            return lambda v, c: unit
        fn = operator.mul if op == "*" else operator.add

        def fold(v, c):
            acc = _arith_operand(fs[0](v, c), loc)
            if isinstance(acc, bool):
                acc = int(acc)
            for f in fs[1:]:
                acc = fn(acc, _arith_operand(f(v, c), loc))
            if op == "avg":
                acc = acc / len(fs)
            return _checked(acc, loc)
        return fold
    if op in ("min", "max"):
        if not fs:
            raise EvaluationError(f"{op} over an empty set", loc)
        pick = min if op == "min" else max
        return lambda v, c: _extreme(pick, [_arith_operand(f(v, c), loc) for f in fs])
    if op == "&":
        return lambda v, c: all([_need_bool(f(v, c), loc) for f in fs])
    if op == "|":
        return lambda v, c: any([_need_bool(f(v, c), loc) for f in fs])
    raise EvaluationError(f"unknown aggregation {op!r}", loc)


def _compile_dist(e: Dist) -> Compiled:
    fs = tuple(compile_expr(a) for a in e.args)
    family, loc = e.family, e.loc

    def draw(v, c):
        params = [f(v, c) for f in fs]
        try:
            return D.sample(family, params, c.rng)
        except RDDLError as err:
            raise type(err)(err.message, loc) from None
    return draw


def _compile_vector(e: GroundVectorDist) -> Compiled:
    family, site, k, loc = e.family, e.site, e.component, e.loc
    if family == "MultivariateNormal":
        mean, cov = e.vectors
        mf = [compile_expr(x) for x in mean]
        cf = [[compile_expr(x) for x in row] for row in cov]

        def joint(v, c):
            return D.multivariate_normal(c.rng, [f(v, c) for f in mf],
                                         [[f(v, c) for f in row] for row in cf])
    elif family == "Dirichlet":
        (alpha,) = e.vectors
        af = [compile_expr(x) for x in alpha]

        def joint(v, c):
            return D.dirichlet(c.rng, [f(v, c) for f in af])
    elif family == "Multinomial":
        trials, probs = e.vectors
        tf = compile_expr(trials)
        pf = [compile_expr(x) for x in probs]

        def joint(v, c):
            return D.multinomial(c.rng, tf(v, c), [f(v, c) for f in pf])
    else:
        raise EvaluationError(f"unknown vector family {family!r}", loc)

    def component(v, c):
        draw = c.cache.get(site)
        if draw is None:
            try:
                draw = joint(v, c)
            except RDDLError as err:
                raise type(err)(err.message, loc) from None
            c.cache[site] = draw
        return draw[k]
    return component


def _compile_matrix(e: GroundMatrix) -> Compiled:
    cells = [[compile_expr(x) for x in row] for row in e.matrix]
    site, loc = e.site, e.loc

    def values(v, c):
        return [[float(_arith_operand(f(v, c), loc)) for f in row] for row in cells]

    if e.op == "det":
        def det(v, c):
            return _checked(M.det(values(v, c)), loc)
        return det
    i, j = e.component

    def inverse_entry(v, c):
        inv = c.cache.get(site)
        if inv is None:
            try:
                inv = M.inverse(values(v, c))
            except EvaluationError as err:
                raise EvaluationError(err.message, loc) from None
            c.cache[site] = inv
        return _checked(inv[i][j], loc)
    return inverse_entry


def compile_expr(e: Expr) -> Compiled:
    """Compile a grounded expression into a closure."""
    if isinstance(e, Const):
        value = e.value
        return lambda v, c: value
    if isinstance(e, Var):
        key = e.key
        return lambda v, c: v[key]
    if isinstance(e, Binary):
        return _compile_binary(e)
    if isinstance(e, Unary):
        af, loc = compile_expr(e.arg), e.loc
        if e.op == "~":
            return lambda v, c: not _need_bool(af(v, c), loc)

        def neg(v, c):
            x = _arith_operand(af(v, c), loc)
            return _checked(-x if not isinstance(x, bool) else -int(x), loc)
        return neg
    if isinstance(e, If):
        cf, tf, ef = compile_expr(e.cond), compile_expr(e.then), compile_expr(e.else_)
        loc = e.loc
        return lambda v, c: tf(v, c) if _need_bool(cf(v, c), loc) else ef(v, c)
    if isinstance(e, Call):
        return _compile_call(e)
    if isinstance(e, Nary):
        return _compile_nary(e)
    if isinstance(e, Dist):
        return _compile_dist(e)
    if isinstance(e, GroundDiscrete):
        pf = tuple(compile_expr(p) for p in e.probs)
        members, loc = e.members, e.loc

        def discrete(v, c):
            try:
                return members[D.discrete_index(c.rng, [f(v, c) for f in pf])]
            except RDDLError as err:
                raise type(err)(err.message, loc) from None
        return discrete
    if isinstance(e, ArgExtreme):
        labels = tuple(m for m, _ in e.cases)
        fs = tuple(compile_expr(x) for _, x in e.cases)
        better = operator.gt if e.op == "argmax" else operator.lt
        loc = e.loc

        def arg_extreme(v, c):
            best_i, best = 0, _arith_operand(fs[0](v, c), loc)
            for i in range(1, len(fs)):
                x = _arith_operand(fs[i](v, c), loc)
                if better(x, best):
                    best_i, best = i, x
            return labels[best_i]
        return arg_extreme
    if isinstance(e, EnumShift):
        af, members, delta, loc = compile_expr(e.arg), e.members, e.delta, e.loc
        last = len(members) - 1

        def shift(v, c):
            m = af(v, c)
            if not isinstance(m, Member):
                raise EvaluationError(f"next/prev needs an enum value, got {m!r}", loc)
            return members[min(max(m.index + delta, 0), last)]
        return shift
    if isinstance(e, DynamicRef):
        fs = tuple(compile_expr(a) for a in e.args)
        table = dict(e.table)
        loc = e.loc

        def dynamic(v, c):
            names = tuple(getattr(f(v, c), "name", None) for f in fs)
            key = table.get(names)
            if key is None:
                raise EvaluationError(f"no grounding of {e.name} for {names}", loc)
            return v[key]
        return dynamic
    if isinstance(e, GroundVectorDist):
        return _compile_vector(e)
    if isinstance(e, GroundMatrix):
        return _compile_matrix(e)
    raise EvaluationError(f"cannot evaluate {type(e).__name__} node; "
                          "ground the expression first", getattr(e, "loc", None))


def evaluate(expr: Expr, valuation: Mapping, rng: RandomSource):
    """One-shot evaluation of a grounded expression."""
    return compile_expr(expr)(valuation, EvalContext(rng))
