"""Lifted and grounded model representations and runtime values.

Runtime values are plain Python objects: ``bool``, ``int`` (64-bit range
enforced by the engine), ``float`` and :class:`Member` for enum members and
instance objects.  The absent observation marker is ``None``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, Optional, Tuple, Union

NON_FLUENT = "non-fluent"
STATE = "state-fluent"
ACTION = "action-fluent"
INTERM = "interm-fluent"
DERIVED = "derived-fluent"
OBSERV = "observ-fluent"

FLUENT_CLASSES = (NON_FLUENT, STATE, ACTION, INTERM, DERIVED, OBSERV)
CLASSES_WITH_DEFAULT = (NON_FLUENT, STATE, ACTION)
CPF_CLASSES = (STATE, INTERM, DERIVED, OBSERV)

PRIMITIVE_RANGES = ("bool", "int", "real")

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1


@dataclass(frozen=True)
class Location:
    line: int
    column: int
    source: Optional[str] = None

    def __str__(self) -> str:
        if self.source:
            return f"{self.source}:{self.line}:{self.column}"
        return f"line {self.line}, column {self.column}"


def _loc():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True, order=True)
class Member:
    """A member of an enum type or an object of an object type."""
    type_name: str
    index: int
    name: str

    def __str__(self) -> str:
        return "@" + self.name


Value = Union[bool, int, float, Member]


def value_kind(value) -> str:
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, float):
        return "real"
    if isinstance(value, Member):
        return "enum"
    raise TypeError(f"not a runtime value: {value!r}")


def check_value(value):
    """Return ``value`` if it satisfies the finiteness and range invariants."""
    from .errors import EvaluationError
    if isinstance(value, bool) or isinstance(value, Member):
        return value
    if isinstance(value, int):
        if not INT_MIN <= value <= INT_MAX:
            raise EvaluationError(f"integer {value} outside 64-bit range")
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise EvaluationError(f"non-finite real value {value}")
        return value
    raise EvaluationError(f"not a runtime value: {value!r}")


def format_value(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


# ---------------------------------------------------------------------------
# expressions


class Expr:
    """Base class of expression tree nodes."""

    def children(self) -> Tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Const(Expr):
    value: Value
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class EnumLit(Expr):
    """``@name`` literal; denotes an enum member or an instance object."""
    name: str
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class ParamRef(Expr):
    name: str
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class FluentRef(Expr):
    name: str
    args: Tuple[Expr, ...] = ()
    primed: bool = False
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args


@dataclass(frozen=True)
class Unary(Expr):
    op: str   # '-' or '~'
    arg: Expr
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: Tuple[Expr, ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    else_: Expr
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.cond, self.then, self.else_)


@dataclass(frozen=True)
class Aggregate(Expr):
    op: str
    params: Tuple[Tuple[str, str], ...]
    body: Expr
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Dist(Expr):
    family: str
    args: Tuple[Expr, ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args


@dataclass(frozen=True)
class DiscreteDist(Expr):
    type_name: str
    cases: Tuple[Tuple[str, Expr], ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return tuple(p for _, p in self.cases)


@dataclass(frozen=True)
class VectorDist(Expr):
    """Joint draw over an indexed family; ``select`` picks one component."""
    family: str
    params: Tuple[Tuple[str, str], ...]
    args: Tuple[Expr, ...]
    select: Tuple[Expr, ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args + self.select


@dataclass(frozen=True)
class MatrixOp(Expr):
    op: str   # 'det' or 'inverse'
    params: Tuple[Tuple[str, str], ...]
    body: Expr
    select: Tuple[Expr, ...] = ()
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.body,) + self.select


# grounded-only nodes


@dataclass(frozen=True)
class Var(Expr):
    """Reference to a grounded fluent; next-state keys end with a prime."""
    key: str
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Nary(Expr):
    op: str   # '+', '*', 'min', 'max', 'avg', '&', '|'
    args: Tuple[Expr, ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args


@dataclass(frozen=True)
class ArgExtreme(Expr):
    op: str   # 'argmax' or 'argmin'
    cases: Tuple[Tuple[Member, Expr], ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return tuple(e for _, e in self.cases)


@dataclass(frozen=True)
class EnumShift(Expr):
    """``next``/``prev`` over an ordered type; saturates at both ends."""
    delta: int
    members: Tuple[Member, ...]
    arg: Expr
    loc: Optional[Location] = _loc()

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class DynamicRef(Expr):
    """Fluent reference whose arguments are only known at run time."""
    name: str
    args: Tuple[Expr, ...]
    table: Tuple[Tuple[Tuple[str, ...], str], ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.args


@dataclass(frozen=True)
class GroundDiscrete(Expr):
    members: Tuple[Member, ...]
    probs: Tuple[Expr, ...]
    loc: Optional[Location] = _loc()

    def children(self):
        return self.probs


@dataclass(frozen=True)
class GroundVectorDist(Expr):
    """``vectors`` holds the family-specific parameter layout:

    * MultivariateNormal: (mean[n], cov[n][n])
    * Dirichlet: (alpha[n],)
    * Multinomial: (trials, prob[n])
    """
    family: str
    site: str
    vectors: tuple
    component: int
    loc: Optional[Location] = _loc()

    def children(self):
        return tuple(iter_nested(self.vectors))


@dataclass(frozen=True)
class GroundMatrix(Expr):
    op: str
    site: str
    matrix: Tuple[Tuple[Expr, ...], ...]
    component: Optional[Tuple[int, int]] = None
    loc: Optional[Location] = _loc()

    def children(self):
        return tuple(e for row in self.matrix for e in row)


def iter_nested(obj) -> Iterator[Expr]:
    if isinstance(obj, Expr):
        yield obj
    else:
        for item in obj:
            yield from iter_nested(item)


def walk(expr: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [expr]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


# ---------------------------------------------------------------------------
# declarations


@dataclass(frozen=True)
class TypeDecl:
    name: str
    kind: str   # 'object' or 'enum'
    members: Tuple[str, ...] = ()
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class PVariable:
    name: str
    fluent_class: str
    param_types: Tuple[str, ...]
    range: str
    default: Optional[Expr] = None
    level: Optional[int] = None
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class CPF:
    name: str
    primed: bool
    params: Tuple[str, ...]
    expr: Expr
    loc: Optional[Location] = _loc()

    @property
    def target(self) -> str:
        return self.name + ("'" if self.primed else "")


@dataclass(frozen=True)
class LiftedModel:
    name: str
    requirements: Tuple[str, ...] = ()
    types: Tuple[TypeDecl, ...] = ()
    pvariables: Tuple[PVariable, ...] = ()
    cpfs: Tuple[CPF, ...] = ()
    reward: Optional[Expr] = None
    preconditions: Tuple[Expr, ...] = ()
    invariants: Tuple[Expr, ...] = ()
    termination: Tuple[Expr, ...] = ()
    loc: Optional[Location] = _loc()

    @cached_property
    def type_table(self) -> Dict[str, TypeDecl]:
        return {t.name: t for t in self.types}

    @cached_property
    def variables(self) -> Dict[str, PVariable]:
        return {v.name: v for v in self.pvariables}

    def fluents_of(self, fluent_class: str):
        return [v for v in self.pvariables if v.fluent_class == fluent_class]

    @property
    def is_pomdp(self) -> bool:
        return any(v.fluent_class == OBSERV for v in self.pvariables)


@dataclass(frozen=True)
class Assignment:
    name: str
    args: Tuple[str, ...]
    value: Expr
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class NonFluentsBlock:
    name: str
    domain: Optional[str] = None
    objects: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    values: Tuple[Assignment, ...] = ()
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class InstanceBlock:
    name: str
    domain: Optional[str] = None
    non_fluents: Optional[str] = None
    objects: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    init_state: Tuple[Assignment, ...] = ()
    max_nondef_actions: Optional[int] = None    # None means pos-inf
    horizon: Optional[int] = None
    discount: float = 1.0
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class InstanceModel:
    """An instance block merged with the non-fluents block it names."""
    name: str
    domain: Optional[str]
    non_fluents_name: Optional[str]
    objects: Tuple[Tuple[str, Tuple[str, ...]], ...]
    non_fluent_values: Tuple[Assignment, ...]
    init_state: Tuple[Assignment, ...]
    max_nondef_actions: Optional[int]
    horizon: Optional[int]
    discount: float
    loc: Optional[Location] = _loc()


def link_instance(block: InstanceBlock, non_fluents=()) -> InstanceModel:
    from .errors import GroundingError
    nf = None
    if block.non_fluents is not None:
        matches = [n for n in non_fluents if n.name == block.non_fluents]
        if not matches:
            raise GroundingError(
                f"instance {block.name!r} references unknown non-fluents "
                f"block {block.non_fluents!r}", block.loc)
        nf = matches[0]
    objects: Dict[str, list] = {}
    for type_name, names in (nf.objects if nf else ()) + block.objects:
        bucket = objects.setdefault(type_name, [])
        bucket.extend(n for n in names if n not in bucket)
    return InstanceModel(
        name=block.name,
        domain=block.domain,
        non_fluents_name=block.non_fluents,
        objects=tuple((t, tuple(ns)) for t, ns in objects.items()),
        non_fluent_values=nf.values if nf else (),
        init_state=block.init_state,
        max_nondef_actions=block.max_nondef_actions,
        horizon=block.horizon,
        discount=block.discount,
        loc=block.loc,
    )


@dataclass(frozen=True)
class Diagnostic:
    severity: str   # 'error' or 'warning'
    message: str
    loc: Optional[Location] = None

    def __str__(self) -> str:
        where = f"{self.loc}: " if self.loc is not None else ""
        return f"{where}{self.severity}: {self.message}"


@dataclass(frozen=True)
class DocumentSet:
    domain: Optional[LiftedModel] = None
    non_fluents: Tuple[NonFluentsBlock, ...] = ()
    instances: Tuple[InstanceBlock, ...] = ()
    diagnostics: Tuple[Diagnostic, ...] = field(default=(), compare=False)
    source: Optional[str] = field(default=None, compare=False)

    def merge(self, other: "DocumentSet") -> "DocumentSet":
        if self.domain is not None and other.domain is not None:
            from .errors import RDDLSyntaxError
            raise RDDLSyntaxError("more than one domain block supplied",
                                  other.domain.loc)
        return DocumentSet(
            domain=self.domain or other.domain,
            non_fluents=self.non_fluents + other.non_fluents,
            instances=self.instances + other.instances,
            diagnostics=self.diagnostics + other.diagnostics,
            source=self.source,
        )

    def instance(self, name: Optional[str] = None) -> InstanceModel:
        from .errors import GroundingError
        if not self.instances:
            raise GroundingError("no instance block supplied")
        if name is None:
            block = self.instances[0]
        else:
            found = [i for i in self.instances if i.name == name]
            if not found:
                raise GroundingError(f"no instance named {name!r}")
            block = found[0]
        return link_instance(block, self.non_fluents)
