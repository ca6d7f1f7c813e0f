"""Structural validation of a lifted domain against an instance.

All problems are collected; nothing here raises on a bad model.
"""
from __future__ import annotations

from typing import Dict, List, Optional

from .model import (
    CLASSES_WITH_DEFAULT, CPF_CLASSES, NON_FLUENT, PRIMITIVE_RANGES, STATE, Aggregate, Assignment, Const, Diagnostic,
    DiscreteDist, EnumLit, Expr, FluentRef, InstanceModel, LiftedModel,
    MatrixOp, ParamRef, VectorDist,
)


class _Report:

    def __init__(self) -> None:
        self.items: List[Diagnostic] = []

    def error(self, message, loc=None):
        self.items.append(Diagnostic("error", message, loc))

    def warning(self, message, loc=None):
        self.items.append(Diagnostic("warning", message, loc))


def validate(lifted: LiftedModel,
             instance: Optional[InstanceModel] = None) -> List[Diagnostic]:
    """Check declarations, references, arities and literal types.

    Returns the diagnostics in discovery order; an empty list means the
    domain (and instance, if given) is well formed.
    """
    report = _Report()
    _check_types(lifted, report)
    _check_pvariables(lifted, report)
    _check_cpfs(lifted, report)
    _check_expressions(lifted, report)
    if instance is not None:
        _check_instance(lifted, instance, report)
    return report.items


def has_errors(diagnostics) -> bool:
    return any(d.severity == "error" for d in diagnostics)


def _check_types(lifted: LiftedModel, report: _Report) -> None:
    seen = set()
    for t in lifted.types:
        if t.name in seen:
            report.error(f"type {t.name!r} declared more than once", t.loc)
        seen.add(t.name)
        if t.name in PRIMITIVE_RANGES:
            report.error(f"type name {t.name!r} shadows a primitive range", t.loc)
        if t.kind == "enum":
            if len(set(t.members)) != len(t.members):
                report.error(f"enum type {t.name!r} has duplicate members", t.loc)
            if not t.members:
                report.error(f"enum type {t.name!r} has no members", t.loc)


def _range_known(lifted: LiftedModel, name: str) -> bool:
    return name in PRIMITIVE_RANGES or name in lifted.type_table


def literal_type_error(lifted: LiftedModel, prange: str, value: Expr,
                       objects: Optional[Dict[str, tuple]] = None) -> Optional[str]:
    """Why ``value`` cannot inhabit ``prange``, or None if it can."""
    if prange == "bool":
        ok = isinstance(value, Const) and isinstance(value.value, bool)
    elif prange == "int":
        ok = (isinstance(value, Const) and isinstance(value.value, int)
              and not isinstance(value.value, bool))
    elif prange == "real":
        ok = (isinstance(value, Const) and isinstance(value.value, (int, float))
              and not isinstance(value.value, bool))
    else:
        decl = lifted.type_table.get(prange)
        if decl is None:
            return f"unknown range {prange!r}"
        if not isinstance(value, EnumLit):
            ok = False
        elif decl.kind == "enum":
            ok = value.name in decl.members
        else:
            ok = objects is None or value.name in objects.get(prange, ())
    if ok:
        return None
    shown = value.value if isinstance(value, Const) else getattr(value, "name", value)
    return f"type mismatch: {shown!r} is not a valid {prange} value"


def _check_pvariables(lifted: LiftedModel, report: _Report) -> None:
    seen = set()
    for v in lifted.pvariables:
        if v.name in seen:
            report.error(f"fluent {v.name!r} declared more than once", v.loc)
        seen.add(v.name)
        for t in v.param_types:
            if t not in lifted.type_table:
                report.error(f"fluent {v.name!r} has undeclared parameter type {t!r}",
                             v.loc)
        if not _range_known(lifted, v.range):
            report.error(f"fluent {v.name!r} has undeclared range {v.range!r}", v.loc)
            continue
        if v.fluent_class in CLASSES_WITH_DEFAULT:
            if v.default is None:
                report.error(f"{v.fluent_class} {v.name!r} requires a default value",
                             v.loc)
            else:
                problem = literal_type_error(lifted, v.range, v.default)
                if problem and lifted.type_table.get(v.range) is not None \
                        and lifted.type_table[v.range].kind == "object":
                    problem = None   # objects are only known per instance
                if problem:
                    report.error(f"default of {v.name!r}: {problem}", v.loc)
        elif v.default is not None:
            report.error(f"{v.fluent_class} {v.name!r} must not carry a default",
                         v.loc)


def _check_cpfs(lifted: LiftedModel, report: _Report) -> None:
    defined: Dict[str, int] = {}
    for cpf in lifted.cpfs:
        var = lifted.variables.get(cpf.name)
        if var is None:
            report.error(f"CPF for undeclared fluent {cpf.name!r}", cpf.loc)
            continue
        if var.fluent_class not in CPF_CLASSES:
            report.error(f"CPF target must be interm/derived/state, "
                         f"{cpf.name!r} is a {var.fluent_class}", cpf.loc)
            continue
        if var.fluent_class == STATE and not cpf.primed:
            report.error(f"CPF for state fluent {cpf.name!r} must target "
                         f"{cpf.name}'", cpf.loc)
        if var.fluent_class != STATE and cpf.primed:
            report.error(f"only state fluents take a primed CPF, not {cpf.name!r}",
                         cpf.loc)
        if len(cpf.params) != len(var.param_types):
            report.error(f"CPF for {cpf.name!r} has {len(cpf.params)} parameter(s), "
                         f"fluent declares {len(var.param_types)}", cpf.loc)
        if len(set(cpf.params)) != len(cpf.params):
            report.error(f"CPF for {cpf.name!r} repeats a parameter", cpf.loc)
        defined[cpf.name] = defined.get(cpf.name, 0) + 1
        if defined[cpf.name] == 2:
            report.error(f"more than one CPF for {cpf.name!r}", cpf.loc)
    for v in lifted.pvariables:
        if v.fluent_class in CPF_CLASSES and v.name not in defined:
            report.error(f"no CPF defined for {v.fluent_class} {v.name!r}", v.loc)


def _check_expressions(lifted: LiftedModel, report: _Report) -> None:
    for cpf in lifted.cpfs:
        var = lifted.variables.get(cpf.name)
        scope = {}
        if var is not None and len(var.param_types) == len(cpf.params):
            scope = dict(zip(cpf.params, var.param_types))
        else:
            scope = {p: None for p in cpf.params}
        _check_expr(lifted, cpf.expr, scope, report)
    if lifted.reward is None:
        report.warning("domain declares no reward; reward is 0 everywhere", lifted.loc)
    else:
        _check_expr(lifted, lifted.reward, {}, report)
    for block in (lifted.preconditions, lifted.invariants, lifted.termination):
        for e in block:
            _check_expr(lifted, e, {}, report)


def _declare(lifted, params, scope, report, loc):
    inner = dict(scope)
    for p, t in params:
        if t not in lifted.type_table:
            report.error(f"parameter {p} has undeclared type {t!r}", loc)
        inner[p] = t
    return inner


def _check_expr(lifted: LiftedModel, e: Expr, scope, report: _Report) -> None:
    if isinstance(e, ParamRef):
        if e.name not in scope:
            report.error(f"unbound parameter {e.name}", e.loc)
        return
    if isinstance(e, EnumLit):
        return
    if isinstance(e, FluentRef):
        var = lifted.variables.get(e.name)
        if var is None:
            report.error(f"reference to undeclared fluent {e.name!r}", e.loc)
        else:
            if len(e.args) != len(var.param_types):
                report.error(f"{e.name!r} takes {len(var.param_types)} argument(s), "
                             f"got {len(e.args)}", e.loc)
            if e.primed and var.fluent_class != STATE:
                report.error(f"primed reference to non-state fluent {e.name!r}", e.loc)
        for a in e.args:
            _check_expr(lifted, a, scope, report)
        return
    if isinstance(e, Aggregate):
        _check_expr(lifted, e.body, _declare(lifted, e.params, scope, report, e.loc),
                    report)
        if e.op in ("argmax", "argmin") and len(e.params) != 1:
            report.error(f"{e.op} ranges over exactly one parameter", e.loc)
        return
    if isinstance(e, (VectorDist, MatrixOp)):
        inner = _declare(lifted, e.params, scope, report, e.loc)
        for c in (e.args if isinstance(e, VectorDist) else (e.body,)):
            _check_expr(lifted, c, inner, report)
        for c in e.select:
            _check_expr(lifted, c, scope, report)
        return
    if isinstance(e, DiscreteDist):
        decl = lifted.type_table.get(e.type_name)
        if decl is None or decl.kind != "enum":
            report.error(f"Discrete over unknown enum type {e.type_name!r}", e.loc)
        else:
            labels = [k for k, _ in e.cases]
            for k in labels:
                if k not in decl.members:
                    report.error(f"@{k} is not a member of {e.type_name!r}", e.loc)
            if len(set(labels)) != len(labels):
                report.error("Discrete repeats a case", e.loc)
    for c in e.children():
        _check_expr(lifted, c, scope, report)


def _check_instance(lifted: LiftedModel, instance: InstanceModel,
                    report: _Report) -> None:
    if instance.domain is not None and instance.domain != lifted.name:
        report.error(f"instance {instance.name!r} targets domain "
                     f"{instance.domain!r}, not {lifted.name!r}", instance.loc)
    objects: Dict[str, tuple] = {}
    owner: Dict[str, str] = {}
    for type_name, names in instance.objects:
        decl = lifted.type_table.get(type_name)
        if decl is None:
            report.error(f"objects declared for undeclared type {type_name!r}",
                         instance.loc)
        elif decl.kind == "enum":
            report.error(f"enum type {type_name!r} cannot receive objects",
                         instance.loc)
        for n in names:
            if n in owner and owner[n] != type_name:
                report.error(f"object {n!r} declared for both {owner[n]!r} and "
                             f"{type_name!r}", instance.loc)
            owner[n] = type_name
        objects[type_name] = tuple(names)
    for t in lifted.types:
        if t.kind == "enum":
            objects[t.name] = t.members

    def check_assignment(a: Assignment, allowed_class: str, what: str):
        var = lifted.variables.get(a.name)
        if var is None:
            report.error(f"{what} assigns undeclared fluent {a.name!r}", a.loc)
            return
        if var.fluent_class != allowed_class:
            report.error(f"{what} entry for {a.name!r}, which is a "
                         f"{var.fluent_class}", a.loc)
            return
        if len(a.args) != len(var.param_types):
            report.error(f"{a.name!r} takes {len(var.param_types)} argument(s), "
                         f"got {len(a.args)}", a.loc)
        else:
            for arg, t in zip(a.args, var.param_types):
                if arg not in objects.get(t, ()):
                    report.error(f"undeclared object {arg!r} of type {t!r}", a.loc)
        problem = literal_type_error(lifted, var.range, a.value, objects)
        if problem:
            report.error(f"{what} {a.name!r}: {problem}", a.loc)

    for a in instance.non_fluent_values:
        check_assignment(a, NON_FLUENT, "non-fluents")
    for a in instance.init_state:
        check_assignment(a, STATE, "init-state")
    if instance.horizon is None:
        report.error("instance has no horizon", instance.loc)
    elif instance.horizon < 1:
        report.error(f"horizon must be positive, got {instance.horizon}", instance.loc)
    if not 0.0 < instance.discount <= 1.0:
        report.error(f"discount must lie in (0, 1], got {instance.discount}",
                     instance.loc)
    if instance.max_nondef_actions is not None and instance.max_nondef_actions < 1:
        report.error("max-nondef-actions must be positive or pos-inf", instance.loc)
