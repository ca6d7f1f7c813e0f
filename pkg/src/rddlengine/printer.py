"""Serialize ASTs back to RDDL text.

Binary operators are fully parenthesized, so printing and re-parsing any
parser-produced tree gives an equal tree.
"""
from __future__ import annotations

from typing import List

from .model import (
    Aggregate, Assignment, Binary, Call, Const, DiscreteDist, Dist, DocumentSet,
    ArgExtreme, DynamicRef, EnumLit, EnumShift, Expr, FluentRef, GroundDiscrete,
    GroundMatrix, GroundVectorDist, If, InstanceBlock, LiftedModel, MatrixOp,
    Member, Nary, NonFluentsBlock, ParamRef, Unary, Var, VectorDist,
)

_NARY_NAMES = {"+": "sum", "*": "prod", "&": "and", "|": "or"}


def literal(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = repr(value)
        if "e" not in text and "." not in text:
            text += ".0"
        return text
    if isinstance(value, Member):
        return "@" + value.name
    raise TypeError(f"cannot print literal {value!r}")


def _params(params) -> str:
    return "{" + ", ".join(f"{p} : {t}" for p, t in params) + "}"


def expr_to_str(e: Expr) -> str:
    if isinstance(e, Const):
        return literal(e.value)
    if isinstance(e, EnumLit):
        return "@" + e.name
    if isinstance(e, ParamRef):
        return e.name
    if isinstance(e, Var):
        return e.key
    if isinstance(e, FluentRef):
        name = e.name + ("'" if e.primed else "")
        if e.args:
            return name + "(" + ", ".join(expr_to_str(a) for a in e.args) + ")"
        return name
    if isinstance(e, Unary):
        return f"{e.op}({expr_to_str(e.arg)})"
    if isinstance(e, Binary):
        return f"({expr_to_str(e.left)} {e.op} {expr_to_str(e.right)})"
    if isinstance(e, Call):
        return f"{e.func}[" + ", ".join(expr_to_str(a) for a in e.args) + "]"
    if isinstance(e, If):
        return (f"(if ({expr_to_str(e.cond)}) then ({expr_to_str(e.then)}) "
                f"else ({expr_to_str(e.else_)}))")
    if isinstance(e, Aggregate):
        return f"({e.op}_{_params(e.params)} [{expr_to_str(e.body)}])"
    if isinstance(e, Dist):
        return f"{e.family}(" + ", ".join(expr_to_str(a) for a in e.args) + ")"
    if isinstance(e, DiscreteDist):
        cases = ", ".join(f"@{k} : {expr_to_str(p)}" for k, p in e.cases)
        return f"Discrete({e.type_name}, {cases})"
    if isinstance(e, VectorDist):
        args = ", ".join(expr_to_str(a) for a in e.args)
        sel = ", ".join(expr_to_str(a) for a in e.select)
        return f"{e.family}_{_params(e.params)}[{args}]({sel})"
    if isinstance(e, MatrixOp):
        text = f"{e.op}_{_params(e.params)}[{expr_to_str(e.body)}]"
        if e.select:
            text += "(" + ", ".join(expr_to_str(a) for a in e.select) + ")"
        return text
    return _grounded_to_str(e)


def _grounded_to_str(e: Expr) -> str:
    """Display form of grounded-only nodes; not meant to be re-parsed."""
    if isinstance(e, Nary):
        name = _NARY_NAMES.get(e.op, e.op)
        return f"{name}(" + ", ".join(expr_to_str(a) for a in e.args) + ")"
    if isinstance(e, ArgExtreme):
        cases = ", ".join(f"{m}: {expr_to_str(x)}" for m, x in e.cases)
        return f"{e.op}{{{cases}}}"
    if isinstance(e, EnumShift):
        return f"{'next' if e.delta > 0 else 'prev'}[{expr_to_str(e.arg)}]"
    if isinstance(e, DynamicRef):
        return f"{e.name}(" + ", ".join(expr_to_str(a) for a in e.args) + ")"
    if isinstance(e, GroundDiscrete):
        cases = ", ".join(f"{m}: {expr_to_str(p)}" for m, p in zip(e.members, e.probs))
        return f"Discrete({cases})"
    if isinstance(e, GroundVectorDist):
        return f"{e.site}[{e.component}]"
    if isinstance(e, GroundMatrix):
        rows = "; ".join(", ".join(expr_to_str(x) for x in row) for row in e.matrix)
        sel = "" if e.component is None else f"[{e.component[0]}, {e.component[1]}]"
        return f"{e.op}[{rows}]{sel}"
    raise TypeError(f"cannot print {type(e).__name__}")


def _assign(a: Assignment) -> str:
    head = a.name + ("(" + ", ".join(a.args) + ")" if a.args else "")
    return f"{head} = {expr_to_str(a.value)};"


def domain_to_str(d: LiftedModel) -> str:
    out: List[str] = [f"domain {d.name} {{"]
    if d.requirements:
        out.append("    requirements = {" + ", ".join(d.requirements) + "};")
    if d.types:
        out.append("    types {")
        for t in d.types:
            if t.kind == "object":
                out.append(f"        {t.name} : object;")
            else:
                members = ", ".join("@" + m for m in t.members)
                out.append(f"        {t.name} : {{{members}}};")
        out.append("    };")
    out.append("    pvariables {")
    for v in d.pvariables:
        head = v.name + ("(" + ", ".join(v.param_types) + ")" if v.param_types else "")
        body = f"{v.fluent_class}, {v.range}"
        if v.default is not None:
            body += f", default = {expr_to_str(v.default)}"
        out.append(f"        {head} : {{{body}}};")
    out.append("    };")
    out.append("    cpfs {")
    for c in d.cpfs:
        head = c.target + ("(" + ", ".join(c.params) + ")" if c.params else "")
        out.append(f"        {head} = {expr_to_str(c.expr)};")
    out.append("    };")
    if d.reward is not None:
        out.append(f"    reward = {expr_to_str(d.reward)};")
    for keyword, exprs in (("action-preconditions", d.preconditions),
                           ("state-invariants", d.invariants),
                           ("termination", d.termination)):
        if exprs:
            out.append(f"    {keyword} {{")
            out.extend(f"        {expr_to_str(e)};" for e in exprs)
            out.append("    };")
    out.append("}")
    return "\n".join(out)


def _objects(objects) -> List[str]:
    if not objects:
        return []
    out = ["    objects {"]
    out.extend(f"        {t} : {{{', '.join(ns)}}};" for t, ns in objects)
    out.append("    };")
    return out


def non_fluents_to_str(nf: NonFluentsBlock) -> str:
    out = [f"non-fluents {nf.name} {{"]
    if nf.domain:
        out.append(f"    domain = {nf.domain};")
    out.extend(_objects(nf.objects))
    if nf.values:
        out.append("    non-fluents {")
        out.extend("        " + _assign(a) for a in nf.values)
        out.append("    };")
    out.append("}")
    return "\n".join(out)


def instance_to_str(inst: InstanceBlock) -> str:
    out = [f"instance {inst.name} {{"]
    if inst.domain:
        out.append(f"    domain = {inst.domain};")
    if inst.non_fluents:
        out.append(f"    non-fluents = {inst.non_fluents};")
    out.extend(_objects(inst.objects))
    if inst.init_state:
        out.append("    init-state {")
        out.extend("        " + _assign(a) for a in inst.init_state)
        out.append("    };")
    mnd = "pos-inf" if inst.max_nondef_actions is None else str(inst.max_nondef_actions)
    out.append(f"    max-nondef-actions = {mnd};")
    if inst.horizon is not None:
        out.append(f"    horizon = {inst.horizon};")
    out.append(f"    discount = {literal(float(inst.discount))};")
    out.append("}")
    return "\n".join(out)


def to_rddl(doc: DocumentSet) -> str:
    parts = []
    if doc.domain is not None:
        parts.append(domain_to_str(doc.domain))
    parts.extend(non_fluents_to_str(nf) for nf in doc.non_fluents)
    parts.extend(instance_to_str(i) for i in doc.instances)
    return "\n\n".join(parts) + "\n"
