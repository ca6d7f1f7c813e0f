"""Recursive descent parser producing located ASTs.

Binding strength, tightest first: unary ``~``/``-``; ``* /``; ``+ -``;
relational; ``^``/``&``; ``|``; ``=>``; ``<=>``.  ``^`` is a single generic
node resolved to conjunction or exponentiation once operand types are known.
An ``if`` expression's else branch extends as far right as possible.
"""
from __future__ import annotations

from pathlib import Path
from typing import List, Optional, Tuple

from . import lexer
from .errors import DeprecatedConstructError, RDDLSyntaxError
from .lexer import ENUM, EOF, IDENT, INT, KEYWORD, OP, PARAM, REAL, Token
from .model import (
    CPF, Aggregate, Assignment, Binary, Call, Const, Diagnostic, DiscreteDist,
    Dist, DocumentSet, EnumLit, Expr, FluentRef, If, InstanceBlock, LiftedModel,
    MatrixOp, NonFluentsBlock, ParamRef, PVariable, TypeDecl, Unary, VectorDist,
    FLUENT_CLASSES, INTERM, DERIVED,
)

AGGREGATIONS = ("sum", "prod", "min", "max", "avg", "forall", "exists",
                "argmax", "argmin")
VECTOR_FAMILIES = ("MultivariateNormal", "Dirichlet", "Multinomial")
MATRIX_OPS = ("det", "inverse")
FUNCTIONS = {
    "abs": 1, "sgn": 1, "round": 1, "floor": 1, "ceil": 1, "sqrt": 1,
    "exp": 1, "ln": 1, "sin": 1, "cos": 1, "tan": 1, "min": 2, "max": 2,
    "pow": 2, "next": 1, "prev": 1, "NEXT": 1, "PREV": 1,
}
DISTRIBUTIONS = {
    "KronDelta": 1, "DiracDelta": 1, "Bernoulli": 1, "Uniform": 2,
    "Normal": 2, "Exponential": 1, "Poisson": 1, "Gamma": 2, "Beta": 2,
    "Binomial": 2, "Student": 1,
}
RELATIONAL = ("<", ">", "<=", ">=", "==", "~=")


class Parser:

    def __init__(self, source: str, filename: Optional[str] = None) -> None:
        self.filename = filename
        self.tokens = lexer.tokenize(source, filename)
        self.pos = 0
        self.diagnostics: List[Diagnostic] = []

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def at(self, *lexemes: str) -> bool:
        tok = self.tok
        return tok.kind in (OP, KEYWORD) and tok.lexeme in lexemes

    def accept(self, *lexemes: str) -> Optional[Token]:
        if self.at(*lexemes):
            return self.advance()
        return None

    def expect(self, *lexemes: str) -> Token:
        if self.at(*lexemes):
            return self.advance()
        raise self.error("unexpected " + self.describe(self.tok), lexemes)

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind == kind:
            return self.advance()
        raise self.error("unexpected " + self.describe(self.tok), (what,))

    def describe(self, tok: Token) -> str:
        if tok.kind == EOF:
            return "end of input"
        return f"{tok.kind} {tok.lexeme!r}"

    def error(self, message: str, expected=()) -> RDDLSyntaxError:
        return RDDLSyntaxError(message, self.tok.loc, tuple(expected))

    def name(self, what: str = "identifier") -> str:
        return self.expect_kind(IDENT, what).lexeme

    def end_block(self) -> None:
        self.expect("}")
        self.accept(";")

    # -- documents -----------------------------------------------------------

    def parse_document(self) -> DocumentSet:
        domain = None
        non_fluents, instances = [], []
        while self.tok.kind != EOF:
            if self.at("domain"):
                if domain is not None:
                    raise self.error("more than one domain block")
                domain = self.parse_domain()
            elif self.at("instance"):
                instances.append(self.parse_instance())
            elif self.at("non-fluents"):
                non_fluents.append(self.parse_non_fluents())
            else:
                raise self.error("unexpected " + self.describe(self.tok),
                                 ("domain", "instance", "non-fluents"))
        return DocumentSet(domain, tuple(non_fluents), tuple(instances),
                           tuple(self.diagnostics), self.filename)

    def parse_domain(self) -> LiftedModel:
        start = self.expect("domain")
        name = self.name("domain name")
        self.expect("{")
        fields = dict(requirements=(), types=(), pvariables=(), cpfs=(),
                      reward=None, preconditions=(), invariants=(),
                      termination=())
        while not self.at("}"):
            tok = self.tok
            if self.accept("requirements"):
                self.expect("=")
                self.expect("{")
                reqs = []
                while not self.at("}"):
                    reqs.append(self.expect_kind(IDENT, "requirement").lexeme)
                    if not self.accept(","):
                        break
                self.end_block()
                fields["requirements"] += tuple(reqs)
            elif self.accept("types"):
                fields["types"] += self.parse_types()
            elif self.accept("pvariables"):
                fields["pvariables"] += self.parse_pvariables()
            elif self.accept("cpfs", "cdfs"):
                fields["cpfs"] += self.parse_cpfs()
            elif self.accept("reward"):
                self.expect("=")
                fields["reward"] = self.parse_expr()
                self.expect(";")
            elif self.accept("termination"):
                fields["termination"] += self.parse_expr_block()
            elif self.accept("action-preconditions"):
                fields["preconditions"] += self.parse_expr_block()
            elif self.accept("state-invariants"):
                fields["invariants"] += self.parse_expr_block()
            elif self.at("state-action-constraints"):
                raise DeprecatedConstructError(
                    "state-action-constraints are deprecated and not supported;"
                    " use action-preconditions and state-invariants", tok.loc)
            else:
                raise self.error(
                    "unexpected " + self.describe(tok),
                    ("requirements", "types", "pvariables", "cpfs", "reward",
                     "termination", "action-preconditions", "state-invariants",
                     "}"))
        self.end_block()
        return LiftedModel(name=name, loc=start.loc, **fields)

    def parse_types(self) -> Tuple[TypeDecl, ...]:
        self.expect("{")
        decls = []
        while not self.at("}"):
            tok = self.expect_kind(IDENT, "type name")
            self.expect(":")
            if self.accept("object"):
                decls.append(TypeDecl(tok.lexeme, "object", (), tok.loc))
            else:
                self.expect("{")
                members = []
                while not self.at("}"):
                    members.append(self.expect_kind(ENUM, "enum literal").lexeme)
                    if not self.accept(","):
                        break
                self.expect("}")
                decls.append(TypeDecl(tok.lexeme, "enum", tuple(members), tok.loc))
            self.expect(";")
        self.end_block()
        return tuple(decls)

    def parse_pvariables(self) -> Tuple[PVariable, ...]:
        self.expect("{")
        decls = []
        while not self.at("}"):
            tok = self.expect_kind(IDENT, "fluent name")
            params: List[str] = []
            if self.accept("("):
                while True:
                    params.append(self.name("parameter type"))
                    if not self.accept(","):
                        break
                self.expect(")")
            self.expect(":")
            self.expect("{")
            cls_tok = self.expect(*FLUENT_CLASSES)
            self.expect(",")
            if self.at("bool", "int", "real"):
                prange = self.advance().lexeme
            else:
                prange = self.name("range type")
            default = None
            while self.accept(","):
                if self.accept("default"):
                    self.expect("=")
                    default = self.parse_literal()
                elif self.accept("level"):
                    self.expect("=")
                    self.expect_kind(INT, "level")
                    if cls_tok.lexeme in (INTERM, DERIVED):
                        self.diagnostics.append(Diagnostic(
                            "warning",
                            f"level annotation on {tok.lexeme!r} ignored; "
                            "evaluation order is computed automatically", tok.loc))
                    else:
                        raise RDDLSyntaxError(
                            f"level annotation not allowed on a {cls_tok.lexeme}",
                            tok.loc)
                else:
                    raise self.error("unexpected " + self.describe(self.tok),
                                     ("default", "level"))
            self.expect("}")
            self.expect(";")
            decls.append(PVariable(tok.lexeme, cls_tok.lexeme, tuple(params),
                                   prange, default, None, tok.loc))
        self.end_block()
        return tuple(decls)

    def parse_cpfs(self) -> Tuple[CPF, ...]:
        self.expect("{")
        cpfs = []
        while not self.at("}"):
            tok = self.expect_kind(IDENT, "fluent name")
            primed = tok.lexeme.endswith("'")
            name = tok.lexeme.rstrip("'")
            params: List[str] = []
            if self.accept("("):
                while True:
                    params.append(self.expect_kind(PARAM, "parameter").lexeme)
                    if not self.accept(","):
                        break
                self.expect(")")
            self.expect("=")
            expr = self.parse_expr()
            self.expect(";")
            cpfs.append(CPF(name, primed, tuple(params), expr, tok.loc))
        self.end_block()
        return tuple(cpfs)

    def parse_expr_block(self) -> Tuple[Expr, ...]:
        self.expect("{")
        exprs = []
        while not self.at("}"):
            exprs.append(self.parse_expr())
            self.expect(";")
        self.end_block()
        return tuple(exprs)

    def parse_literal(self) -> Expr:
        tok = self.tok
        if self.accept("true"):
            return Const(True, tok.loc)
        if self.accept("false"):
            return Const(False, tok.loc)
        negative = bool(self.accept("-"))
        tok = self.tok
        if tok.kind == INT:
            self.advance()
            value = int(tok.lexeme)
            return Const(-value if negative else value, tok.loc)
        if tok.kind == REAL:
            self.advance()
            value = float(tok.lexeme)
            return Const(-value if negative else value, tok.loc)
        if not negative and tok.kind == ENUM:
            self.advance()
            return EnumLit(tok.lexeme, tok.loc)
        raise self.error("unexpected " + self.describe(tok), ("literal",))

    # -- instances -----------------------------------------------------------

    def parse_objects(self):
        self.expect("{")
        objects = []
        while not self.at("}"):
            type_name = self.name("type name")
            self.expect(":")
            self.expect("{")
            names = []
            while not self.at("}"):
                tok = self.tok
                if tok.kind in (IDENT, ENUM):
                    names.append(self.advance().lexeme)
                else:
                    raise self.error("unexpected " + self.describe(tok),
                                     ("object name",))
                if not self.accept(","):
                    break
            self.expect("}")
            self.expect(";")
            objects.append((type_name, tuple(names)))
        self.end_block()
        return tuple(objects)

    def parse_assignments(self) -> Tuple[Assignment, ...]:
        self.expect("{")
        items = []
        while not self.at("}"):
            negated = bool(self.accept("~", "!"))
            tok = self.expect_kind(IDENT, "fluent name")
            args = []
            if self.accept("("):
                while True:
                    arg = self.tok
                    if arg.kind not in (IDENT, ENUM):
                        raise self.error("unexpected " + self.describe(arg),
                                         ("object name",))
                    args.append(self.advance().lexeme)
                    if not self.accept(","):
                        break
                self.expect(")")
            if negated:
                value: Expr = Const(False, tok.loc)
            elif self.accept("="):
                value = self.parse_literal()
            else:
                value = Const(True, tok.loc)
            self.expect(";")
            items.append(Assignment(tok.lexeme, tuple(args), value, tok.loc))
        self.end_block()
        return tuple(items)

    def parse_non_fluents(self) -> NonFluentsBlock:
        start = self.expect("non-fluents")
        name = self.name("non-fluents name")
        self.expect("{")
        domain, objects, values = None, (), ()
        while not self.at("}"):
            if self.accept("domain"):
                self.expect("=")
                domain = self.name("domain name")
                self.expect(";")
            elif self.accept("objects"):
                objects += self.parse_objects()
            elif self.accept("non-fluents"):
                values += self.parse_assignments()
            else:
                raise self.error("unexpected " + self.describe(self.tok),
                                 ("domain", "objects", "non-fluents", "}"))
        self.end_block()
        return NonFluentsBlock(name, domain, objects, values, start.loc)

    def parse_instance(self) -> InstanceBlock:
        start = self.expect("instance")
        name = self.name("instance name")
        self.expect("{")
        fields = dict(domain=None, non_fluents=None, objects=(), init_state=(),
                      max_nondef_actions=None, horizon=None, discount=1.0)
        while not self.at("}"):
            if self.accept("domain"):
                self.expect("=")
                fields["domain"] = self.name("domain name")
                self.expect(";")
            elif self.accept("non-fluents"):
                self.expect("=")
                fields["non_fluents"] = self.name("non-fluents name")
                self.expect(";")
            elif self.accept("objects"):
                fields["objects"] += self.parse_objects()
            elif self.accept("init-state"):
                fields["init_state"] += self.parse_assignments()
            elif self.accept("max-nondef-actions"):
                self.expect("=")
                if self.accept("pos-inf"):
                    fields["max_nondef_actions"] = None
                else:
                    fields["max_nondef_actions"] = int(
                        self.expect_kind(INT, "integer or pos-inf").lexeme)
                self.expect(";")
            elif self.accept("horizon"):
                self.expect("=")
                fields["horizon"] = int(self.expect_kind(INT, "integer").lexeme)
                self.expect(";")
            elif self.accept("discount"):
                self.expect("=")
                tok = self.tok
                if tok.kind not in (INT, REAL):
                    raise self.error("unexpected " + self.describe(tok), ("number",))
                self.advance()
                fields["discount"] = float(tok.lexeme)
                self.expect(";")
            else:
                raise self.error(
                    "unexpected " + self.describe(self.tok),
                    ("domain", "non-fluents", "objects", "init-state",
                     "max-nondef-actions", "horizon", "discount", "}"))
        self.end_block()
        return InstanceBlock(name=name, loc=start.loc, **fields)

    # -- expressions ---------------------------------------------------------

    def parse_expr(self) -> Expr:
        left = self.parse_implies()
        while True:
            tok = self.accept("<=>")
            if tok is None:
                return left
            left = Binary("<=>", left, self.parse_implies(), tok.loc)

    def parse_implies(self) -> Expr:
        left = self.parse_or()
        tok = self.accept("=>")
        if tok is None:
            return left
        return Binary("=>", left, self.parse_implies(), tok.loc)

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while True:
            tok = self.accept("|")
            if tok is None:
                return left
            left = Binary("|", left, self.parse_and(), tok.loc)

    def parse_and(self) -> Expr:
        left = self.parse_relational()
        while True:
            tok = self.accept("^", "&")
            if tok is None:
                return left
            left = Binary(tok.lexeme, left, self.parse_relational(), tok.loc)

    def parse_relational(self) -> Expr:
        left = self.parse_additive()
        while True:
            tok = self.accept(*RELATIONAL)
            if tok is None:
                return left
            left = Binary(tok.lexeme, left, self.parse_additive(), tok.loc)

    def parse_additive(self) -> Expr:
        left = self.parse_multiplicative()
        while True:
            tok = self.accept("+", "-")
            if tok is None:
                return left
            left = Binary(tok.lexeme, left, self.parse_multiplicative(), tok.loc)

    def parse_multiplicative(self) -> Expr:
        left = self.parse_unary()
        while True:
            tok = self.accept("*", "/")
            if tok is None:
                return left
            left = Binary(tok.lexeme, left, self.parse_unary(), tok.loc)

    def parse_unary(self) -> Expr:
        tok = self.accept("~", "!")
        if tok is not None:
            return Unary("~", self.parse_unary(), tok.loc)
        tok = self.accept("-")
        if tok is not None:
            arg = self.parse_unary()
            if (isinstance(arg, Const) and not isinstance(arg.value, bool)
                    and isinstance(arg.value, (int, float))):
                return Const(-arg.value, tok.loc)
            return Unary("-", arg, tok.loc)
        return self.parse_primary()

    def parse_typed_params(self) -> Tuple[Tuple[str, str], ...]:
        self.expect("{")
        params = []
        while True:
            p = self.expect_kind(PARAM, "parameter").lexeme
            self.expect(":")
            params.append((p, self.name("type name")))
            if not self.accept(","):
                break
        self.expect("}")
        return tuple(params)

    def parse_bracketed(self) -> Expr:
        close = "]" if self.expect("[", "(").lexeme == "[" else ")"
        expr = self.parse_expr()
        self.expect(close)
        return expr

    def parse_args(self, open_tok: str = "(") -> Tuple[Expr, ...]:
        close = {"(": ")", "[": "]"}[self.expect(*open_tok.split()).lexeme]
        args = []
        if not self.at(close):
            while True:
                args.append(self.parse_expr())
                if not self.accept(","):
                    break
        self.expect(close)
        return tuple(args)

    def parse_primary(self) -> Expr:
        tok = self.tok
        kind, text = tok.kind, tok.lexeme
        if kind == INT:
            self.advance()
            return Const(int(text), tok.loc)
        if kind == REAL:
            self.advance()
            return Const(float(text), tok.loc)
        if kind == ENUM:
            self.advance()
            return EnumLit(text, tok.loc)
        if kind == PARAM:
            self.advance()
            return ParamRef(text, tok.loc)
        if kind == IDENT:
            self.advance()
            args: Tuple[Expr, ...] = ()
            if self.at("("):
                args = self.parse_args("(")
            return FluentRef(text.rstrip("'"), args, text.endswith("'"), tok.loc)
        if kind == OP and text in ("(", "["):
            return self.parse_bracketed()
        if kind == KEYWORD:
            if text in ("true", "false"):
                self.advance()
                return Const(text == "true", tok.loc)
            if text == "if":
                self.advance()
                cond = self.parse_expr()
                self.expect("then")
                then = self.parse_expr()
                self.expect("else")
                return If(cond, then, self.parse_expr(), tok.loc)
            if text.endswith("_"):
                return self.parse_subscripted()
            if text in FUNCTIONS:
                self.advance()
                args = self.parse_args("( [")
                func = text.lower()
                if len(args) != FUNCTIONS[text]:
                    raise RDDLSyntaxError(
                        f"{text} expects {FUNCTIONS[text]} argument(s), "
                        f"got {len(args)}", tok.loc)
                return Call(func, args, tok.loc)
            if text == "Discrete":
                return self.parse_discrete()
            if text in DISTRIBUTIONS:
                self.advance()
                args = self.parse_args("( [")
                if len(args) != DISTRIBUTIONS[text]:
                    raise RDDLSyntaxError(
                        f"{text} expects {DISTRIBUTIONS[text]} argument(s), "
                        f"got {len(args)}", tok.loc)
                return Dist(text, args, tok.loc)
        raise self.error("unexpected " + self.describe(tok), ("expression",))

    def parse_subscripted(self) -> Expr:
        tok = self.advance()
        head = tok.lexeme[:-1]
        params = self.parse_typed_params()
        if head in AGGREGATIONS:
            return Aggregate(head, params, self.parse_bracketed(), tok.loc)
        if head in MATRIX_OPS:
            if len(params) != 2:
                raise RDDLSyntaxError(f"{head} needs exactly two parameters", tok.loc)
            body = self.parse_bracketed()
            select: Tuple[Expr, ...] = ()
            if head == "inverse":
                select = self.parse_args("(")
                if len(select) != 2:
                    raise RDDLSyntaxError("inverse selects one (row, column) entry",
                                          tok.loc)
            return MatrixOp(head, params, body, select, tok.loc)
        args = self.parse_args("[")
        select = self.parse_args("(")
        if len(select) != 1:
            raise RDDLSyntaxError(f"{head} selects exactly one component", tok.loc)
        return VectorDist(head, params, args, select, tok.loc)

    def parse_discrete(self) -> Expr:
        tok = self.advance()
        self.expect("(")
        type_name = self.name("enum type")
        cases = []
        while self.accept(","):
            label = self.expect_kind(ENUM, "enum literal").lexeme
            self.expect(":")
            cases.append((label, self.parse_expr()))
        self.expect(")")
        if not cases:
            raise RDDLSyntaxError("Discrete needs at least one case", tok.loc)
        return DiscreteDist(type_name, tuple(cases), tok.loc)


def parse(source: str, filename: Optional[str] = None) -> DocumentSet:
    """Parse RDDL text holding any mix of domain, non-fluents and instance blocks."""
    return Parser(source, filename).parse_document()


def parse_expression(source: str) -> Expr:
    p = Parser(source)
    expr = p.parse_expr()
    if p.tok.kind != EOF:
        raise p.error("unexpected " + p.describe(p.tok), ("end of input",))
    return expr


def parse_file(path) -> DocumentSet:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), str(path))
