"""Tokenizer for RDDL source text."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Optional

from .errors import LexicalError
from .model import Location

KEYWORD = "keyword"
IDENT = "ident"
PARAM = "param"
INT = "int"
REAL = "real"
ENUM = "enum"
OP = "op"
EOF = "eof"

KEYWORDS = frozenset("""
    domain instance non-fluents requirements types object pvariables cpfs
    cdfs reward termination action-preconditions state-invariants
    state-action-constraints objects init-state max-nondef-actions horizon
    discount default level non-fluent state-fluent action-fluent
    interm-fluent derived-fluent observ-fluent bool int real if then else
    true false pos-inf neg-inf
    abs sgn round floor ceil sqrt exp ln sin cos tan min max pow
    next prev NEXT PREV
    KronDelta DiracDelta Bernoulli Discrete Uniform Normal Exponential
    Poisson Gamma Beta Binomial Student
""".split())

# names that open a subscripted form ``name_{?x : t, ...}``
SUBSCRIPTED = frozenset("""
    sum prod min max avg forall exists argmax argmin det inverse
    MultivariateNormal Dirichlet Multinomial
""".split())

OPERATORS = (
    "<=>", "=>", "<=", ">=", "==", "~=", "<", ">", "=", "+", "-", "*", "/",
    "^", "&", "|", "~", "!", "(", ")", "[", "]", "{", "}", ",", ";", ":",
)

_NAME = r"[A-Za-z_](?:[A-Za-z0-9_]|-(?=[A-Za-z_]))*"
_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>//[^\n]*)"
    r"|(?P<real>(?:\d+\.\d*|\.\d+)(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)"
    r"|(?P<int>\d+)"
    r"|(?P<sub>(?:" + "|".join(sorted(SUBSCRIPTED, key=len, reverse=True))
    + r")_(?=\{))"
    r"|(?P<param>\?" + _NAME + ")"
    r"|(?P<enum>@" + _NAME + ")"
    r"|(?P<name>" + _NAME + "'?)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in OPERATORS) + ")"
)


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    loc: Location

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.lexeme!r}, {self.loc.line}:{self.loc.column})"


def tokenize(source: str, filename: Optional[str] = None) -> List[Token]:
    """Split ``source`` into tokens; comments and whitespace are dropped.

    Enum literals keep only the name (``@low`` has lexeme ``low``), and
    subscripted aggregation heads such as ``sum_`` are keywords whose lexeme
    omits the underscore.
    """
    tokens: List[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            loc = Location(line, pos - line_start + 1, filename)
            raise LexicalError(f"illegal character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        loc = Location(line, pos - line_start + 1, filename)
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("ws", "comment"):
            pass
        elif kind == "real":
            tokens.append(Token(REAL, text, loc))
        elif kind == "int":
            tokens.append(Token(INT, text, loc))
        elif kind == "sub":
            tokens.append(Token(KEYWORD, text[:-1] + "_", loc))
        elif kind == "param":
            tokens.append(Token(PARAM, text, loc))
        elif kind == "enum":
            tokens.append(Token(ENUM, text[1:], loc))
        elif kind == "name":
            tokens.append(Token(KEYWORD if text in KEYWORDS else IDENT, text, loc))
        else:
            tokens.append(Token(OP, text, loc))
        pos = m.end()
    tokens.append(Token(EOF, "", Location(line, pos - line_start + 1, filename)))
    return tokens
