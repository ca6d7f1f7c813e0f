from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rddlengine import bundled
from rddlengine.errors import DeprecatedConstructError, LexicalError, RDDLSyntaxError
from rddlengine.lexer import ENUM, EOF, IDENT, INT, KEYWORD, OP, tokenize
from rddlengine.model import (
    Aggregate, Binary, Call, Const, Dist, FluentRef, If, ParamRef, Unary,
)
from rddlengine.parser import parse, parse_expression
from rddlengine.printer import expr_to_str, to_rddl


def kinds(source):
    return [(t.kind, t.lexeme) for t in tokenize(source) if t.kind != EOF]


class TestTokenize:

    def test_cpfs_line(self):
        assert kinds("cpfs { x' = x + 1; };") == [
            (KEYWORD, "cpfs"), (OP, "{"), (IDENT, "x'"), (OP, "="), (IDENT, "x"),
            (OP, "+"), (INT, "1"), (OP, ";"), (OP, "}"), (OP, ";")]

    def test_pos_inf_is_one_keyword(self):
        assert kinds("pos-inf") == [(KEYWORD, "pos-inf")]

    def test_enum_literal_drops_sigil(self):
        assert kinds("@low") == [(ENUM, "low")]

    def test_comments_are_stripped(self):
        assert kinds("x // trailing words\n+ y") == [(IDENT, "x"), (OP, "+"), (IDENT, "y")]

    def test_hyphenated_names_and_scientific_reals(self):
        toks = kinds("POLE-MASS - 1.5e-3")
        assert toks == [(IDENT, "POLE-MASS"), (OP, "-"), ("real", "1.5e-3")]

    def test_illegal_character_reports_location(self):
        with pytest.raises(LexicalError) as info:
            tokenize("x = 1;\n  y $ 2")
        assert info.value.loc.line == 2 and info.value.loc.column == 5

    def test_locations_are_monotone(self):
        src = bundled.get_bundled("cartpole_continuous").domain_source
        locs = [(t.loc.line, t.loc.column) for t in tokenize(src)]
        assert all(line >= 1 and col >= 1 for line, col in locs)
        assert locs == sorted(locs)


DOMAIN_HEAD = """
domain d {
    pvariables {
        x : { state-fluent, real, default = 0.0 };
        a : { action-fluent, real, default = 0.0 };
        %s
    };
    cpfs { x' = x + a; %s };
    reward = x;
    %s
}
"""


class TestParse:

    def test_termination_block(self):
        doc = parse(DOMAIN_HEAD % ("", "", "termination { (x > 1.0); };"))
        assert doc.domain.termination == (Binary(">", FluentRef("x"), Const(1.0)),)

    def test_state_action_constraints_are_deprecated(self):
        with pytest.raises(DeprecatedConstructError, match="deprecated"):
            parse(DOMAIN_HEAD % ("", "", "state-action-constraints { a <= 1.0; };"))

    def test_level_annotation_ignored_with_warning(self):
        doc = parse(DOMAIN_HEAD % ("i : { interm-fluent, real, level = 2 };", "i = a;", ""))
        assert [d.severity for d in doc.diagnostics] == ["warning"]
        assert "level" in doc.diagnostics[0].message
        names = [v.name for v in doc.domain.pvariables]
        assert "i" in names

    def test_syntax_error_has_location_and_expected_set(self):
        src = "domain d {\n  pvariables {\n    x : { state-fluent real };\n  };\n}"
        with pytest.raises(RDDLSyntaxError) as info:
            parse(src)
        err = info.value
        assert err.loc.line == 3
        assert err.expected
        assert 1 <= err.loc.column <= len(src.splitlines()[2]) + 1

    def test_error_location_inside_source(self):
        src = "domain d { cpfs { x' = (x + ; }; }"
        with pytest.raises(RDDLSyntaxError) as info:
            parse(src)
        assert info.value.loc.line == 1 and info.value.loc.column <= len(src) + 1

    def test_block_order_is_irrelevant(self):
        d, i = (bundled.get_bundled("cartpole_continuous").domain_source,
                bundled.get_bundled("cartpole_continuous").instance_path()
                .read_text(encoding="utf-8"))
        a, b = parse(d + i), parse(i + d)
        assert a.domain == b.domain and a.instances == b.instances
        assert a.non_fluents == b.non_fluents


class TestPrecedence:

    @pytest.mark.parametrize("src, expected", [
        ("1 + 2 * 3", Binary("+", Const(1), Binary("*", Const(2), Const(3)))),
        ("3 - 2 - 1", Binary("-", Binary("-", Const(3), Const(2)), Const(1))),
        ("a | b & c", Binary("|", FluentRef("a"), Binary("&", FluentRef("b"), FluentRef("c")))),
        ("a => b => c", Binary("=>", FluentRef("a"), Binary("=>", FluentRef("b"), FluentRef("c")))),
        ("a <=> b | c", Binary("<=>", FluentRef("a"), Binary("|", FluentRef("b"), FluentRef("c")))),
        ("x + 1 > y", Binary(">", Binary("+", FluentRef("x"), Const(1)), FluentRef("y"))),
        ("~a & b", Binary("&", Unary("~", FluentRef("a")), FluentRef("b"))),
        ("x >= 0 ^ x <= 1", Binary("^", Binary(">=", FluentRef("x"), Const(0)),
                                   Binary("<=", FluentRef("x"), Const(1)))),
    ])
    def test_binding(self, src, expected):
        assert parse_expression(src) == expected

    def test_else_branch_extends_to_the_end(self):
        e = parse_expression("if (c) then 1 else 2 + 3")
        assert e == If(FluentRef("c"), Const(1), Binary("+", Const(2), Const(3)))

    def test_aggregation_scopes_typed_parameters(self):
        e = parse_expression("(sum_{?x : cell, ?y : cell} [f(?x, ?y)])")
        assert isinstance(e, Aggregate)
        assert e.params == (("?x", "cell"), ("?y", "cell"))
        assert e.body == FluentRef("f", (ParamRef("?x"), ParamRef("?y")))

    def test_parameter_comparison(self):
        assert parse_expression("?p ~= ?q") == Binary("~=", ParamRef("?p"), ParamRef("?q"))

    def test_nested_indexing(self):
        e = parse_expression("f(g(?x))")
        assert e == FluentRef("f", (FluentRef("g", (ParamRef("?x"),)),))


# -- round trip -------------------------------------------------------------

names = st.sampled_from(["x", "y", "speed", "POLE-LEN", "cell_count"])
params = st.sampled_from(["?a", "?b"])
numbers = st.one_of(st.integers(0, 1000), st.floats(0, 1e6, allow_nan=False,
                                                    allow_infinity=False))
leaves = st.one_of(
    numbers.map(Const),
    st.booleans().map(Const),
    names.map(FluentRef),
    st.builds(lambda n, p: FluentRef(n, (ParamRef(p),)), names, params),
    st.builds(lambda n: FluentRef(n, (), True), names),
)
BIN_OPS = ["+", "-", "*", "/", "&", "^", "|", "=>", "<=>", "<", "<=", ">", ">=", "==", "~="]


def extend(children):
    return st.one_of(
        st.builds(Binary, st.sampled_from(BIN_OPS), children, children),
        st.builds(lambda a: Unary("~", a), children),
        st.builds(lambda a: Unary("-", a), children.filter(lambda c: not isinstance(c, Const))),
        st.builds(If, children, children, children),
        st.builds(lambda f, a: Call(f, (a,)), st.sampled_from(["abs", "exp", "sin", "sqrt"]), children),
        st.builds(lambda a, b: Call("pow", (a, b)), children, children),
        st.builds(lambda a, b: Dist("Normal", (a, b)), children, children),
        st.builds(lambda op, b: Aggregate(op, (("?a", "t"),), b),
                  st.sampled_from(["sum", "prod", "forall", "exists", "max"]), children),
    )


expressions = st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_expression_round_trip(e):
    assert parse_expression(expr_to_str(e)) == e


@pytest.mark.parametrize("name", sorted(bundled.bundled_domains()))
def test_bundled_document_round_trip(name):
    b = bundled.get_bundled(name)
    text = b.domain_source + "\n" + "\n".join(p.read_text(encoding="utf-8")
                                              for p in b.instance_paths)
    doc = parse(text)
    again = parse(to_rddl(doc))
    assert again.domain == doc.domain
    assert again.instances == doc.instances
    assert again.non_fluents == doc.non_fluents


def test_parse_is_deterministic():
    src = bundled.get_bundled("fire_fighting").domain_source
    assert parse(src).domain == parse(src).domain
