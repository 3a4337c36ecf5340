from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ckengine.algebra import P, S, SS
from ckengine.dsl import (Context, EvalError, Evaluator, parse_element, parse_expression,
                          parse_generator_map_text, parse_unitary_text)
from ckengine.endo import BlockUnitary
from ckengine.errors import CKError, ParseError, UsageError
from ckengine.scalars import EXACT, FLOAT

from strategies import elements


def test_parse_examples(ex41):
    x = parse_element("S(a)*adj(S(b))", ex41)
    assert x.equals(SS(ex41, "a", "b")) and not x.is_zero()
    assert not parse_element("S(a b c)", ex41).is_zero()
    with pytest.raises(UsageError):
        parse_element("S(c a)", ex41)
    y = parse_element("1/2+1/2 i * P(v1)", ex41)
    assert y.equals(P(ex41, "v1").scale(EXACT.make(Fraction(1, 2), Fraction(1, 2))))


def test_gaussian_literals(o2):
    assert parse_element("3/4 i", o2).equals(P(o2, "v").scale(EXACT.make(0, Fraction(3, 4))))
    assert parse_element("2 - i", o2).equals(P(o2, "v").scale(EXACT.make(2, -1)))
    assert parse_element("i * i", o2).equals(P(o2, "v").scale(-1))
    assert parse_element("(1 + i) * (1 - i)", o2).equals(P(o2, "v").scale(2))


def test_precedence(o2):
    x = parse_element("S(e1) + S(e2) * adj(S(e2))", o2)
    assert x.equals(S(o2, "e1") + SS(o2, "e2", "e2"))
    assert parse_element("-S(e1) + S(e1)", o2).is_zero()
    assert parse_element("S(e1) / 2", o2).equals(S(o2, "e1").scale(EXACT.make(Fraction(1, 2))))


@given(st.data())
def test_print_parse_roundtrip(ex41, data):
    x = data.draw(elements(ex41, max_len=3, max_terms=6))
    assert parse_element(x.to_grammar(), ex41).terms == x.terms


@given(st.data())
def test_print_parse_roundtrip_o2(o2, data):
    x = data.draw(elements(o2, max_len=3, max_terms=6))
    assert parse_element(str(x), o2).equals(x)


@given(st.text(max_size=40))
def test_fuzz_text_never_crashes(o2, text):
    try:
        parse_element(text, o2)
    except CKError:
        pass


@given(st.binary(max_size=40))
def test_fuzz_bytes_never_crash(o2, raw):
    text = raw.decode("latin-1")
    try:
        parse_element(text, o2)
    except CKError:
        pass


alphabet = st.sampled_from(list("SP()[]*+-/, i12e v") + ["S(e1)", "P(v)", "adj(", "shift(", "1/0"])


@given(st.lists(alphabet, max_size=20).map("".join))
def test_fuzz_grammar_fragments(o2, text):
    try:
        parse_element(text, o2)
    except CKError:
        pass


def test_deep_nesting_is_a_diagnostic(o2):
    with pytest.raises(ParseError):
        parse_expression("(" * 5000 + "1" + ")" * 5000)


def test_error_positions():
    with pytest.raises(ParseError) as exc:
        parse_expression("S(a) + frob(x)", source="t", line=3)
    assert exc.value.line == 3 and exc.value.column == 8
    assert "t:3:8" in str(exc.value)
    with pytest.raises(ParseError):
        parse_expression("adj(S(a), S(b))")
    with pytest.raises(ParseError):
        parse_expression("1/0")
    with pytest.raises(ParseError):
        parse_expression("P(v w)")


def test_verbs(o2, ex41):
    ev = Evaluator(Context(field=EXACT, graph=o2))
    run = lambda t: ev.eval(parse_expression(t))  # noqa: E731
    assert run("eq(shift(P(v)), P(v))") is True
    assert run("zero(comp(S(e1) + adj(S(e2)), 2))") is True
    assert run("eq(gauge(S(e1), i), i * S(e1))") is True
    assert run("eq(expF(S(e1 e1) * adj(S(e1 e1)), 1), 1/2 * S(e1) * adj(S(e1)))") is True
    assert run("member(S(e1) * adj(S(e2)), \"B\")") is True
    assert run("diag(expD(S(e1) * adj(S(e2)) + P(v)))") is True
    assert run("norm(2 * P(v))") == pytest.approx(2.0)
    assert run("blocks()") == [2]
    with pytest.raises(EvalError):
        run("gauge(S(e1), 2)")
    with pytest.raises(EvalError):
        run("hyp(S(e1))")


def test_unitary_file(o2, ex41, data_dir):
    u = parse_unitary_text((data_dir / "ex41_u.unitary").read_text(), {"E41": ex41})
    assert u.name == "u" and len(u.blocks) == 4
    assert u.blocks[("v2", "v2")] == [[EXACT.one]]
    had = parse_unitary_text((data_dir / "hadamard.unitary").read_text(), {"O2": o2}, FLOAT)
    assert isinstance(had, BlockUnitary)
    with pytest.raises(ParseError):
        parse_unitary_text((data_dir / "hadamard.unitary").read_text(), {"O2": o2}, EXACT)
    with pytest.raises(ParseError):
        parse_unitary_text("unitary w on O2 { block v -> v = [[1, 1], [0, 1]] }", {"O2": o2})
    with pytest.raises(ParseError):
        parse_unitary_text("unitary w on X { }", {"O2": o2})


def test_map_file_errors(o2, ex41):
    graphs = {"O2": o2, "E41": ex41}
    with pytest.raises(ParseError):
        parse_generator_map_text("map m : E41 -> O2\nP(v1) = P(v)\n", graphs)
    with pytest.raises(ParseError) as exc:
        parse_generator_map_text("map m : O2 -> O2\nP(v) = P(v)\nS(zz) = S(e1)\n", graphs)
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse_generator_map_text("", graphs)


def test_at_switches_graph(o2, ex41):
    ev = Evaluator(Context(field=EXACT, graph=o2, graphs={"E41": ex41}))
    x = ev.eval(parse_expression("at(E41, S(a) * adj(S(b)))"))
    assert x.graph == ex41
