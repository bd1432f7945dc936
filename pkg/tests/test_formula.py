import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harsanyi.errors import FormulaSyntaxError
from harsanyi.formula import (
    And,
    Iff,
    Implies,
    K,
    L,
    Letter,
    LocalLanguage,
    M,
    Neg,
    Or,
    accuracy,
    depth,
    desugar,
    desugar_M,
    eval_propositional,
    indices,
    letters,
    p,
    parse,
    random_formula,
    render,
    subformulas,
)


def test_parse_simple_belief():
    assert parse("L[1/2] p1") == L(1, Fraction(1, 2), Letter(1))


def test_m_desugars_to_complement_index():
    assert desugar_M(parse("M[1/4] p1")) == L(1, Fraction(3, 4), Neg(Letter(1)))


def test_index_out_of_range():
    with pytest.raises(FormulaSyntaxError, match="out of range"):
        parse("L[3/2] p1")


@pytest.mark.parametrize(
    "f, text",
    [
        (Letter(1), "p1"),
        (L(1, Fraction(1, 2), And(Letter(1), Letter(2))), "L[1/2] (p1 & p2)"),
        (K(2, Neg(Letter(1))), "K_2 ~p1"),
    ],
)
def test_render(f, text):
    assert render(f) == text


@pytest.mark.parametrize(
    "text, d",
    [("p1", 0), ("L[1/2](p1 & L[1/3] p2)", 2), ("~p1 & p2", 0), ("K_1 L[1/2] p1", 2)],
)
def test_depth(text, d):
    assert depth(parse(text)) == d


@pytest.mark.parametrize("text, q", [("L[1/2] p1", 2), ("L[1/2] p1 & L[1/3] p2", 6), ("p1", 1)])
def test_accuracy(text, q):
    assert accuracy(parse(text)) == q


def test_precedence_and_associativity():
    a, b, c = p(1), p(2), p(3)
    assert parse("p1 & p2 | p3") == Or(And(a, b), c)
    assert parse("p1 | p2 & p3") == Or(a, And(b, c))
    assert parse("p1 -> p2 -> p3") == Implies(a, Implies(b, c))
    assert parse("p1 <-> p2 -> p3") == Iff(a, Implies(b, c))
    assert parse("~p1 & p2") == And(Neg(a), b)
    assert parse("p1 & p2 & p3") == And(And(a, b), c)


def test_agent_suffix_and_unicode():
    assert parse("L_2[1] p1") == L(2, 1, p(1))
    assert parse("¬p1 ∧ p2 → ⊤") == Implies(And(Neg(p(1)), p(2)), parse("true"))
    assert parse("M_3[0] K_2 p4") == M(3, 0, K(2, p(4)))


def test_syntax_error_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse("p1 &\n  & p2")
    assert info.value.line == 2
    assert info.value.column == 3


@pytest.mark.parametrize("bad", ["", "p", "L p1", "L[1/2 p1", "p1 p2", "p0", "K_0 p1", "(p1"])
def test_rejects_malformed(bad):
    with pytest.raises(FormulaSyntaxError):
        parse(bad)


def test_index_stored_in_lowest_terms():
    f = parse("L[2/4] p1")
    assert f.r == Fraction(1, 2) and f.r.denominator == 2


def test_local_language_membership():
    lang = LocalLanguage(2, 1, {1})
    assert lang.grid() == [0, Fraction(1, 2), 1]
    assert parse("L[1/2] p1") in lang
    assert parse("L[1/3] p1") not in lang
    assert parse("L[1/2] L[1/2] p1") not in lang
    assert parse("L[1/2] p2") not in lang


def test_eval_propositional():
    f = parse("p1 -> p2 & ~p3")
    assert eval_propositional(f, {1, 2})
    assert not eval_propositional(f, {1, 3})
    assert eval_propositional(f, set())


def formulas(max_depth=2, agents=(1, 2), use_m=True):
    return st.builds(
        lambda seed, size: random_formula(
            random.Random(seed), (1, 2, 3), q=6, max_depth=max_depth, size=size, agent_ids=agents, use_m=use_m
        ),
        st.integers(0, 10**9),
        st.integers(0, 10),
    )


@settings(max_examples=300, deadline=None)
@given(formulas())
def test_render_parse_round_trip(f):
    assert parse(render(f)) == f


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_desugar_M_removes_M_and_keeps_measures(f):
    g = desugar_M(f)
    assert not any(isinstance(s, M) for s in subformulas(g))
    assert depth(g) == depth(f)
    assert accuracy(g) == accuracy(f)
    assert letters(g) == letters(f)


@settings(max_examples=200, deadline=None)
@given(formulas(use_m=False))
def test_desugar_M_identity_on_M_free(f):
    assert desugar_M(f) == f


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_desugar_core_connectives(f):
    core = desugar(f)
    allowed = (Letter, Neg, And, L, K)
    assert all(isinstance(s, allowed) or type(s).__name__ in ("Top", "Bot") for s in subformulas(core))
    assert depth(core) == depth(f)


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_indices_in_unit_interval(f):
    assert all(0 <= r <= 1 for r in indices(f))
    q = accuracy(f)
    assert all((r * q).denominator == 1 for r in indices(f))
