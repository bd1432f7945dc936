import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harsanyi.canon import build_canonical_harsanyi, valid
from harsanyi.errors import NotNormal, UnsupportedFormula
from harsanyi.formula import BOT, Iff, LocalLanguage, depth, eval_propositional, p, parse, random_formula, render
from harsanyi.models import Evaluator, extension
from harsanyi.rewrite import (
    denest,
    event_formula,
    is_normal,
    normal_form,
    normal_form_formula,
    random_normal_formula,
    statement,
    statement_of,
    verify_denest,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("L[1/2] (p1 & L[1/3] p2)", True),
        ("p1", True),
        ("L[1/2] (p1 | (p2 & L[0] p3))", False),
        ("L[1/2] L[1/3] p1", True),
        ("L[1/2] L[0] p1", False),
        ("L[0] L[1/2] p1", False),
        ("L[1/2] (L[1/3] p2 & p1)", True),
        ("~L[1/2] L[1] p1 | L[0] p2", True),
        ("~L[1/2] L[1] p1 | p2", False),
        ("M[1/2] L[1] p1", True),
        ("L[1/2] (p1 & ~L[1/4] p2)", True),
    ],
)
def test_is_normal(text, expected):
    assert is_normal(parse(text)) is expected


def test_is_normal_rejects_knowledge_and_agents():
    with pytest.raises(UnsupportedFormula):
        is_normal(parse("K_1 p1"))
    with pytest.raises(UnsupportedFormula):
        is_normal(parse("L_2[1] p1"))


@pytest.mark.parametrize(
    "text, out",
    [
        ("L[1/2] L[1/3] p1", "L[1/3] p1"),
        ("L[1/2] (p1 & L[1/3] p2)", "L[1/2] p1 & L[1/3] p2"),
        ("L[1/2] (p1 | L[1/3] p2)", "L[1/2] p1 | L[1/3] p2"),
    ],
)
def test_denest_examples(text, out):
    g = denest(parse(text))
    assert render(g) == out
    assert verify_denest(parse(text), g, models=10)


def test_denest_depth_one_is_identity():
    f = parse("L[1/2] p1 & ~M[1/3] (p1 | p2)")
    assert denest(f) is f


def test_denest_rejects_non_normal():
    with pytest.raises(NotNormal):
        denest(parse("L[1/2] L[0] p1"))


def test_statement_examples():
    cm = build_canonical_harsanyi(2, [1])
    by = {(a.prop, a.spec.key()): a for a in cm.atoms}
    assert render(statement_of(by[(1, "1")])) == "p1 & L[1] p1 & M[1] p1"
    assert render(statement_of(by[(0, "(0,1/2)")])) == "~p1 & L[0] p1 & ~M[0] p1 & M[1/2] p1 & ~L[1/2] p1"


@pytest.mark.parametrize("q, P", [(1, [1]), (2, [1]), (1, [1, 2])])
def test_statement_picks_out_its_atom(q, P):
    cm = build_canonical_harsanyi(q, P)
    ev = Evaluator(cm.space)
    for i, a in enumerate(cm.atoms):
        assert ev.mask(statement_of(a)) == 1 << i
        st_ = statement(a)
        assert depth(st_.prop_part) == 0


def test_event_formula_truth_sets():
    letters_ = (1, 2)
    for E in range(16):
        f = event_formula(E, letters_)
        got = 0
        for a in range(4):
            true = {p_ for j, p_ in enumerate(letters_) if a >> j & 1}
            if eval_propositional(f, true):
                got |= 1 << a
        assert got == E


def test_normal_form_examples():
    lang = LocalLanguage(2, 1, {1})
    assert normal_form(BOT, lang) == []
    sts = normal_form(parse("L[1] p1"), lang)
    assert len(sts) == 2 and all(s.atom.spec.key() == "1" for s in sts)
    sts = normal_form(p(1), lang)
    assert len(sts) == 5 and all(s.atom.prop == 1 for s in sts)
    with pytest.raises(ValueError):
        normal_form(parse("L[1/3] p1"), lang)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**9))
def test_normal_form_disjunction_equivalent(seed):
    rng = random.Random(seed)
    q = rng.choice([1, 2])
    f = random_formula(rng, (1,), q=q, max_depth=1, size=5)
    sts = normal_form(f, LocalLanguage(q, 1, {1}))
    cm = build_canonical_harsanyi(q, [1])
    assert extension(cm.space, normal_form_formula(sts)) == extension(cm.space, f)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_random_normal_formulas_denest(seed):
    rng = random.Random(seed)
    f = random_normal_formula(rng, (1,), q=rng.choice([1, 2]), max_depth=3)
    assert is_normal(f)
    g = denest(f)
    assert depth(g) <= 1
    assert valid(Iff(f, g))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**9))
def test_denest_two_letters(seed):
    rng = random.Random(seed)
    f = random_normal_formula(rng, (1, 2), q=rng.choice([1, 2]), max_depth=3)
    assert verify_denest(f, models=5, seed=seed)
