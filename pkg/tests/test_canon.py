import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harsanyi.canon import (
    SIGMA_H,
    SIGMA_PLUS,
    Bracket,
    build_canonical_harsanyi,
    cardinality,
    code_of_value,
    counter_witness,
    entails,
    enumerate_atoms1,
    enumerate_prob_parts,
    representative_events,
    representative_measure,
    sat,
    unique_extension_brackets,
    valid,
    verify_unique_extension,
)
from harsanyi.errors import BudgetExceeded, UnsupportedFormula
from harsanyi.formula import depth, letters, parse, random_formula
from harsanyi.models import evaluate, extension, is_harsanyi, random_harsanyi_space


def test_bracket_codes():
    q = 2
    assert [str(Bracket.from_code(c, q)) for c in range(5)] == ["0", "(0,1/2)", "1/2", "(1/2,1)", "1"]
    for c in range(5):
        b = Bracket.from_code(c, q)
        assert b.code(q) == c
        assert b.complement().code(q) == 2 * q - c
    assert code_of_value(F(3, 4), 2) == 3
    assert code_of_value(F(1, 2), 2) == 2


def test_one_letter_specs_q2():
    specs = enumerate_prob_parts(2, [1])
    assert [s.key() for s in specs] == ["0", "(0,1/2)", "1/2", "(1/2,1)", "1"]


@pytest.mark.parametrize("q", range(1, 9))
def test_one_letter_spec_count(q):
    assert len(enumerate_prob_parts(q, [1])) == 2 * q + 1


def _sampled_spec_keys(q, width, resolution):
    """Spec keys of every measure whose masses are multiples of 1/resolution."""
    n0 = 1 << width
    keys = set()
    for parts in itertools.product(range(resolution + 1), repeat=n0):
        if sum(parts) != resolution:
            continue
        mu = [F(x, resolution) for x in parts]
        key = []
        for E in representative_events(width):
            mass = sum(mu[a] for a in range(n0) if E >> a & 1)
            key.append(str(Bracket.of_value(mass, q)))
        keys.add(",".join(key))
    return keys


# 1/8 misses specs whose masses all sit strictly between grid points; 1/12 does not
@pytest.mark.parametrize("q, resolution", [(1, 4), (2, 12)])
def test_two_letter_specs_against_grid_sampling(q, resolution):
    specs = {s.key() for s in enumerate_prob_parts(q, [1, 2])}
    sampled = _sampled_spec_keys(q, 2, resolution)
    assert sampled <= specs
    assert sampled == specs


def test_budget():
    with pytest.raises(BudgetExceeded):
        enumerate_prob_parts(3, [1, 2])
    with pytest.raises(BudgetExceeded):
        enumerate_prob_parts(1, [1, 2, 3])
    with pytest.raises(BudgetExceeded):
        enumerate_prob_parts(9, [1])


def test_atom_counts():
    assert len(enumerate_atoms1(2, [1])) == 10
    assert len(enumerate_atoms1(3, [1])) == 14
    assert len(enumerate_atoms1(1, [])) == 1


@pytest.mark.parametrize("q, n", [(1, 6), (2, 10), (3, 14), (4, 18), (5, 22)])
def test_cardinality(q, n):
    assert cardinality(q, 1, 1) == n == 2 * (2 * q + 1)
    assert cardinality(q, 3, 1) == n


def test_cardinality_rejects_depth_zero():
    with pytest.raises(ValueError):
        cardinality(2, 0, 1)


def test_representative_measures():
    by_key = {s.key(): s for s in enumerate_prob_parts(2, [1])}
    assert representative_measure(by_key["1/2"]) == (F(1, 2), F(1, 2))
    assert representative_measure(by_key["(1/2,1)"])[1] == F(3, 4)
    assert representative_measure(by_key["1"])[1] == 1


def test_canonical_model_q2():
    cm = build_canonical_harsanyi(2, [1])
    assert len(cm.atoms) == 10
    assert is_harsanyi(cm.space)
    half_p = next(i for i, a in enumerate(cm.atoms) if a.prop == 1 and a.spec.key() == "1/2")
    row = dict(cm.space.row(1, half_p))
    assert set(row) == set(cm.group(half_p)) and set(row.values()) == {F(1, 2)}
    for i in range(10):
        assert cm.space.prob(1, i, set(cm.group(i))) == 1


def test_canonical_two_letters_additive():
    cm = build_canonical_harsanyi(1, [1, 2])
    n0 = 4
    for g in range(0, len(cm.atoms), n0):
        mu = representative_measure(cm.atoms[g].spec)
        for A in range(1 << n0):
            for B in range(1 << n0):
                if A & B == 0:
                    m = lambda E: sum(mu[a] for a in range(n0) if E >> a & 1)
                    assert m(A | B) == m(A) + m(B)


@pytest.mark.parametrize("q", [1, 2])
def test_truth_lemma_exhaustive_depth_one(q):
    cm = build_canonical_harsanyi(q, [1])
    rng = random.Random(q)
    for _ in range(300):
        f = random_formula(rng, (1,), q=q, max_depth=1, size=5)
        mask = extension(cm.space, f)
        for i, a in enumerate(cm.atoms):
            assert (i in mask) == entails(a, f)


def test_sat_examples():
    assert sat(parse("L[3/4] p1 & L[3/4] ~p1")) is None
    w = sat(parse("L[1/2] p1 & L[1/2] ~p1"))
    assert w is not None and w.atom.spec.key() == "1/2"
    assert sat(parse("~(L[1/2] L[1/3] p1 <-> L[1/3] p1)")) is None


def test_valid_examples():
    assert valid(parse("L[0] p1"))
    assert valid(parse("L[1/2] p1 -> L[1] L[1/2] p1"))
    w = counter_witness(parse("L[1/2] p1 -> L[1] p1"))
    assert w is not None and w.atom.spec.bracket(2) == Bracket.point(F(1, 2))


def test_sat_fragment_errors():
    with pytest.raises(UnsupportedFormula):
        sat(parse("K_1 p1"))
    with pytest.raises(UnsupportedFormula):
        sat(parse("L_2[1/2] p1"))
    with pytest.raises(UnsupportedFormula):
        sat(parse("L[1/2] L[1/2] p1"), SIGMA_PLUS)


def test_sigma_plus_witness_model():
    w = sat(parse("L[1/2] p1 & ~L[3/4] p1 & ~p1"), SIGMA_PLUS)
    assert w is not None
    assert evaluate(w.model, w.state, parse("L[1/2] p1 & ~L[3/4] p1 & ~p1"))


def test_unique_extension_bracket_examples():
    cm = build_canonical_harsanyi(2, [1])
    opened = next(i for i, a in enumerate(cm.atoms) if a.spec.key() == "(1/2,1)")
    a = cm.atoms[opened]
    group = [cm.atoms[s] for s in cm.group(opened)]
    assert unique_extension_brackets(a, group) == Bracket.point(1)
    others = [b for b in cm.atoms if b.spec != a.spec]
    assert unique_extension_brackets(a, others) == Bracket.point(0)
    assert unique_extension_brackets(a, []) == Bracket.point(0)
    with_p = [b for b in group if b.prop == 1]
    assert unique_extension_brackets(a, with_p) == Bracket.open(F(1, 2), 1)


@pytest.mark.parametrize("q, P, checks", [(1, [1], 6 * 64), (2, [1], 10 * 1024)])
def test_verify_unique_extension(q, P, checks):
    rep = verify_unique_extension(q, P)
    assert rep.ok(), rep.summary()
    assert rep.checked["unique_bracket"] == checks


def test_verify_unique_extension_two_letters():
    # 60 atoms; events are weighted by their trace on the atom's group
    rep = verify_unique_extension(1, [1, 2])
    assert rep.ok(), rep.summary()
    assert rep.checked["unique_bracket"] == 60 * 2**60


def _soundness_models(q, letter_ids, count, seed):
    rng = random.Random(seed)
    for _ in range(count):
        yield random_harsanyi_space(rng, rng.randint(1, 4), q=q, letter_ids=letter_ids)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_sat_witness_is_genuine_and_valid_is_sound(seed):
    rng = random.Random(seed)
    q = rng.choice([1, 2])
    f = random_formula(rng, (1,), q=q, max_depth=2, size=5)
    w = sat(f)
    if w is not None:
        assert evaluate(w.model, w.state, f)
        assert evaluate(w.model, w.state, f) == (w.state in extension(w.model, f))
    if valid(f):
        for m in _soundness_models(2 * q, sorted(letters(f)) or [1], 10, seed):
            assert extension(m, f) == set(m.states)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_depth_one_conservation(seed):
    rng = random.Random(seed)
    f = random_formula(rng, (1,), q=rng.choice([1, 2]), max_depth=1, size=6)
    assert depth(f) <= 1
    assert (sat(f, SIGMA_H) is None) == (sat(f, SIGMA_PLUS) is None)
