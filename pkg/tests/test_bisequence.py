from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harsanyi.bisequence import (
    build_space,
    class_of,
    count_consistent_jlists,
    export,
    j_event,
    jlist_event,
    jlist_report,
    kernel_prob,
    verify_coordinate_lemma,
)
from harsanyi.models import is_harsanyi


@pytest.fixture(scope="module")
def s2():
    return build_space(2)


@pytest.fixture(scope="module")
def s4():
    return build_space(4)


@pytest.mark.parametrize("n, size", [(1, 8), (2, 32), (3, 128)])
def test_sizes(n, size):
    assert build_space(n).size == size == 2 * 4**n


def test_horizon_range():
    with pytest.raises(ValueError):
        build_space(0)
    with pytest.raises(ValueError):
        build_space(11)


def test_state_index_round_trip(s2):
    w = s2.state_index("101", "111")
    assert s2.decode(w) == ("101", "111")
    with pytest.raises(ValueError):
        s2.state_index("001", "111")


def test_class_reads_a_and_forced_b(s2):
    w = s2.state_index("101", "111")
    cls = class_of(s2, 1, w)
    # a_1 = 0 leaves b_0 (and with it a_0) open; a_2 = 1 pins b_1; b_2 is free
    assert sorted(s2.decode(v) for v in cls) == [
        ("001", "010"),
        ("001", "011"),
        ("101", "110"),
        ("101", "111"),
    ]


def test_class_all_ones_has_two_states(s2):
    w = s2.state_index("111", "101")
    assert len(class_of(s2, 1, w)) == 2


def test_class_all_zeros(s2):
    w = s2.state_index("100", "111")
    assert len(class_of(s2, 1, w)) == 2 ** (2 + 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_class_size_formula(n, seed, agent):
    s = build_space(n) if n != 4 else _S4
    w = seed % s.size
    own = s.a if agent == 1 else s.b
    zeros = int(np.count_nonzero(own[w, 1:] == 0))
    assert len(class_of(s, agent, w)) == 2 ** (zeros + 1)


_S4 = build_space(4)


def test_kernel_cases(s2):
    E = s2.coord("b", 1, 0) & s2.coord("a", 1, 1)
    assert kernel_prob(s2, 1, s2.state_index("111", "101"), E) == 1
    assert kernel_prob(s2, 1, s2.state_index("110", "101"), E) == F(1, 2)
    assert kernel_prob(s2, 1, s2.state_index("101", "101"), E) == 0


def test_partitions_and_kernels(s4):
    for agent in (1, 2):
        lab = s4.class_ids[agent]
        for w in range(0, s4.size, 37):
            cls = class_of(s4, agent, w)
            assert kernel_prob(s4, agent, w, cls) == 1
            assert all(lab[v] == lab[w] for v in cls)


def test_j_events(s2):
    E = s2.coord("b", 0, 1)
    assert j_event(s2, 1, F(1, 2), E).all()
    assert (j_event(s2, 1, 1, E) == j_event(s2, 1, 1, ~E)).all()
    assert (j_event(s2, 1, 1, E) == s2.coord("a", 1, 1)).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([F(1, 2), F(3, 4), F(1)]), st.sampled_from([1, 2]))
def test_j_symmetric_in_complement(seed, r, agent):
    rng = np.random.default_rng(seed)
    E = rng.random(_S4.size) < 0.5
    assert (j_event(_S4, agent, r, E) == j_event(_S4, agent, r, ~E)).all()
    if r <= F(1, 2):
        assert j_event(_S4, agent, r, E).all()


@pytest.mark.parametrize("r, ok", [(F(1), True), (F(3, 4), True), (F(1, 2), False)])
def test_coordinate_lemma(s4, r, ok):
    rep = verify_coordinate_lemma(s4, r)
    assert rep.ok() is ok
    assert rep.checked["a_coordinates"] == rep.checked["b_coordinates"] == 4
    if not ok:
        assert rep.notes


def test_jlist_example(s2):
    ev = jlist_event(s2, ["+", "+", "-"], 1)
    want = s2.coord("a", 0, 1) & s2.coord("a", 1, 1) & s2.coord("b", 2, 0)
    assert (ev == want).all() and ev.any()


def test_jlist_all_negative_consistent(s4):
    for m in range(1, 6):
        assert jlist_event(s4, [False] * m, 1).any()


def test_jlist_with_negation_empty_at_half(s4):
    for signs in (["+", "-"], ["-", "+", "-"], ["+", "+", "+", "-"]):
        assert not jlist_event(s4, signs, F(1, 2)).any()


def test_jlist_length_checked(s2):
    with pytest.raises(ValueError):
        jlist_event(s2, [True] * 4, 1)
    with pytest.raises(ValueError):
        count_consistent_jlists(s2, 4, 1)


def _brute_count(space, m, r):
    count = 0
    for bits in range(1 << m):
        if jlist_event(space, [bool(bits >> k & 1) for k in range(m)], r).any():
            count += 1
    return count


@pytest.mark.parametrize("m, r", [(3, F(1)), (5, F(1)), (2, F(1, 2)), (4, F(3, 4))])
def test_count_matches_brute_force(s4, m, r):
    assert count_consistent_jlists(s4, m, r) == _brute_count(s4, m, r)


def test_count_examples(s4):
    assert count_consistent_jlists(s4, 3, 1) == 8
    assert count_consistent_jlists(build_space(5), 6, 1) == 64
    assert count_consistent_jlists(s4, 2, F(1, 2)) == 2


def test_export_is_harsanyi(s2):
    m = export(s2)
    assert m.n == s2.size
    assert is_harsanyi(m, 1) and is_harsanyi(m, 2)
    assert m.valuation[1] == frozenset(np.flatnonzero(s2.X).tolist())


def test_report_shape(s4):
    assert jlist_report(s4, 3, 1) == {"horizon": 4, "r": "1/1", "lists": {"m": 3, "consistent": 8}}
