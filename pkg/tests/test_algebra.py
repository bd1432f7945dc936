import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from harsanyi.algebra import (
    ModalAlgebra,
    algebra_from_dict,
    algebra_to_dict,
    check_reducibility_witness,
    check_sigma_h_laws,
    counterexample_algebra,
    dump_algebra,
    k_violation,
    load_algebra,
    make_powerset_algebra,
    operator_closure,
    partition_operator,
    search_K,
)
from harsanyi.canon import build_canonical_harsanyi
from harsanyi.errors import BudgetExceeded, ModelError
from harsanyi.models import FiniteTypeSpace, extend_to_kb, four_p_counter_model, random_harsanyi_space

# elements of the four-element quotient, coded u | z << 1
ZERO, U, Z, TOP = 0, 1, 2, 3


def _one_state():
    return FiniteTypeSpace.from_dense([[1]], {1: {0}})


def _uniform_two():
    h = F(1, 2)
    return FiniteTypeSpace.from_dense([[h, h], [h, h]], {1: {0}})


def test_counterexample_tables():
    a = counterexample_algebra()
    assert a.B(1, U) == TOP
    assert a.B(1, Z) == ZERO
    assert a.B(0, ZERO) == TOP
    for r in a.belief:
        if r > 0:
            assert [a.B(r, e) for e in range(4)] == [ZERO, TOP, ZERO, TOP]


@pytest.mark.parametrize("q", [1, 2, 3])
def test_counterexample_laws(q):
    assert check_sigma_h_laws(counterexample_algebra(), q).ok()


def test_laws_need_grid_operators():
    with pytest.raises(ModelError):
        check_sigma_h_laws(counterexample_algebra(2), 3)


def test_one_state_algebra():
    a = make_powerset_algebra(_one_state(), q=2)
    assert a.size == 2
    assert a.belief[F(0)] == (1, 1)
    assert a.belief[F(1, 2)] == a.belief[F(1)] == (0, 1)


def test_powerset_laws():
    assert not check_sigma_h_laws(make_powerset_algebra(four_p_counter_model(), q=2), 2).ok("4p")
    cm = build_canonical_harsanyi(2, [1])
    rep = check_sigma_h_laws(make_powerset_algebra(cm.space, q=2), 2)
    assert rep.ok(), rep.summary()
    assert rep.checked["A3"] == 1024 * 1024 * 6
    with pytest.raises(BudgetExceeded):
        make_powerset_algebra(build_canonical_harsanyi(3, [1]).space)


def test_monotone_counted_on_comparable_pairs():
    rep = check_sigma_h_laws(counterexample_algebra(1), 1)
    assert rep.checked["monotone"] == 9 * 2


def test_antitone_enforced():
    with pytest.raises(ModelError):
        ModalAlgebra(1, {F(0): (0, 1), F(1): (1, 1)})
    with pytest.raises(ModelError):
        ModalAlgebra(1, {F(0): (0, 2)})


def test_search_K_small_examples():
    assert search_K(make_powerset_algebra(_one_state(), q=2)) == [(0, 1)]
    identity = ModalAlgebra(1, {F(0): (1, 1), F(1, 2): (0, 1), F(1): (0, 1)})
    assert search_K(identity) == [(0, 1)]


def test_search_K_routes_agree_on_small_carriers():
    rng = random.Random(11)
    algebras = [counterexample_algebra(2), make_powerset_algebra(_one_state(), q=2), make_powerset_algebra(_uniform_two())]
    for _ in range(10):
        algebras.append(make_powerset_algebra(random_harsanyi_space(rng, rng.randint(1, 2), q=2)))
    for a in algebras:
        assert search_K(a, "exhaustive") == search_K(a, "coatom")


def test_search_K_budget():
    with pytest.raises(BudgetExceeded):
        search_K(ModalAlgebra(5, {F(0): (31,) * 32}))
    with pytest.raises(BudgetExceeded):
        search_K(make_powerset_algebra(FiniteTypeSpace.from_dense([[1, 0, 0], [0, 1, 0], [0, 0, 1]], {})), "exhaustive")


def test_counterexample_K_table_scan():
    # every one of the 4**4 tables, checked against the law list by hand-rolled predicates
    a = counterexample_algebra(2)
    neg = lambda e: 3 & ~e
    found = []
    for K in itertools.product(range(4), repeat=4):
        ok = K[TOP] == TOP
        for e in range(4):
            ok &= K[e] & ~e == 0
            ok &= K[e] & ~K[K[e]] == 0
            ok &= neg(K[e]) & ~K[neg(K[e])] == 0
            ok &= K[e] & ~a.B(1, e) == 0
            for r in a.belief:
                b = a.B(r, e)
                ok &= b & ~K[b] == 0 and neg(b) & ~K[neg(b)] == 0
            for f in range(4):
                ok &= K[e & f] == K[e] & K[f]
        if ok:
            found.append(K)
    assert found == search_K(a) == [(ZERO, ZERO, ZERO, TOP)]


def test_k_violation_names():
    a = counterexample_algebra(2)
    assert k_violation(a, (0, 0, 0, 0)) == "K_top"
    assert k_violation(a, (0, 1, 2, 3)) == "H3"  # identity: K z = z but B^1 z = 0
    assert k_violation(a, (0, 0, 0, 3)) is None


def test_closure_examples():
    ident = ModalAlgebra(1, {F(0): (1, 1), F(1): (0, 1)})
    c = operator_closure(ident)
    assert c.tables == {(0, 1), (1, 0), (1, 1), (0, 0)}
    cc = operator_closure(counterexample_algebra())
    assert len(cc) == 4
    assert (3, 3, 3, 3) in cc


def test_closure_is_closed():
    for a in (counterexample_algebra(), make_powerset_algebra(_uniform_two())):
        c = operator_closure(a)
        top = a.top
        for f in c.tables:
            assert tuple(top & ~x for x in f) in c
            for g in c.tables:
                assert tuple(x & y for x, y in zip(f, g)) in c
                assert tuple(f[y] for y in g) in c


def test_closure_with_K():
    kb = extend_to_kb(_uniform_two())
    a = make_powerset_algebra(kb)
    assert a.knowledge == (0, 0, 0, 3)
    assert a.knowledge in operator_closure(a, include_K=True)
    with pytest.raises(ModelError):
        operator_closure(counterexample_algebra(), include_K=True)


def test_reducibility_examples():
    rep = check_reducibility_witness(make_powerset_algebra(_one_state(), q=2))
    assert rep.ok()
    rep = check_reducibility_witness(make_powerset_algebra(_uniform_two()))
    assert rep.ok("extendable") and rep.checked["K_in_belief_closure"] == 1
    assert rep.ok("K_in_belief_closure")
    rep = check_reducibility_witness(counterexample_algebra())
    assert rep.ok("extendable")
    assert not rep.ok("K_in_belief_closure")


def test_json_round_trip():
    a = make_powerset_algebra(extend_to_kb(_uniform_two()))
    d = algebra_to_dict(a)
    assert set(d["belief"]) == {"0", "1/2", "1"}
    b = load_algebra(dump_algebra(a))
    assert b.belief == a.belief and b.knowledge == a.knowledge
    with pytest.raises(ModelError):
        algebra_from_dict({"atoms": 1})
    with pytest.raises(ModelError):
        load_algebra("{")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 4))
def test_harsanyi_powerset_has_unique_partition_K(seed, n):
    rng = random.Random(seed)
    m = random_harsanyi_space(rng, n, q=rng.choice([2, 3, 4]))
    a = make_powerset_algebra(m)
    assert check_sigma_h_laws(a).ok()
    assert search_K(a) == [partition_operator(n, m.type_classes(1))]
