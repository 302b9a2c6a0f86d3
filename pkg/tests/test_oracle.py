from __future__ import annotations

import pytest

from featprec import (
    PLUS,
    STAR,
    BudgetExceeded,
    Closure,
    Feature,
    FirstDaughter,
    Member,
    OracleBudget,
    RuleId,
    Signature,
    brute_force_consistent,
    find_model,
    normalize,
    replay_states,
    rule_soundness_check,
    satisfies_all,
    valid_interpretation,
)
from featprec.oracle import restricted_growth
from helpers import SIG, store_of


def plus(a, b):
    return Closure(a, "p", PLUS, b)


def star(a, b):
    return Closure(a, "p", STAR, b)


def first_step(store, rule):
    _, trace = normalize(store)
    for step, before, after in replay_states(store, trace):
        if step.rule is rule:
            return before, after
    raise AssertionError(f"{rule} did not fire")


class TestBruteForce:
    def test_plus_self_loop(self):
        assert not brute_force_consistent(SIG, store_of(plus("x", "x")))

    def test_empty(self):
        assert brute_force_consistent(SIG, store_of())

    def test_two_values_of_a_feature(self):
        assert brute_force_consistent(SIG, store_of(Feature("x", "f", "y"), Feature("x", "f", "z")))

    def test_chain_needs_two_elements(self):
        found = find_model(SIG, store_of(plus("x", "y")))
        assert found is not None
        model, alpha = found
        assert len(model.universe) == 2
        assert valid_interpretation(model)
        assert satisfies_all(model, alpha, store_of(plus("x", "y")))

    def test_universe_bound(self):
        # three strictly ordered variables need three elements
        store = store_of(plus("x", "y"), plus("y", "z"))
        assert brute_force_consistent(SIG, store)
        assert not brute_force_consistent(SIG, store, OracleBudget(max_universe=2))

    def test_budget(self):
        sig = Signature(frozenset({"f", "g", "h"}), frozenset({"p"}))
        store = store_of(Feature("x", "f", "y"), Feature("x", "g", "z"), Feature("x", "h", "y"), plus("x", "z"), sig=sig)
        with pytest.raises(BudgetExceeded):
            brute_force_consistent(sig, store)

    def test_first_daughter_direct(self):
        store = store_of(FirstDaughter("x", "f", "p", "y"), Member("x", "f", "z"), plus("z", "y"))
        assert not brute_force_consistent(SIG, store)

    def test_deterministic(self):
        store = store_of(plus("x", "y"), Member("y", "f", "x"))
        assert find_model(SIG, store) == find_model(SIG, store)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            brute_force_consistent(SIG, store_of(), method="guess")

    @pytest.mark.parametrize("store", [
        store_of(plus("x", "y")),
        store_of(plus("x", "y"), plus("y", "x")),
        store_of(Feature("x", "f", "y"), Member("x", "f", "x")),
        store_of(star("x", "y"), Feature("y", "f", "x")),
    ])
    def test_reference_agrees(self, store):
        assert brute_force_consistent(SIG, store, OracleBudget(max_universe=2)) == brute_force_consistent(
            SIG, store, OracleBudget(max_universe=2), method="reference")


class TestRuleSoundnessCheck:
    def test_cycle_step(self):
        before, after = first_step(store_of(star("x", "y"), star("y", "x")), RuleId.CYCLE)
        assert rule_soundness_check(before, after)

    def test_trans_clos_step(self):
        before, after = first_step(store_of(plus("x", "y"), star("y", "z")), RuleId.TRANS_CLOS)
        assert rule_soundness_check(before, after)

    def test_negative_control(self):
        assert not rule_soundness_check(store_of(plus("x", "y")), store_of(plus("x", "x")))


def test_restricted_growth():
    assert list(restricted_growth(3, 2)) == [(0, 0, 0), (0, 0, 1), (0, 1, 0), (0, 1, 1)]
    assert len(list(restricted_growth(4, 4))) == 15  # Bell number
    assert list(restricted_growth(0, 3)) == [()]
