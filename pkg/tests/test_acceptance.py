"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line that is printed at the end of the pytest
run. ``python3 tests/test_acceptance.py`` runs them directly.
"""

from __future__ import annotations

import functools
import itertools
import random
import time

import numpy as np
import pytest

from featprec import (
    PLUS,
    STAR,
    Closure,
    ConstraintStore,
    DomPrec,
    Eq,
    Feature,
    ImmPrec,
    InvImmPrec,
    Member,
    RuleId,
    Signature,
    Subset,
    add_constraints,
    brute_force_consistent,
    canonical_model,
    corpus_path,
    evaluate,
    expand_first_daughter,
    firing_ceiling,
    linear_interpretation,
    linearize,
    normalize,
    order_to_constraints,
    parse_program,
    print_store,
    replay_states,
    rule_soundness_check,
    satisfies_all,
    valid_interpretation,
)
from featprec.oracle import OracleBudget
from helpers import SIG, SIG2, VARS3, all_forms, random_store, store_of

RESULTS: dict = {}


def criterion(number: int, title: str):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as exc:
                elapsed = time.perf_counter() - start
                RESULTS[number] = f"criterion {number} ({title}): FAIL in {elapsed:.1f}s: {exc}".splitlines()[0]
                raise
            elapsed = time.perf_counter() - start
            RESULTS[number] = f"criterion {number} ({title}): PASS in {elapsed:.1f}s{': ' + detail if detail else ''}"
        return run
    return wrap


def plus(a, b):
    return Closure(a, "p", PLUS, b)


def star(a, b):
    return Closure(a, "p", STAR, b)


def expect(constraints, bindings=None, sig=SIG):
    return ConstraintStore(sig, constraints, bindings or {})


# --------------------------------------------------------------------------
# 1. rule catalog

# rule -> (premises, conclusion of the first step, normal form)
CATALOG = {
    RuleId.EQUALS: (
        [Eq("x", "y"), Feature("y", "f", "z")],
        expect({Feature("x", "f", "z")}, {"y": "x"}),
        expect({Feature("x", "f", "z")}, {"y": "x"}),
    ),
    RuleId.FEAT: (
        [Feature("x", "f", "y"), Feature("x", "f", "z")],
        expect({Feature("x", "f", "y"), Eq("y", "z")}),
        expect({Feature("x", "f", "y")}, {"z": "y"}),
    ),
    RuleId.FEAT_EXISTS: (
        [Feature("x", "f", "y"), Member("x", "f", "z")],
        expect({Feature("x", "f", "y"), Member("x", "f", "z"), Eq("y", "z")}),
        expect({Feature("x", "f", "y"), Member("x", "f", "y")}, {"z": "y"}),
    ),
    RuleId.SUBSET: (
        [Subset("x", "f", "g", "y"), Feature("y", "g", "z")],
        expect({Subset("x", "f", "g", "y"), Feature("y", "g", "z"), Member("x", "f", "z")}, sig=SIG2),
        expect({Subset("x", "f", "g", "y"), Feature("y", "g", "z"), Member("x", "f", "z")}, sig=SIG2),
    ),
    RuleId.TRANS_CONJ: (
        [star("x", "y"), plus("x", "y")],
        expect({plus("x", "y")}),
        expect({plus("x", "y")}),
    ),
    RuleId.TRANS_CLOS: (
        [plus("x", "y"), star("y", "z")],
        expect({plus("x", "y"), star("y", "z"), plus("x", "z")}),
        expect({plus("x", "y"), star("y", "z"), plus("x", "z")}),
    ),
    RuleId.CYCLE: (
        [star("x", "y"), star("y", "x")],
        expect({Eq("x", "y")}),
        expect(set(), {"y": "x"}),
    ),
    RuleId.DOM_PREC: (
        [DomPrec("f", "x", "p", PLUS, "g", "y"), Member("x", "f", "a"), Member("y", "g", "b")],
        expect({DomPrec("f", "x", "p", PLUS, "g", "y"), Member("x", "f", "a"), Member("y", "g", "b"),
                plus("a", "b")}, sig=SIG2),
        expect({DomPrec("f", "x", "p", PLUS, "g", "y"), Member("x", "f", "a"), Member("y", "g", "b"),
                plus("a", "b")}, sig=SIG2),
    ),
    # the normal forms below also carry the p+ edge added by (ExistsTrans)
    RuleId.IP_EXISTS: (
        [ImmPrec("x", "p", "y")],
        expect({ImmPrec("x", "p", "y"), Member("x", "p", "y")}),
        expect({ImmPrec("x", "p", "y"), Member("x", "p", "y"), plus("x", "y")}),
    ),
    RuleId.EXISTS_TRANS: (
        [Member("x", "p", "y")],
        expect({Member("x", "p", "y"), plus("x", "y")}),
        expect({Member("x", "p", "y"), plus("x", "y")}),
    ),
    RuleId.INV_INTRO: (
        [InvImmPrec("x", "p", "y")],
        expect({InvImmPrec("x", "p", "y"), Member("y", "p", "x")}),
        expect({InvImmPrec("x", "p", "y"), Member("y", "p", "x"), plus("y", "x")}),
    ),
    RuleId.INV_EXISTS: (
        [InvImmPrec("x", "p", "y"), Member("z", "p", "x")],
        expect({InvImmPrec("x", "p", "y"), Member("z", "p", "x"), Eq("y", "z")}),
        expect({InvImmPrec("x", "p", "y"), Member("y", "p", "x"), plus("y", "x")}, {"z": "y"}),
    ),
}


@criterion(1, "rule catalog")
def test_rule_catalog():
    assert len(CATALOG) == 12
    for rule, (premises, step_out, normal) in CATALOG.items():
        store = store_of(*premises, sig=step_out.signature)
        verdict, trace = normalize(store)
        assert verdict.consistent, rule
        first, before, after = next(replay_states(store, trace))
        assert first.rule is rule, (rule, first)
        assert after == step_out, (rule, after)
        assert verdict.store == normal, (rule, verdict.store)
    return "12 rules, first step and normal form exact"


# --------------------------------------------------------------------------
# 2. exhaustive oracle equivalence


def _orbit_representatives(forms, variables, max_size):
    """One combination of forms per orbit under renaming of the variables."""
    index = {c: i for i, c in enumerate(forms)}

    def canon(c):
        return Eq(min(c.x, c.y), max(c.x, c.y)) if type(c) is Eq else c

    perms = []
    for image in itertools.permutations(variables):
        mapping = dict(zip(variables, image))
        perms.append(np.array([index[canon(c.rename(mapping))] for c in forms], dtype=np.int64))

    def key(rows):
        rows = np.sort(rows, axis=1)
        out = np.zeros(len(rows), dtype=np.int64)
        for j in range(rows.shape[1]):
            out = out * len(forms) + rows[:, j]
        return out

    total = 0
    for k in range(max_size + 1):
        if k == 0:
            combos = np.zeros((1, 0), dtype=np.int64)
        else:
            flat = itertools.chain.from_iterable(itertools.combinations(range(len(forms)), k))
            combos = np.fromiter(flat, dtype=np.int64).reshape(-1, k)
        total += len(combos)
        own = key(combos)
        least = own.copy()
        for perm in perms:
            least = np.minimum(least, key(perm[combos]))
        yield from combos[own == least]
    _orbit_representatives.total = total


@criterion(2, "oracle equivalence")
def test_exhaustive_oracle_equivalence():
    forms = all_forms()
    assert len(forms) == 99
    checked = clashes = 0
    mismatches = []
    for row in _orbit_representatives(forms, VARS3, 4):
        store = store_of(*(forms[i] for i in row))
        verdict, _ = normalize(store)
        sat = brute_force_consistent(SIG, store)
        checked += 1
        clashes += not verdict.consistent
        if verdict.consistent != sat:
            mismatches.append(store)
    assert not mismatches, f"{len(mismatches)} disagreements, first {mismatches[0]!r}"
    total = _orbit_representatives.total
    return f"{total} stores ({checked} up to renaming), {clashes} clash, 0 disagreements"


# --------------------------------------------------------------------------
# 3. per-step soundness


@criterion(3, "per-step soundness")
def test_per_step_soundness():
    rng = random.Random(3)
    fired = {rule: 0 for rule in RuleId}
    steps = 0
    budget = OracleBudget()
    # uniform draws, then draws over precedence forms only, where the
    # immediate-precedence completion rules get a chance to fire
    prec_forms = [c for c in all_forms() if type(c) in (Closure, ImmPrec, InvImmPrec)
                  or (type(c) is Member and c.r == "p")]
    stores = [random_store(rng, rng.randint(2, 3), rng.randint(2, 8), prefix="") for _ in range(1000)]
    stores += [store_of(*rng.sample(prec_forms, rng.randint(2, 4))) for _ in range(1000)]
    for store in stores:
        expanded = expand_first_daughter(store)
        assert rule_soundness_check(store, expanded, budget)
        _, trace = normalize(store)
        for step, before, after in replay_states(store, trace):
            assert rule_soundness_check(before, after, budget), (str(step), before)
            fired[step.rule] += 1
            steps += 1
    idle = [str(r) for r, n in fired.items() if not n]
    assert not idle, f"rules never exercised: {idle}"
    least = min(fired, key=fired.get)
    return f"{len(stores)} stores, {steps} steps, every rule fired (least: {least} x{fired[least]})"


# --------------------------------------------------------------------------
# 4. canonical model


@criterion(4, "canonical model")
def test_canonical_model_satisfies_original():
    rng = random.Random(4)
    sig = Signature(frozenset({"f", "g"}), frozenset({"p", "q"}))
    found = tried = 0
    while found < 1000:
        tried += 1
        store = random_store(rng, rng.randint(1, 6), rng.randint(1, 10), sig=sig)
        verdict, _ = normalize(store)
        if not verdict.consistent:
            continue
        interp, assign = canonical_model(verdict.store)
        assert valid_interpretation(interp), store
        assert satisfies_all(interp, assign, store), store
        found += 1
    return f"1000 consistent stores out of {tried} generated"


# --------------------------------------------------------------------------
# 5. termination and determinism


@criterion(5, "termination and determinism")
def test_termination_and_determinism():
    rng = random.Random(5)
    sig = Signature(frozenset({"f", "g"}), frozenset({"p"}))
    stores = [random_store(rng, 50, rng.randint(40, 120), sig=sig, acyclic=i % 2 == 0) for i in range(20)]
    for _ in range(10):
        # forward precedence edges only: consistent, with a large transitive closure
        edges = [sorted(rng.sample(range(50), 2)) for _ in range(rng.randint(100, 400))]
        cs = [Closure(f"v{i}", "p", rng.choice((PLUS, STAR)), f"v{j}") for i, j in edges]
        stores.append(add_constraints(ConstraintStore(sig), cs))
    slowest, firings = 0.0, 0
    for store in stores:
        start = time.perf_counter()
        _, trace = normalize(store)
        elapsed = time.perf_counter() - start
        slowest = max(slowest, elapsed)
        firings = max(firings, len(trace))
        assert elapsed < 1.0
        assert len(trace) <= firing_ceiling(expand_first_daughter(store))
    for _ in range(100):
        n_vars = rng.randint(2, 8)
        cs = list(random_store(rng, n_vars, rng.randint(1, 12)).constraints)
        outputs = set()
        for _ in range(5):
            rng.shuffle(cs)
            verdict, _ = normalize(add_constraints(ConstraintStore(SIG), cs, defer_equality=True))
            outputs.add(print_store(verdict.store) + str(verdict.consistent))
        assert len(outputs) == 1
    return (f"30 stores over 50 variables, slowest {slowest * 1000:.0f} ms, "
            f"most firings {firings}; 100 stores order-independent")


# --------------------------------------------------------------------------
# 6. linearization


@criterion(6, "linearization")
def test_linearization():
    rng = random.Random(6)
    found = 0
    while found < 500:
        store = random_store(rng, rng.randint(2, 8), rng.randint(1, 10), sig=SIG2, immediate=False)
        verdict, _ = normalize(store)
        if not verdict.consistent:
            continue
        order = linearize(verdict.store, "p")
        interp, assign = linear_interpretation(verdict.store, "p", order)
        for c in verdict.store.constraints:
            if getattr(c, "p", None) == "p":
                assert evaluate(interp, assign, c), (c, order)
        found += 1
    return "500 normal forms"


# --------------------------------------------------------------------------
# 7. German scrambling corpus

TOKENS = ("er", "mann", "strasse", "laufen", "sah")
GRAMMATICAL = {
    ("er", "mann", "strasse", "laufen", "sah"),
    ("er", "strasse", "mann", "laufen", "sah"),
    ("mann", "er", "strasse", "laufen", "sah"),
    ("mann", "strasse", "er", "laufen", "sah"),
    ("strasse", "er", "mann", "laufen", "sah"),
    ("strasse", "mann", "er", "laufen", "sah"),
}


def _german_model(sig, order):
    """An explicit interpretation for a grammatical order."""
    rel = {
        "dom": {("er", "er"), ("mann", "mann"), ("strasse", "strasse"),
                ("laufen", "mann"), ("laufen", "strasse"),
                ("sah", "er"), ("sah", "mann"), ("sah", "strasse")},
        "subcat": {("laufen", "mann"), ("laufen", "strasse"), ("sah", "er"), ("sah", "laufen")},
        "self": {("laufen", "laufen"), ("sah", "sah")},
        "p": set(zip(order, order[1:])),
    }
    from featprec import Interpretation
    return Interpretation(frozenset(TOKENS), {k: frozenset(v) for k, v in rel.items()}, sig)


def _sub_store(store, keep):
    return ConstraintStore(store.signature, [c for c in store.constraints if set(c.variables) <= keep])


def _pairwise(order):
    return [Closure(a, "p", PLUS, b) for a, b in itertools.combinations(order, 2)]


@criterion(7, "German scrambling")
def test_german_scrambling():
    sig, store = parse_program(corpus_path().read_text())
    start = time.perf_counter()
    accepted = set()
    for perm in itertools.permutations(TOKENS):
        verdict, _ = normalize(add_constraints(store, order_to_constraints(perm, "p", sig)))
        if verdict.consistent:
            accepted.add(perm)
    elapsed = time.perf_counter() - start
    assert accepted == GRAMMATICAL
    assert elapsed < 1.0

    # Independent check. Five tokens over four symbols is beyond the brute-force
    # budget, so the order is stated pairwise (v_i <+ v_j for all i < j, which
    # is equivalent to the chain) and the oracle runs on every two-token
    # sub-store. For a rejected order one unsatisfiable sub-store refutes it;
    # an accepted order is confirmed by an explicit model.
    rng = random.Random(7)
    rejected = sorted(set(itertools.permutations(TOKENS)) - GRAMMATICAL)
    pairs = list(itertools.combinations(TOKENS, 2))
    for perm in rng.sample(sorted(GRAMMATICAL), 3):
        full = add_constraints(store, _pairwise(perm))
        assert satisfies_all(_german_model(sig, perm), {t: t for t in TOKENS}, full)
        assert all(brute_force_consistent(sig, _sub_store(full, set(keep))) for keep in pairs)
    for perm in rng.sample(rejected, 3):
        full = add_constraints(store, _pairwise(perm))
        assert any(not brute_force_consistent(sig, _sub_store(full, set(keep))) for keep in pairs), perm
    return f"6 of 120 accepted in {elapsed * 1000:.0f} ms; oracle agrees on 3 + 3"


# --------------------------------------------------------------------------
# 8. clash fast path


@criterion(8, "clash fast path")
def test_clash_fast_path():
    verdict, _ = normalize(store_of(plus("x", "y"), plus("y", "x")))
    assert not verdict.consistent
    assert verdict.witness == plus("x", "x")
    verdict, _ = normalize(store_of(star("x", "y"), star("y", "x")))
    assert verdict.consistent
    assert verdict.store.representative("y") == "x"
    assert verdict.store.constraints == frozenset()


if __name__ == "__main__":
    tests = [test_rule_catalog, test_exhaustive_oracle_equivalence, test_per_step_soundness,
             test_canonical_model_satisfies_original, test_termination_and_determinism,
             test_linearization, test_german_scrambling, test_clash_fast_path]
    for test in tests:
        try:
            test()
        except Exception:
            pass
    for n in sorted(RESULTS):
        print(RESULTS[n])
    raise SystemExit(0 if all("PASS" in line for line in RESULTS.values()) else 1)
