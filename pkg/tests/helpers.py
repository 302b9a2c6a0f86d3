"""Store generators shared by the test modules."""

from __future__ import annotations

import itertools
import random

from featprec import (
    PLUS,
    STAR,
    Closure,
    ConstraintStore,
    DomPrec,
    Eq,
    Feature,
    FirstDaughter,
    ImmPrec,
    InvImmPrec,
    Member,
    Signature,
    Subset,
    add_constraints,
)

SIG = Signature(frozenset({"f"}), frozenset({"p"}))
SIG2 = Signature(frozenset({"f", "g"}), frozenset({"p"}))
VARS3 = ("x", "y", "z")


def store_of(*cs, sig: Signature = SIG, defer: bool = True) -> ConstraintStore:
    return add_constraints(ConstraintStore(sig), cs, defer_equality=defer)


def all_forms(variables=VARS3, features=("f",), precs=("p",), immediate=True, first_daughter=True):
    """Every non-tautological constraint over the given symbols and variables."""
    forms = []
    pairs = list(itertools.product(variables, repeat=2))
    forms += [Eq(a, b) for a, b in pairs if a < b]
    for f in features:
        forms += [Feature(a, f, b) for a, b in pairs]
        forms += [Member(a, f, b) for a, b in pairs]
        forms += [Subset(a, f, g, b) for g in features for a, b in pairs]
    for p in precs:
        forms += [Closure(a, p, PLUS, b) for a, b in pairs]
        forms += [Closure(a, p, STAR, b) for a, b in pairs if a != b]
        for f in features:
            forms += [DomPrec(f, a, p, k, g, b) for g in features for k in (PLUS, STAR) for a, b in pairs]
            if first_daughter:
                forms += [FirstDaughter(a, f, p, b) for a, b in pairs]
        if immediate:
            forms += [Member(a, p, b) for a, b in pairs]
            forms += [ImmPrec(a, p, b) for a, b in pairs]
            forms += [InvImmPrec(a, p, b) for a, b in pairs]
    return forms


def random_store(rng: random.Random, n_vars: int, n_constraints: int, sig: Signature = SIG,
                 immediate: bool = True, first_daughter: bool = True, prefix: str = "v",
                 acyclic: bool = False) -> ConstraintStore:
    """Random constraints; ``acyclic`` orients every precedence edge forwards."""
    variables = [f"{prefix}{i}" for i in range(n_vars)]
    features = sorted(sig.features)
    precs = sorted(sig.precedences)
    cs = []
    for _ in range(n_constraints):
        a, b = rng.choice(variables), rng.choice(variables)
        if acyclic:
            i, j = sorted(rng.sample(range(n_vars), 2))
            a, b = variables[i], variables[j]
        f, g, p = rng.choice(features), rng.choice(features), rng.choice(precs)
        k = rng.choice((PLUS, STAR))
        options = [
            Feature(a, f, b) if acyclic else Eq(a, b), Feature(a, f, b), Member(a, f, b), Subset(a, f, g, b),
            Closure(a, p, k, b), Closure(a, p, k, b), DomPrec(f, a, p, k, g, b),
        ]
        if first_daughter:
            options.append(FirstDaughter(a, f, p, b))
        if immediate:
            options += [Member(a, p, b), ImmPrec(a, p, b), InvImmPrec(b, p, a)]
        cs.append(rng.choice(options))
    return add_constraints(ConstraintStore(sig), cs, defer_equality=True)
