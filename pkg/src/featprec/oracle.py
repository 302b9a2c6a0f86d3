"""Brute-force satisfiability over small finite universes.

Every binary relation over an n-element universe is enumerated for each
symbol that occurs in the store (precedence symbols restricted to relations
with an irreflexive transitive closure), together with every assignment of
variables to elements. This is the ground truth the rewrite engine is
checked against; it shares no code with the engine.

For speed the relation space is handled as a bitset: for each constraint
and assignment, a big integer with one bit per point of the product of the
per-symbol relation sets records where the constraint holds. A store is
satisfiable under an assignment iff the AND of its constraints' bitsets is
nonzero. ``method="reference"`` walks the same space one interpretation at
a time through :func:`satisfies_all` instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded
from .model import (
    PLUS,
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
    constraint_symbols,
)
from .semantics import Interpretation, satisfies_all, valid_interpretation


@dataclass(frozen=True)
class OracleBudget:
    max_universe: int = 3
    max_relation_bits: int = 27

    def __post_init__(self):
        if self.max_universe < 1:
            raise ValueError("max_universe must be at least 1")
        if self.max_relation_bits < 1:
            raise ValueError("max_relation_bits must be positive")


def restricted_growth(k: int, n: int):
    """Assignments of k variables to n elements, one per orbit of element renaming."""
    if k == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for e in range(min(top + 2, n)):
            prefix.append(e)
            yield from rec(prefix, max(top, e))
            prefix.pop()

    yield from rec([], -1)


@lru_cache(maxsize=256)
def _assignments(k: int, n: int) -> tuple:
    return tuple(restricted_growth(k, n))


# --------------------------------------------------------------------------
# relation spaces


@lru_cache(maxsize=None)
def _all_relations(n: int) -> np.ndarray:
    codes = np.arange(2 ** (n * n), dtype=np.uint32)
    bits = (codes[:, None] >> np.arange(n * n, dtype=np.uint32)) & 1
    return bits.astype(bool).reshape(-1, n, n)


def _transitive_closure(mats: np.ndarray) -> np.ndarray:
    closure = mats.copy()
    for _ in range(mats.shape[1]):
        step = np.einsum("rij,rjk->rik", closure.astype(np.uint8), mats.astype(np.uint8)) > 0
        grown = closure | step
        if np.array_equal(grown, closure):
            break
        closure = grown
    return closure


@lru_cache(maxsize=None)
def _precedence_relations(n: int):
    mats = _all_relations(n)
    plus = _transitive_closure(mats)
    ok = ~np.any(np.diagonal(plus, axis1=1, axis2=2), axis=1)
    mats, plus = mats[ok], plus[ok]
    star = plus | np.eye(n, dtype=bool)[None]
    return mats, plus, star


class _Space:
    """The product of relation sets for a tuple of symbol sorts."""

    def __init__(self, n: int, sorts: tuple):
        self.n = n
        self.sorts = sorts
        self.axes = []
        for is_prec in sorts:
            if is_prec:
                self.axes.append(_precedence_relations(n))
            else:
                self.axes.append((_all_relations(n), None, None))
        self.shape = tuple(ax[0].shape[0] for ax in self.axes)
        self.size = int(np.prod(self.shape, dtype=np.int64)) if sorts else 1
        self.full = (1 << self.size) - 1
        self.tables = {}

    def to_bits(self, arr: np.ndarray, labels: list) -> int:
        arr, labels = _collapse(arr, labels)
        order = np.argsort(labels)
        arr = np.transpose(arr, order)
        shape = [1] * len(self.shape)
        for ax in sorted(labels):
            shape[ax] = self.shape[ax]
        flat = np.broadcast_to(arr.reshape(shape), self.shape).ravel()
        return int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little")

    def table(self, key) -> int:
        bits = self.tables.get(key)
        if bits is None:
            bits = self.tables[key] = self._compute(*key)
        return bits

    def _compute(self, tag, axes, kind, a, b) -> int:
        n = self.n
        onehot = np.zeros(n, dtype=bool)
        onehot[b] = True
        if tag == "eq":
            return self.full if a == b else 0
        if tag == "feature" or tag == "imm":
            (i,) = axes
            rel = self.axes[i][0]
            return self.to_bits(np.all(rel[:, a, :] == onehot, axis=1), [i])
        if tag == "inv":
            (i,) = axes
            rel = self.axes[i][0]
            return self.to_bits(np.all(rel[:, :, a] == onehot, axis=1), [i])
        if tag == "member":
            (i,) = axes
            return self.to_bits(self.axes[i][0][:, a, b], [i])
        if tag == "closure":
            (i,) = axes
            _, plus, star = self.axes[i]
            return self.to_bits((plus if kind is PLUS else star)[:, a, b], [i])
        if tag == "subset":
            i, j = axes
            f, g = self.axes[i][0], self.axes[j][0]
            arr = np.all(f[:, None, a, :] | ~g[None, :, b, :], axis=-1)
            return self.to_bits(arr, [i, j])
        if tag == "first":
            i, j = axes
            f = self.axes[i][0]
            star = self.axes[j][2]
            arr = f[:, a, b][:, None] & np.all(~f[:, None, a, :] | star[None, :, b, :], axis=-1)
            return self.to_bits(arr, [i, j])
        if tag == "domprec":
            i, j, k = axes
            f, g = self.axes[i][0], self.axes[j][0]
            order = self.axes[k][1] if kind is PLUS else self.axes[k][2]
            arr = np.ones((f.shape[0], g.shape[0], order.shape[0]), dtype=bool)
            for e1 in range(n):
                for e2 in range(n):
                    both = f[:, a, e1][:, None] & g[:, b, e2][None, :]
                    arr &= ~both[:, :, None] | order[:, e1, e2][None, None, :]
            return self.to_bits(arr, [i, j, k])
        raise AssertionError(tag)

    def decode(self, index: int, symbols: list) -> dict:
        picks = np.unravel_index(index, self.shape) if self.shape else ()
        relations = {}
        for sym, ax, pick in zip(symbols, self.axes, picks):
            mat = ax[0][pick]
            relations[sym] = frozenset((int(u), int(v)) for u, v in zip(*np.nonzero(mat)))
        return relations


def _collapse(arr: np.ndarray, labels: list):
    """Merge repeated axis labels by taking diagonals."""
    labels = list(labels)
    while len(set(labels)) != len(labels):
        for i in range(len(labels)):
            j = next((j for j in range(i + 1, len(labels)) if labels[j] == labels[i]), None)
            if j is not None:
                arr = np.diagonal(arr, axis1=i, axis2=j)
                label = labels[i]
                labels = [lab for t, lab in enumerate(labels) if t not in (i, j)] + [label]
                break
    return arr, labels


_SPACES: dict = {}


def _space(n: int, sorts: tuple) -> _Space:
    space = _SPACES.get((n, sorts))
    if space is None:
        if len(_SPACES) > 64:
            _SPACES.clear()
        space = _SPACES[n, sorts] = _Space(n, sorts)
    return space


def _shape_of(c, axis: dict):
    t = type(c)
    if t is Eq:
        return "eq", (), None
    if t is Feature:
        return "feature", (axis[c.f],), None
    if t is ImmPrec:
        return "imm", (axis[c.p],), None
    if t is InvImmPrec:
        return "inv", (axis[c.p],), None
    if t is Member:
        return "member", (axis[c.r],), None
    if t is Closure:
        return "closure", (axis[c.p],), c.kind
    if t is Subset:
        return "subset", (axis[c.f], axis[c.g]), None
    if t is FirstDaughter:
        return "first", (axis[c.f], axis[c.p]), None
    if t is DomPrec:
        return "domprec", (axis[c.f], axis[c.g], axis[c.p]), c.kind
    raise TypeError(f"not a constraint: {c!r}")


# --------------------------------------------------------------------------
# public API


def _problem(sig: Signature, store: ConstraintStore, budget: OracleBudget):
    variables = sorted(store.variables())
    symbols = sorted({s for c in store.constraints for s in constraint_symbols(c)})
    universe = max(1, min(budget.max_universe, len(variables)))
    bits = universe * universe * len(symbols)
    if bits > budget.max_relation_bits:
        raise BudgetExceeded(
            f"{len(symbols)} symbols over a universe of {universe} need {bits} relation bits "
            f"(budget {budget.max_relation_bits})")
    precs = sig.precedences | store.signature.precedences
    sorts = tuple(s in precs for s in symbols)
    return variables, symbols, sorts, universe


def find_model(sig: Signature, store: ConstraintStore, budget: OracleBudget = OracleBudget()):
    """The first model found, as ``(Interpretation, assignment)``, or None.

    Universes are tried in increasing size, assignments in restricted-growth
    order, relations in index order; the result is therefore reproducible.
    """
    variables, symbols, sorts, universe = _problem(sig, store, budget)
    index = {v: i for i, v in enumerate(variables)}
    axis = {s: i for i, s in enumerate(symbols)}
    shapes = [(_shape_of(c, axis), index[c.x], index[c.y]) for c in sorted(store.constraints, key=str)]
    bindings = [(index[k], index[v]) for k, v in sorted(store.bindings.items())]
    for n in range(1, universe + 1):
        space = _space(n, sorts)
        for alpha in _assignments(len(variables), n):
            if any(alpha[i] != alpha[j] for i, j in bindings):
                continue
            mask = space.full
            for (tag, axes, kind), i, j in shapes:
                mask &= space.table((tag, axes, kind, alpha[i], alpha[j]))
                if not mask:
                    break
            if mask:
                first = (mask & -mask).bit_length() - 1
                relations = space.decode(first, symbols)
                out_sig = Signature(sig.features | store.signature.features,
                                    sig.precedences | store.signature.precedences)
                interp = Interpretation(frozenset(range(n)), relations, out_sig)
                return interp, {v: alpha[index[v]] for v in variables}
    return None


def _reference_model(sig: Signature, store: ConstraintStore, budget: OracleBudget):
    variables, symbols, _, universe = _problem(sig, store, budget)
    out_sig = Signature(sig.features | store.signature.features,
                        sig.precedences | store.signature.precedences)
    for n in range(1, universe + 1):
        pairs = [(a, b) for a in range(n) for b in range(n)]
        for alpha in itertools.product(range(n), repeat=len(variables)):
            assign = dict(zip(variables, alpha))
            for codes in itertools.product(range(2 ** len(pairs)), repeat=len(symbols)):
                relations = {s: frozenset(pr for t, pr in enumerate(pairs) if code >> t & 1)
                             for s, code in zip(symbols, codes)}
                interp = Interpretation(frozenset(range(n)), relations, out_sig)
                if valid_interpretation(interp) and satisfies_all(interp, assign, store):
                    return interp, assign
    return None


def brute_force_consistent(sig: Signature, store: ConstraintStore,
                           budget: OracleBudget = OracleBudget(), method: str = "bitset") -> bool:
    """True iff some small interpretation and assignment satisfy every constraint."""
    if method == "bitset":
        return find_model(sig, store, budget) is not None
    if method == "reference":
        return _reference_model(sig, store, budget) is not None
    raise ValueError(f"unknown method {method!r}")


def rule_soundness_check(before: ConstraintStore, after: ConstraintStore,
                         budget: OracleBudget = OracleBudget()) -> bool:
    """True iff the oracle gives the same answer on both stores."""
    sig = Signature(before.signature.features | after.signature.features,
                    before.signature.precedences | after.signature.precedences)
    return brute_force_consistent(sig, before, budget) == brute_force_consistent(sig, after, budget)
