"""Deterministic rewriting of a constraint store to normal form.

Rules fire one instance at a time. The instance chosen is the first by
(rule priority, printed form of its premises); the order of the input
constraints therefore never matters.
"""

from __future__ import annotations

import enum
import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model import (
    PLUS,
    STAR,
    Closure,
    ClosureKind,
    ConstraintStore,
    DomPrec,
    Eq,
    Feature,
    FirstDaughter,
    ImmPrec,
    InvImmPrec,
    Member,
    Subset,
    add_constraint,
    first_daughter_symbol,
    is_tautology,
    merge,
)


class RuleId(enum.Enum):
    EQUALS = "Equals"
    FEAT = "Feat"
    FEAT_EXISTS = "FeatExists"
    INV_EXISTS = "InvExists"
    CYCLE = "Cycle"
    TRANS_CONJ = "TransConj"
    IP_EXISTS = "IPExists"
    INV_INTRO = "InvIntro"
    EXISTS_TRANS = "ExistsTrans"
    SUBSET = "Subset"
    TRANS_CLOS = "TransClos"
    DOM_PREC = "DomPrec"
    # Completion rules for immediate precedence: a p-step out of (into) a
    # node with a unique successor (predecessor) must pass through it.
    IMM_SUCC = "ImmSucc"
    INV_PRED = "InvPred"

    def __str__(self):
        return self.value


SCHEDULE = tuple(RuleId)
_PRIORITY = {rule: i for i, rule in enumerate(SCHEDULE)}


def compose_closure(k1: ClosureKind, k2: ClosureKind) -> ClosureKind:
    """p* composed with p* stays p*; anything involving p+ is p+."""
    return STAR if k1 is STAR and k2 is STAR else PLUS


@dataclass(frozen=True)
class TraceStep:
    rule: RuleId
    consumed: tuple
    added: tuple = ()
    removed: tuple = ()
    binding: tuple | None = None  # (merged-away variable, representative)

    def __str__(self):
        produced = [str(c) for c in self.added]
        produced += [f"drop {c}" for c in self.removed if c not in self.consumed or self.rule is not RuleId.EQUALS]
        if self.binding:
            produced.append(f"{self.binding[0]} := {self.binding[1]}")
        lhs = " & ".join(str(c) for c in self.consumed)
        return f"RULE {self.rule}: {lhs} ==> {' & '.join(produced) or 'true'}"

    def apply(self, store: ConstraintStore) -> ConstraintStore:
        """Replay this step on ``store``."""
        constraints = store.constraints - set(self.removed)
        store = ConstraintStore(store.signature, constraints, store.bindings)
        if self.binding:
            loser, rep = self.binding
            store = merge(store, loser, rep)
        for c in self.added:
            store = add_constraint(store, c, defer_equality=True)
        return store


@dataclass(frozen=True)
class Consistent:
    store: ConstraintStore

    consistent = True


@dataclass(frozen=True)
class Clash:
    witness: Closure
    store: ConstraintStore

    consistent = False


Verdict = Consistent | Clash


def expand_first_daughter(store: ConstraintStore) -> ConstraintStore:
    """Replace each ``x = [f p 1] y`` by its translation over a fresh feature."""
    fds = [c for c in store.constraints if isinstance(c, FirstDaughter)]
    if not fds:
        return store
    fresh = {first_daughter_symbol(c.f, c.p) for c in fds}
    sig = store.signature.with_features(fresh)
    out = ConstraintStore(sig, store.constraints - set(fds), store.bindings)
    for c in sorted(fds, key=str):
        fd = first_daughter_symbol(c.f, c.p)
        for new in (Feature(c.x, fd, c.y), Member(c.x, c.f, c.y), DomPrec(fd, c.x, c.p, STAR, c.f, c.x)):
            out = add_constraint(out, new)
    return out


def firing_ceiling(store: ConstraintStore) -> int:
    """Upper bound on rule firings: 10 forms x |V|^2 x |symbols|."""
    n_vars = max(len(store.variables()), 1)
    n_syms = max(len(store.signature.symbols), 1)
    return 10 * n_vars * n_vars * n_syms + 10


class _Workspace:
    """Mutable, indexed copy of a store used while rewriting."""

    def __init__(self, store: ConstraintStore):
        self.sig = store.signature
        self.bindings = dict(store.bindings)
        self.cs = set()
        self.by_var = defaultdict(set)
        self.feat = defaultdict(set)      # (x, f) -> {y}   Feature
        self.imm = defaultdict(set)       # (x, p) -> {y}   ImmPrec
        self.inv = defaultdict(set)       # (x, p) -> {y}   InvImmPrec
        self.mem = defaultdict(set)       # (x, r) -> {y}   Member
        self.mem_in = defaultdict(set)    # (y, r) -> {x}
        self.plus_out = defaultdict(set)  # (x, p) -> {y}
        self.plus_in = defaultdict(set)
        self.star_out = defaultdict(set)
        self.star_in = defaultdict(set)
        self.subset_by_y = defaultdict(set)
        self.dom_by_x = defaultdict(set)
        self.dom_by_y = defaultdict(set)
        self.heap = []
        self.tick = 0
        self.clash = None
        self._names = {}
        for c in sorted(store.constraints, key=str):
            self.insert(c)

    # -- bookkeeping --------------------------------------------------

    def name(self, c) -> str:
        s = self._names.get(c)
        if s is None:
            s = self._names[c] = str(c)
        return s

    def _index(self, c, add: bool):
        op = set.add if add else set.discard
        t = type(c)
        if t is Feature:
            op(self.feat[c.x, c.f], c.y)
        elif t is Member:
            op(self.mem[c.x, c.r], c.y)
            op(self.mem_in[c.y, c.r], c.x)
        elif t is Closure:
            if c.kind is PLUS:
                op(self.plus_out[c.x, c.p], c.y)
                op(self.plus_in[c.y, c.p], c.x)
            else:
                op(self.star_out[c.x, c.p], c.y)
                op(self.star_in[c.y, c.p], c.x)
        elif t is ImmPrec:
            op(self.imm[c.x, c.p], c.y)
        elif t is InvImmPrec:
            op(self.inv[c.x, c.p], c.y)
        elif t is Subset:
            op(self.subset_by_y[c.y, c.g], c)
        elif t is DomPrec:
            op(self.dom_by_x[c.x, c.f], c)
            op(self.dom_by_y[c.y, c.g], c)
        for v in c.variables:
            op(self.by_var[v], c)

    def insert(self, c) -> bool:
        if is_tautology(c) or c in self.cs:
            return False
        self.cs.add(c)
        self._index(c, True)
        if type(c) is Closure and c.kind is PLUS and c.x == c.y:
            if self.clash is None or self.name(c) < self.name(self.clash):
                self.clash = c
        for rule, premises in self.candidates(c):
            self.push(rule, premises)
        return True

    def remove(self, c):
        self.cs.discard(c)
        self._index(c, False)

    def push(self, rule, premises):
        self.tick += 1
        key = tuple(self.name(p) for p in premises)
        heapq.heappush(self.heap, (_PRIORITY[rule], key, self.tick, rule, premises))

    def store(self) -> ConstraintStore:
        return ConstraintStore(self.sig, self.cs, self.bindings)

    def succ(self, x, f) -> Iterator:
        """Feature and Member constraints giving f-values of x."""
        for y in self.feat.get((x, f), ()):
            yield Feature(x, f, y)
        for y in self.mem.get((x, f), ()):
            yield Member(x, f, y)

    def has_order(self, x, p, y, kind) -> bool:
        if y in self.plus_out.get((x, p), ()):
            return True
        if kind is STAR:
            return x == y or y in self.star_out.get((x, p), ())
        return False

    # -- candidate generation: every instance that uses c as a premise --

    def candidates(self, c) -> Iterator:
        t = type(c)
        R = RuleId
        if t is Eq:
            yield R.EQUALS, (c,)
        elif t is Feature or t is ImmPrec:
            sym = c.f if t is Feature else c.p
            index = self.feat if t is Feature else self.imm
            for y2 in index.get((c.x, sym), ()):
                if y2 != c.y:
                    other = t(c.x, sym, y2)
                    yield R.FEAT, tuple(sorted((c, other), key=self.name))
            for z in self.mem.get((c.x, sym), ()):
                if z != c.y:
                    yield R.FEAT_EXISTS, (c, Member(c.x, sym, z))
            if t is Feature:
                yield from self._as_value(c, c.x, c.f, c.y)
            else:
                yield R.IP_EXISTS, (c,)
                for z in self.plus_out.get((c.x, c.p), ()):
                    yield R.IMM_SUCC, (c, Closure(c.x, c.p, PLUS, z))
        elif t is Member:
            for y in self.feat.get((c.x, c.r), ()):
                if y != c.y:
                    yield R.FEAT_EXISTS, (Feature(c.x, c.r, y), c)
            for y in self.imm.get((c.x, c.r), ()):
                if y != c.y:
                    yield R.FEAT_EXISTS, (ImmPrec(c.x, c.r, y), c)
            if c.r in self.sig.precedences:
                for y in self.inv.get((c.y, c.r), ()):
                    if y != c.x:
                        yield R.INV_EXISTS, (InvImmPrec(c.y, c.r, y), c)
                yield R.EXISTS_TRANS, (c,)
            else:
                yield from self._as_value(c, c.x, c.r, c.y)
        elif t is Closure:
            x, p, y = c.x, c.p, c.y
            if c.kind is STAR:
                if x in self.star_out.get((y, p), ()):
                    yield R.CYCLE, tuple(sorted((c, Closure(y, p, STAR, x)), key=self.name))
                if y in self.plus_out.get((x, p), ()):
                    yield R.TRANS_CONJ, (c, Closure(x, p, PLUS, y))
            else:
                if y in self.star_out.get((x, p), ()):
                    yield R.TRANS_CONJ, (Closure(x, p, STAR, y), c)
                for y2 in self.imm.get((x, p), ()):
                    yield R.IMM_SUCC, (ImmPrec(x, p, y2), c)
                for y2 in self.inv.get((y, p), ()):
                    yield R.INV_PRED, (InvImmPrec(y, p, y2), c)
            for z in self.plus_out.get((y, p), ()):
                yield R.TRANS_CLOS, (c, Closure(y, p, PLUS, z))
            for z in self.star_out.get((y, p), ()):
                yield R.TRANS_CLOS, (c, Closure(y, p, STAR, z))
            for w in self.plus_in.get((x, p), ()):
                yield R.TRANS_CLOS, (Closure(w, p, PLUS, x), c)
            for w in self.star_in.get((x, p), ()):
                yield R.TRANS_CLOS, (Closure(w, p, STAR, x), c)
        elif t is InvImmPrec:
            for z in self.mem_in.get((c.x, c.p), ()):
                if z != c.y:
                    yield R.INV_EXISTS, (c, Member(z, c.p, c.x))
            yield R.INV_INTRO, (c,)
            for z in self.plus_in.get((c.x, c.p), ()):
                yield R.INV_PRED, (c, Closure(z, c.p, PLUS, c.x))
        elif t is Subset:
            for g in self.succ(c.y, c.g):
                yield R.SUBSET, (c, g)
        elif t is DomPrec:
            for a in list(self.succ(c.x, c.f)):
                for b in self.succ(c.y, c.g):
                    yield R.DOM_PREC, (c, a, b)

    def _as_value(self, c, x, f, y) -> Iterator:
        """Instances where ``c`` supplies an f-value y of x."""
        for s in self.subset_by_y.get((x, f), ()):
            yield RuleId.SUBSET, (s, c)
        for d in self.dom_by_x.get((x, f), ()):
            for b in self.succ(d.y, d.g):
                yield RuleId.DOM_PREC, (d, c, b)
        for d in self.dom_by_y.get((x, f), ()):
            for a in self.succ(d.x, d.f):
                yield RuleId.DOM_PREC, (d, a, c)

    # -- applicability ------------------------------------------------

    def valid(self, rule, premises) -> bool:
        cs = self.cs
        for p in premises:
            if p not in cs:
                return False
        R = RuleId
        if rule is R.EQUALS or rule is R.FEAT or rule is R.CYCLE or rule is R.TRANS_CONJ:
            return True
        if rule is R.FEAT_EXISTS or rule is R.INV_EXISTS:
            return True  # distinct endpoints checked at generation; renaming removes stale ones
        if rule is R.IP_EXISTS:
            c = premises[0]
            return Member(c.x, c.p, c.y) not in cs
        if rule is R.INV_INTRO:
            c = premises[0]
            return Member(c.y, c.p, c.x) not in cs
        if rule is R.EXISTS_TRANS:
            c = premises[0]
            return c.y not in self.plus_out.get((c.x, c.r), ())
        if rule is R.SUBSET:
            s, g = premises
            z = g.y
            return z not in self.feat.get((s.x, s.f), ()) and z not in self.mem.get((s.x, s.f), ())
        if rule is R.TRANS_CLOS:
            c1, c2 = premises
            return self._may_add(c1.x, c1.p, compose_closure(c1.kind, c2.kind), c2.y)
        if rule is R.DOM_PREC:
            d, a, b = premises
            return self._may_add(a.y, d.p, d.kind, b.y)
        if rule is R.IMM_SUCC:
            c, e = premises
            return c.y != e.y and not self.has_order(c.y, c.p, e.y, STAR)
        if rule is R.INV_PRED:
            c, e = premises
            return c.y != e.x and not self.has_order(e.x, c.p, c.y, STAR)
        raise AssertionError(rule)

    def _may_add(self, x, p, kind, z) -> bool:
        if z in self.plus_out.get((x, p), ()):
            return False
        if kind is STAR:
            return x != z and z not in self.star_out.get((x, p), ())
        return True

    def conclusion(self, rule, premises):
        """(added, removed) for a valid instance."""
        R = RuleId
        if rule is R.FEAT:
            c1, c2 = premises
            return (Eq(c1.y, c2.y),), (c2,)
        if rule is R.FEAT_EXISTS:
            c, m = premises
            return (Eq(c.y, m.y),), ()
        if rule is R.INV_EXISTS:
            c, m = premises
            return (Eq(c.y, m.x),), ()
        if rule is R.CYCLE:
            c1, c2 = premises
            return (Eq(c1.x, c1.y),), (c1, c2)
        if rule is R.TRANS_CONJ:
            return (), (premises[0],)
        if rule is R.IP_EXISTS:
            c = premises[0]
            return (Member(c.x, c.p, c.y),), ()
        if rule is R.INV_INTRO:
            c = premises[0]
            return (Member(c.y, c.p, c.x),), ()
        if rule is R.EXISTS_TRANS:
            c = premises[0]
            return (Closure(c.x, c.r, PLUS, c.y),), ()
        if rule is R.SUBSET:
            s, g = premises
            return (Member(s.x, s.f, g.y),), ()
        if rule is R.TRANS_CLOS:
            c1, c2 = premises
            return (Closure(c1.x, c1.p, compose_closure(c1.kind, c2.kind), c2.y),), ()
        if rule is R.DOM_PREC:
            d, a, b = premises
            return (Closure(a.y, d.p, d.kind, b.y),), ()
        if rule is R.IMM_SUCC:
            c, e = premises
            return (Closure(c.y, c.p, STAR, e.y),), ()
        if rule is R.INV_PRED:
            c, e = premises
            return (Closure(e.x, c.p, STAR, c.y),), ()
        raise AssertionError(rule)

    def fire(self, rule, premises) -> TraceStep:
        if rule is RuleId.EQUALS:
            eq = premises[0]
            self.remove(eq)
            rep, loser = min(eq.x, eq.y), max(eq.x, eq.y)
            self.merge(loser, rep)
            return TraceStep(rule, premises, removed=(eq,), binding=(loser, rep))
        added, removed = self.conclusion(rule, premises)
        for c in removed:
            self.remove(c)
        for c in added:
            self.insert(c)
        return TraceStep(rule, premises, added=added, removed=removed)

    def merge(self, loser, rep):
        for k, v in self.bindings.items():
            if v == loser:
                self.bindings[k] = rep
        self.bindings[loser] = rep
        mapping = {loser: rep}
        moved = sorted(self.by_var.pop(loser, ()), key=self.name)
        for c in moved:
            self.remove(c)
        for c in moved:
            self.insert(c.rename(mapping))

    def best(self):
        """Pop the first applicable instance off the agenda, or None."""
        heap = self.heap
        while heap:
            _, _, _, rule, premises = heapq.heappop(heap)
            if self.valid(rule, premises):
                return rule, premises
        return None

    def scan(self):
        """Exhaustive search for the first applicable instance."""
        best = None
        for c in self.cs:
            for rule, premises in self.candidates(c):
                if not self.valid(rule, premises):
                    continue
                key = (_PRIORITY[rule], tuple(self.name(p) for p in premises))
                if best is None or key < best[0]:
                    best = (key, rule, premises)
        return None if best is None else best[1:]


def applicable_rule(store: ConstraintStore):
    """The instance the schedule would fire next, as ``(RuleId, premises)``, or None."""
    return _Workspace(store).scan()


def is_normal(store: ConstraintStore) -> bool:
    return applicable_rule(store) is None


def normalize(store: ConstraintStore) -> tuple[Verdict, list[TraceStep]]:
    """Rewrite to normal form. Returns the verdict and the list of rule firings.

    The trace starts from ``expand_first_daughter(store)``. Rewriting stops
    as soon as a clash ``x = E p+ : x`` appears.
    """
    work = _Workspace(expand_first_daughter(store))
    trace: list[TraceStep] = []
    ceiling = firing_ceiling(work.store())
    while work.clash is None:
        instance = work.best()
        if instance is None:
            instance = work.scan()
            if instance is None:
                break
        trace.append(work.fire(*instance))
        if len(trace) > ceiling:
            raise RuntimeError(f"rule firing count exceeded ceiling {ceiling}")
    final = work.store()
    if work.clash is not None:
        return Clash(work.clash, final), trace
    return Consistent(final), trace


def replay(store: ConstraintStore, trace: Iterable[TraceStep]) -> ConstraintStore:
    """Apply a trace to ``expand_first_daughter(store)``."""
    store = expand_first_daughter(store)
    for step in trace:
        store = step.apply(store)
    return store


def replay_states(store: ConstraintStore, trace: Iterable[TraceStep]) -> Iterator[tuple]:
    """Yield ``(step, before, after)`` for every step of a trace."""
    store = expand_first_daughter(store)
    for step in trace:
        after = step.apply(store)
        yield step, store, after
        store = after
