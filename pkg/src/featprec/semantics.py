"""Interpretations, satisfaction, canonical models and linearization."""

from __future__ import annotations

import heapq
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

from .engine import is_normal, normalize
from .errors import (
    ClashPresent,
    DuplicateVariable,
    ModelConstructionFailed,
    NotLinearizable,
    NotNormalForm,
)
from .model import (
    PLUS,
    STAR,
    Closure,
    Constraint,
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
    _need_prec,
    add_constraint,
    succ_feature,
    succ_reduced,
)

Assignment = Mapping[str, Hashable]


@dataclass(frozen=True)
class Interpretation:
    """A finite universe and one binary relation per declared symbol."""

    universe: frozenset
    relations: Mapping[str, frozenset]
    signature: Signature
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def relation(self, sym: str) -> frozenset:
        return self.relations.get(sym, frozenset())

    def image(self, sym: str, e) -> set:
        key = ("img", sym)
        table = self._cache.get(key)
        if table is None:
            table = defaultdict(set)
            for a, b in self.relation(sym):
                table[a].add(b)
            self._cache[key] = table
        return table.get(e, set())

    def preimage(self, sym: str, e) -> set:
        key = ("pre", sym)
        table = self._cache.get(key)
        if table is None:
            table = defaultdict(set)
            for a, b in self.relation(sym):
                table[b].add(a)
            self._cache[key] = table
        return table.get(e, set())

    def reachable(self, sym: str, e) -> set:
        """Elements reachable from e in one or more steps of ``sym``."""
        key = ("plus", sym, e)
        out = self._cache.get(key)
        if out is None:
            out = set()
            todo = list(self.image(sym, e))
            while todo:
                d = todo.pop()
                if d not in out:
                    out.add(d)
                    todo.extend(self.image(sym, d))
            self._cache[key] = out
        return out

    def precedes(self, sym: str, a, b, kind) -> bool:
        if kind is STAR and a == b:
            return True
        return b in self.reachable(sym, a)


def valid_interpretation(interp: Interpretation) -> bool:
    """Every precedence relation must have an irreflexive transitive closure."""
    for p in interp.signature.precedences:
        for a, _ in interp.relation(p):
            if a in interp.reachable(p, a):
                return False
    return True


def evaluate(interp: Interpretation, assign: Assignment, c: Constraint) -> bool:
    t = type(c)
    if t is Eq:
        return assign[c.x] == assign[c.y]
    a, b = assign[c.x], assign[c.y]
    if t is Feature:
        return interp.image(c.f, a) == {b}
    if t is Member:
        return (a, b) in interp.relation(c.r)
    if t is Closure:
        return interp.precedes(c.p, a, b, c.kind)
    if t is Subset:
        return interp.image(c.f, a) >= interp.image(c.g, b)
    if t is FirstDaughter:
        values = interp.image(c.f, a)
        return b in values and all(interp.precedes(c.p, b, e, STAR) for e in values)
    if t is DomPrec:
        return all(interp.precedes(c.p, e1, e2, c.kind)
                   for e1 in interp.image(c.f, a) for e2 in interp.image(c.g, b))
    if t is ImmPrec:
        return interp.image(c.p, a) == {b}
    if t is InvImmPrec:
        return interp.preimage(c.p, a) == {b}
    raise TypeError(f"not a constraint: {c!r}")


def satisfies_all(interp: Interpretation, assign: Assignment, store: ConstraintStore) -> bool:
    """Conjunction of every constraint and every recorded binding."""
    for var, rep in store.bindings.items():
        if assign[var] != assign[rep]:
            return False
    return all(evaluate(interp, assign, c) for c in store.constraints)


# --------------------------------------------------------------------------
# canonical model


def _require_clash_free_normal(store: ConstraintStore) -> None:
    for c in store.constraints:
        if type(c) is Closure and c.kind is PLUS and c.x == c.y:
            raise ClashPresent(f"store contains a clash: {c}")
    if not is_normal(store):
        raise NotNormalForm("store is not in normal form")


def _succ_relations(store: ConstraintStore, universe) -> dict:
    sig = store.signature
    relations = {}
    for f in sig.features:
        relations[f] = frozenset((x, y) for x in universe for y in succ_feature(store, x, f))
    for p in sig.precedences:
        pairs = {(x, y) for x in universe for y in succ_reduced(store, x, p)}
        pairs.update((c.x, c.y) for c in store.constraints if type(c) is Member and c.r == p)
        relations[p] = frozenset(pairs)
    return relations


def _escape(store: ConstraintStore, relations: dict):
    """Alternatives that resolve the first violated immediate-precedence constraint.

    A node x with unique successor y may still have a reduced p*-edge to some
    z; then either z = x or y <* z. The mirror case holds for predecessors.
    """
    out = defaultdict(set)
    inc = defaultdict(set)
    for p in store.signature.precedences:
        for a, b in relations[p]:
            out[a, p].add(b)
            inc[b, p].add(a)
    for c in sorted(store.constraints, key=str):
        if type(c) is ImmPrec:
            extra = sorted(out[c.x, c.p] - {c.y})
            if extra:
                z = extra[0]
                return [Closure(c.y, c.p, STAR, z), Eq(z, c.x)]
        elif type(c) is InvImmPrec:
            extra = sorted(inc[c.x, c.p] - {c.y})
            if extra:
                w = extra[0]
                return [Closure(w, c.p, STAR, c.y), Eq(w, c.x)]
    return None


def _resolve(store: ConstraintStore, depth: int = 0):
    universe = store.representatives()
    relations = _succ_relations(store, universe)
    options = _escape(store, relations)
    if options is None:
        return store, relations
    for extra in options:
        verdict, _ = normalize(add_constraint(store, extra))
        if verdict.consistent:
            found = _resolve(verdict.store, depth + 1)
            if found is not None:
                return found
    return None


def canonical_model(normal: ConstraintStore) -> tuple[Interpretation, dict]:
    """Model of a clash-free normal form whose universe is its variables.

    Features are interpreted by their successor sets and each precedence by
    the transitive reduction of its closure edges (plus explicit membership
    edges). Immediate-precedence constraints can leave a choice between two
    orderings; those are settled by trying each alternative in turn.
    """
    _require_clash_free_normal(normal)
    found = _resolve(normal)
    if found is None:
        raise ModelConstructionFailed(
            "clash-free normal form has no model: every resolution of an "
            "immediate-precedence choice clashes")
    store, relations = found
    universe = store.representatives() or {"_"}
    assign = {v: store.representative(v) for v in normal.variables() | store.variables()}
    interp = Interpretation(frozenset(universe), relations, store.signature)
    return interp, assign


# --------------------------------------------------------------------------
# linearization


def _adjacencies(store: ConstraintStore, p: str) -> list:
    pairs = []
    for c in store.constraints:
        t = type(c)
        if t is ImmPrec and c.p == p:
            pairs.append((c.x, c.y))
        elif t is InvImmPrec and c.p == p:
            pairs.append((c.y, c.x))
        elif t is Member and c.r == p:
            pairs.append((c.x, c.y))
    return sorted(set(pairs))


def linearize(normal: ConstraintStore, p: str) -> list:
    """A total order of the store's variables that keeps every p-constraint true.

    Ties are broken by taking the lexicographically smallest available
    variable. Constraints that demand adjacency (immediate precedence or a
    direct p-membership) are honoured when possible; otherwise
    ``NotLinearizable`` is raised.
    """
    _require_clash_free_normal(normal)
    _need_prec(normal.signature, p)
    edges = set()
    nodes = set(normal.representatives())
    for c in normal.constraints:
        if type(c) is Closure and c.p == p:
            nodes.update((c.x, c.y))
            edges.add((c.x, c.y, c.kind))
    adjacent = _adjacencies(normal, p)
    for a, b in adjacent:
        nodes.update((a, b))

    nxt, prv = {}, {}
    for a, b in adjacent:
        if nxt.setdefault(a, b) != b or prv.setdefault(b, a) != a:
            raise NotLinearizable(f"{a} cannot be immediately followed by two elements")
    block_of, position, blocks = {}, {}, {}
    for head in sorted(n for n in nodes if n not in prv):
        chain, e = [], head
        while e is not None:
            block_of[e] = head
            position[e] = len(chain)
            chain.append(e)
            e = nxt.get(e)
        blocks[head] = chain
    if len(block_of) != len(nodes):
        raise NotLinearizable("immediate-precedence constraints form a cycle")

    succ = defaultdict(set)
    indegree = {head: 0 for head in blocks}
    for a, b, kind in edges:
        ba, bb = block_of[a], block_of[b]
        if ba == bb:
            if position[a] > position[b]:
                raise NotLinearizable(f"{a} must precede {b} inside an adjacency chain")
            continue
        if bb not in succ[ba]:
            succ[ba].add(bb)
            indegree[bb] += 1
    ready = [head for head, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        head = heapq.heappop(ready)
        order.extend(blocks[head])
        for nb in succ[head]:
            indegree[nb] -= 1
            if indegree[nb] == 0:
                heapq.heappush(ready, nb)
    if len(order) != len(nodes):
        raise NotLinearizable("precedence and adjacency constraints are cyclic")

    if not _order_satisfies(normal, p, order):
        if adjacent:
            raise NotLinearizable("no linear order satisfies the immediate-precedence constraints")
        raise AssertionError(f"linearization {order} violates a constraint over {p}")
    return order


def linear_interpretation(normal: ConstraintStore, p: str, order: list) -> tuple[Interpretation, dict]:
    """The canonical feature relations with p read as the consecutive pairs of ``order``."""
    universe = normal.representatives() | set(order)
    relations = {f: frozenset((x, y) for x in universe for y in succ_feature(normal, x, f))
                 for f in normal.signature.features}
    for q in normal.signature.precedences:
        relations[q] = frozenset()
    relations[p] = frozenset(zip(order, order[1:]))
    assign = {v: normal.representative(v) for v in normal.variables()}
    return Interpretation(frozenset(universe) or frozenset({"_"}), relations, normal.signature), assign


def _mentions(c: Constraint, p: str) -> bool:
    t = type(c)
    if t is Member:
        return c.r == p
    if t in (Closure, DomPrec, ImmPrec, InvImmPrec, FirstDaughter):
        return c.p == p
    return False


def _order_satisfies(normal: ConstraintStore, p: str, order: list) -> bool:
    interp, assign = linear_interpretation(normal, p, order)
    return all(evaluate(interp, assign, c) for c in normal.constraints if _mentions(c, p))


def order_to_constraints(order: Iterable[str], p: str, signature: Signature | None = None) -> list:
    """``v1 <+ v2, v2 <+ v3, ...`` for a sequence of distinct variables."""
    order = list(order)
    if signature is not None:
        _need_prec(signature, p)
    seen = set()
    for v in order:
        if v in seen:
            raise DuplicateVariable(f"variable occurs twice in order: {v}")
        seen.add(v)
    return [Closure(a, p, PLUS, b) for a, b in zip(order, order[1:])]
