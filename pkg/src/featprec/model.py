"""Signatures, constraints and the constraint store.

Variables and relation symbols are plain strings. A store is an immutable
value: every operation that changes it returns a new store.
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

from .errors import DuplicateName, ReservedName, SortClash, SortMismatch, UndeclaredSymbol

Variable = str

RESERVED_PREFIX = "fd$"
IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def first_daughter_symbol(f: str, p: str) -> str:
    """Name of the fresh feature introduced when expanding ``x = [f p 1] y``."""
    return f"{RESERVED_PREFIX}{f}${p}"


def parse_first_daughter_symbol(name: str) -> tuple[str, str] | None:
    if not name.startswith(RESERVED_PREFIX):
        return None
    parts = name[len(RESERVED_PREFIX):].split("$")
    if len(parts) != 2 or not all(IDENT_RE.match(part) for part in parts):
        return None
    return parts[0], parts[1]


class ClosureKind(enum.Enum):
    PLUS = "+"
    STAR = "*"

    def __str__(self) -> str:
        return self.value


PLUS = ClosureKind.PLUS
STAR = ClosureKind.STAR


@dataclass(frozen=True)
class Signature:
    features: frozenset = frozenset()
    precedences: frozenset = frozenset()

    def __post_init__(self):
        overlap = self.features & self.precedences
        if overlap:
            raise SortClash(f"symbol declared as both feature and precedence: {sorted(overlap)[0]}")

    @property
    def symbols(self) -> frozenset:
        return self.features | self.precedences

    def is_feature(self, name: str) -> bool:
        return name in self.features

    def is_precedence(self, name: str) -> bool:
        return name in self.precedences

    def with_features(self, names: Iterable[str]) -> Signature:
        names = frozenset(names)
        if names <= self.features:
            return self
        return Signature(self.features | names, self.precedences)


def declare_signature(feature_names: Iterable[str], prec_names: Iterable[str]) -> Signature:
    """Validate and build a signature from user-supplied symbol names."""
    feature_names = list(feature_names)
    prec_names = list(prec_names)
    for names in (feature_names, prec_names):
        seen = set()
        for name in names:
            if name.startswith(RESERVED_PREFIX):
                raise ReservedName(f"symbol names may not start with {RESERVED_PREFIX!r}: {name}")
            if not IDENT_RE.match(name):
                raise ValueError(f"not an identifier: {name!r}")
            if name in seen:
                raise DuplicateName(f"symbol declared twice: {name}")
            seen.add(name)
    clash = set(feature_names) & set(prec_names)
    if clash:
        raise SortClash(f"symbol declared as both feature and precedence: {sorted(clash)[0]}")
    return Signature(frozenset(feature_names), frozenset(prec_names))


# --------------------------------------------------------------------------
# Constraints


class Constraint:
    """Base for the constraint forms. Subclasses are frozen dataclasses."""

    __slots__ = ()

    @property
    def variables(self) -> tuple:
        raise NotImplementedError

    def rename(self, mapping: Mapping[str, str]) -> Constraint:
        raise NotImplementedError

    def check(self, sig: Signature) -> None:
        raise NotImplementedError


def _need_feature(sig: Signature, name: str, hint: str = "") -> None:
    if name in sig.features:
        return
    if name in sig.precedences:
        raise SortMismatch(f"{name} is a precedence symbol, a feature is required here{hint}")
    raise UndeclaredSymbol(f"undeclared symbol: {name}")


def _need_prec(sig: Signature, name: str) -> None:
    if name in sig.precedences:
        return
    if name in sig.features:
        raise SortMismatch(f"{name} is a feature symbol, a precedence is required here")
    raise UndeclaredSymbol(f"undeclared symbol: {name}")


@dataclass(frozen=True, slots=True)
class Eq(Constraint):
    x: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return Eq(m.get(self.x, self.x), m.get(self.y, self.y))

    def check(self, sig):
        pass

    def __str__(self):
        return f"{self.x} = {self.y}"


@dataclass(frozen=True, slots=True)
class Feature(Constraint):
    """``x = f : y`` -- y is the only f-value of x."""

    x: str
    f: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return Feature(m.get(self.x, self.x), self.f, m.get(self.y, self.y))

    def check(self, sig):
        _need_feature(sig, self.f, " (functional precedence is written with ImmPrec)")

    def __str__(self):
        return f"{self.x} = {self.f} : {self.y}"


@dataclass(frozen=True, slots=True)
class Member(Constraint):
    """``x = E r : y`` -- y is one of the r-values of x; r may be of either sort."""

    x: str
    r: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return Member(m.get(self.x, self.x), self.r, m.get(self.y, self.y))

    def check(self, sig):
        if self.r not in sig.features and self.r not in sig.precedences:
            raise UndeclaredSymbol(f"undeclared symbol: {self.r}")

    def __str__(self):
        return f"{self.x} = E {self.r} : {self.y}"


@dataclass(frozen=True, slots=True)
class Closure(Constraint):
    """``x = E p+ : y`` / ``x = E p* : y``."""

    x: str
    p: str
    kind: ClosureKind
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return Closure(m.get(self.x, self.x), self.p, self.kind, m.get(self.y, self.y))

    def check(self, sig):
        _need_prec(sig, self.p)
        if not isinstance(self.kind, ClosureKind):
            raise TypeError(f"closure kind must be a ClosureKind, got {self.kind!r}")

    def __str__(self):
        return f"{self.x} = E {self.p}{self.kind.value} : {self.y}"


@dataclass(frozen=True, slots=True)
class Subset(Constraint):
    """``x = f :>= g(y)`` -- the f-values of x include the g-values of y."""

    x: str
    f: str
    g: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return Subset(m.get(self.x, self.x), self.f, self.g, m.get(self.y, self.y))

    def check(self, sig):
        _need_feature(sig, self.f)
        _need_feature(sig, self.g)

    def __str__(self):
        return f"{self.x} = {self.f} :>= {self.g}({self.y})"


@dataclass(frozen=True, slots=True)
class FirstDaughter(Constraint):
    """``x = [f p 1] y`` -- y is the p-first among the f-values of x."""

    x: str
    f: str
    p: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return FirstDaughter(m.get(self.x, self.x), self.f, self.p, m.get(self.y, self.y))

    def check(self, sig):
        _need_feature(sig, self.f)
        _need_prec(sig, self.p)

    def __str__(self):
        return f"{self.x} = [{self.f} {self.p} 1] {self.y}"


@dataclass(frozen=True, slots=True)
class DomPrec(Constraint):
    """``f(x) : p+ : g(y)`` -- every f-value of x precedes every g-value of y."""

    f: str
    x: str
    p: str
    kind: ClosureKind
    g: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return DomPrec(self.f, m.get(self.x, self.x), self.p, self.kind, self.g, m.get(self.y, self.y))

    def check(self, sig):
        _need_feature(sig, self.f)
        _need_feature(sig, self.g)
        _need_prec(sig, self.p)
        if not isinstance(self.kind, ClosureKind):
            raise TypeError(f"closure kind must be a ClosureKind, got {self.kind!r}")

    def __str__(self):
        return f"{self.f}({self.x}) : {self.p}{self.kind.value} : {self.g}({self.y})"


@dataclass(frozen=True, slots=True)
class ImmPrec(Constraint):
    """``x = p : y`` -- y is the only immediate p-successor of x."""

    x: str
    p: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return ImmPrec(m.get(self.x, self.x), self.p, m.get(self.y, self.y))

    def check(self, sig):
        _need_prec(sig, self.p)

    def __str__(self):
        return f"{self.x} = {self.p} : {self.y}"


@dataclass(frozen=True, slots=True)
class InvImmPrec(Constraint):
    """``x = p^-1 : y`` -- y is the only immediate p-predecessor of x."""

    x: str
    p: str
    y: str

    @property
    def variables(self):
        return (self.x, self.y)

    def rename(self, m):
        return InvImmPrec(m.get(self.x, self.x), self.p, m.get(self.y, self.y))

    def check(self, sig):
        _need_prec(sig, self.p)

    def __str__(self):
        return f"{self.x} = {self.p}^-1 : {self.y}"


AnyConstraint = Union[Eq, Feature, Member, Closure, Subset, FirstDaughter, DomPrec, ImmPrec, InvImmPrec]


def constraint_symbols(c: Constraint) -> tuple:
    if isinstance(c, Eq):
        return ()
    if isinstance(c, (Feature,)):
        return (c.f,)
    if isinstance(c, Member):
        return (c.r,)
    if isinstance(c, (Closure, ImmPrec, InvImmPrec)):
        return (c.p,)
    if isinstance(c, Subset):
        return (c.f, c.g)
    if isinstance(c, FirstDaughter):
        return (c.f, c.p)
    if isinstance(c, DomPrec):
        return (c.f, c.g, c.p)
    raise TypeError(f"not a constraint: {c!r}")


def is_tautology(c: Constraint) -> bool:
    """Constraints true in every interpretation; never stored."""
    if isinstance(c, Eq):
        return c.x == c.y
    return isinstance(c, Closure) and c.kind is STAR and c.x == c.y


# --------------------------------------------------------------------------
# Store


class ConstraintStore:
    """A deduplicated set of constraints over representative variables.

    ``bindings`` maps every merged-away variable to the representative of its
    class. The representative is always the lexicographically smallest
    variable of the class.
    """

    def __init__(self, signature: Signature, constraints: Iterable[Constraint] = (),
                 bindings: Mapping[str, str] | None = None):
        self.signature = signature
        self.constraints = frozenset(constraints)
        self.bindings = dict(bindings or {})

    def __eq__(self, other):
        if not isinstance(other, ConstraintStore):
            return NotImplemented
        return (self.signature == other.signature and self.constraints == other.constraints
                and self.bindings == other.bindings)

    def __hash__(self):
        return hash((self.signature, self.constraints, frozenset(self.bindings.items())))

    def __len__(self):
        return len(self.constraints)

    def __iter__(self) -> Iterator[Constraint]:
        return iter(sorted(self.constraints, key=str))

    def __contains__(self, c):
        return c in self.constraints

    def __repr__(self):
        body = ", ".join(str(c) for c in self)
        binds = ", ".join(f"{k}->{v}" for k, v in sorted(self.bindings.items()))
        return f"ConstraintStore({{{body}}}, bindings={{{binds}}})"

    def representative(self, x: str) -> str:
        return self.bindings.get(x, x)

    @property
    def pending_equalities(self) -> list:
        return sorted((c for c in self.constraints if isinstance(c, Eq)), key=str)

    def variables(self) -> set:
        out = set(self.bindings) | set(self.bindings.values())
        for c in self.constraints:
            out.update(c.variables)
        return out

    def representatives(self) -> set:
        return {self.representative(v) for v in self.variables()}

    @cached_property
    def _succ_index(self):
        feat = defaultdict(set)
        clos = defaultdict(dict)
        for c in self.constraints:
            if isinstance(c, (Feature, Member)):
                sym = c.f if isinstance(c, Feature) else c.r
                feat[c.x, sym].add(c.y)
            elif isinstance(c, Closure):
                edges = clos[c.x, c.p]
                if edges.get(c.y) is not PLUS:
                    edges[c.y] = c.kind
        return feat, clos

    def closure_successors(self, x: str, p: str) -> dict:
        """Map from y to the strongest kind of a ``Closure(x, p, kind, y)`` in the store."""
        return dict(self._succ_index[1].get((self.representative(x), p), {}))


def _check(sig: Signature, c: Constraint) -> None:
    if not isinstance(c, Constraint):
        raise TypeError(f"not a constraint: {c!r}")
    for v in c.variables:
        if not isinstance(v, str) or not v:
            raise ValueError(f"variables must be nonempty strings, got {v!r}")
    c.check(sig)


def add_constraint(store: ConstraintStore, c: Constraint, *, defer_equality: bool = False) -> ConstraintStore:
    """Return ``store`` with ``c`` (rewritten through the bindings) added.

    An equality is applied immediately as a merge of the two classes unless
    ``defer_equality`` is set, in which case it is kept as a pending ``Eq``
    for the (Equals) rule to consume.
    """
    _check(store.signature, c)
    c = c.rename(store.bindings)
    if is_tautology(c) or c in store.constraints:
        return store
    if isinstance(c, Eq) and not defer_equality:
        return merge(store, c.x, c.y)
    return ConstraintStore(store.signature, store.constraints | {c}, store.bindings)


def add_constraints(store: ConstraintStore, cs: Iterable[Constraint], **kw) -> ConstraintStore:
    for c in cs:
        store = add_constraint(store, c, **kw)
    return store


def merge(store: ConstraintStore, x: str, y: str) -> ConstraintStore:
    """Identify the classes of x and y, keeping the smaller name as representative."""
    rx, ry = store.representative(x), store.representative(y)
    if rx == ry:
        return store
    rep, loser = min(rx, ry), max(rx, ry)
    bindings = {k: (rep if v == loser else v) for k, v in store.bindings.items()}
    bindings[loser] = rep
    mapping = {loser: rep}
    constraints = set()
    for c in store.constraints:
        if loser in c.variables:
            c = c.rename(mapping)
            if is_tautology(c):
                continue
        constraints.add(c)
    return ConstraintStore(store.signature, constraints, bindings)


def representative(store: ConstraintStore, x: str) -> str:
    return store.representative(x)


def empty_store(sig: Signature) -> ConstraintStore:
    return ConstraintStore(sig)


def succ_feature(store: ConstraintStore, x: str, f: str) -> set:
    """Targets of ``Feature(x, f, .)`` and ``Member(x, f, .)`` in the store."""
    return set(store._succ_index[0].get((store.representative(x), f), ()))


def succ_reduced(store: ConstraintStore, x: str, p: str) -> set:
    """Closure successors of x with every composed edge removed.

    y is dropped when some z has ``x -R1-> z`` and ``z -R2-> y`` as closure
    constraints, i.e. this is the transitive reduction of the closure graph
    (assuming, as in a normal form, that the graph is transitively closed).
    """
    x = store.representative(x)
    out = store.closure_successors(x, p)
    reduced = set()
    for y in out:
        if y == x:
            reduced.add(y)
            continue
        if any(z != x and z != y and y in store.closure_successors(z, p) for z in out):
            continue
        reduced.add(y)
    return reduced
