"""Text format for constraint programs.

::

    feature dom, subcat;      # declarations come first
    prec p;
    x = f : y .               # Feature (or ImmPrec when f is a precedence)
    x = E f : y .             # Member
    x = E p+ : y .            # Closure, also p*
    x = f :>= g(y) .          # Subset
    x = [f p 1] y .           # FirstDaughter
    f(x) : p+ : g(y) .        # DomPrec, also p*
    x = p^-1 : y .            # InvImmPrec
    x = y .                   # equality

Whitespace between tokens is optional everywhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FeatPrecError, ParseError, UndeclaredSymbol
from .model import (
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
    add_constraint,
    declare_signature,
    parse_first_daughter_symbol,
)

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\f\v]+|\#[^\n]*)
  | (?P<nl>\n)
  | (?P<op>:>=|\^-1|[=:()\[\]+*.;,])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*(?:\$[A-Za-z_][A-Za-z0-9_]*)*)
  | (?P<num>[0-9]+)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "op", "ident", "num", "eof"
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, col0 = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            col0 = m.end()
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, m.start() - col0 + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - col0 + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.sig = Signature()

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{message}, found {found}", tok.line, tok.column)

    def expect(self, text: str) -> Token:
        tok = self.tok
        if tok.kind != "op" or tok.text != text:
            self.fail(f"expected {text!r}")
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        tok = self.tok
        if tok.kind != "ident":
            self.fail(f"expected {what}")
        self.i += 1
        return tok

    def var(self) -> str:
        tok = self.ident("variable")
        if "$" in tok.text:
            raise ParseError(f"invalid variable name {tok.text!r}", tok.line, tok.column)
        return tok.text

    def symbol(self) -> Token:
        tok = self.ident("relation symbol")
        name = tok.text
        if name in self.sig.features or name in self.sig.precedences:
            return tok
        parts = parse_first_daughter_symbol(name)
        if parts and parts[0] in self.sig.features and parts[1] in self.sig.precedences:
            self.sig = self.sig.with_features([name])
            return tok
        raise UndeclaredSymbol(f"undeclared symbol: {name}", tok.line, tok.column)

    def kind(self):
        tok = self.tok
        if tok.kind == "op" and tok.text in "+*":
            self.i += 1
            return PLUS if tok.text == "+" else STAR
        self.fail("expected '+' or '*'")

    # -- grammar ------------------------------------------------------

    def declarations(self):
        features, precs, where = [], [], {}
        while self.tok.kind == "ident" and self.tok.text in ("feature", "prec") and self.peek().kind == "ident":
            target = features if self.tok.text == "feature" else precs
            self.i += 1
            while True:
                tok = self.ident("symbol name")
                where[tok.text] = tok
                target.append(tok.text)
                if self.tok.kind == "op" and self.tok.text == ",":
                    self.i += 1
                    continue
                self.expect(";")
                break
        try:
            self.sig = declare_signature(features, precs)
        except FeatPrecError as exc:
            tok = next((where[n] for n in where if n in exc.message), self.tok)
            raise type(exc)(exc.message, tok.line, tok.column) from None
        except ValueError as exc:
            raise ParseError(str(exc), self.tok.line, self.tok.column) from None

    def statement(self):
        start = self.tok
        if start.kind == "ident" and start.text in ("feature", "prec") and self.peek().kind == "ident":
            raise ParseError("declarations must precede constraints", start.line, start.column)
        if start.kind == "ident" and self.peek().kind == "op" and self.peek().text == "(":
            f = self.symbol().text
            self.expect("(")
            x = self.var()
            self.expect(")")
            self.expect(":")
            p = self.symbol().text
            k = self.kind()
            self.expect(":")
            g = self.symbol().text
            self.expect("(")
            y = self.var()
            self.expect(")")
            c = DomPrec(f, x, p, k, g, y)
        else:
            x = self.var()
            self.expect("=")
            c = self.right_hand_side(x)
        self.expect(".")
        return start, c

    def right_hand_side(self, x: str):
        tok, nxt = self.tok, self.peek()
        if tok.kind == "op" and tok.text == "[":
            self.i += 1
            f = self.symbol().text
            p = self.symbol().text
            one = self.tok
            if one.kind != "num" or one.text != "1":
                self.fail("expected '1'")
            self.i += 1
            self.expect("]")
            return FirstDaughter(x, f, p, self.var())
        if tok.kind != "ident":
            self.fail("expected a variable, relation symbol, 'E' or '['")
        if tok.text == "E" and nxt.kind == "ident":
            self.i += 1
            r = self.symbol().text
            if self.tok.kind == "op" and self.tok.text in "+*":
                k = self.kind()
                self.expect(":")
                return Closure(x, r, k, self.var())
            self.expect(":")
            return Member(x, r, self.var())
        if nxt.kind == "op" and nxt.text == ":>=":
            f = self.symbol().text
            self.expect(":>=")
            g = self.symbol().text
            self.expect("(")
            y = self.var()
            self.expect(")")
            return Subset(x, f, g, y)
        if nxt.kind == "op" and nxt.text == "^-1":
            p = self.symbol().text
            self.expect("^-1")
            self.expect(":")
            return InvImmPrec(x, p, self.var())
        if nxt.kind == "op" and nxt.text == ":":
            sym = self.symbol().text
            self.expect(":")
            y = self.var()
            return ImmPrec(x, sym, y) if sym in self.sig.precedences else Feature(x, sym, y)
        return Eq(x, self.var())

    def program(self) -> ConstraintStore:
        self.declarations()
        statements = []
        while self.tok.kind != "eof":
            statements.append(self.statement())
        store = ConstraintStore(self.sig)
        for start, c in statements:
            try:
                store = add_constraint(store, c)
            except FeatPrecError as exc:
                raise type(exc)(exc.message, start.line, start.column) from None
        return store


def parse_program(text: str) -> tuple[Signature, ConstraintStore]:
    """Parse a program into its signature and store.

    ``x = y`` statements are applied as merges, so the store carries them
    as bindings.
    """
    store = _Parser(text).program()
    return store.signature, store


def print_store(store: ConstraintStore) -> str:
    """Canonical text for a store: declarations, then sorted statements."""
    sig = store.signature
    lines = []
    features = sorted(f for f in sig.features if parse_first_daughter_symbol(f) is None)
    if features:
        lines.append(f"feature {', '.join(features)};")
    if sig.precedences:
        lines.append(f"prec {', '.join(sorted(sig.precedences))};")
    body = [f"{c} ." for c in store.constraints]
    body += [f"{rep} = {var} ." for var, rep in store.bindings.items()]
    lines.extend(sorted(body))
    return "\n".join(lines) + "\n"
