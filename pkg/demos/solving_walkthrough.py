"""From program text to a normal form, a model and a word order."""

from __future__ import annotations

from featprec import canonical_model, linearize, normalize, parse_program, print_store

PROGRAM = """
feature subj, dom;
prec p;

s = subj : np .
s = E dom : np .
s = E dom : v .
np = E p+ : v .
v = E p* : w .
w = E p* : v .
"""


def main() -> None:
    sig, store = parse_program(PROGRAM)
    print("input store:")
    print(print_store(store))

    verdict, trace = normalize(store)
    print("derivation:")
    for step in trace:
        print(" ", step)
    print()
    print("normal form:")
    print(print_store(verdict.store))

    model, alpha = canonical_model(verdict.store)
    print("canonical model:")
    for sym in sorted(sig.features | sig.precedences):
        for a, b in sorted(model.relation(sym)):
            print(f"  {sym}: {a} -> {b}")
    print("  assignment:", ", ".join(f"{v}={e}" for v, e in sorted(alpha.items())))
    print()
    print("linear order:", ", ".join(linearize(verdict.store, "p")))


if __name__ == "__main__":
    main()
