"""Which orders of "dass er einen Mann in der Strasse laufen sah" are licensed?

The grammar fragment lives in the packaged corpus. Each candidate order is
added as a chain of p+ constraints and the store is normalized; a clash
rules the order out.
"""

from __future__ import annotations

import itertools

from featprec import add_constraints, corpus_path, linearize, normalize, order_to_constraints, parse_program

TOKENS = ("er", "mann", "strasse", "laufen", "sah")


def main() -> None:
    sig, store = parse_program(corpus_path().read_text())
    verdict, trace = normalize(store)
    print(f"grammar: {len(store.constraints)} constraints, normal form after {len(trace)} steps")
    print("one licensed order:", ", ".join(linearize(verdict.store, "p")))
    print()

    rejected = None
    for perm in itertools.permutations(TOKENS):
        verdict, _ = normalize(add_constraints(store, order_to_constraints(perm, "p", sig)))
        if verdict.consistent:
            print("  ok   ", " ".join(perm))
        elif rejected is None:
            rejected = (perm, verdict.witness)

    perm, witness = rejected
    print()
    print("first rejected order:", " ".join(perm))
    print("clash witness:", witness)


if __name__ == "__main__":
    main()
