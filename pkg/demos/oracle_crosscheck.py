"""Compare the rewrite engine against brute-force model search.

Random three-variable stores are decided twice: once by normalization and
once by enumerating every interpretation up to three elements.
"""

from __future__ import annotations

import random
import sys
from collections import Counter

sys.path.insert(0, str(__import__("pathlib").Path(__file__).resolve().parents[1] / "tests"))

from helpers import SIG, all_forms, store_of  # noqa: E402

from featprec import brute_force_consistent, normalize  # noqa: E402


def main(samples: int = 2000, seed: int = 0) -> None:
    rng = random.Random(seed)
    forms = all_forms()
    tally = Counter()
    for _ in range(samples):
        store = store_of(*rng.sample(forms, rng.randint(1, 4)))
        verdict, _ = normalize(store)
        oracle = brute_force_consistent(SIG, store)
        tally[(verdict.consistent, oracle)] += 1
    print(f"{samples} random stores over x, y, z with feature f and precedence p")
    for (engine, oracle), n in sorted(tally.items()):
        print(f"  engine {'SAT' if engine else 'UNSAT':5}  oracle {'SAT' if oracle else 'UNSAT':5}  {n}")
    disagreements = sum(n for (e, o), n in tally.items() if e != o)
    print("disagreements:", disagreements)


if __name__ == "__main__":
    main()
