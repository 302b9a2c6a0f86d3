"""Feature logic with set-valued features and precedence constraints.

A constraint store is rewritten to a normal form that either contains a clash
(``x = E p+ : x``) or has a canonical model built from its own variables.
"""

from __future__ import annotations

from importlib.resources import files

from .engine import (
    SCHEDULE,
    Clash,
    Consistent,
    RuleId,
    TraceStep,
    applicable_rule,
    expand_first_daughter,
    firing_ceiling,
    is_normal,
    normalize,
    replay,
    replay_states,
)
from .errors import (
    BudgetExceeded,
    ClashPresent,
    DuplicateName,
    DuplicateVariable,
    FeatPrecError,
    ModelConstructionFailed,
    NotLinearizable,
    NotNormalForm,
    ParseError,
    ReservedName,
    SortClash,
    SortMismatch,
    UndeclaredSymbol,
)
from .model import (
    PLUS,
    STAR,
    Closure,
    ClosureKind,
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
    add_constraint,
    add_constraints,
    declare_signature,
    empty_store,
    merge,
    representative,
    succ_feature,
    succ_reduced,
)
from .oracle import OracleBudget, brute_force_consistent, find_model, rule_soundness_check
from .semantics import (
    Interpretation,
    canonical_model,
    evaluate,
    linear_interpretation,
    linearize,
    order_to_constraints,
    satisfies_all,
    valid_interpretation,
)
from .syntax import parse_program, print_store


def corpus_path(name: str = "german_scrambling.lp"):
    """Path of a bundled example program."""
    return files(__name__) / "data" / name


__all__ = [name for name in dir() if not name.startswith("_") and name not in ("annotations", "files")]
