"""Probabilistic belief logics over Harsanyi type spaces.

Modules:

- ``formula``: formula trees, parser and printer
- ``exactnum``: exact rational LP feasibility
- ``models``: finite type spaces, knowledge-belief spaces, evaluation
- ``canon``: atoms, canonical Harsanyi models, satisfiability and validity
- ``rewrite``: statements, normal forms, denesting
- ``bisequence``: the truncated bi-sequence space and J-lists
- ``algebra``: finite modal algebras and knowledge-operator search
"""

from .errors import (
    BudgetExceeded,
    FormulaSyntaxError,
    HarsanyiError,
    InfeasibleSystem,
    ModelError,
    NotHarsanyi,
    NotNormal,
    UnboundedObjective,
    UnsupportedFormula,
)
from .formula import Formula, LocalLanguage, accuracy, depth, letters, p, parse, render
from .models import (
    FiniteTypeSpace,
    KnowledgeBeliefSpace,
    evaluate,
    extend_to_kb,
    extension,
    is_harsanyi,
    validate_kb_space,
)
from .canon import (
    SIGMA_H,
    SIGMA_PLUS,
    build_canonical_harsanyi,
    cardinality,
    sat,
    valid,
    verify_unique_extension,
)
from .rewrite import denest, is_normal, normal_form, statement_of
from .algebra import ModalAlgebra, counterexample_algebra, search_K

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "FiniteTypeSpace",
    "Formula",
    "FormulaSyntaxError",
    "HarsanyiError",
    "InfeasibleSystem",
    "KnowledgeBeliefSpace",
    "LocalLanguage",
    "ModalAlgebra",
    "ModelError",
    "NotHarsanyi",
    "NotNormal",
    "SIGMA_H",
    "SIGMA_PLUS",
    "UnboundedObjective",
    "UnsupportedFormula",
    "accuracy",
    "build_canonical_harsanyi",
    "cardinality",
    "counterexample_algebra",
    "denest",
    "depth",
    "evaluate",
    "extend_to_kb",
    "extension",
    "is_harsanyi",
    "is_normal",
    "letters",
    "normal_form",
    "p",
    "parse",
    "render",
    "sat",
    "search_K",
    "statement_of",
    "valid",
    "validate_kb_space",
    "verify_unique_extension",
]
