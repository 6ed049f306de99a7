"""Exact Presburger arithmetic: existential block elimination through affine integral witnesses."""

__version__ = "0.1.0"

from .bepa import BepaFormula, bepa_expand, bepa_to_epa, eval_bepa, mu_gadget, to_bepa
from .core import (
    FALSE,
    TRUE,
    And,
    Atom,
    Exists,
    Forall,
    Formula,
    LinTerm,
    Not,
    Or,
    ParamSystem,
    eq,
    free_vars,
    le,
    mod,
)
from .errors import (
    InvariantError,
    NoIntegralSolutionError,
    NotInConeError,
    ParseError,
    PreconditionError,
    PresqeError,
    ResourceLimitError,
    ShapeError,
    SingularMatrixError,
)
from .linalg import cramer_solve, delta_auto, delta_bound, det, fm_feasible, rank
from .parser import parse, parse_bepa, print_bepa, print_formula
from .polyhedra import (
    AffineWitness,
    caratheodory_decompose,
    cone_generators,
    enumerate_witness_candidates,
    integral_close,
    minimal_face_solution,
    witness_for,
)
from .qe import QfResult, eliminate_block
from .reductions import Pi2Sentence, mondec_encode, wqo_encode
from .semantics import (
    PeriodicDescriptor,
    build_sn_formula,
    check_equiv,
    decide,
    decide_epa_at,
    eval_qf,
    smallest_period,
    smallest_period_epa,
)

__all__ = [
    "__version__",
    "AffineWitness",
    "And",
    "Atom",
    "bepa_expand",
    "bepa_to_epa",
    "BepaFormula",
    "build_sn_formula",
    "caratheodory_decompose",
    "check_equiv",
    "cone_generators",
    "cramer_solve",
    "decide",
    "decide_epa_at",
    "delta_auto",
    "delta_bound",
    "det",
    "eliminate_block",
    "enumerate_witness_candidates",
    "eq",
    "eval_bepa",
    "eval_qf",
    "Exists",
    "FALSE",
    "fm_feasible",
    "Forall",
    "Formula",
    "free_vars",
    "integral_close",
    "InvariantError",
    "le",
    "LinTerm",
    "minimal_face_solution",
    "mod",
    "mondec_encode",
    "mu_gadget",
    "NoIntegralSolutionError",
    "Not",
    "NotInConeError",
    "Or",
    "ParamSystem",
    "parse",
    "parse_bepa",
    "ParseError",
    "PeriodicDescriptor",
    "Pi2Sentence",
    "PreconditionError",
    "PresqeError",
    "print_bepa",
    "print_formula",
    "QfResult",
    "rank",
    "ResourceLimitError",
    "ShapeError",
    "SingularMatrixError",
    "smallest_period",
    "smallest_period_epa",
    "to_bepa",
    "TRUE",
    "witness_for",
    "wqo_encode",
]
