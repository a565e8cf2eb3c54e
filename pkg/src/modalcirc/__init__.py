"""Workbench for modal logics of transitive frames with bounded cycle
length: Kripke semantics, filtration with cluster refinement, bounded
decision, topological semantics, and finite modal algebras."""

from .formula import (
    And,
    Bot,
    Box,
    BoxStar,
    Dia,
    DiaStar,
    Formula,
    FormulaSet,
    Iff,
    Imp,
    Neg,
    Or,
    ParseError,
    Top,
    Var,
    bounded_cycle_axiom,
    disjointness_scheme,
    mckinsey_closure,
    named_axiom,
    parse,
    path_scheme,
    pretty,
    scheme_variables,
    subformula_closure,
)
from ._sweep import DEFAULT_VALUATION_CAP, BudgetExceededError
from .kripke import (
    ClusterDecomposition,
    Frame,
    Model,
    NotTransitiveError,
    check_property,
    circumference,
    clusters,
    find_countermodel,
    frame_valid,
    isomorphic,
    path_oracle,
    truth_set,
    validates_logic,
)
from .filtration import (
    ClusterRefinement,
    CoreTooLargeError,
    FiltrationResult,
    PhiNotClosedError,
    class_formula,
    critical_point,
    filter_model,
    refine,
)
from .decision import (
    InconsistentLogicError,
    LogicSpec,
    Verdict,
    completeness_bound,
    decide,
    enumerate_frames,
    separate_logics,
)
from .topology import (
    EmptySubspaceError,
    FiniteSpace,
    NotQuasiOrderError,
    SpaceModel,
    alexandroff,
    closure,
    derived_set,
    generate_topology,
    interior,
    is_hered_n_irresolvable,
    is_n_resolvable,
    separation,
    specialization,
    truth_set_c,
    truth_set_d,
    valid_c,
    valid_d,
)
from .algebra import (
    Conjunct,
    InvalidWitnessError,
    ModalAlgebra,
    UniversalSentence,
    algebra_validates,
    complex_algebra,
    dual_frame,
    eval_universal,
    parse_sentence,
    subalgebra_generated,
    transfer_countermodel,
)

__version__ = "0.1.0"
