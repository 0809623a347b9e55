"""Table-constraint CSP solver comparing weight-update strategies for dom/wdeg
under GAC, POAC and RNIC lookahead."""

from .gac import Fixpoint, SearchState, Wipeout, enforce_gac, revise_str
from .model import (
    ConstraintDecl,
    Csp,
    CspError,
    ParameterError,
    ParseError,
    VariableDecl,
    generate_random,
    is_solution,
    load_instance,
    parse_instance,
    serialize_instance,
)
from .poac import Consistent, Failed, enforce_poac, singleton_test
from .rnic import DualGraph, build_dual_graph, enforce_rnic, tuple_has_support
from .search import SolveConfig, SolveResult, solve
from .weighting import (
    ConfigError,
    Consistency,
    GacWipeout,
    RelationWipeout,
    SingletonWipeout,
    Strategy,
    VariableAllTestsFailed,
    WeightStore,
    alpha_wdeg,
    alpha_wdeg_var,
    apply_event,
    select_variable,
)

__version__ = "0.1.0"
