"""uidag: solve unconstrained influence diagrams and execute the strategies.

The pipeline is: parse or build a model (``model``), derive its temporal
structure, construct the skeleton and normal-form graph (``skeleton``),
optionally slim it with relevance analysis (``relevance``), solve it by
reverse elimination (``solver``), and check or explore the result with the
exhaustive evaluators (``oracle``).  ``bundle`` and ``cli`` expose the file
formats the navigator front end consumes.
"""

__version__ = "0.1.0"

from .model import (
    Cpt,
    PartialOrder,
    Uid,
    UidError,
    UidFormatError,
    UtilityFn,
    ValidationError,
    Variable,
    is_admissible,
    parse_uid,
    released_observables,
    serialize_uid,
    temporal_order,
    validate,
)
from .potentials import (
    ChoiceTable,
    PolicyTable,
    Potential,
    PotentialError,
    PotentialSets,
    add,
    approx_equal,
    divide,
    envelope_max,
    max_out,
    multiply,
    sum_out,
)
from .skeleton import (
    SDag,
    SDagNode,
    Skeleton,
    SkeletonNode,
    build_skeleton,
    expand_normal_form,
    export_dot,
    find_parents,
)
from .relevance import RequisiteQuery, requisite_set, trim_candidates
from .solver import (
    SolverError,
    StepPolicy,
    Strategy,
    base_potentials,
    eliminate_chance,
    eliminate_decision,
    solve,
    solve_model,
    unify_children,
)
from .oracle import (
    EvaluationState,
    OracleScaleError,
    brute_meu,
    brute_meu_full,
    simulate,
    strategy_eu,
)
from .bundle import BundleError, StrategyBundle, bundle_document, load_bundle

__all__ = [name for name in dir() if not name.startswith("_")]
