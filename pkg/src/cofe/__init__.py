"""Compress tabular parfactor models into small sets of weighted Boolean
formulas under a distance budget, with exact inference and an evaluation
harness for noise robustness and query error.
"""

__version__ = "0.1.0"

from .errors import (
    CofeError,
    ModelError,
    ParseError,
    TooLargeError,
    ZeroEvidenceError,
)
from .model import (
    Constraint,
    GroundAtom,
    GroundFactor,
    JointTable,
    Logvar,
    Parfactor,
    ParfactorModel,
    PRV,
    enumerate_rows,
    ground,
    joint_distribution,
    load_model,
    parse_model,
    serialize_model,
)
from .metrics import distinct_count, hellinger
from .reduction import (
    ReductionParams,
    ReductionResult,
    apply_reduction,
    dbscan_1d,
    identity_reduction,
    quantile_groups,
    reduce_cluster,
    reduce_quantile,
    select_reduction,
)
from .logic import (
    BoolFormula,
    WeightBucket,
    bucket_by_weight,
    canonical_extract,
    formula_length,
    minimize,
)
from .mln import (
    Atom,
    MLN,
    MLNFormula,
    cofe,
    load_mln,
    mln_joint,
    mln_to_parfactor_model,
    parse_mln,
    serialize_mln,
)
from .inference import (
    Query,
    mean_absolute_error,
    query,
    representative_queries,
)
from .evaluation import (
    ExperimentConfig,
    ExperimentReport,
    PRESETS,
    add_noise,
    build_artificial,
    build_smokers,
    run_experiment,
)

__all__ = [
    "Atom",
    "BoolFormula",
    "CofeError",
    "Constraint",
    "ExperimentConfig",
    "ExperimentReport",
    "GroundAtom",
    "GroundFactor",
    "JointTable",
    "Logvar",
    "MLN",
    "MLNFormula",
    "ModelError",
    "PRESETS",
    "PRV",
    "Parfactor",
    "ParfactorModel",
    "ParseError",
    "Query",
    "ReductionParams",
    "ReductionResult",
    "TooLargeError",
    "WeightBucket",
    "ZeroEvidenceError",
    "add_noise",
    "apply_reduction",
    "bucket_by_weight",
    "build_artificial",
    "build_smokers",
    "canonical_extract",
    "cofe",
    "dbscan_1d",
    "distinct_count",
    "enumerate_rows",
    "formula_length",
    "ground",
    "hellinger",
    "identity_reduction",
    "joint_distribution",
    "load_mln",
    "load_model",
    "mean_absolute_error",
    "minimize",
    "mln_joint",
    "mln_to_parfactor_model",
    "parse_mln",
    "parse_model",
    "quantile_groups",
    "query",
    "reduce_cluster",
    "reduce_quantile",
    "representative_queries",
    "run_experiment",
    "select_reduction",
    "serialize_mln",
    "serialize_model",
]
