"""Decision engine combining Gaussian fuzzification, weighted fuzzy rule bases
and a three-layer Bayesian network with maximum-likelihood CPTs."""

__version__ = "0.1.0"

from .bnet import (
    Cpt,
    Dimension,
    NetworkStructure,
    StructureError,
    cpt_lookup,
    dumps_cpt,
    infer_crisp,
    infer_soft,
    joint_factorization_check,
    loads_cpt,
)
from .core import (
    DEFAULT_SCALE,
    FuzzyVector,
    GradeDistribution,
    LinguisticScale,
    Weights,
    argmax_grade,
    normalize,
)
from .estimator import FuzzyBayesClassifier
from .fuzzify import (
    GaussianFuzzifier,
    GaussianMf,
    IndicatorSpec,
    aggregate_dimension,
    fuzzify_score,
    membership,
)
from .learn import (
    LearnConfig,
    SufficientStats,
    fit_until_converged,
    mle_fit,
    recover_known_cpt,
    update_step,
)
from .rulebase import (
    ExpertKnowledge,
    FuzzyRule,
    assign_consequent,
    build_rulebase,
    enumerate_antecedents,
    fuse_weight,
)

__all__ = [
    "Cpt",
    "DEFAULT_SCALE",
    "Dimension",
    "ExpertKnowledge",
    "FuzzyBayesClassifier",
    "FuzzyRule",
    "FuzzyVector",
    "GaussianFuzzifier",
    "GaussianMf",
    "GradeDistribution",
    "IndicatorSpec",
    "LearnConfig",
    "LinguisticScale",
    "NetworkStructure",
    "StructureError",
    "SufficientStats",
    "Weights",
    "aggregate_dimension",
    "argmax_grade",
    "assign_consequent",
    "build_rulebase",
    "cpt_lookup",
    "dumps_cpt",
    "enumerate_antecedents",
    "fit_until_converged",
    "fuse_weight",
    "fuzzify_score",
    "infer_crisp",
    "infer_soft",
    "joint_factorization_check",
    "loads_cpt",
    "membership",
    "mle_fit",
    "normalize",
    "recover_known_cpt",
    "update_step",
]
