"""Exact tabular MDP toolkit with the policy disentangled from the dynamics."""

from .core import (
    Marginalizer,
    MdpInstance,
    Policy,
    build_marginalizer,
    build_policy_matrix,
    state_action_transition,
    state_transition,
)
from .distances import PolicyDivergenceReport, kl_divergence, max_divergences, tv_distance
from .evaluation import (
    EvaluationResult,
    advantage,
    evaluate,
    objective,
    q_function,
    stationary_distribution,
    value_function,
    visitation,
)
from .exceptions import (
    ConsistencyError,
    DimensionMismatch,
    IndexOutOfRange,
    MdpError,
    NonFiniteInput,
    NotUniqueError,
    ParseError,
    SimplexViolation,
    SingularSystem,
    ValidationError,
)
from .model_io import (
    TransitionSample,
    builtin_m1,
    estimate_transitions,
    generate_random_mdp,
    parse_mdp,
    write_mdp,
)
from .optimizer import (
    ImprovementConfig,
    ImprovementTrace,
    finite_difference_gradient,
    improve,
    majorization_value,
    value_iteration_oracle,
)
from .parameterization import ParameterizedPolicy, softmax_jacobian, softmax_policy
from .surrogates import (
    SurrogateReport,
    bound_report,
    f_advantage_flow,
    surrogate,
    surrogate_gradient,
    surrogate_values,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DimensionMismatch",
    "EvaluationResult",
    "ImprovementConfig",
    "ImprovementTrace",
    "IndexOutOfRange",
    "Marginalizer",
    "MdpError",
    "MdpInstance",
    "NonFiniteInput",
    "NotUniqueError",
    "ParameterizedPolicy",
    "ParseError",
    "Policy",
    "PolicyDivergenceReport",
    "SimplexViolation",
    "SingularSystem",
    "SurrogateReport",
    "TransitionSample",
    "ValidationError",
    "advantage",
    "bound_report",
    "build_marginalizer",
    "build_policy_matrix",
    "builtin_m1",
    "estimate_transitions",
    "evaluate",
    "f_advantage_flow",
    "finite_difference_gradient",
    "generate_random_mdp",
    "improve",
    "kl_divergence",
    "majorization_value",
    "max_divergences",
    "objective",
    "parse_mdp",
    "q_function",
    "softmax_jacobian",
    "softmax_policy",
    "state_action_transition",
    "state_transition",
    "stationary_distribution",
    "surrogate",
    "surrogate_gradient",
    "surrogate_values",
    "tv_distance",
    "value_function",
    "value_iteration_oracle",
    "visitation",
    "write_mdp",
]
