"""Predictive optimal control analysis.

Environment models with a hidden prediction state, finite scenario beliefs,
stochastic dynamic programming over scenario trees, three recurrent
prediction schemes, and predictor evaluation measures (squared error,
regret, log-likelihood) with monotonicity audits of the measure-vs-cost
relationship.
"""

__version__ = "0.1.0"

from .belief import (
    BeliefSequence,
    ScenarioBelief,
    believed_expectation,
    condition_on_observed,
    discretize_gaussian,
    epsilon_mix,
    point_mass,
    product_belief,
    total_variation,
)
from .environment import (
    EnvironmentModel,
    HiddenPredictionState,
    ObservationDisturbancePair,
    apriori_truth,
    generate_dataset,
    is_accurate,
    max_indistinguishable_set,
    observable_truth,
    realize,
    sample_hidden_state,
    unconditional_law,
)
from .errors import (
    CapacityError,
    ConfigError,
    DomainError,
    InfeasibleControlError,
    NumericError,
    SupportError,
)
from .measures import (
    ControlProblem,
    MeasureKind,
    MeasureReport,
    empirical_predictor_measure,
    exact_predictor_measure,
    log_likelihood,
    monotonicity_audit,
    mse,
    regret,
)
from .model import (
    ControlledSystem,
    CostStructure,
    DisturbanceSequence,
    Trajectory,
    rollout,
)
from .predictors import (
    Predictor,
    VelocityObservation,
    ar_surrogate_predictor,
    blind_predictor,
    constant_velocity_predictor,
    exponential_decay_predictor,
    linear_decay_predictor,
    stochastic_linear_decay_predictor,
    toy_parametric_predictor,
    truth_predictor,
    zero_mean_gaussian_predictor,
)
from .solver import (
    Policy,
    SolverCache,
    StateGrid,
    brute_force_policy,
    evaluate_policy_cost,
    expected_cost_under_truth,
    posterior_optimal_cost,
    run_type1,
    run_type2,
    run_type3,
    solve_tree_policy,
)
