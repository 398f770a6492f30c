"""Two-step linear experiment with closed-form golden values.

The plant is ``x' = x + w + u`` over two steps with ``x_0 = w_0 = 0``,
``|u| <= 1`` discretized, and terminal cost ``x_2^2``.  The second-step
disturbance takes the value -3 with probability ``p`` (else 2), the
observation is uninformative, and a parametric predictor reports ``p_b``.
Closed forms exist for the optimal first control, the expected closed-loop
cost, and all three predictor measures, so the full pipeline (environment ->
predictor -> tree DP -> closed-loop evaluation -> measures) can be checked
against exact values.

Grid alignment: the closed-form optimal first control is ``3 p_b - 1``.
The default ``p_b`` sweep contains only multiples of 1/3000, so with the
default control step of 1e-3 every swept optimum is exactly representable
and the pipeline reproduces the closed forms to float precision.  The audit
run adds near-optimal witness points that are *not* aligned; for those the
control grid is enriched with their exact optima, keeping the audit's
measure/cost orderings free of discretization noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .belief import epsilon_mix
from .environment import EnvironmentModel, observable_truth
from .errors import DomainError
from .measures import (
    ControlProblem,
    MeasureKind,
    exact_predictor_measure,
    monotonicity_audit,
)
from .model import ControlledSystem, CostStructure
from .predictors import toy_parametric_predictor
from .solver import (
    SolverCache,
    StateGrid,
    expected_cost_under_truth,
    solve_tree_policy,
)

W_LOW = -3.0
W_HIGH = 2.0
OBSERVATION = "o"

# 25 sweep points, all multiples of 1/3000, covering [0, 2/3] and containing
# every default p value plus near-0.3 points used as audit witnesses.
DEFAULT_PB_GRID = (
    0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.275, 0.29, 0.295, 0.3, 0.305, 0.31,
    0.325, 0.35, 0.375, 0.4, 0.425, 0.45, 0.475, 0.5, 0.55, 0.6, 0.65, 0.66,
    2.0 / 3.0,
)
DEFAULT_P_VALUES = (0.0, 0.15, 0.3, 0.5, 2.0 / 3.0)


@dataclass(frozen=True)
class ToyConfig:
    p_values: tuple = DEFAULT_P_VALUES
    p_b_grid: tuple = DEFAULT_PB_GRID
    control_step: float = 1e-3
    epsilon: float = 1e-6
    use_pipeline: bool = True
    audit_p: float = 0.3
    # Witness points straddling the optimum closely enough that the
    # log-likelihood can improve while the cost worsens.
    audit_extra_p_b: tuple = (0.29005,)

    def __post_init__(self):
        for v in tuple(self.p_values) + tuple(self.p_b_grid) + tuple(self.audit_extra_p_b):
            if not 0.0 <= v <= 2.0 / 3.0 + 1e-15:
                raise DomainError(f"p and p_b values must lie in [0, 2/3], got {v}")


def make_toy_system(control_step=1e-3, extra_controls=()):
    """Plant, costs, and matching state grid for the two-step experiment."""
    n_controls = int(round(2.0 / control_step)) + 1
    controls = np.linspace(-1.0, 1.0, n_controls)
    if len(extra_controls):
        controls = np.unique(np.concatenate([controls, np.asarray(extra_controls, float)]))
    system = ControlledSystem(
        state_dim=1,
        disturbance_dim=1,
        control_dim=1,
        transition=lambda X, w, U: X + w[0] + U[:, :1],
        control_set=controls.reshape(-1, 1),
        horizon=2,
    )
    cost = CostStructure.time_invariant(
        stage_cost=lambda X, w, U: np.zeros(X.shape[0]),
        terminal_cost=lambda X: X[:, 0] ** 2,
        horizon=2,
    )
    grid = StateGrid(axes=(controls,))  # reachable first-step states are the controls
    return system, cost, grid


def make_toy_environment(p: float) -> EnvironmentModel:
    """Environment drawing the second-step disturbance at step 0.

    The environment state carries (phase, drawn value); the observation is
    uninformative, so the observable truth is the unconditional two-point law.
    """
    if not 0.0 <= p <= 2.0 / 3.0 + 1e-15:
        raise DomainError(f"p must lie in [0, 2/3], got {p}")
    z_values = ((0, W_LOW), (0, W_HIGH), (1, W_LOW), (1, W_HIGH))
    z0_probs = (p, 1.0 - p, 0.0, 0.0)
    return EnvironmentModel(
        z_values=z_values,
        z0_probs=z0_probs,
        r_values=(0,),
        r_probs=(1.0,),
        f_E=lambda z, r: (1, z[1]),
        h_o=lambda z, r: OBSERVATION,
        h_w=lambda z, r: (0.0,) if z[0] == 0 else (z[1],),
        horizon=2,
    )


def toy_analytic(p: float, p_b: float) -> dict:
    """Closed forms for the optimal first control, cost, and measures."""
    u0 = 3.0 * p_b - 1.0
    cost = 9.0 * p_b ** 2 - 18.0 * p * p_b + 9.0 * p
    e_m = -50.0 * p * p_b + 25.0 * p_b + 25.0 * p
    e_r = 9.0 * p_b ** 2 - 18.0 * p * p_b + 8.0 * p
    low_term = 0.0 if p == 0.0 else (math.inf if p_b == 0.0 else -p * math.log(p_b))
    high_term = 0.0 if p == 1.0 else (math.inf if p_b == 1.0 else -(1.0 - p) * math.log(1.0 - p_b))
    return {"u0": u0, "cost": cost, "mse": e_m, "regret": e_r, "loglik": low_term + high_term}


@dataclass(frozen=True)
class ToyRow:
    p: float
    p_b: float
    cost: float
    mse: float
    regret: float
    loglik: float
    u0: float
    cost_analytic: float
    mse_analytic: float
    regret_analytic: float
    loglik_analytic: float
    u0_analytic: float


def _pipeline_point(p_b, truth, problem):
    """Full-pipeline cost, measures, and first control for one belief."""
    predictor = toy_parametric_predictor(p_b)
    belief = predictor.predict(OBSERVATION)
    mixed = epsilon_mix(belief, list(truth.scenarios), problem.epsilon)
    policy = solve_tree_policy(
        problem.system, problem.cost, mixed, problem.x0, problem.grid, cache=problem.cache
    )
    cost_val = expected_cost_under_truth(problem.system, problem.cost, policy, truth, problem.x0)
    e_m = exact_predictor_measure(MeasureKind.MSE, belief, truth)
    e_p = exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, belief, truth)
    e_r = exact_predictor_measure(MeasureKind.REGRET, belief, truth, problem=problem)
    node = policy.descend(policy.root, (0.0,))
    u0 = policy.control(node, (0.0,))[0][0]
    return cost_val, e_m, e_r, e_p, u0


def toy_sweep(config: ToyConfig = ToyConfig()):
    """Analytic and pipeline tables over the (p, p_b) grid.

    Returns ``(rows, discrepancies)`` where ``discrepancies`` maps column
    name to the max absolute analytic-vs-pipeline gap (infinite entries
    must agree exactly and are excluded from the max).
    """
    system, cost, grid = make_toy_system(config.control_step)
    cache = SolverCache()
    rows = []
    for p in config.p_values:
        env = make_toy_environment(p)
        truth = observable_truth(env, OBSERVATION)
        problem = ControlProblem(
            system=system, cost=cost, x0=(0.0,), grid=grid, epsilon=config.epsilon, cache=cache
        )
        for p_b in config.p_b_grid:
            ana = toy_analytic(p, p_b)
            if config.use_pipeline:
                c, e_m, e_r, e_p, u0 = _pipeline_point(p_b, truth, problem)
            else:
                c, e_m, e_r, e_p, u0 = (
                    ana["cost"], ana["mse"], ana["regret"], ana["loglik"], ana["u0"],
                )
            rows.append(ToyRow(
                p=p, p_b=p_b, cost=c, mse=e_m, regret=e_r, loglik=e_p, u0=u0,
                cost_analytic=ana["cost"], mse_analytic=ana["mse"],
                regret_analytic=ana["regret"], loglik_analytic=ana["loglik"],
                u0_analytic=ana["u0"],
            ))
    discrepancies = {}
    for col in ("cost", "mse", "regret", "loglik", "u0"):
        worst = 0.0
        for r in rows:
            a = getattr(r, col + "_analytic")
            b = getattr(r, col)
            if math.isinf(a) or math.isinf(b):
                if a != b:
                    worst = math.inf
                continue
            worst = max(worst, abs(a - b))
        discrepancies[col] = worst
    return rows, discrepancies


def toy_audit(config: ToyConfig = ToyConfig()):
    """Monotonicity audits of the three measures at ``config.audit_p``.

    The audit grid is the sweep grid plus the witness points; the control
    grid gains each point's exact believed optimum so the DP introduces no
    rounding into the orderings.  Returns ``(entries, audits)`` with
    ``entries`` mapping p_b -> (cost, mse, regret, loglik).
    """
    p = config.audit_p
    pb_values = tuple(sorted(set(config.p_b_grid) | set(config.audit_extra_p_b)))
    extra_optima = [3.0 * pb - 1.0 for pb in config.audit_extra_p_b]
    system, cost, grid = make_toy_system(config.control_step, extra_controls=extra_optima)
    env = make_toy_environment(p)
    truth = observable_truth(env, OBSERVATION)
    problem = ControlProblem(
        system=system, cost=cost, x0=(0.0,), grid=grid, epsilon=config.epsilon,
        cache=SolverCache(),
    )
    entries = {}
    for p_b in pb_values:
        c, e_m, e_r, e_p, _u0 = _pipeline_point(p_b, truth, problem)
        entries[p_b] = {"cost": c, "mse": e_m, "regret": e_r, "loglik": e_p}
    audits = {}
    for kind, col in ((MeasureKind.MSE, "mse"), (MeasureKind.REGRET, "regret"),
                      (MeasureKind.LOG_LIKELIHOOD, "loglik")):
        audits[kind] = monotonicity_audit(
            [(p_b, entries[p_b][col], entries[p_b]["cost"]) for p_b in pb_values]
        )
    return entries, audits
