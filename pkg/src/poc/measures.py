"""Prediction performance measures and monotonicity audits.

One-time measures score a single ``(realized sequence, belief)`` pair:
squared-error (believed expectation of the squared distance to the realized
sequence), regret (closed-loop cost of the belief's optimal policy minus the
deterministic optimum for the realized sequence), and negative
log-likelihood of the realized sequence under the belief.  Predictor-level
measures are exact expectations of the one-time measures over a truth
distribution, or empirical means over ``{o, wbar}`` datasets.

Log-likelihood uses probability mass on the discretized support (measured
values snap to the nearest atom); zero-mass events yield ``+inf``, which is
carried as an explicit flag rather than clipped.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .belief import ScenarioBelief, epsilon_mix, point_mass, snap_to_atoms
from .errors import DomainError
from .model import ControlledSystem, CostStructure, DisturbanceSequence
from .solver import (
    DEFAULT_EPSILON,
    SolverCache,
    StateGrid,
    evaluate_policy_cost,
    solve_tree_policy,
)


class MeasureKind(enum.Enum):
    MSE = "mse"
    REGRET = "regret"
    LOG_LIKELIHOOD = "loglik"


@dataclass
class ControlProblem:
    """The control context regret needs: plant, costs, start state, solver grid."""

    system: ControlledSystem
    cost: CostStructure
    x0: object
    grid: StateGrid
    epsilon: float = DEFAULT_EPSILON
    cache: Optional[SolverCache] = None
    posterior_cache: dict = field(default_factory=dict)

    def posterior_cost(self, wbar: DisturbanceSequence) -> float:
        """Deterministic-DP optimum for one realized sequence (cached)."""
        key = wbar.values
        if key not in self.posterior_cache:
            policy = solve_tree_policy(
                self.system, self.cost, point_mass(wbar), self.x0, self.grid, cache=self.cache
            )
            self.posterior_cache[key] = evaluate_policy_cost(
                self.system, self.cost, self.x0, wbar, policy
            )
        return self.posterior_cache[key]


def _as_seq(wbar) -> DisturbanceSequence:
    return wbar if isinstance(wbar, DisturbanceSequence) else DisturbanceSequence.of(wbar)


def mse(wbar, belief: ScenarioBelief, per_step_mean: bool = False) -> float:
    """Believed expectation of the squared distance to the realized sequence.

    The whole sequence is stacked into one vector; ``per_step_mean`` divides
    by the number of steps (reporting convenience only).
    """
    wbar = _as_seq(wbar)
    if belief.length != len(wbar):
        raise DomainError(
            f"belief covers {belief.length} steps but the sequence has {len(wbar)}"
        )
    diffs = belief.stacked() - wbar.stacked()[None, :]
    value = float(np.dot(np.asarray(belief.probs), np.einsum("ij,ij->i", diffs, diffs)))
    return value / len(wbar) if per_step_mean else value


def log_likelihood(wbar, belief: ScenarioBelief, snap_tol=None) -> float:
    """Negative log probability mass of the realized sequence under the belief.

    Each step of the measured sequence snaps to the nearest support atom at
    that step (within ``snap_tol``; default half the minimal gap).  Returns
    ``+inf`` when the snapped sequence carries no mass.
    """
    wbar = _as_seq(wbar)
    if belief.length != len(wbar):
        raise DomainError(
            f"belief covers {belief.length} steps but the sequence has {len(wbar)}"
        )
    snapped = []
    for i in range(len(wbar)):
        atom = snap_to_atoms(wbar[i], belief.atoms_at(i), tol=snap_tol)
        if atom is None:
            return math.inf
        snapped.append(atom)
    p = belief.prob_of(tuple(snapped))
    if p <= 0.0:
        return math.inf
    return -math.log(p)


def regret(wbar, belief: ScenarioBelief, problem: ControlProblem) -> float:
    """Closed-loop cost of the belief policy on ``wbar`` minus the posterior optimum.

    The belief is epsilon-mixed with the realized sequence so the closed
    loop stays on the policy tree; the posterior term shares the control and
    state grids, so both sides carry the same discretization bias.
    """
    wbar = _as_seq(wbar)
    mixed = epsilon_mix(belief, [wbar], problem.epsilon)
    policy = solve_tree_policy(
        problem.system, problem.cost, mixed, problem.x0, problem.grid, cache=problem.cache
    )
    j_belief = evaluate_policy_cost(problem.system, problem.cost, problem.x0, wbar, policy)
    return j_belief - problem.posterior_cost(wbar)


def one_time_measure(kind: MeasureKind, wbar, belief: ScenarioBelief,
                     problem: Optional[ControlProblem] = None, snap_tol=None) -> float:
    if kind is MeasureKind.MSE:
        return mse(wbar, belief)
    if kind is MeasureKind.LOG_LIKELIHOOD:
        return log_likelihood(wbar, belief, snap_tol=snap_tol)
    if kind is MeasureKind.REGRET:
        if problem is None:
            raise DomainError("regret requires a ControlProblem context")
        return regret(wbar, belief, problem)
    raise DomainError(f"unknown measure kind {kind!r}")


def exact_predictor_measure(kind: MeasureKind, belief: ScenarioBelief, truth: ScenarioBelief,
                            problem: Optional[ControlProblem] = None, snap_tol=None) -> float:
    """Exact expectation of a one-time measure over a finite truth distribution."""
    if kind is MeasureKind.REGRET:
        if problem is None:
            raise DomainError("regret requires a ControlProblem context")
        mixed = epsilon_mix(belief, list(truth.scenarios), problem.epsilon)
        policy = solve_tree_policy(
            problem.system, problem.cost, mixed, problem.x0, problem.grid, cache=problem.cache
        )
        total = 0.0
        for s, p in zip(truth.scenarios, truth.probs):
            if p == 0.0:
                continue
            seq = DisturbanceSequence(values=s)
            j = evaluate_policy_cost(problem.system, problem.cost, problem.x0, seq, policy)
            total += p * (j - problem.posterior_cost(seq))
        return total
    total = 0.0
    for s, p in zip(truth.scenarios, truth.probs):
        if p == 0.0:
            continue
        val = one_time_measure(kind, DisturbanceSequence(values=s), belief, snap_tol=snap_tol)
        if math.isinf(val):
            return math.inf
        total += p * val
    return total


@dataclass(frozen=True)
class MeasureReport:
    """Per-predictor aggregation of one measure, with companion cost."""

    predictor_id: str
    kind: MeasureKind
    value: float
    expected_cost: Optional[float] = None
    sample_count: object = "exact"
    config_digest: Optional[str] = None
    infinite_count: int = 0
    finite_mean: Optional[float] = None


def empirical_predictor_measure(kind: MeasureKind, predictor, dataset,
                                problem: Optional[ControlProblem] = None,
                                predictor_id: str = "", snap_tol=None,
                                config_digest=None) -> MeasureReport:
    """Mean one-time measure over ``{o, wbar}`` pairs.

    Predictor outputs are memoized per distinct observation.  An infinite
    log-likelihood contaminates the mean: the report then carries the
    infinite count and the mean over the finite subsample.
    """
    if not dataset:
        raise DomainError("dataset must be nonempty")
    belief_by_obs = {}
    values = []
    costs = [] if problem is not None else None
    for pair in dataset:
        o = pair.observation
        if o not in belief_by_obs:
            belief_by_obs[o] = predictor.predict(o, step=0)
        belief = belief_by_obs[o]
        values.append(one_time_measure(kind, pair.wbar, belief, problem=problem, snap_tol=snap_tol))
        if costs is not None:
            mixed = epsilon_mix(belief, [pair.wbar], problem.epsilon)
            policy = solve_tree_policy(
                problem.system, problem.cost, mixed, problem.x0, problem.grid,
                cache=problem.cache,
            )
            costs.append(
                evaluate_policy_cost(problem.system, problem.cost, problem.x0, pair.wbar, policy)
            )
    finite = [v for v in values if math.isfinite(v)]
    inf_count = len(values) - len(finite)
    mean = math.fsum(values) / len(values) if inf_count == 0 else math.inf
    return MeasureReport(
        predictor_id=predictor_id,
        kind=kind,
        value=mean,
        expected_cost=(math.fsum(costs) / len(costs)) if costs else None,
        sample_count=len(values),
        config_digest=config_digest,
        infinite_count=inf_count,
        finite_mean=(math.fsum(finite) / len(finite)) if finite else None,
    )


def kendall_tau_b(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Kendall rank correlation with tie correction (tau-b)."""
    n = len(xs)
    if n < 2:
        raise DomainError("kendall tau needs at least 2 entries")
    concordant = discordant = ties_x = ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[i] > xs[j]) - (xs[i] < xs[j])
            dy = (ys[i] > ys[j]) - (ys[i] < ys[j])
            if dx == 0 and dy == 0:
                ties_x += 1
                ties_y += 1
            elif dx == 0:
                ties_x += 1
            elif dy == 0:
                ties_y += 1
            elif dx == dy:
                concordant += 1
            else:
                discordant += 1
    total = n * (n - 1) // 2
    denom = math.sqrt((total - ties_x) * (total - ties_y))
    if denom == 0:
        return 0.0
    return (concordant - discordant) / denom


@dataclass(frozen=True)
class Violation:
    """A better-measure/worse-cost ordered pair."""

    id_i: object
    id_j: object
    measure_i: float
    measure_j: float
    cost_i: float
    cost_j: float


@dataclass(frozen=True)
class AuditReport:
    """Monotonicity audit of (measure, cost) pairs across predictors."""

    entries: tuple
    violations: tuple
    measure_argmin_ids: tuple
    cost_argmin_ids: tuple
    best_coincide: bool
    kendall: float

    @property
    def violation_count(self):
        return len(self.violations)


def monotonicity_audit(entries) -> AuditReport:
    """List every ordered pair where the measure improves but the cost worsens.

    ``entries`` is a sequence of ``(predictor_id, measure_value, cost)``.
    Also reports whether a measure-minimizing entry is cost-minimizing and
    the Kendall rank correlation between measure and cost.
    """
    entries = [(e[0], float(e[1]), float(e[2])) for e in entries]
    if len(entries) < 2:
        raise DomainError("monotonicity audit needs at least 2 entries")
    violations = []
    for pid_i, m_i, c_i in entries:
        for pid_j, m_j, c_j in entries:
            if m_i < m_j and c_i > c_j:
                violations.append(Violation(pid_i, pid_j, m_i, m_j, c_i, c_j))
    min_measure = min(m for _, m, _ in entries)
    min_cost = min(c for _, _, c in entries)
    measure_ids = tuple(pid for pid, m, _ in entries if m == min_measure)
    cost_ids = tuple(pid for pid, _, c in entries if c == min_cost)
    return AuditReport(
        entries=tuple(entries),
        violations=tuple(violations),
        measure_argmin_ids=measure_ids,
        cost_argmin_ids=cost_ids,
        best_coincide=bool(set(measure_ids) & set(cost_ids)),
        kendall=kendall_tau_b([m for _, m, _ in entries], [c for _, _, c in entries]),
    )
