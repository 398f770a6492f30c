import math

import numpy as np
import pytest

from conftest import make_finite_environment, make_lattice_instance
from poc.belief import ScenarioBelief, point_mass
from poc.environment import generate_dataset, observable_truth, observation_support
from poc.errors import DomainError
from poc.measures import (
    ControlProblem,
    MeasureKind,
    empirical_predictor_measure,
    exact_predictor_measure,
    kendall_tau_b,
    log_likelihood,
    monotonicity_audit,
    mse,
    regret,
)
from poc.model import DisturbanceSequence
from poc.predictors import toy_parametric_predictor, truth_predictor
from poc.solver import SolverCache
from poc.toy import OBSERVATION, make_toy_environment, make_toy_system


@pytest.fixture(scope="module")
def toy_problem():
    system, cost, grid = make_toy_system()
    return ControlProblem(system=system, cost=cost, x0=(0.0,), grid=grid,
                          cache=SolverCache())


def toy_belief(p_b):
    return toy_parametric_predictor(p_b).predict(OBSERVATION)


W_LOW_SEQ = DisturbanceSequence.of([(0.0,), (-3.0,)])
W_HIGH_SEQ = DisturbanceSequence.of([(0.0,), (2.0,)])


# --- one-time measures -------------------------------------------------------


def test_mse_toy_hand_expansion():
    for p_b in (0.0, 0.25, 0.6):
        belief = toy_belief(p_b)
        assert mse(W_HIGH_SEQ, belief) == pytest.approx(25 * p_b, abs=1e-12)
        assert mse(W_LOW_SEQ, belief) == pytest.approx(25 * (1 - p_b), abs=1e-12)


def test_mse_zero_iff_point_mass_on_realized():
    assert mse(W_LOW_SEQ, point_mass(W_LOW_SEQ)) == 0.0
    assert mse(W_LOW_SEQ, point_mass(W_HIGH_SEQ)) > 0
    assert mse(W_LOW_SEQ, toy_belief(0.999999 * 2 / 3)) > 0


def test_mse_length_mismatch():
    with pytest.raises(DomainError):
        mse(DisturbanceSequence.of([(0.0,)]), toy_belief(0.3))


def test_mse_per_step_mean_option():
    belief = toy_belief(0.5)
    assert mse(W_HIGH_SEQ, belief, per_step_mean=True) == pytest.approx(
        mse(W_HIGH_SEQ, belief) / 2
    )


def test_log_likelihood_values_and_infinity():
    belief = toy_belief(0.3)
    assert log_likelihood(W_LOW_SEQ, belief) == pytest.approx(-math.log(0.3))
    assert log_likelihood(W_HIGH_SEQ, belief) == pytest.approx(-math.log(0.7))
    assert log_likelihood(W_LOW_SEQ, point_mass(W_HIGH_SEQ)) == math.inf
    assert log_likelihood(W_LOW_SEQ, point_mass(W_LOW_SEQ)) == 0.0


def test_regret_zero_for_point_mass_on_realized(toy_problem):
    assert regret(W_LOW_SEQ, point_mass(W_LOW_SEQ), toy_problem) == 0.0
    assert regret(W_HIGH_SEQ, point_mass(W_HIGH_SEQ), toy_problem) == 0.0


def test_regret_nonnegative_on_lattice_instances():
    rng = np.random.default_rng(123)
    for _ in range(25):
        system, cost, grid, belief, x0 = make_lattice_instance(rng)
        problem = ControlProblem(system=system, cost=cost, x0=x0, grid=grid)
        wbar = DisturbanceSequence(values=belief.scenarios[0])
        r = regret(wbar, belief, problem)
        assert r >= -1e-9


# --- exact predictor measures -------------------------------------------------


def closed_forms(p, p_b):
    return {
        MeasureKind.MSE: -50 * p * p_b + 25 * p_b + 25 * p,
        MeasureKind.REGRET: 9 * p_b**2 - 18 * p * p_b + 8 * p,
        MeasureKind.LOG_LIKELIHOOD: (
            (0.0 if p == 0 else (math.inf if p_b == 0 else -p * math.log(p_b)))
            + (-(1 - p) * math.log(1 - p_b))
        ),
    }


def test_exact_measures_reproduce_toy_closed_forms(toy_problem):
    for p in (0.0, 0.3, 0.5):
        env = make_toy_environment(p)
        truth = observable_truth(env, OBSERVATION)
        for p_b in (0.05, 0.3, 0.6):
            belief = toy_belief(p_b)
            expected = closed_forms(p, p_b)
            for kind in MeasureKind:
                got = exact_predictor_measure(kind, belief, truth, problem=toy_problem)
                assert got == pytest.approx(expected[kind], abs=1e-9), (p, p_b, kind)


def test_exact_regret_at_matched_belief(toy_problem):
    env = make_toy_environment(0.3)
    truth = observable_truth(env, OBSERVATION)
    value = exact_predictor_measure(MeasureKind.REGRET, toy_belief(0.3), truth,
                                    problem=toy_problem)
    assert value == pytest.approx(1.59, abs=1e-9)  # 8p - 9p^2 at p = 0.3


def test_exact_measure_point_mass_truth_equals_one_time(toy_problem):
    belief = toy_belief(0.4)
    truth = point_mass(W_LOW_SEQ)
    assert exact_predictor_measure(MeasureKind.MSE, belief, truth) == pytest.approx(
        mse(W_LOW_SEQ, belief)
    )


def test_regret_decomposes_as_cost_minus_posterior(toy_problem):
    # affinity: E_R - expected cost is constant across beliefs
    env = make_toy_environment(0.3)
    truth = observable_truth(env, OBSERVATION)
    from poc.belief import epsilon_mix
    from poc.solver import expected_cost_under_truth, solve_tree_policy

    offsets = []
    for p_b in (0.1, 0.3, 0.55):
        belief = toy_belief(p_b)
        e_r = exact_predictor_measure(MeasureKind.REGRET, belief, truth,
                                      problem=toy_problem)
        mixed = epsilon_mix(belief, list(truth.scenarios), toy_problem.epsilon)
        policy = solve_tree_policy(
            toy_problem.system, toy_problem.cost, mixed, (0.0,), toy_problem.grid,
            cache=toy_problem.cache,
        )
        cost_val = expected_cost_under_truth(
            toy_problem.system, toy_problem.cost, policy, truth, (0.0,)
        )
        offsets.append(e_r - cost_val)
    assert max(offsets) - min(offsets) < 1e-9


def test_loglik_minimized_at_truth(toy_problem):
    env = make_toy_environment(0.3)
    truth = observable_truth(env, OBSERVATION)
    grid_vals = [0.1, 0.2, 0.25, 0.3, 0.35, 0.4, 0.5, 0.6]
    values = [
        exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, toy_belief(pb), truth)
        for pb in grid_vals
    ]
    assert grid_vals[int(np.argmin(values))] == 0.3
    # derivative sign change around p_b = p
    below = exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, toy_belief(0.299), truth)
    above = exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, toy_belief(0.301), truth)
    at = exact_predictor_measure(MeasureKind.LOG_LIKELIHOOD, toy_belief(0.3), truth)
    assert at < below and at < above


# --- empirical measures --------------------------------------------------------


def test_empirical_matches_exact_within_3_sigma():
    rng = np.random.default_rng(55)
    env = make_finite_environment(rng, horizon=2)
    pred = truth_predictor(env)
    pairs = generate_dataset(env, 10**5, rng_seed=999)
    report = empirical_predictor_measure(MeasureKind.MSE, pred, pairs, predictor_id="t")
    exact = 0.0
    for o, po in observation_support(env).items():
        truth = observable_truth(env, o)
        exact += po * exact_predictor_measure(MeasureKind.MSE, pred.predict(o), truth)
    per_pair = [
        mse(p.wbar, pred.predict(p.observation)) for p in pairs[:2000]
    ]
    sigma = np.std(per_pair, ddof=1) / math.sqrt(len(pairs))
    assert abs(report.value - exact) < 3 * sigma * math.sqrt(len(pairs) / 2000) + 1e-9


def test_empirical_identical_pairs_equal_one_time(toy_problem):
    env = make_toy_environment(0.3)
    pairs = [p for p in generate_dataset(env, 8, rng_seed=1)]
    same = [pairs[0]] * 5
    pred = toy_parametric_predictor(0.3)
    report = empirical_predictor_measure(MeasureKind.MSE, pred, same, predictor_id="x")
    assert report.value == pytest.approx(
        mse(pairs[0].wbar, pred.predict(pairs[0].observation))
    )
    assert report.sample_count == 5


def test_empirical_empty_dataset_rejected():
    with pytest.raises(DomainError):
        empirical_predictor_measure(MeasureKind.MSE, toy_parametric_predictor(0.3), [])


def test_empirical_infinite_loglik_flagged():
    env = make_toy_environment(0.5)
    pairs = generate_dataset(env, 64, rng_seed=3)
    pred = toy_parametric_predictor(0.0)  # point mass on w1 = 2
    report = empirical_predictor_measure(
        MeasureKind.LOG_LIKELIHOOD, pred, pairs, predictor_id="pm"
    )
    assert math.isinf(report.value)
    assert report.infinite_count > 0
    assert report.finite_mean == pytest.approx(0.0)  # hits have probability one


# --- audits --------------------------------------------------------------------


def test_kendall_tau_b_basics():
    assert kendall_tau_b([1, 2, 3], [10, 20, 30]) == 1.0
    assert kendall_tau_b([1, 2, 3], [30, 20, 10]) == -1.0
    assert abs(kendall_tau_b([1, 2, 3, 4], [1, 3, 2, 4])) < 1.0
    with pytest.raises(DomainError):
        kendall_tau_b([1.0], [1.0])


def test_monotonicity_audit_detects_violations():
    entries = [("a", 1.0, 5.0), ("b", 2.0, 3.0), ("c", 3.0, 1.0)]
    report = monotonicity_audit(entries)
    # measure increases while cost decreases: every ordered pair violates
    assert report.violation_count == 3
    assert not report.best_coincide
    assert report.kendall == -1.0


def test_monotonicity_audit_aligned_entries():
    entries = [("a", 1.0, 1.0), ("b", 2.0, 2.0), ("c", 3.0, 3.0)]
    report = monotonicity_audit(entries)
    assert report.violation_count == 0
    assert report.best_coincide
    assert report.kendall == 1.0
    with pytest.raises(DomainError):
        monotonicity_audit(entries[:1])


def test_monotonicity_audit_handles_infinities():
    entries = [("inf-point", math.inf, 1.0), ("good", 1.0, 2.0)]
    report = monotonicity_audit(entries)
    # finite measure is better, cost is worse -> one violation
    assert report.violation_count == 1
    assert report.measure_argmin_ids == ("good",)
