import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poc.belief import (
    ScenarioBelief,
    believed_expectation,
    condition_on_observed,
    discretize_gaussian,
    epsilon_mix,
    min_support_gap,
    point_mass,
    product_belief,
    snap_to_atoms,
    total_variation,
)
from poc.errors import CapacityError, DomainError, NumericError, SupportError
from poc.measures import log_likelihood, mse
from poc.model import DisturbanceSequence


def two_step(*pairs):
    scenarios, probs = zip(*pairs)
    return ScenarioBelief(start_step=0, scenarios=scenarios, probs=probs)


def test_point_mass_basics():
    b = point_mass([(0.0,), (-3.0,)])
    assert b.support_size == 1
    assert b.probs == (1.0,)
    assert b.prob_of(((0.0,), (-3.0,))) == 1.0


def test_point_mass_measures_are_zero():
    wbar = DisturbanceSequence.of([(0.5,), (2.0,)])
    b = point_mass(wbar)
    assert mse(wbar, b) == 0.0
    assert log_likelihood(wbar, b) == 0.0


def test_validation_rejects_bad_inputs():
    with pytest.raises(DomainError):
        ScenarioBelief(start_step=0, scenarios=(((0.0,),),), probs=(0.5,))
    with pytest.raises(DomainError):
        ScenarioBelief(start_step=0, scenarios=(((0.0,),), ((0.0,),)), probs=(0.5, 0.5))
    with pytest.raises(DomainError):
        ScenarioBelief(start_step=0, scenarios=(((0.0,),), ((1.0,), (2.0,))), probs=(0.5, 0.5))
    with pytest.raises(DomainError):
        ScenarioBelief(start_step=0, scenarios=(((0.0,),), ((1.0,),)), probs=(-0.1, 1.1))


def test_epsilon_mix_identity_and_arithmetic():
    a = ((0.0,), (-3.0,))
    b = ((0.0,), (2.0,))
    pm = point_mass(a)
    assert epsilon_mix(pm, [a, b], 0.0) is pm
    mixed = epsilon_mix(pm, [a, b], 0.2)
    assert mixed.prob_of(a) == pytest.approx(0.9, abs=1e-15)
    assert mixed.prob_of(b) == pytest.approx(0.1, abs=1e-15)


def test_epsilon_mix_domain_errors():
    pm = point_mass(((0.0,),))
    with pytest.raises(DomainError):
        epsilon_mix(pm, [((0.0,),)], 1.0)
    with pytest.raises(DomainError):
        epsilon_mix(pm, [], 0.1)


def test_condition_forced_renormalization():
    b = two_step((((-3.0,),), 0.3), (((2.0,),), 0.7))
    c = condition_on_observed(b, (-3.0,))
    assert c.start_step == 1
    assert c.scenarios == ((),)
    assert c.probs == (1.0,)


def brute_force_condition(belief, atom):
    # enumeration oracle: posterior over suffixes by direct filtering
    num = {}
    mass = 0.0
    for s, p in zip(belief.scenarios, belief.probs):
        if s[0] == atom:
            num[s[1:]] = num.get(s[1:], 0.0) + p
            mass += p
    return {k: v / mass for k, v in num.items()}


def test_condition_matches_enumeration_oracle():
    a, b, c, d = (1.0,), (2.0,), (3.0,), (4.0,)
    belief = two_step(((a, c), 0.2), ((a, d), 0.2), ((b, c), 0.6))
    cond = condition_on_observed(belief, a)
    oracle = brute_force_condition(belief, a)
    assert set(cond.scenarios) == set(oracle)
    for s, p in zip(cond.scenarios, cond.probs):
        assert p == pytest.approx(oracle[s], abs=1e-15)
    assert cond.prob_of(((3.0,),)) == pytest.approx(0.5)
    assert cond.prob_of(((4.0,),)) == pytest.approx(0.5)


def test_condition_point_mass_gives_tail():
    pm = point_mass([(1.0,), (2.0,), (3.0,)])
    c = condition_on_observed(pm, (1.0,))
    assert c.scenarios == (((2.0,), (3.0,)),)
    assert c.start_step == 1


def test_condition_off_support_raises():
    b = two_step((((-3.0,), (0.0,)), 1.0))
    with pytest.raises(SupportError):
        condition_on_observed(b, (5.0,))


def test_condition_snaps_measured_values():
    b = two_step((((-3.0,), (0.0,)), 0.5), (((2.0,), (0.0,)), 0.5))
    # within half the minimal gap (2.5)
    c = condition_on_observed(b, (-2.2,))
    assert c.start_step == 1
    assert c.probs == (1.0,)


def test_believed_expectation_examples():
    b = two_step((((-3.0,),), 0.3), (((2.0,),), 0.7))
    val = believed_expectation(b, lambda seq: seq[0][0])
    assert val == pytest.approx(0.5, abs=1e-15)
    pm = point_mass([(4.0,)])
    assert believed_expectation(pm, lambda seq: seq[0][0] ** 2) == 16.0
    with pytest.raises(NumericError):
        believed_expectation(pm, lambda seq: math.inf)


def test_believed_expectation_matches_sampling_oracle():
    rng = np.random.default_rng(123)
    values = [(-3.0,), (0.5,), (2.0,)]
    probs = [0.2, 0.5, 0.3]
    belief = ScenarioBelief(
        start_step=0, scenarios=tuple((v,) for v in values), probs=tuple(probs)
    )
    f = lambda seq: math.sin(seq[0][0]) + seq[0][0] ** 2
    exact = believed_expectation(belief, f)
    n = 10**5
    draws = rng.choice(len(values), size=n, p=probs)
    samples = np.asarray([f(((values[i][0],),)) for i in draws])
    sigma = samples.std(ddof=1) / math.sqrt(n)
    assert abs(samples.mean() - exact) < 3 * sigma + 1e-12


def test_discretize_gaussian_degenerate_and_symmetry():
    assert discretize_gaussian(1.5, 0.0, 5) == [(1.5, 0.2)] * 5
    atoms = discretize_gaussian(0.0, 1.0, 5)
    values = [v for v, _ in atoms]
    assert values[2] == 0.0
    for i in range(5):
        assert values[i] == -values[4 - i]  # exact antisymmetry


def test_discretize_gaussian_matches_quadrature_oracle():
    from scipy import integrate, stats

    n = 5
    atoms = discretize_gaussian(0.0, 1.0, n)
    bounds = [-np.inf] + [stats.norm.ppf(i / n) for i in range(1, n)] + [np.inf]
    for i, (value, prob) in enumerate(atoms):
        assert prob == pytest.approx(1.0 / n, abs=1e-15)
        num, _ = integrate.quad(lambda x: x * stats.norm.pdf(x), bounds[i], bounds[i + 1])
        assert value == pytest.approx(num * n, abs=1e-9)


def test_discretize_gaussian_mean_property():
    rng = np.random.default_rng(5)
    for _ in range(25):
        mu = float(rng.normal() * 3)
        sigma = float(abs(rng.normal()))
        n = int(rng.integers(1, 9))
        atoms = discretize_gaussian(mu, sigma, n)
        mean = math.fsum(v * p for v, p in atoms)
        assert abs(mean - mu) < 1e-9


def test_product_belief_examples():
    single = product_belief([[((0.0,), 1.0)]])
    assert single.support_size == 1
    two = product_belief([[((1.0,), 0.5), ((2.0,), 0.5)], [((3.0,), 0.5), ((4.0,), 0.5)]])
    assert two.support_size == 4
    assert all(p == pytest.approx(0.25) for p in two.probs)
    # marginal means reproduce per-step believed expectations
    for step in range(2):
        mean = believed_expectation(two, lambda seq, s=step: seq[s][0])
        expected = {0: 1.5, 1: 3.5}[step]
        assert mean == pytest.approx(expected, abs=1e-12)


def test_product_belief_capacity_cap():
    marg = [((float(i),), 0.1) for i in range(10)]
    with pytest.raises(CapacityError):
        product_belief([marg] * 8, cap=10**6)


def test_snap_and_gap_helpers():
    atoms = [(-3.0,), (2.0,)]
    assert min_support_gap(atoms) == 5.0
    assert snap_to_atoms((-1.9,), atoms) == (-3.0,)
    assert snap_to_atoms((-6.0,), atoms) is None
    assert snap_to_atoms((2.0,), [(2.0,)]) == (2.0,)  # exact-match only
    assert snap_to_atoms((2.1,), [(2.0,)]) is None


finite_probs = st.lists(
    st.floats(min_value=0.01, max_value=1.0), min_size=1, max_size=6
)


@settings(max_examples=200, deadline=None)
@given(weights=finite_probs, epsilon=st.floats(min_value=0.0, max_value=0.99))
def test_normalization_preserved_by_transformers(weights, epsilon):
    total = sum(weights)
    probs = tuple(w / total for w in weights)
    scenarios = tuple(((float(i),), (float(i + 1),)) for i in range(len(weights)))
    belief = ScenarioBelief(start_step=0, scenarios=scenarios, probs=probs)
    universe = [((9.0,), (9.0,)), scenarios[0]]
    mixed = epsilon_mix(belief, universe, epsilon)
    assert abs(math.fsum(mixed.probs) - 1.0) <= 1e-12
    conditioned = condition_on_observed(mixed, scenarios[0][0])
    assert abs(math.fsum(conditioned.probs) - 1.0) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(weights=finite_probs)
def test_chain_rule(weights):
    total = sum(weights)
    probs = tuple(w / total for w in weights)
    scenarios = tuple(((float(i % 2),), (float(i),)) for i in range(len(weights)))
    belief = ScenarioBelief(start_step=0, scenarios=scenarios, probs=probs)
    for atom in belief.atoms_at(0):
        mass = math.fsum(
            p for s, p in zip(belief.scenarios, belief.probs) if s[0] == atom
        )
        cond = condition_on_observed(belief, atom)
        for s, p in zip(belief.scenarios, belief.probs):
            if s[0] == atom:
                assert abs(mass * cond.prob_of(s[1:]) - p) <= 1e-12


def test_filtration_markov_property():
    # conditioning on [v1] then [v2] equals conditioning on the joint prefix
    rng = np.random.default_rng(11)
    atoms = [(0.0,), (1.0,), (2.0,)]
    scenarios = []
    for i in atoms:
        for j in atoms:
            for k in atoms:
                scenarios.append((i, j, k))
    probs = rng.dirichlet(np.ones(len(scenarios)))
    belief = ScenarioBelief(start_step=0, scenarios=tuple(scenarios), probs=tuple(probs))
    stepwise = condition_on_observed(condition_on_observed(belief, (1.0,)), (2.0,))
    joint = {}
    mass = 0.0
    for s, p in zip(belief.scenarios, belief.probs):
        if s[0] == (1.0,) and s[1] == (2.0,):
            joint[s[2:]] = joint.get(s[2:], 0.0) + p
            mass += p
    assert stepwise.start_step == 2
    for s, p in zip(stepwise.scenarios, stepwise.probs):
        assert p == pytest.approx(joint[s] / mass, abs=1e-12)


def test_total_variation():
    a = two_step((((-3.0,),), 0.3), (((2.0,),), 0.7))
    b = two_step((((-3.0,),), 0.5), (((2.0,),), 0.5))
    assert total_variation(a, b) == pytest.approx(0.2, abs=1e-15)
    assert total_variation(a, a) == 0.0
