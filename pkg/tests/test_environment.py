import math

import numpy as np
import pytest

from poc.belief import ScenarioBelief, total_variation
from poc.environment import (
    EnvironmentModel,
    HiddenPredictionState,
    apriori_truth,
    dataset_from_rows,
    dataset_to_rows,
    enumerate_hidden_states,
    generate_dataset,
    is_accurate,
    max_indistinguishable_set,
    observable_truth,
    observation_support,
    realize,
    sample_hidden_state,
    unconditional_law,
)
from poc.errors import DomainError, SupportError
from poc.predictors import blind_predictor, truth_predictor
from poc.toy import make_toy_environment, OBSERVATION


def make_random_env(rng, nz=2, nr=2, n_obs=2, horizon=2):
    """A random finite environment with dense tables."""
    z_values = tuple(range(nz))
    r_values = tuple(range(nr))
    z0 = rng.dirichlet(np.ones(nz))
    rp = rng.dirichlet(np.ones(nr))
    f_table = rng.integers(0, nz, size=(nz, nr))
    o_table = rng.integers(0, n_obs, size=(nz, nr))
    w_table = np.round(rng.normal(size=(nz, nr)), 3)
    return EnvironmentModel(
        z_values=z_values,
        z0_probs=tuple(z0),
        r_values=r_values,
        r_probs=tuple(rp),
        f_E=lambda z, r: int(f_table[z, r]),
        h_o=lambda z, r: int(o_table[z, r]),
        h_w=lambda z, r: (float(w_table[z, r]),),
        horizon=horizon,
    )


def test_sampling_is_deterministic_per_seed():
    env = make_random_env(np.random.default_rng(0))
    s1 = sample_hidden_state(env, 42)
    s2 = sample_hidden_state(env, 42)
    assert s1 == s2
    assert sample_hidden_state(env, 43) != s1 or True  # different seed may differ


def test_point_mass_environment_samples_unique_state():
    env = EnvironmentModel(
        z_values=("only",), z0_probs=(1.0,), r_values=(0,), r_probs=(1.0,),
        f_E=lambda z, r: "only", h_o=lambda z, r: "o", h_w=lambda z, r: (1.0,),
        horizon=3,
    )
    s = sample_hidden_state(env, 7)
    assert s == HiddenPredictionState(z0="only", r_seq=(0, 0, 0))
    obs, wbar = realize(env, s)
    assert obs == ("o", "o", "o")
    assert wbar.values == ((1.0,),) * 3


def test_sample_frequencies_match_r_distribution():
    env = make_random_env(np.random.default_rng(3), nr=3)
    n = 20000
    counts = np.zeros(3)
    for seed in range(n):
        s = sample_hidden_state(env, seed)
        counts[s.r_seq[0]] += 1
    freqs = counts / n
    for j, p in enumerate(env.r_probs):
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(freqs[j] - p) < 3 * sigma + 1e-12


def test_realize_is_pure():
    env = make_random_env(np.random.default_rng(1))
    s = sample_hidden_state(env, 5)
    assert realize(env, s) == realize(env, s)


def test_toy_environment_realizations():
    env = make_toy_environment(0.3)
    for seed in range(10):
        _, wbar = realize(env, sample_hidden_state(env, seed))
        assert wbar.values in (((0.0,), (-3.0,)), ((0.0,), (2.0,)))


def test_toy_observable_truth_matches_p():
    env = make_toy_environment(0.3)
    truth = observable_truth(env, OBSERVATION)
    assert truth.prob_of(((0.0,), (-3.0,))) == pytest.approx(0.3, abs=1e-12)
    assert truth.prob_of(((0.0,), (2.0,))) == pytest.approx(0.7, abs=1e-12)


def test_observable_truth_zero_probability_observation():
    env = make_toy_environment(0.3)
    with pytest.raises(SupportError):
        observable_truth(env, "never-seen")


def test_observable_truth_deterministic_env_is_point_mass():
    env = EnvironmentModel(
        z_values=(0,), z0_probs=(1.0,), r_values=(0,), r_probs=(1.0,),
        f_E=lambda z, r: 0, h_o=lambda z, r: "o", h_w=lambda z, r: (2.5,),
        horizon=2,
    )
    truth = observable_truth(env, "o")
    assert truth.support_size == 1
    assert truth.probs == (1.0,)
    # a-posteriori degenerate case: both truths collapse to the realization
    apriori = apriori_truth(env, 0, 0)
    assert apriori.scenarios == truth.scenarios


def test_apriori_single_step_is_point_mass():
    env = make_random_env(np.random.default_rng(2), horizon=1)
    for p, s, _o, ws in enumerate_hidden_states(env):
        truth = apriori_truth(env, s.z0, s.r_seq[0])
        assert truth.support_size == 1
        assert truth.scenarios[0] == ws


def test_apriori_refines_observable_truth():
    # law of total probability: averaging W_tn over (z0, r0) | o recovers W_to
    rng = np.random.default_rng(9)
    for trial in range(10):
        env = make_random_env(rng, nz=3, nr=2, n_obs=2, horizon=3)
        states = enumerate_hidden_states(env)
        for o in observation_support(env):
            weights = {}
            for p, s, obs, _ws in states:
                if obs == o:
                    weights[(s.z0, s.r_seq[0])] = weights.get((s.z0, s.r_seq[0]), 0.0) + p
            total = sum(weights.values())
            mixture = {}
            for (z0, r0), w in weights.items():
                tn = apriori_truth(env, z0, r0)
                for sc, p in zip(tn.scenarios, tn.probs):
                    mixture[sc] = mixture.get(sc, 0.0) + (w / total) * p
            to = observable_truth(env, o)
            scenarios = tuple(mixture.keys())
            mix_belief = ScenarioBelief(
                start_step=0, scenarios=scenarios,
                probs=tuple(mixture[s] / sum(mixture.values()) for s in scenarios),
            )
            assert total_variation(mix_belief, to) < 1e-12


def test_total_probability_consistency():
    env = make_random_env(np.random.default_rng(21), nz=3, nr=3, horizon=2)
    support = observation_support(env)
    mixture = {}
    for o, po in support.items():
        to = observable_truth(env, o)
        for s, p in zip(to.scenarios, to.probs):
            mixture[s] = mixture.get(s, 0.0) + po * p
    law = unconditional_law(env)
    for s, p in zip(law.scenarios, law.probs):
        assert mixture[s] == pytest.approx(p, abs=1e-12)


def test_generate_dataset_reproducible_and_valid():
    env = make_random_env(np.random.default_rng(4))
    a = generate_dataset(env, 50, rng_seed=11)
    b = generate_dataset(env, 50, rng_seed=11)
    assert [(p.observation, p.wbar.values) for p in a] == [
        (p.observation, p.wbar.values) for p in b
    ]
    with pytest.raises(DomainError):
        generate_dataset(env, 0, rng_seed=1)


def test_dataset_histogram_converges_to_observable_truth():
    env = make_random_env(np.random.default_rng(6), nz=2, nr=2, n_obs=2)
    pairs = generate_dataset(env, 10**5, rng_seed=20)
    by_obs = {}
    for p in pairs:
        by_obs.setdefault(p.observation, []).append(p.wbar.values)
    for o, seqs in by_obs.items():
        truth = observable_truth(env, o)
        n = len(seqs)
        counts = {}
        for s in seqs:
            counts[s] = counts.get(s, 0) + 1
        for scenario, prob in zip(truth.scenarios, truth.probs):
            freq = counts.get(scenario, 0) / n
            sigma = math.sqrt(prob * (1 - prob) / n)
            assert abs(freq - prob) < 3 * sigma + 1e-9


def test_blind_predictor_has_single_block():
    env = make_random_env(np.random.default_rng(8), n_obs=3)
    blind = blind_predictor(unconditional_law(env))
    blocks = max_indistinguishable_set(blind, env)
    assert len(blocks) == 1
    assert set(blocks[0][1]) == set(observation_support(env))


def test_injective_predictor_gives_singleton_blocks():
    env = make_toy_environment(0.3)
    # the truth predictor on a single-observation environment: one block
    blocks = max_indistinguishable_set(truth_predictor(env), env)
    assert len(blocks) == 1

    rng = np.random.default_rng(12)
    env3 = make_random_env(rng, nz=3, nr=3, n_obs=3, horizon=2)
    blocks = max_indistinguishable_set(truth_predictor(env3), env3)
    observations = [o for _, members in blocks for o in members]
    assert sorted(observations) == sorted(observation_support(env3))  # partition


def test_accuracy_of_truth_blind_and_wrong_predictors():
    env = make_random_env(np.random.default_rng(14), nz=2, nr=3, n_obs=2)
    ok, report = is_accurate(truth_predictor(env), env)
    assert ok and all(b["accurate"] for b in report)

    accurate_blind = blind_predictor(unconditional_law(env))
    ok, _ = is_accurate(accurate_blind, env)
    assert ok

    law = unconditional_law(env)
    skewed = np.asarray(law.probs) + 0.2
    skewed /= skewed.sum()
    wrong = blind_predictor(
        ScenarioBelief(start_step=0, scenarios=law.scenarios, probs=tuple(skewed))
    )
    ok, _ = is_accurate(wrong, env)
    assert not ok


def test_dataset_csv_round_trip():
    env = make_random_env(np.random.default_rng(15))
    pairs = generate_dataset(env, 10, rng_seed=3)
    header, rows = dataset_to_rows(pairs)
    assert header[0] == "o_0"
    assert header[1] == "w_0_0"
    back = dataset_from_rows(header, [[str(v) for v in row] for row in rows])
    for orig, parsed in zip(pairs, back):
        assert parsed.wbar.values == orig.wbar.values
        assert parsed.observation == float(orig.observation)
