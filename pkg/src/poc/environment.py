"""Finite disturbance-generating environments and the three truth notions.

The environment is a dynamic system ``z' = f_E(z, r)`` with i.i.d. noise
``r``, an observation output ``o = h_o(z, r)`` and a disturbance output
``w = h_w(z, r)``.  The hidden prediction state ``s = (z_0, r_0..r_{N-1})``
determines the realized observation and disturbance sequences completely.

Supports are restricted to finite ``z``/``r``/``o`` sets so that the
a-priori and observable truths are computable exactly by enumeration.

Randomness policy: every sampling operation takes an explicit integer seed
and uses one ``numpy`` PCG64 stream per call.  ``sample_hidden_state`` draws
the initial-state index first, then the ``N`` noise indices in step order;
``generate_dataset`` draws the block of initial-state indices first, then
the ``(count, N)`` noise-index block row-major.  Identical seeds therefore
reproduce identical outputs bit-for-bit on any platform.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .belief import ScenarioBelief, beliefs_equal, total_variation
from .errors import DomainError, SupportError
from .model import DisturbanceSequence

PROB_TOL = 1e-12


@dataclass(frozen=True)
class EnvironmentModel:
    """Finite-support environment ``(f_E, h_o, h_w)`` with horizon ``N``."""

    z_values: tuple
    z0_probs: tuple
    r_values: tuple
    r_probs: tuple
    f_E: Callable
    h_o: Callable
    h_w: Callable
    horizon: int

    def __post_init__(self):
        z_values = tuple(self.z_values)
        r_values = tuple(self.r_values)
        z0 = tuple(float(p) for p in self.z0_probs)
        rp = tuple(float(p) for p in self.r_probs)
        if len(z_values) != len(z0) or len(r_values) != len(rp):
            raise DomainError("support values and probabilities must be aligned")
        for name, probs in (("z0_distribution", z0), ("r_distribution", rp)):
            if any(p < 0 for p in probs):
                raise DomainError(f"{name} has negative probabilities")
            if abs(math.fsum(probs) - 1.0) > PROB_TOL:
                raise DomainError(f"{name} does not sum to 1")
        if self.horizon < 1:
            raise DomainError("horizon must be positive")
        z_index = {z: i for i, z in enumerate(z_values)}
        nz, nr = len(z_values), len(r_values)
        z_next = np.empty((nz, nr), dtype=int)
        obs_table = np.empty((nz, nr), dtype=object)
        w_table = np.empty((nz, nr), dtype=object)
        for i, z in enumerate(z_values):
            for j, r in enumerate(r_values):
                nxt = self.f_E(z, r)
                if nxt not in z_index:
                    raise DomainError(f"f_E({z!r}, {r!r}) = {nxt!r} is outside the state space")
                z_next[i, j] = z_index[nxt]
                obs_table[i, j] = self.h_o(z, r)
                w_table[i, j] = tuple(float(c) for c in np.atleast_1d(self.h_w(z, r)))
        object.__setattr__(self, "z_values", z_values)
        object.__setattr__(self, "r_values", r_values)
        object.__setattr__(self, "z0_probs", z0)
        object.__setattr__(self, "r_probs", rp)
        object.__setattr__(self, "_z_next", z_next)
        object.__setattr__(self, "_obs_table", obs_table)
        object.__setattr__(self, "_w_table", w_table)

    @property
    def disturbance_dim(self):
        return len(self._w_table[0, 0])


@dataclass(frozen=True)
class HiddenPredictionState:
    """Initial environment state plus all horizon noise draws."""

    z0: object
    r_seq: tuple

    def __post_init__(self):
        object.__setattr__(self, "r_seq", tuple(self.r_seq))


@dataclass(frozen=True)
class ObservationDisturbancePair:
    """One ``{o, wbar}`` data sample: the step-0 observation and the realization."""

    observation: object
    wbar: DisturbanceSequence


def sample_hidden_state(env: EnvironmentModel, rng_seed: int) -> HiddenPredictionState:
    """Draw ``z0`` then ``r_0..r_{N-1}`` from one seeded stream."""
    rng = np.random.default_rng(rng_seed)
    zi = int(rng.choice(len(env.z_values), p=np.asarray(env.z0_probs)))
    ri = rng.choice(len(env.r_values), size=env.horizon, p=np.asarray(env.r_probs))
    return HiddenPredictionState(z0=env.z_values[zi], r_seq=tuple(env.r_values[int(i)] for i in ri))


def realize(env: EnvironmentModel, s: HiddenPredictionState):
    """Deterministically unroll the environment from a hidden prediction state."""
    z_index = {z: i for i, z in enumerate(env.z_values)}
    r_index = {r: i for i, r in enumerate(env.r_values)}
    zi = z_index[s.z0]
    obs = []
    ws = []
    for r in s.r_seq:
        rj = r_index[r]
        obs.append(env._obs_table[zi, rj])
        ws.append(env._w_table[zi, rj])
        zi = env._z_next[zi, rj]
    return tuple(obs), DisturbanceSequence(values=tuple(ws))


def generate_dataset(env: EnvironmentModel, count: int, rng_seed: int):
    """``count`` i.i.d. ``{o, wbar}`` pairs from one seeded stream (vectorized)."""
    if count < 1:
        raise DomainError("count must be at least 1")
    rng = np.random.default_rng(rng_seed)
    zi = rng.choice(len(env.z_values), size=count, p=np.asarray(env.z0_probs))
    ri = rng.choice(len(env.r_values), size=(count, env.horizon), p=np.asarray(env.r_probs))
    obs0 = env._obs_table[zi, ri[:, 0]]
    w_steps = []
    cur = zi
    for k in range(env.horizon):
        w_steps.append(env._w_table[cur, ri[:, k]])
        cur = env._z_next[cur, ri[:, k]]
    pairs = []
    for i in range(count):
        wbar = DisturbanceSequence(values=tuple(w_steps[k][i] for k in range(env.horizon)))
        pairs.append(ObservationDisturbancePair(observation=obs0[i], wbar=wbar))
    return pairs


def enumerate_hidden_states(env: EnvironmentModel):
    """All ``(probability, s, o_0, wbar)`` tuples, by exhaustive enumeration."""
    out = []
    r_range = range(len(env.r_values))
    for zi, pz in enumerate(env.z0_probs):
        if pz == 0.0:
            continue
        for rseq in itertools.product(r_range, repeat=env.horizon):
            p = pz
            for rj in rseq:
                p *= env.r_probs[rj]
            if p == 0.0:
                continue
            s = HiddenPredictionState(
                z0=env.z_values[zi], r_seq=tuple(env.r_values[j] for j in rseq)
            )
            cur = zi
            ws = []
            for rj in rseq:
                ws.append(env._w_table[cur, rj])
                cur = env._z_next[cur, rj]
            out.append((p, s, env._obs_table[zi, rseq[0]], tuple(ws)))
    return out


def observation_support(env: EnvironmentModel):
    """Step-0 observations with positive probability, with their probabilities."""
    weights = {}
    for p, _s, o, _w in enumerate_hidden_states(env):
        weights[o] = weights.get(o, 0.0) + p
    return weights


def _aggregate(weighted_sequences):
    weights = {}
    for p, ws in weighted_sequences:
        weights[ws] = weights.get(ws, 0.0) + p
    total = math.fsum(weights.values())
    scenarios = tuple(weights.keys())
    return ScenarioBelief(
        start_step=0, scenarios=scenarios, probs=tuple(weights[s] / total for s in scenarios)
    )


def observable_truth(env: EnvironmentModel, o) -> ScenarioBelief:
    """Exact conditional law of ``wbar(S)`` given ``o_0(S) = o``."""
    matches = [(p, ws) for p, _s, obs, ws in enumerate_hidden_states(env) if obs == o]
    if not matches:
        raise SupportError(f"observation {o!r} has zero probability", value=o, step=0)
    return _aggregate(matches)


def apriori_truth(env: EnvironmentModel, z0, r0) -> ScenarioBelief:
    """Exact conditional law of ``wbar(S)`` given ``(z_0, r_0)``."""
    matches = [
        (p, ws)
        for p, s, _obs, ws in enumerate_hidden_states(env)
        if s.z0 == z0 and s.r_seq[0] == r0
    ]
    if not matches:
        raise SupportError(f"(z0, r0) = ({z0!r}, {r0!r}) has zero probability", value=(z0, r0))
    return _aggregate(matches)


def unconditional_law(env: EnvironmentModel) -> ScenarioBelief:
    """The unconditional law of ``wbar(S)`` (the accurate blind predictor's belief)."""
    return _aggregate([(p, ws) for p, _s, _obs, ws in enumerate_hidden_states(env)])


def dataset_to_rows(pairs):
    """Serialize ``{o, wbar}`` pairs to the exchange layout.

    One record per pair: observation fields first (columns ``o_0..o_{m-1}``),
    then the disturbance vectors step-major (columns ``w_<k>_<dim>``).
    Returns ``(header, rows)``; the column order is stable.
    """
    if not pairs:
        raise DomainError("dataset must be nonempty")
    first = pairs[0]
    obs0 = first.observation if isinstance(first.observation, tuple) else (first.observation,)
    n_obs = len(obs0)
    n_steps = len(first.wbar)
    dim = len(first.wbar[0])
    header = [f"o_{i}" for i in range(n_obs)] + [
        f"w_{k}_{d}" for k in range(n_steps) for d in range(dim)
    ]
    rows = []
    for pair in pairs:
        obs = pair.observation if isinstance(pair.observation, tuple) else (pair.observation,)
        row = list(obs) + [c for step in pair.wbar.values for c in step]
        rows.append(row)
    return header, rows


def dataset_from_rows(header, rows):
    """Parse the exchange layout back into ``ObservationDisturbancePair`` objects.

    Observation fields parse as floats where possible, otherwise stay
    strings; a single observation column yields a scalar observation.
    """
    obs_cols = [h for h in header if h.startswith("o_")]
    w_cols = [h for h in header if h.startswith("w_")]
    if not w_cols or len(obs_cols) + len(w_cols) != len(header):
        raise DomainError("header must contain o_* columns followed by w_<k>_<dim> columns")
    steps = sorted({int(h.split("_")[1]) for h in w_cols})
    dims = sorted({int(h.split("_")[2]) for h in w_cols})
    index = {h: i for i, h in enumerate(header)}

    def coerce(v):
        try:
            return float(v)
        except (TypeError, ValueError):
            return v

    pairs = []
    for row in rows:
        obs = tuple(coerce(row[index[c]]) for c in obs_cols)
        if len(obs) == 1:
            obs = obs[0]
        wbar = DisturbanceSequence.of(
            [tuple(float(row[index[f"w_{k}_{d}"]]) for d in dims) for k in steps]
        )
        pairs.append(ObservationDisturbancePair(observation=obs, wbar=wbar))
    return pairs


def max_indistinguishable_set(predictor, env: EnvironmentModel):
    """Partition the observation support into blocks with identical beliefs.

    Two observations land in one block exactly when the predictor maps them
    to the same belief (same support, probabilities within 1e-12).
    """
    blocks = []  # list of (representative belief, [observations])
    for o in observation_support(env):
        b = predictor.predict(o)
        for rep, members in blocks:
            if beliefs_equal(rep, b, tol=1e-12):
                members.append(o)
                break
        else:
            blocks.append((b, [o]))
    return [(rep, tuple(members)) for rep, members in blocks]


def is_accurate(predictor, env: EnvironmentModel, tolerance=1e-9):
    """Check Definition-style accuracy of a predictor over a finite environment.

    For each maximum indistinguishable observation set, compares the
    predictor's belief with the enumerated conditional law of ``wbar(S)``
    given that the observation falls in the block; accurate iff every block
    matches within ``tolerance`` in total variation.
    """
    weights = observation_support(env)
    states = enumerate_hidden_states(env)
    report = []
    ok = True
    for rep, members in max_indistinguishable_set(predictor, env):
        block = set(members)
        matched = [(p, ws) for p, _s, o, ws in states if o in block]
        conditional = _aggregate(matched)
        tv = total_variation(rep, conditional)
        block_ok = tv <= tolerance
        ok = ok and block_ok
        report.append(
            {
                "observations": members,
                "block_probability": math.fsum(weights[o] for o in members),
                "total_variation": tv,
                "accurate": block_ok,
            }
        )
    return ok, report
