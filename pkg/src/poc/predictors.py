"""Predictor families: observation -> belief maps.

Two groups live here.  The abstract predictors (blind, truth-enumerating,
two-point parametric) operate on finite environments and return beliefs over
the full remaining horizon.  The vehicle-speed predictors consume a
:class:`VelocityObservation` and return beliefs over the next ``horizon``
future steps; their scenarios are ``(velocity, acceleration)`` pairs obtained
by integrating predicted accelerations with a floor at zero velocity
(vehicles in these cycles do not reverse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .belief import ScenarioBelief, discretize_gaussian, point_mass, product_belief
from .environment import EnvironmentModel, observable_truth
from .errors import DomainError


class Predictor:
    """Base predictor: ``predict(observation, step, horizon) -> ScenarioBelief``."""

    def predict(self, observation, step=0, horizon=None) -> ScenarioBelief:
        raise NotImplementedError


@dataclass(frozen=True)
class BlindPredictor(Predictor):
    """Outputs one fixed belief regardless of the observation."""

    fixed_belief: ScenarioBelief

    def predict(self, observation, step=0, horizon=None):
        return self.fixed_belief


def blind_predictor(fixed_belief: ScenarioBelief) -> BlindPredictor:
    return BlindPredictor(fixed_belief=fixed_belief)


@dataclass(frozen=True)
class TruthPredictor(Predictor):
    """Maps each observation to the exact conditional disturbance law."""

    env: EnvironmentModel

    def predict(self, observation, step=0, horizon=None):
        return observable_truth(self.env, observation)


def truth_predictor(env: EnvironmentModel) -> TruthPredictor:
    return TruthPredictor(env=env)


@dataclass(frozen=True)
class TwoPointPredictor(Predictor):
    """Belief over a two-branch second step: ``w_1 = low`` w.p. ``p_b`` else ``high``.

    The first step is the known ``w_0 = 0``; ``p_b`` must lie in [0, 2/3] so
    the induced optimal first control stays within the input bound.
    """

    p_b: float
    low: float = -3.0
    high: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.p_b <= 2.0 / 3.0 + 1e-15:
            raise DomainError(f"p_b must be in [0, 2/3], got {self.p_b}")

    def predict(self, observation, step=0, horizon=None):
        scenarios = (((0.0,), (self.low,)), ((0.0,), (self.high,)))
        if self.p_b == 0.0:
            return point_mass(scenarios[1])
        if self.p_b == 1.0:
            return point_mass(scenarios[0])
        return ScenarioBelief(start_step=0, scenarios=scenarios, probs=(self.p_b, 1.0 - self.p_b))


def toy_parametric_predictor(p_b: float) -> TwoPointPredictor:
    return TwoPointPredictor(p_b=float(p_b))


# --- vehicle-speed predictors ---------------------------------------------


@dataclass(frozen=True)
class VelocityObservation:
    """Measured velocity/acceleration history up to the current step.

    Accelerations follow the backward-difference convention
    ``a_k = v_k - v_{k-1}`` so the pair ``(v_k, a_k)`` is fully measured at
    step ``k``.
    """

    v_hist: tuple
    a_hist: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.v_hist)
        a = tuple(float(x) for x in self.a_hist)
        if not v or len(v) != len(a):
            raise DomainError("velocity and acceleration histories must be nonempty and aligned")
        if any(x < 0 for x in v):
            raise DomainError("velocities must be nonnegative")
        object.__setattr__(self, "v_hist", v)
        object.__setattr__(self, "a_hist", a)

    @property
    def v(self):
        return self.v_hist[-1]

    @property
    def a(self):
        return self.a_hist[-1]


VELOCITY_QUANTUM = 2.0 ** 40
"""Predicted velocities round to multiples of 2^-40 m/s (about 1e-12).

One canonicalization for every velocity predictor: scenario paths that
coincide mathematically then coincide bitwise, so the solver can share
value tables across equal conditional subtrees, and stochastic predictors
degenerate exactly onto their deterministic counterparts as sigma -> 0.
"""


def _quantize(v):
    return round(v * VELOCITY_QUANTUM) / VELOCITY_QUANTUM


def integrate_accelerations(v0: float, accels: Sequence[float]):
    """Velocity path from predicted accelerations, floored at zero.

    Returns ``((v_1, a_1), ..., (v_h, a_h))`` where each stored acceleration
    is the effective one (consistent with the floored, quantized velocities).
    """
    steps = []
    v = float(v0)
    for a in accels:
        v_next = _quantize(max(v + float(a), 0.0))
        steps.append((v_next, v_next - v))
        v = v_next
    return tuple(steps)


def _accel_path_predictor(accel_fn):
    """Wrap a deterministic acceleration recursion into a point-mass predictor."""

    class _Deterministic(Predictor):
        def predict(self, observation, step=0, horizon=None):
            h = 5 if horizon is None else int(horizon)
            accels = accel_fn(observation, h)
            return point_mass(integrate_accelerations(observation.v, accels), start_step=step + 1)

    return _Deterministic()


def constant_velocity_predictor() -> Predictor:
    """All future accelerations zero; velocity held at the current value."""
    return _accel_path_predictor(lambda obs, h: [0.0] * h)


def linear_decay_predictor(gamma: float) -> Predictor:
    """Acceleration shrinks by ``a_0 / gamma`` each step (reaches 0 after gamma steps)."""
    if gamma <= 0:
        raise DomainError("gamma must be positive")

    def accels(obs, h):
        return [obs.a * (1.0 - (i + 1) / gamma) for i in range(h)]

    return _accel_path_predictor(accels)


def exponential_decay_predictor(lam: float) -> Predictor:
    """Acceleration decays geometrically: ``a_{k+1} = lam * a_k``."""
    if not 0.0 < lam < 1.0:
        raise DomainError("lambda must be in (0, 1)")

    def accels(obs, h):
        return [obs.a * lam ** (i + 1) for i in range(h)]

    return _accel_path_predictor(accels)


def _merged_marginal(mu, sigma, n_atoms):
    atoms = {}
    for v, p in discretize_gaussian(mu, sigma, n_atoms):
        atoms[v] = atoms.get(v, 0.0) + p
    return list(atoms.items())


def _gaussian_accel_predictor(mu_fn, sigma, n_atoms):
    class _Stochastic(Predictor):
        def predict(self, observation, step=0, horizon=None):
            h = 5 if horizon is None else int(horizon)
            marginals = [_merged_marginal(mu_fn(observation, i), sigma, n_atoms) for i in range(h)]
            accel_belief = product_belief(marginals, start_step=step + 1)
            accels = np.asarray(
                [[a[0] for a in path] for path in accel_belief.scenarios], dtype=float
            )
            n = accels.shape[0]
            v = np.full(n, observation.v)
            columns = [v]
            for i in range(h):
                v = np.maximum(v + accels[:, i], 0.0)
                v = np.round(v * VELOCITY_QUANTUM) / VELOCITY_QUANTUM
                columns.append(v)
            vel = np.column_stack(columns)            # (n, h + 1) incl. current v
            eff_acc = np.diff(vel, axis=1)            # floored-consistent accelerations
            rows = np.empty((n, 2 * h), dtype=float)
            rows[:, 0::2] = vel[:, 1:]
            rows[:, 1::2] = eff_acc
            uniq, inverse = np.unique(rows, axis=0, return_inverse=True)
            probs = np.zeros(uniq.shape[0], dtype=float)
            np.add.at(probs, inverse.reshape(-1), np.asarray(accel_belief.probs))
            scenarios = tuple(
                tuple((row[2 * i], row[2 * i + 1]) for i in range(h))
                for row in uniq.tolist()
            )
            return ScenarioBelief._trusted(step + 1, scenarios, tuple(probs.tolist()))

    return _Stochastic()


def zero_mean_gaussian_predictor(sigma: float, n_atoms: int = 5) -> Predictor:
    """Independent zero-mean Gaussian accelerations, quantile-discretized."""
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    return _gaussian_accel_predictor(lambda obs, i: 0.0, sigma, n_atoms)


def stochastic_linear_decay_predictor(sigma: float, gamma: float, n_atoms: int = 5) -> Predictor:
    """Gaussian accelerations around the linear-decay mean path."""
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    return _gaussian_accel_predictor(
        lambda obs, i: obs.a * (1.0 - (i + 1) / gamma), sigma, n_atoms
    )


def ar_surrogate_predictor(coeffs: Sequence[float]) -> Predictor:
    """Fixed linear autoregression over a 6-step velocity history.

    Stand-in for a learned deterministic velocity predictor: each future
    velocity is a fixed linear combination of the trailing 6 velocities,
    applied recursively; history shorter than 6 is padded with its earliest
    value.  Emits a point-mass belief.
    """
    c = tuple(float(x) for x in coeffs)
    if len(c) != 6:
        raise DomainError("coefficient vector must have length 6")

    class _AutoRegressive(Predictor):
        def predict(self, observation, step=0, horizon=None):
            h = 5 if horizon is None else int(horizon)
            window = list(observation.v_hist[-6:])
            while len(window) < 6:
                window.insert(0, window[0])
            steps = []
            v_prev = observation.v
            for _ in range(h):
                v_next = max(sum(ci * vi for ci, vi in zip(c, window)), 0.0)
                steps.append((v_next, v_next - v_prev))
                window = window[1:] + [v_next]
                v_prev = v_next
            return point_mass(tuple(steps), start_step=step + 1)

    return _AutoRegressive()
