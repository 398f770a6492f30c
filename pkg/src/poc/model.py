"""Plant, cost structure, and trajectory bookkeeping.

The controlled system is a finite-horizon discrete-time plant
``x_{k+1} = transition(x_k, w_k, u_k)`` driven by a measured external
disturbance ``w`` and a control ``u`` drawn from a finite control set.
The per-step information pattern throughout the package is: at step ``k``
the pair ``(x_k, w_k)`` is measured first, then ``u_k`` is chosen.

Everything here is immutable and purely functional.  ``transition`` and the
cost callables must be vectorized over paired rows: they receive a state
block ``X`` of shape ``(n, state_dim)``, one disturbance vector ``w`` of
shape ``(d_l,)``, and a control block ``U`` of shape ``(n, control_dim)``,
and must return ``(n, state_dim)`` (transition) or ``(n,)`` (costs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, NumericError

StateArray = np.ndarray
TransitionFn = Callable[[StateArray, np.ndarray, np.ndarray], StateArray]
StageCostFn = Callable[[StateArray, np.ndarray, np.ndarray], np.ndarray]
TerminalCostFn = Callable[[StateArray], np.ndarray]


def as_vector(value, dim, what):
    """Coerce a scalar/sequence to a float tuple of length ``dim``."""
    if np.isscalar(value):
        vec = (float(value),)
    else:
        vec = tuple(float(v) for v in np.asarray(value).ravel())
    if len(vec) != dim:
        raise DomainError(f"{what} has dimension {len(vec)}, expected {dim}")
    return vec


@dataclass(frozen=True)
class ControlledSystem:
    """Plant dynamics plus the finite admissible control set and horizon."""

    state_dim: int
    disturbance_dim: int
    control_dim: int
    transition: TransitionFn
    control_set: np.ndarray
    horizon: int

    def __post_init__(self):
        for name in ("state_dim", "disturbance_dim", "control_dim", "horizon"):
            if int(getattr(self, name)) < 1:
                raise DomainError(f"{name} must be a positive integer")
        controls = np.atleast_2d(np.asarray(self.control_set, dtype=float))
        if controls.shape[0] == 0:
            raise DomainError("control_set must be nonempty")
        if controls.shape[1] != self.control_dim:
            raise DomainError(
                f"control_set entries have dimension {controls.shape[1]}, "
                f"expected {self.control_dim}"
            )
        if len({tuple(row) for row in controls}) != controls.shape[0]:
            raise DomainError("control_set contains duplicate controls")
        controls.setflags(write=False)
        object.__setattr__(self, "control_set", controls)

    @property
    def n_controls(self):
        return self.control_set.shape[0]

    def step(self, x, w, u):
        """Single-state transition; ``x``/``w``/``u`` are 1-d vectors."""
        xs = np.asarray(x, dtype=float).reshape(1, self.state_dim)
        us = np.asarray(u, dtype=float).reshape(1, self.control_dim)
        out = np.asarray(
            self.transition(xs, np.asarray(w, dtype=float).reshape(-1), us), dtype=float
        ).reshape(1, self.state_dim)
        return tuple(float(v) for v in out[0])


@dataclass(frozen=True)
class CostStructure:
    """Per-step stage costs ``l_0 .. l_{N-1}`` plus the terminal cost.

    ``is_time_invariant`` declares that every stage cost is the same map;
    solvers may then reuse value tables across windows that differ only in
    their absolute step index.
    """

    stage_costs: tuple
    terminal_cost: TerminalCostFn
    is_time_invariant: bool = False

    @classmethod
    def time_invariant(cls, stage_cost: StageCostFn, terminal_cost: TerminalCostFn, horizon: int):
        return cls(
            stage_costs=tuple([stage_cost] * horizon),
            terminal_cost=terminal_cost,
            is_time_invariant=True,
        )

    def stage(self, k):
        return self.stage_costs[k]

    def stage_value(self, k, x, w, u):
        xs = np.asarray(x, dtype=float).reshape(1, -1)
        us = np.asarray(u, dtype=float).reshape(1, -1)
        w = np.asarray(w, dtype=float).reshape(-1)
        return float(np.asarray(self.stage_costs[k](xs, w, us)).reshape(-1)[0])

    def terminal_value(self, x):
        xs = np.asarray(x, dtype=float).reshape(1, -1)
        return float(np.asarray(self.terminal_cost(xs)).reshape(-1)[0])


@dataclass(frozen=True)
class DisturbanceSequence:
    """An ordered realization ``[w_0, ..., w_{N-1}]`` of disturbance vectors."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "values", tuple(tuple(float(c) for c in np.atleast_1d(v)) for v in self.values)
        )

    @classmethod
    def of(cls, values):
        return cls(values=tuple(values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def stacked(self):
        """The sequence flattened into one ``(N * d_l,)`` vector."""
        return np.asarray([c for v in self.values for c in v], dtype=float)


@dataclass(frozen=True)
class Trajectory:
    """A replay-consistent closed- or open-loop run and its realized cost."""

    states: tuple
    disturbances: tuple
    controls: tuple
    realized_cost: float

    @property
    def horizon(self):
        return len(self.controls)


def rollout(system: ControlledSystem, cost: CostStructure, x0, wbar: DisturbanceSequence,
            controls: Sequence) -> Trajectory:
    """Run a fixed control sequence against a fixed disturbance sequence.

    Raises ``DomainError`` on length/dimension mismatch and ``NumericError``
    (naming the step) if a non-finite stage or terminal cost appears.
    """
    n = system.horizon
    if len(wbar) != n:
        raise DomainError(f"disturbance sequence has length {len(wbar)}, expected {n}")
    if len(controls) != n:
        raise DomainError(f"control sequence has length {len(controls)}, expected {n}")
    if len(cost.stage_costs) != n:
        raise DomainError(f"cost structure has {len(cost.stage_costs)} stages, expected {n}")

    x = as_vector(x0, system.state_dim, "x0")
    states = [x]
    us = []
    total = 0.0
    for k in range(n):
        w = as_vector(wbar[k], system.disturbance_dim, f"w_{k}")
        u = as_vector(controls[k], system.control_dim, f"u_{k}")
        lk = cost.stage_value(k, x, w, u)
        if not math.isfinite(lk):
            raise NumericError(f"non-finite stage cost at step {k}")
        total += lk
        x = system.step(x, w, u)
        states.append(x)
        us.append(u)
    lN = cost.terminal_value(x)
    if not math.isfinite(lN):
        raise NumericError(f"non-finite terminal cost at step {n}")
    total += lN
    return Trajectory(
        states=tuple(states),
        disturbances=tuple(wbar.values),
        controls=tuple(us),
        realized_cost=total,
    )


def replay_cost(system: ControlledSystem, cost: CostStructure, trajectory: Trajectory) -> float:
    """Recompute a trajectory's cost independently (reverse accumulation order)."""
    terms = []
    for k in range(trajectory.horizon):
        terms.append(
            cost.stage_value(k, trajectory.states[k], trajectory.disturbances[k], trajectory.controls[k])
        )
    terms.append(cost.terminal_value(trajectory.states[-1]))
    return float(sum(reversed(terms)))
