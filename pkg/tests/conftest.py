"""Shared randomized-instance builders for solver and acceptance tests."""

import numpy as np
import pytest

from poc.belief import ScenarioBelief
from poc.environment import EnvironmentModel
from poc.model import ControlledSystem, CostStructure
from poc.solver import StateGrid


def make_lattice_instance(rng, max_horizon=3):
    """A tiny table-driven instance whose dynamics map grid points to grid points.

    States and disturbance atoms are small integers (stored as floats);
    the transition, stage-cost, and terminal tables are random, so the tree
    DP on the integer grid is exact and comparable to brute force at 1e-9.
    """
    n_states = int(rng.integers(3, 9))
    n_controls = int(rng.integers(2, 6))
    horizon = int(rng.integers(1, max_horizon + 1))
    n_atoms = int(rng.integers(1, 4))
    atoms = [(float(a),) for a in range(n_atoms)]

    trans = rng.integers(0, n_states, size=(n_states, n_atoms, n_controls))
    stages = rng.normal(size=(horizon, n_states, n_atoms, n_controls))
    terminal = rng.normal(size=(n_states,))

    def transition(X, w, U, trans=trans):
        xi = X[:, 0].astype(int)
        ui = U[:, 0].astype(int)
        return trans[xi, int(w[0]), ui].astype(float).reshape(-1, 1)

    def stage_fn(k):
        def stage(X, w, U, k=k):
            xi = X[:, 0].astype(int)
            ui = U[:, 0].astype(int)
            return stages[k, xi, int(w[0]), ui]

        return stage

    system = ControlledSystem(
        state_dim=1, disturbance_dim=1, control_dim=1,
        transition=transition,
        control_set=np.arange(n_controls, dtype=float).reshape(-1, 1),
        horizon=horizon,
    )
    cost = CostStructure(
        stage_costs=tuple(stage_fn(k) for k in range(horizon)),
        terminal_cost=lambda X: terminal[X[:, 0].astype(int)],
    )
    grid = StateGrid(axes=(np.arange(n_states, dtype=float),))

    total = n_atoms ** horizon
    all_sequences = []

    def build(prefix):
        if len(prefix) == horizon:
            all_sequences.append(tuple(prefix))
            return
        for a in atoms:
            build(prefix + [a])

    build([])
    count = int(rng.integers(1, min(8, total) + 1))
    chosen = rng.choice(total, size=count, replace=False)
    scenarios = tuple(all_sequences[i] for i in sorted(chosen))
    probs = rng.dirichlet(np.ones(count))
    belief = ScenarioBelief(start_step=0, scenarios=scenarios, probs=tuple(probs))
    x0 = (float(rng.integers(0, n_states)),)
    return system, cost, grid, belief, x0


def make_finite_environment(rng, horizon=None):
    """A random finite environment for truth-definition checks."""
    nz = int(rng.integers(2, 4))
    nr = int(rng.integers(2, 4))
    n_obs = int(rng.integers(1, 4))
    horizon = int(rng.integers(1, 4)) if horizon is None else horizon
    f_table = rng.integers(0, nz, size=(nz, nr))
    o_table = rng.integers(0, n_obs, size=(nz, nr))
    w_table = np.round(rng.normal(size=(nz, nr)), 3)
    return EnvironmentModel(
        z_values=tuple(range(nz)),
        z0_probs=tuple(rng.dirichlet(np.ones(nz))),
        r_values=tuple(range(nr)),
        r_probs=tuple(rng.dirichlet(np.ones(nr))),
        f_E=lambda z, r: int(f_table[z, r]),
        h_o=lambda z, r: int(o_table[z, r]),
        h_w=lambda z, r: (float(w_table[z, r]),),
        horizon=horizon,
    )
