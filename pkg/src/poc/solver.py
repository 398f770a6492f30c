"""Exact scenario-tree dynamic programming and closed-loop execution.

The solver turns a finite :class:`~poc.belief.ScenarioBelief` into the
optimal feedback policy for the believed expected cost.  The information
pattern is measure-then-act: at step ``k`` the disturbance ``w_k`` is
measured before ``u_k`` is chosen, so the backward recursion alternates an
expectation over the node's one-step disturbance distribution with a
minimization over the control set *inside* each disturbance branch:

    W_k(node, x)      = sum_w P(w | node) * Q_k(node -> w, x)
    Q_k(node -> w, x) = min_u [ l_k(x, w, u) + W_{k+1}(child(node, w), f(x, w, u)) ]

Value tables live on a rectilinear state grid with multilinear
interpolation; the terminal layer evaluates the terminal cost exactly, so
problems whose dynamics map grid points to grid points are solved exactly.

Value tables are memoized by the canonical form of the conditional subtree
below each node, inside a solve and, optionally, across solves through a
caller-supplied :class:`SolverCache` (valid only while system, costs, grid,
and terminal stay fixed; the cache enforces this with a fingerprint).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .belief import (
    ScenarioBelief,
    belief_digest,
    condition_on_observed,
    default_snap_tol,
    epsilon_mix,
    point_mass,
)
from .errors import CapacityError, DomainError, InfeasibleControlError, NumericError, SupportError
from .model import ControlledSystem, CostStructure, DisturbanceSequence, Trajectory, rollout

BIG_VALUE = 1e30  # stands in for +inf continuations so interpolation stays NaN-free
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class StateGrid:
    """Rectilinear interpolation grid: strictly increasing breakpoints per dim."""

    axes: tuple

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.axes)
        if not axes:
            raise DomainError("state grid needs at least one dimension")
        for a in axes:
            if a.ndim != 1 or a.size < 2:
                raise DomainError("each grid dimension needs at least 2 breakpoints")
            if not np.all(np.diff(a) > 0):
                raise DomainError("grid breakpoints must be strictly increasing")
            a.setflags(write=False)
        object.__setattr__(self, "axes", axes)

    @classmethod
    def uniform(cls, lows, highs, counts):
        lows, highs, counts = np.atleast_1d(lows), np.atleast_1d(highs), np.atleast_1d(counts)
        return cls(axes=tuple(np.linspace(l, h, int(c)) for l, h, c in zip(lows, highs, counts)))

    @property
    def ndim(self):
        return len(self.axes)

    @property
    def n_points(self):
        n = 1
        for a in self.axes:
            n *= a.size
        return n

    def points(self):
        """All grid points, C-ordered, shape ``(n_points, ndim)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def contains(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        return all(a[0] <= v <= a[-1] for a, v in zip(self.axes, x))

    def interpolate(self, table, X, clamp_counter=None):
        """Multilinear interpolation of a flat C-ordered table at points ``X``.

        Out-of-grid coordinates clamp to the boundary; ``clamp_counter`` (a
        one-element list) is incremented by the number of clamped points.
        """
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if clamp_counter is not None:
            clamped = np.zeros(X.shape[0], dtype=bool)
            for d, a in enumerate(self.axes):
                clamped |= (X[:, d] < a[0]) | (X[:, d] > a[-1])
            clamp_counter[0] += int(clamped.sum())
        if self.ndim == 1:
            return np.interp(X[:, 0], self.axes[0], table)
        idx = []
        frac = []
        for d, a in enumerate(self.axes):
            xc = np.clip(X[:, d], a[0], a[-1])
            i = np.clip(np.searchsorted(a, xc, side="right") - 1, 0, a.size - 2)
            idx.append(i)
            frac.append((xc - a[i]) / (a[i + 1] - a[i]))
        table = np.asarray(table)
        out = np.zeros(X.shape[0], dtype=float)
        strides = []
        s = 1
        for a in reversed(self.axes):
            strides.append(s)
            s *= a.size
        strides = list(reversed(strides))
        for corner in itertools.product((0, 1), repeat=self.ndim):
            w = np.ones(X.shape[0], dtype=float)
            flat = np.zeros(X.shape[0], dtype=int)
            for d, bit in enumerate(corner):
                w *= frac[d] if bit else (1.0 - frac[d])
                flat += (idx[d] + bit) * strides[d]
            out += w * table[flat]
        return out


class SolverCache:
    """Cross-solve value-table cache, valid for one (system, cost, grid, terminal)."""

    def __init__(self):
        self._fingerprint = None
        self.tables = {}
        self.blocks = {}
        self.hits = 0
        self.misses = 0

    def bind(self, system, cost, grid):
        fp = (id(system), id(cost), id(grid))
        if self._fingerprint is None:
            self._fingerprint = fp
        elif self._fingerprint != fp:
            raise DomainError("SolverCache reused with a different system/cost/grid")


class _TreeNode:
    __slots__ = (
        "node_id", "parent", "depth", "w_atom", "branch_atoms", "branch_probs",
        "branch_children", "subtree_key", "mass",
    )

    def __init__(self, node_id, parent, depth, w_atom):
        self.node_id = node_id
        self.parent = parent
        self.depth = depth
        self.w_atom = w_atom
        self.branch_atoms = []
        self.branch_probs = []
        self.branch_children = []
        self.subtree_key = None
        self.mass = 0.0


def _build_tree(belief: ScenarioBelief, max_nodes: int):
    """Prefix tree of the belief's support with conditional branch laws.

    Branches keep zero-probability atoms so the policy stays defined off the
    believed support; a zero-mass node distributes its children uniformly
    (the choice cannot affect any believed expectation).
    """
    nodes = [_TreeNode(0, None, 0, None)]
    length = belief.length

    def expand(node, indices):
        if node.depth == length:
            node.subtree_key = ()
            return
        groups = {}
        for i in indices:
            groups.setdefault(belief.scenarios[i][node.depth], []).append(i)
        mass = math.fsum(belief.probs[i] for i in indices)
        key_parts = []
        for atom, members in groups.items():
            if len(nodes) > max_nodes:
                raise CapacityError(f"scenario tree exceeds {max_nodes} nodes")
            child = _TreeNode(len(nodes), node.node_id, node.depth + 1, atom)
            nodes.append(child)
            gmass = math.fsum(belief.probs[i] for i in members)
            p = gmass / mass if mass > 0 else 1.0 / len(groups)
            child.mass = gmass
            node.branch_atoms.append(atom)
            node.branch_probs.append(p)
            node.branch_children.append(child.node_id)
            expand(child, members)
            key_parts.append((atom, p, child.subtree_key))
        node.subtree_key = tuple(sorted(key_parts))

    nodes[0].mass = 1.0
    expand(nodes[0], list(range(belief.support_size)))
    return nodes


class Policy:
    """Greedy feedback policy backed by per-node value tables.

    ``control(node_id, x)`` recomputes the greedy minimizer at the exact
    queried state (ties break to the lowest control index); on grid points
    this equals the stored backward-induction decision.  ``descend`` walks
    the scenario tree by snapping the measured disturbance onto the current
    node's branch atoms.
    """

    def __init__(self, system, cost, grid, belief, nodes, tables, terminal_fn,
                 start_step, x0, root_value):
        self.system = system
        self.cost = cost
        self.grid = grid
        self.nodes = nodes
        self.tables = tables  # node_id -> flat value table over the grid
        self.terminal_fn = terminal_fn
        self.start_step = start_step
        self.horizon_span = (start_step, start_step + belief.length)
        self.x0 = x0
        self.root_value = root_value
        self._belief = belief
        self._belief_digest = None
        self.clamp_counter = [0]

    @property
    def belief_digest(self):
        if self._belief_digest is None:
            self._belief_digest = belief_digest(self._belief)
        return self._belief_digest

    @property
    def root(self):
        return 0

    @property
    def believed_cost(self):
        return self.root_value

    def _continuation(self, node, X):
        if node.depth == self.horizon_span[1] - self.horizon_span[0]:
            return np.asarray(self.terminal_fn(X), dtype=float).reshape(-1)
        return self.grid.interpolate(self.tables[node.node_id], X, self.clamp_counter)

    def _q_over_controls(self, node, x):
        """Stage-plus-continuation value of every control at state ``x``."""
        k = self.start_step + node.depth - 1
        m = self.system.n_controls
        X = np.tile(np.asarray(x, dtype=float).reshape(1, -1), (m, 1))
        U = self.system.control_set
        w = np.asarray(node.w_atom, dtype=float)
        stage = np.asarray(self.cost.stage(k)(X, w, U), dtype=float).reshape(-1)
        nxt = self._continuation(node, np.asarray(self.system.transition(X, w, U), dtype=float))
        total = stage + nxt
        if np.isnan(total).any():
            raise NumericError(f"NaN control values at step {k}")
        return np.where(np.isinf(total), BIG_VALUE, total)

    def control(self, node_id, x):
        """Greedy control at a post-measurement node; returns ``(u, index)``."""
        node = self.nodes[node_id]
        if node.depth == 0:
            raise DomainError("controls are defined at post-measurement nodes, not the root")
        total = self._q_over_controls(node, x)
        if total.min() >= BIG_VALUE:
            raise InfeasibleControlError(
                f"no feasible control at step {self.start_step + node.depth - 1}"
            )
        idx = int(np.argmin(total))
        return tuple(self.system.control_set[idx]), idx

    def control_table(self, node_id):
        """Materialized map grid-index -> control index for one node."""
        pts = self.grid.points()
        node = self.nodes[node_id]
        out = np.empty(pts.shape[0], dtype=int)
        for i in range(pts.shape[0]):
            out[i] = self.control(node.node_id, pts[i])[1]
        return out

    def descend(self, node_id, w, snap_tol=None):
        """Move to the child matching the measured disturbance."""
        node = self.nodes[node_id]
        if not node.branch_atoms:
            raise SupportError("cannot descend from a leaf node", value=w)
        vec = tuple(float(c) for c in np.atleast_1d(w))
        tol = snap_tol
        if tol is None:
            tol = default_snap_tol(node.branch_atoms)
        best, best_d = None, math.inf
        for j, atom in enumerate(node.branch_atoms):
            d = math.dist(vec, atom)
            if d < best_d:
                best, best_d = j, d
        if best is None or best_d > tol:
            raise SupportError(
                f"measured disturbance {vec} off the policy tree at step "
                f"{self.start_step + node.depth}",
                value=vec, step=self.start_step + node.depth,
            )
        return node.branch_children[best]

    def node_value_at(self, node_id, x):
        node = self.nodes[node_id]
        return float(self._continuation(node, np.asarray(x, dtype=float).reshape(1, -1))[0])


def _terminal_token(terminal):
    return "cost-terminal" if terminal is None else id(terminal)


def solve_tree_policy(system: ControlledSystem, cost: CostStructure, belief: ScenarioBelief,
                      x0, grid: StateGrid, terminal: Optional[Callable] = None,
                      cache: Optional[SolverCache] = None,
                      max_tree_nodes: int = 1_000_000) -> Policy:
    """Backward induction over the belief's scenario tree.

    ``terminal`` is the continuation value applied after the belief's last
    covered step; ``None`` means the belief runs to the end of the horizon
    and the cost structure's terminal cost applies.  Returns the greedy
    policy; its believed expected cost equals ``policy.root_value``.
    """
    start = belief.start_step
    length = belief.length
    if terminal is None:
        if start + length != system.horizon:
            raise DomainError(
                f"belief covers steps {start}..{start + length - 1} but the horizon is "
                f"{system.horizon}; supply an artificial terminal value"
            )
        terminal_fn = cost.terminal_cost
    else:
        terminal_fn = terminal
    if grid.ndim != system.state_dim:
        raise DomainError("state grid dimension does not match the system")

    token = _terminal_token(terminal)
    nodes = _build_tree(belief, max_tree_nodes)
    if cache is not None:
        cache.bind(system, cost, grid)
        memo = cache.tables
    else:
        cache = SolverCache()
        memo = cache.tables

    pts = grid.points()
    n_pts = pts.shape[0]
    m = system.n_controls
    clamp = [0]

    def state_control_blocks():
        # (m * n_pts)-row state/control pairing, built once per cache
        if "xxuu" not in cache.blocks:
            cache.blocks["xxuu"] = (
                np.tile(pts, (m, 1)),
                np.repeat(system.control_set, n_pts, axis=0),
            )
        return cache.blocks["xxuu"]

    by_depth = {}
    for node in nodes:
        by_depth.setdefault(node.depth, []).append(node)

    tables = {}

    def step_key(depth):
        # Time-invariant stage costs make values depend only on the distance
        # to the window end, enabling cross-window table reuse.
        if cost.is_time_invariant:
            return ("rem", length - depth)
        return ("abs", start + depth)

    def edge_q(k, depth, atom, child):
        """Q table over the grid for one (stage, disturbance) branch."""
        key = ("q", token, step_key(depth), atom, child.subtree_key)
        hit = memo.get(key)
        if hit is not None:
            cache.hits += 1
            return hit
        cache.misses += 1
        XX, UU = state_control_blocks()
        w = np.asarray(atom, dtype=float)
        stage = np.asarray(cost.stage(k)(XX, w, UU), dtype=float).reshape(-1)
        xn = np.asarray(system.transition(XX, w, UU), dtype=float)
        if child.depth == length:
            nxt = np.asarray(terminal_fn(xn), dtype=float).reshape(-1)
        else:
            nxt = grid.interpolate(tables[child.node_id], xn, clamp)
        total = stage + nxt
        if np.isnan(total).any():
            raise NumericError(f"NaN stage values at step {k}")
        total = np.where(np.isinf(total), BIG_VALUE, total)
        q = total.reshape(m, n_pts).min(axis=0)
        memo[key] = q
        return q

    for depth in range(length - 1, 0, -1):
        for node in by_depth.get(depth, []):
            key = ("w", token, step_key(depth), node.subtree_key)
            hit = memo.get(key)
            if hit is not None:
                cache.hits += 1
                tables[node.node_id] = hit
                continue
            cache.misses += 1
            k = start + depth
            acc = np.zeros(n_pts, dtype=float)
            for atom, p, cid in zip(node.branch_atoms, node.branch_probs, node.branch_children):
                acc += p * edge_q(k, depth, atom, nodes[cid])
            memo[key] = acc
            tables[node.node_id] = acc

    x0_vec = np.asarray(x0, dtype=float).reshape(1, -1)
    root = nodes[0]
    policy = Policy(system, cost, grid, belief, nodes, tables, terminal_fn, start, x0, 0.0)
    policy.clamp_counter = clamp
    root_value = 0.0
    for atom, p, cid in zip(root.branch_atoms, root.branch_probs, root.branch_children):
        q = policy._q_over_controls(nodes[cid], x0_vec[0])
        root_value += p * float(q.min())
    if root_value >= BIG_VALUE:
        raise InfeasibleControlError("no feasible control plan from the initial state")
    policy.root_value = root_value
    return policy


@dataclass(frozen=True)
class BruteForceResult:
    value: float
    assignments: dict  # (step, disturbance prefix, state) -> control


def brute_force_policy(system: ControlledSystem, cost: CostStructure, belief: ScenarioBelief,
                       x0, grid: Optional[StateGrid] = None,
                       terminal: Optional[Callable] = None) -> BruteForceResult:
    """Exhaustive closed-loop optimum on a tiny instance (verification oracle).

    Enumerates every control assignment over reachable (step, disturbance
    prefix, state) decision points by direct recursion on exact state
    arithmetic; no grids, tables, or interpolation are involved.
    """
    if belief.length > 3:
        raise CapacityError("brute force is limited to horizons of at most 3 steps")
    if belief.support_size > 8:
        raise CapacityError("brute force is limited to 8 scenarios")
    if system.n_controls > 5:
        raise CapacityError("brute force is limited to 5 controls")
    start = belief.start_step
    length = belief.length
    if terminal is None:
        if start + length != system.horizon:
            raise DomainError("belief does not reach the horizon; supply a terminal value")
        terminal_fn = cost.terminal_value
    else:
        terminal_fn = lambda x: float(np.asarray(terminal(np.asarray(x, float).reshape(1, -1))).reshape(-1)[0])

    nodes = _build_tree(belief, max_nodes=10_000)
    assignments = {}

    def node_value(node, x, prefix):
        if node.depth == length:
            return terminal_fn(x)
        k = start + node.depth
        total = 0.0
        for atom, p, cid in zip(node.branch_atoms, node.branch_probs, node.branch_children):
            child = nodes[cid]
            best = math.inf
            best_u = None
            for u in system.control_set:
                stage = cost.stage_value(k, x, atom, u)
                nxt = node_value(child, system.step(x, atom, u), prefix + (atom,))
                cand = stage + nxt
                if cand < best:
                    best = cand
                    best_u = tuple(u)
            assignments[(k, prefix + (atom,), tuple(x))] = best_u
            total += p * best
        return total

    x0_t = tuple(float(v) for v in np.atleast_1d(x0))
    value = node_value(nodes[0], x0_t, ())
    return BruteForceResult(value=value, assignments=assignments)


@dataclass(frozen=True)
class RunResult:
    """Closed-loop run outcome: the trajectory plus the beliefs actually used."""

    trajectory: Trajectory
    beliefs: tuple
    policy: object = None

    @property
    def cost(self):
        return self.trajectory.realized_cost


def closed_loop_controls(policy: Policy, wbar: DisturbanceSequence, x0, snap_tol=None):
    """Walk a solved tree policy against a realized sequence; returns controls."""
    node = policy.root
    x = tuple(float(v) for v in np.atleast_1d(x0))
    controls = []
    for k in range(len(wbar)):
        node = policy.descend(node, wbar[k], snap_tol=snap_tol)
        u, _ = policy.control(node, x)
        controls.append(u)
        x = policy.system.step(x, wbar[k], u)
    return controls


def evaluate_policy_cost(system: ControlledSystem, cost: CostStructure, x0,
                         wbar: DisturbanceSequence, policy: Policy, snap_tol=None) -> float:
    """Realized cost of running a solved policy against a fixed sequence."""
    controls = closed_loop_controls(policy, wbar, x0, snap_tol=snap_tol)
    return rollout(system, cost, x0, wbar, controls).realized_cost


def run_type1(system: ControlledSystem, cost: CostStructure, predictor, observation,
              wbar: DisturbanceSequence, x0, grid: StateGrid,
              epsilon: float = DEFAULT_EPSILON, universe=None,
              cache: Optional[SolverCache] = None) -> RunResult:
    """Single observation at step 0, then filtration only.

    The predictor is queried once; the resulting belief is epsilon-mixed with
    ``universe`` (default: the realized sequence) so the realized disturbance
    path stays on the policy tree, then solved and walked closed loop.
    """
    belief = predictor.predict(observation, step=0)
    if belief.start_step != 0 or belief.length != system.horizon:
        raise DomainError("type-I predictors must cover the full horizon from step 0")
    mixed = epsilon_mix(belief, universe if universe is not None else [wbar], epsilon)
    policy = solve_tree_policy(system, cost, mixed, x0, grid, cache=cache)
    controls = closed_loop_controls(policy, wbar, x0)
    traj = rollout(system, cost, x0, wbar, controls)
    return RunResult(trajectory=traj, beliefs=(belief,), policy=policy)


def run_type2(system: ControlledSystem, cost: CostStructure, predict_fn, observations,
              wbar: DisturbanceSequence, x0, grid: StateGrid,
              epsilon: float = DEFAULT_EPSILON, universe=None,
              cache: Optional[SolverCache] = None) -> RunResult:
    """Fresh observation and full-remaining-horizon re-prediction every step.

    ``predict_fn(k, o_k)`` must return a belief with ``start_step == k``
    covering steps ``k..N-1``.  Only the first control of each per-step
    policy is applied.
    """
    n = system.horizon
    x = tuple(float(v) for v in np.atleast_1d(x0))
    controls = []
    beliefs = []
    for k in range(n):
        belief = predict_fn(k, observations[k])
        if belief.start_step != k or belief.length != n - k:
            raise DomainError(f"step-{k} belief must cover steps {k}..{n - 1}")
        suffixes = [wbar.values[k:]]
        if universe is not None:
            suffixes += [tuple(_svalues(s))[k:] for s in universe]
        mixed = epsilon_mix(belief, suffixes, epsilon)
        policy = solve_tree_policy(system, cost, mixed, x, grid, cache=cache)
        node = policy.descend(policy.root, wbar[k])
        u, _ = policy.control(node, x)
        controls.append(u)
        beliefs.append(belief)
        x = system.step(x, wbar[k], u)
    traj = rollout(system, cost, x0, wbar, controls)
    return RunResult(trajectory=traj, beliefs=tuple(beliefs))


def _svalues(seq):
    return seq.values if isinstance(seq, DisturbanceSequence) else tuple(seq)


def truncate_belief(belief: ScenarioBelief, length: int) -> ScenarioBelief:
    """Marginalize a belief onto its first ``length`` steps."""
    if length >= belief.length:
        return belief
    weights = {}
    for s, p in zip(belief.scenarios, belief.probs):
        key = s[:length]
        weights[key] = weights.get(key, 0.0) + p
    scenarios = tuple(weights.keys())
    return ScenarioBelief._trusted(
        belief.start_step, scenarios, tuple(weights[s] for s in scenarios)
    )


def prepend_measured(w_k, belief: ScenarioBelief) -> ScenarioBelief:
    """Prefix a future belief with the measured current disturbance."""
    atom = tuple(float(c) for c in np.atleast_1d(w_k))
    scenarios = tuple((atom,) + s for s in belief.scenarios)
    return ScenarioBelief._trusted(belief.start_step - 1, scenarios, belief.probs)


def zero_terminal(X):
    return np.zeros(np.asarray(X).shape[0], dtype=float)


def run_type3(system: ControlledSystem, cost: CostStructure, future_predict_fn, observations,
              wbar: DisturbanceSequence, x0, grid: StateGrid, window: int,
              terminal_value=None, cache: Optional[SolverCache] = None) -> RunResult:
    """Receding-horizon prediction over a fixed-length window.

    At step ``k`` the window covers stages ``k .. k + L - 1`` with
    ``L = min(window, N - k)``; the first stage uses the measured ``w_k``,
    the remaining ``L - 1`` stages come from
    ``future_predict_fn(k, o_k, L - 1)`` (a belief with
    ``start_step == k + 1``, truncated here if longer).  The window ends in
    the artificial terminal value unless it reaches the horizon, where the
    true terminal cost applies.  ``terminal_value`` is a vectorized state
    map, or a dict keyed by the window's end step (the artificial terminal
    cost may approximate the cost-to-go, which is step-dependent); ``None``
    means zero.  Only the first control is applied.
    """
    if window < 1:
        raise DomainError("window must be at least 1")
    n = system.horizon
    if terminal_value is None:
        v_for = lambda end_step: zero_terminal
    elif isinstance(terminal_value, dict):
        v_for = lambda end_step: terminal_value[end_step]
    else:
        v_for = lambda end_step: terminal_value
    x = tuple(float(v) for v in np.atleast_1d(x0))
    controls = []
    beliefs = []
    for k in range(n):
        length = min(window, n - k)
        if length > 1:
            future = future_predict_fn(k, observations[k], length - 1)
            if future.start_step != k + 1:
                raise DomainError(f"step-{k} future belief must start at step {k + 1}")
            if future.length < length - 1:
                raise DomainError(f"step-{k} future belief is shorter than the window")
            window_belief = prepend_measured(wbar[k], truncate_belief(future, length - 1))
        else:
            window_belief = point_mass((wbar[k],), start_step=k)
        terminal = None if k + length == n else v_for(k + length)
        policy = solve_tree_policy(
            system, cost, window_belief, x, grid, terminal=terminal, cache=cache
        )
        node = policy.descend(policy.root, wbar[k])
        u, _ = policy.control(node, x)
        controls.append(u)
        beliefs.append(window_belief)
        x = system.step(x, wbar[k], u)
    traj = rollout(system, cost, x0, wbar, controls)
    return RunResult(trajectory=traj, beliefs=tuple(beliefs))


def posterior_optimal_cost(system: ControlledSystem, cost: CostStructure,
                           wbar: DisturbanceSequence, x0, grid: StateGrid,
                           cache: Optional[SolverCache] = None) -> float:
    """Deterministic-DP cost of the realized sequence (the regret baseline)."""
    policy = solve_tree_policy(system, cost, point_mass(wbar), x0, grid, cache=cache)
    return evaluate_policy_cost(system, cost, x0, wbar, policy)


def expected_cost_under_truth(system: ControlledSystem, cost: CostStructure, policy: Policy,
                              truth: ScenarioBelief, x0) -> float:
    """Exact truth-weighted closed-loop cost of one solved policy."""
    total = 0.0
    for s, p in zip(truth.scenarios, truth.probs):
        if p == 0.0:
            continue
        total += p * evaluate_policy_cost(system, cost, x0, DisturbanceSequence(values=s), policy)
    return total


def filtration_beliefs(belief: ScenarioBelief, wbar: DisturbanceSequence):
    """The per-step belief sequence induced by conditioning on measured values."""
    out = [belief]
    current = belief
    for k in range(len(wbar) - 1):
        current = condition_on_observed(current, wbar[k])
        out.append(current)
    return out
