"""Finite scenario beliefs over disturbance sequences.

A belief is a finite discrete probability distribution over suffixes
``[w_k, ..., w_{N-1}]`` of the disturbance sequence, starting at some step
``k``.  All beliefs in this package are finite scenario lists, so every
expectation, conditioning step, and probability lookup is exact.

Scenarios are stored as nested tuples of floats and compared exactly;
continuous measured values are snapped to the nearest support atom before
conditioning (see :func:`snap_to_atoms`).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Callable, Sequence

import numpy as np

from .errors import CapacityError, DomainError, NumericError, SupportError
from .model import DisturbanceSequence

PROB_TOL = 1e-12

Scenario = tuple  # tuple of per-step disturbance tuples


def _as_scenario(seq):
    if isinstance(seq, DisturbanceSequence):
        return seq.values
    return tuple(tuple(float(c) for c in np.atleast_1d(v)) for v in seq)


@dataclass(frozen=True)
class ScenarioBelief:
    """Probability distribution over disturbance-sequence suffixes."""

    start_step: int
    scenarios: tuple
    probs: tuple

    def __post_init__(self):
        scenarios = tuple(_as_scenario(s) for s in self.scenarios)
        probs = tuple(float(p) for p in self.probs)
        if len(scenarios) != len(probs) or not scenarios:
            raise DomainError("scenarios and probabilities must be nonempty and aligned")
        if any(p < 0 for p in probs):
            raise DomainError("probabilities must be nonnegative")
        if abs(math.fsum(probs) - 1.0) > PROB_TOL:
            raise DomainError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        lengths = {len(s) for s in scenarios}
        if len(lengths) != 1:
            raise DomainError("scenario suffixes must all have equal length")
        if len(set(scenarios)) != len(scenarios):
            raise DomainError("scenario suffixes must be duplicate-free")
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def _trusted(cls, start_step, scenarios, probs):
        """Internal fast path: caller guarantees canonical, valid fields."""
        self = object.__new__(cls)
        object.__setattr__(self, "start_step", start_step)
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "probs", probs)
        return self

    @property
    def length(self):
        """Number of steps covered by each scenario suffix."""
        return len(self.scenarios[0])

    @property
    def support_size(self):
        return len(self.scenarios)

    def stacked(self):
        """Scenario matrix of shape ``(support_size, length * d_l)``."""
        arr = np.asarray(self.scenarios, dtype=float)
        return arr.reshape(arr.shape[0], -1)

    def prob_of(self, scenario):
        key = _as_scenario(scenario)
        for s, p in zip(self.scenarios, self.probs):
            if s == key:
                return p
        return 0.0

    def atoms_at(self, offset=0):
        """Distinct disturbance atoms appearing at suffix position ``offset``."""
        seen = {}
        for s in self.scenarios:
            seen.setdefault(s[offset], None)
        return tuple(seen.keys())

    def as_sequences(self):
        return [DisturbanceSequence(values=s) for s in self.scenarios]


@dataclass(frozen=True)
class BeliefSequence:
    """One belief per step, as produced by step-wise re-prediction."""

    beliefs: tuple

    def __post_init__(self):
        beliefs = tuple(self.beliefs)
        for k, b in enumerate(beliefs):
            if b.start_step != k:
                raise DomainError(f"belief at index {k} has start_step {b.start_step}")
        object.__setattr__(self, "beliefs", beliefs)

    def __len__(self):
        return len(self.beliefs)

    def __getitem__(self, k):
        return self.beliefs[k]


def point_mass(wbar, start_step=0) -> ScenarioBelief:
    """The belief that puts probability one on a single sequence."""
    return ScenarioBelief(start_step=start_step, scenarios=(_as_scenario(wbar),), probs=(1.0,))


def epsilon_mix(belief: ScenarioBelief, universe, epsilon: float) -> ScenarioBelief:
    """Mix a belief with the uniform distribution over ``universe``.

    Returns ``(1 - epsilon) * belief + epsilon * uniform(universe)``; the
    support is the union of the belief's support and the universe, so a
    positive ``epsilon`` guarantees every universe sequence is reachable in
    closed loop.  ``epsilon == 0`` returns the belief unchanged.
    """
    if not 0.0 <= epsilon < 1.0:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon}")
    universe = [_as_scenario(s) for s in universe]
    if not universe:
        raise DomainError("universe must be nonempty")
    if epsilon == 0.0:
        return belief
    share = epsilon / len(universe)
    weights = {s: (1.0 - epsilon) * p for s, p in zip(belief.scenarios, belief.probs)}
    for s in universe:
        if len(s) != belief.length:
            raise DomainError("universe sequences must match the belief's suffix length")
        weights[s] = weights.get(s, 0.0) + share
    scenarios = tuple(weights.keys())
    return ScenarioBelief(
        start_step=belief.start_step,
        scenarios=scenarios,
        probs=tuple(weights[s] for s in scenarios),
    )


def min_support_gap(atoms) -> float:
    """Smallest Euclidean distance between distinct support atoms (inf if < 2)."""
    if len(atoms) < 2:
        return math.inf
    pts = np.asarray(atoms, dtype=float)
    best = math.inf
    for i in range(len(pts)):
        d = np.sqrt(((pts[i + 1:] - pts[i]) ** 2).sum(axis=1))
        if d.size:
            best = min(best, float(d.min()))
    return best


def default_snap_tol(atoms) -> float:
    """Half the minimal support gap; exact-match-only for single-atom supports."""
    gap = min_support_gap(atoms)
    return 0.5 * gap if math.isfinite(gap) else 0.0


def snap_to_atoms(value, atoms, tol=None):
    """Snap a measured vector to the nearest support atom.

    ``tol`` defaults to half the minimal support gap (exact match for a
    single atom).  Returns the atom tuple, or ``None`` if nothing lies
    within ``tol``.
    """
    vec = tuple(float(c) for c in np.atleast_1d(value))
    if tol is None:
        tol = default_snap_tol(atoms)
    best, best_d = None, math.inf
    for atom in atoms:
        d = math.dist(vec, atom)
        if d < best_d:
            best, best_d = atom, d
    if best is not None and best_d <= tol:
        return best
    return None


def condition_on_observed(belief: ScenarioBelief, w_k, snap_tol=None) -> ScenarioBelief:
    """Condition a belief on the measured first-step disturbance (filtration).

    The measured value is snapped onto the belief's first-step support; the
    returned belief covers the remaining suffix with ``start_step`` advanced
    by one.  Zero matching mass raises :class:`SupportError`.
    """
    atoms = belief.atoms_at(0)
    atom = snap_to_atoms(w_k, atoms, tol=snap_tol)
    if atom is None:
        raise SupportError(
            f"measured disturbance {tuple(np.atleast_1d(w_k))} is outside the belief support "
            f"at step {belief.start_step}",
            value=w_k, step=belief.start_step,
        )
    mass = math.fsum(p for s, p in zip(belief.scenarios, belief.probs) if s[0] == atom)
    if mass <= 0.0:
        raise SupportError(
            f"zero total probability mass at step {belief.start_step} for {atom}",
            value=atom, step=belief.start_step,
        )
    scenarios = []
    probs = []
    for s, p in zip(belief.scenarios, belief.probs):
        if s[0] == atom:
            scenarios.append(s[1:])
            probs.append(p / mass)
    return ScenarioBelief(
        start_step=belief.start_step + 1, scenarios=tuple(scenarios), probs=tuple(probs)
    )


def believed_expectation(belief: ScenarioBelief, functional: Callable) -> float:
    """Exact expectation of ``functional`` under the belief."""
    total = 0.0
    for s, p in zip(belief.scenarios, belief.probs):
        val = float(functional(DisturbanceSequence(values=s)))
        if not math.isfinite(val):
            raise NumericError(f"functional returned non-finite value {val!r}")
        total += p * val
    return total


def discretize_gaussian(mu: float, sigma: float, n_points: int):
    """Equal-probability quantile discretization of a Gaussian.

    Each of the ``n_points`` atoms carries probability ``1/n`` and sits at the
    conditional mean of its quantile bin, so the discrete mean equals ``mu``
    exactly; for ``mu == 0`` the atoms are exactly antisymmetric.
    """
    if sigma < 0:
        raise DomainError("sigma must be nonnegative")
    if n_points < 1:
        raise DomainError("n_points must be at least 1")
    n = int(n_points)
    if sigma == 0.0 or n == 1:
        return [(float(mu), 1.0 / n) for _ in range(n)]
    nd = NormalDist()
    bounds = [-math.inf] + [nd.inv_cdf(i / n) for i in range(1, n)] + [math.inf]

    def pdf(z):
        return 0.0 if math.isinf(z) else nd.pdf(z)

    raw = [n * (pdf(bounds[i]) - pdf(bounds[i + 1])) for i in range(n)]
    sym = [(raw[i] - raw[n - 1 - i]) / 2.0 for i in range(n)]  # exact antisymmetry
    return [(float(mu + sigma * z), 1.0 / n) for z in sym]


def product_belief(per_step_marginals, start_step=0, cap=10**6) -> ScenarioBelief:
    """Independent-step belief built as the cartesian product of marginals."""
    marginals = []
    for k, marg in enumerate(per_step_marginals):
        atoms = [(tuple(float(c) for c in np.atleast_1d(v)), float(p)) for v, p in marg]
        if abs(math.fsum(p for _, p in atoms) - 1.0) > PROB_TOL:
            raise DomainError(f"marginal {k} does not sum to 1")
        if len({a for a, _ in atoms}) != len(atoms):
            raise DomainError(f"marginal {k} has duplicate atoms")
        marginals.append(atoms)
    count = 1
    for marg in marginals:
        count *= len(marg)
    if count > cap:
        raise CapacityError(f"product support would have {count} scenarios (cap {cap})")
    sizes = [len(m) for m in marginals]
    index_grid = np.stack(
        np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij"), axis=-1
    ).reshape(-1, len(sizes))
    prob_vec = np.ones(count, dtype=float)
    for i, marg in enumerate(marginals):
        prob_vec *= np.asarray([p for _, p in marg])[index_grid[:, i]]
    scenarios = tuple(
        tuple(marginals[i][j][0] for i, j in enumerate(row)) for row in index_grid
    )
    return ScenarioBelief._trusted(start_step, scenarios, tuple(prob_vec.tolist()))


def total_variation(a: ScenarioBelief, b: ScenarioBelief) -> float:
    """Total-variation distance between two beliefs over the union support."""
    support = dict.fromkeys(a.scenarios)
    support.update(dict.fromkeys(b.scenarios))
    pa = dict(zip(a.scenarios, a.probs))
    pb = dict(zip(b.scenarios, b.probs))
    return 0.5 * math.fsum(abs(pa.get(s, 0.0) - pb.get(s, 0.0)) for s in support)


def beliefs_equal(a: ScenarioBelief, b: ScenarioBelief, tol=1e-12) -> bool:
    """Same support atoms with probabilities matching within ``tol``."""
    if set(a.scenarios) != set(b.scenarios):
        return False
    pb = dict(zip(b.scenarios, b.probs))
    return all(abs(p - pb[s]) <= tol for s, p in zip(a.scenarios, a.probs))


def belief_digest(belief: ScenarioBelief) -> int:
    """64-bit digest of the canonical (sorted, rounded) belief representation."""
    items = sorted(zip(belief.scenarios, belief.probs))
    payload = repr((belief.start_step, [(s, round(p, 12)) for s, p in items])).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big")
