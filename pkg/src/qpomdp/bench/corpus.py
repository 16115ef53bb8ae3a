"""Seeded random tiny POMDPs for solver/oracle agreement testing."""
from fractions import Fraction

import numpy as np

from ..model import Pomdp


def random_pomdp(seed: int, max_states: int = 6, max_actions: int = 2, max_obs: int = 3,
                 priorities=(1, 2, 3), max_succ: int = 2) -> Pomdp:
    """A random instance; the same seed always gives the same model.

    Transition supports have one to ``max_succ`` successors with random exact
    weights; the start distribution covers a random subset of one observation.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_states + 1))
    n_act = int(rng.integers(1, max_actions + 1))
    n_obs = int(rng.integers(1, min(max_obs, n) + 1))
    # every observation gets at least one state
    obs_of = list(range(n_obs)) + [int(z) for z in rng.integers(0, n_obs, n - n_obs)]
    rng.shuffle(obs_of)
    transitions = []
    for _ in range(n):
        row = []
        for _ in range(n_act):
            k = int(rng.integers(1, min(max_succ, n) + 1))
            succ = sorted(int(t) for t in rng.choice(n, size=k, replace=False))
            weights = [int(w) for w in rng.integers(1, 4, size=k)]
            total = sum(weights)
            row.append({t: Fraction(w, total) for t, w in zip(succ, weights)})
        transitions.append(row)
    z0 = obs_of[int(rng.integers(0, n))]
    members = [s for s in range(n) if obs_of[s] == z0]
    k = int(rng.integers(1, len(members) + 1))
    chosen = sorted(int(s) for s in rng.choice(members, size=k, replace=False))
    start = {s: Fraction(1, k) for s in chosen}
    priority = [int(rng.choice(priorities)) for _ in range(n)]
    return Pomdp(tuple(f"s{i}" for i in range(n)), tuple(f"a{i}" for i in range(n_act)),
                 tuple(f"z{i}" for i in range(n_obs)), tuple(tuple(r) for r in transitions),
                 tuple(obs_of), start, tuple(priority))


def reweight(pomdp: Pomdp, seed: int) -> Pomdp:
    """Same supports, fresh random positive weights on every row."""
    rng = np.random.default_rng(seed)
    rows = []
    for row in pomdp.transitions:
        new = []
        for dist in row:
            weights = [int(w) for w in rng.integers(1, 10, size=len(dist))]
            total = sum(weights)
            new.append({t: Fraction(w, total) for t, w in zip(sorted(dist), weights)})
        rows.append(tuple(new))
    return pomdp.replace(transitions=tuple(rows))
