"""POMDP data model and the belief-support calculus.

States, actions and observations are identified by index; names are kept
only for display and serialization.  Belief-supports are plain frozensets
of state indices on the public API and int bitmasks internally.
"""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
import os
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

Prob = Union[Fraction, float]
Distribution = Dict[int, Prob]
BeliefSupport = FrozenSet[int]

DEFAULT_SUPPORT_CAP = 2 ** 20
FLOAT_TOLERANCE = 1e-9


class ModelError(ValueError):
    """Raised when a model cannot even be constructed."""


class ResourceLimitError(RuntimeError):
    """A configurable resource cap (supports, product states, ...) was hit."""


def cap_from_env(default: int) -> int:
    value = os.environ.get("QPOMDP_CAP")
    if value:
        return int(value)
    return default


def is_exact(p) -> bool:
    return isinstance(p, (Fraction, int))


def row_sum_ok(dist: Distribution) -> bool:
    values = list(dist.values())
    if all(is_exact(v) for v in values):
        return sum(values, Fraction(0)) == 1
    return abs(float(sum(float(v) for v in values)) - 1.0) <= FLOAT_TOLERANCE


def bits(mask: int):
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(states) -> int:
    mask = 0
    for s in states:
        mask |= 1 << s
    return mask


def from_mask(mask: int) -> BeliefSupport:
    return frozenset(bits(mask))


@dataclass(frozen=True)
class Pomdp:
    """Finite POMDP with a deterministic observation map and priorities.

    ``transitions[s][a]`` is a sparse distribution ``{successor: prob}``.
    ``start`` is a distribution whose support must lie inside one
    observation; a single initial state is the usual case.
    """

    state_names: Tuple[str, ...]
    action_names: Tuple[str, ...]
    obs_names: Tuple[str, ...]
    transitions: Tuple[Tuple[Distribution, ...], ...]
    obs_of: Tuple[int, ...]
    start: Distribution
    priority: Tuple[int, ...]
    labels: Optional[Tuple[str, ...]] = field(default=None)

    def __post_init__(self):
        n = len(self.state_names)
        if n == 0:
            raise ModelError("a POMDP needs at least one state")
        if not self.action_names:
            raise ModelError("a POMDP needs at least one action")
        if len(self.transitions) != n:
            raise ModelError("transition table does not cover every state")
        for s, row in enumerate(self.transitions):
            if len(row) != len(self.action_names):
                raise ModelError(f"transition row of {self.state_names[s]} "
                                 "does not cover every action")
        if len(self.obs_of) != n or len(self.priority) != n:
            raise ModelError("obs_of and priority must be total over states")
        for s, p in enumerate(self.priority):
            if not isinstance(p, int) or p < 0:
                raise ModelError(f"priority of {self.state_names[s]} must be "
                                 f"a non-negative integer, got {p!r}")
        if self.labels is not None and len(self.labels) != n:
            raise ModelError("labeling must be total over states")

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    @property
    def n_obs(self) -> int:
        return len(self.obs_names)

    @cached_property
    def succ_mask(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(to_mask(k for k, p in dist.items() if p > 0) for dist in row)
            for row in self.transitions
        )

    @cached_property
    def obs_mask(self) -> Tuple[int, ...]:
        masks = [0] * self.n_obs
        for s, z in enumerate(self.obs_of):
            masks[z] |= 1 << s
        return tuple(masks)

    @cached_property
    def start_mask(self) -> int:
        return to_mask(s for s, p in self.start.items() if p > 0)

    @cached_property
    def state_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.state_names)}

    @cached_property
    def action_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.action_names)}

    @cached_property
    def obs_index(self) -> Dict[str, int]:
        return {name: i for i, name in enumerate(self.obs_names)}

    def priority_set(self) -> FrozenSet[int]:
        return frozenset(self.priority)

    def replace(self, **changes) -> "Pomdp":
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return Pomdp(**values)


@dataclass(frozen=True)
class Trace:
    """Finite play prefix s0 a0 s1 a1 ... sn with its observations."""

    states: Tuple[int, ...]
    actions: Tuple[int, ...]

    def observations(self, pomdp: Pomdp) -> Tuple[int, ...]:
        return tuple(pomdp.obs_of[s] for s in self.states)

    def is_consistent(self, pomdp: Pomdp) -> bool:
        if len(self.states) != len(self.actions) + 1:
            return False
        for i, a in enumerate(self.actions):
            if pomdp.transitions[self.states[i]][a].get(self.states[i + 1], 0) <= 0:
                return False
        return True


def simple_pomdp(states: Sequence[str], actions: Sequence[str],
                 observations: Sequence[str], obs_of: Dict[str, str],
                 transitions: Dict[Tuple[str, str], Dict[str, Prob]],
                 start, priority: Dict[str, int],
                 labels: Optional[Dict[str, str]] = None) -> Pomdp:
    """Build a Pomdp from name-keyed dictionaries.

    ``start`` is either a state name or a ``{name: prob}`` mapping.
    """
    s_idx = {n: i for i, n in enumerate(states)}
    a_idx = {n: i for i, n in enumerate(actions)}
    z_idx = {n: i for i, n in enumerate(observations)}
    table = []
    for s in states:
        row = []
        for a in actions:
            dist = transitions.get((s, a), {})
            row.append({s_idx[t]: p for t, p in dist.items()})
        table.append(tuple(row))
    if isinstance(start, str):
        start = {start: Fraction(1)}
    return Pomdp(
        state_names=tuple(states),
        action_names=tuple(actions),
        obs_names=tuple(observations),
        transitions=tuple(table),
        obs_of=tuple(z_idx[obs_of[s]] for s in states),
        start={s_idx[s]: p for s, p in start.items()},
        priority=tuple(priority[s] for s in states),
        labels=None if labels is None else tuple(labels.get(s, "_") for s in states),
    )


def validate(pomdp: Pomdp) -> List[str]:
    """Return one diagnostic string per violated model invariant."""
    problems = []
    n = pomdp.n_states
    for s, row in enumerate(pomdp.transitions):
        for a, dist in enumerate(row):
            where = f"({pomdp.state_names[s]},{pomdp.action_names[a]})"
            if not dist:
                problems.append(f"missing transition at {where}")
                continue
            bad = [t for t in dist if not 0 <= t < n]
            if bad:
                problems.append(f"unknown successor index {bad[0]} at {where}")
                continue
            if any(p <= 0 for p in dist.values()):
                problems.append(f"non-positive probability stored at {where}")
            if not row_sum_ok(dist):
                problems.append(f"row-sum violation at {where}")
    for s, z in enumerate(pomdp.obs_of):
        if not 0 <= z < pomdp.n_obs:
            problems.append(f"unknown observation index {z} for "
                            f"{pomdp.state_names[s]}")
    used = set(pomdp.obs_of)
    for z, name in enumerate(pomdp.obs_names):
        if z not in used:
            problems.append(f"observation {name} has no state")
    if not pomdp.start:
        problems.append("empty start distribution")
    else:
        if any(not 0 <= s < n for s in pomdp.start):
            problems.append("start distribution names an unknown state")
        elif not row_sum_ok(pomdp.start):
            problems.append("start distribution does not sum to 1")
        elif len({pomdp.obs_of[s] for s in pomdp.start}) > 1:
            problems.append("start distribution spans several observations")
    return problems


def post_mask(pomdp: Pomdp, support: int, action: int) -> int:
    succ = pomdp.succ_mask
    out = 0
    for s in bits(support):
        out |= succ[s][action]
    return out


def belief_update(pomdp: Pomdp, support, action: int, obs: int) -> BeliefSupport:
    """Successor belief-support; the empty set means ``obs`` is impossible."""
    mask = post_mask(pomdp, to_mask(support), action) & pomdp.obs_mask[obs]
    return from_mask(mask)


def split_by_observation(pomdp: Pomdp, mask: int) -> List[Tuple[int, int]]:
    """Partition a state mask into ``(obs, submask)`` pairs, by obs index."""
    parts: Dict[int, int] = {}
    obs_of = pomdp.obs_of
    for s in bits(mask):
        z = obs_of[s]
        parts[z] = parts.get(z, 0) | (1 << s)
    return sorted(parts.items())


def initial_support(pomdp: Pomdp) -> BeliefSupport:
    return from_mask(pomdp.start_mask)


def reachable_belief_supports(pomdp: Pomdp, cap: Optional[int] = None):
    """Breadth-first closure of belief-supports from the start support."""
    cap = cap_from_env(DEFAULT_SUPPORT_CAP) if cap is None else cap
    first = pomdp.start_mask
    seen = {first}
    queue = deque([first])
    while queue:
        y = queue.popleft()
        for a in range(pomdp.n_actions):
            for _, y2 in split_by_observation(pomdp, post_mask(pomdp, y, a)):
                if y2 not in seen:
                    seen.add(y2)
                    if len(seen) > cap:
                        raise ResourceLimitError(
                            f"more than {cap} reachable belief-supports")
                    queue.append(y2)
    return {from_mask(y) for y in seen}


def max_observation_size(pomdp: Pomdp) -> int:
    return max(bin(m).count("1") for m in pomdp.obs_mask) if pomdp.n_obs else 0


def reachable_states(pomdp: Pomdp) -> FrozenSet[int]:
    seen = pomdp.start_mask
    frontier = seen
    while frontier:
        new = 0
        for s in bits(frontier):
            for m in pomdp.succ_mask[s]:
                new |= m
        frontier = new & ~seen
        seen |= new
    return from_mask(seen)
