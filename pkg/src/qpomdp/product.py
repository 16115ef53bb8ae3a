"""Belief-observation product of a POMDP with projected-policy memory.

A memory element is ``(Y, B, level)``: the belief-support ``Y``, the subset
``B`` of states claimed recurrent, and the even priority the claimed class
is locked at (``None`` while nothing is claimed).  Product states are pairs
``(s, m)`` with ``s`` in ``m.Y``; the observation of a product state is its
memory element, so the belief-observation property holds by construction.

Composite actions are kept factored.  Playing base action ``a`` at memory
``m`` splits the successors by next observation ``z``; each such branch
offers a short menu of next memories (the selector choice for that ``z``).
A composite action is a base action plus one menu choice per branch.
"""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .model import (Pomdp, ResourceLimitError, bits, cap_from_env, post_mask,
                    split_by_observation, from_mask)

LOSE = -1
DEFAULT_PRODUCT_CAP = 5_000_000


@dataclass(frozen=True)
class MemoryElement:
    y: int
    b: int
    level: Optional[int]

    @property
    def support(self):
        return from_mask(self.y)

    @property
    def claimed(self):
        return from_mask(self.b)


@dataclass
class Branch:
    """Successors of one memory under one base action with observation ``obs``."""

    obs: int
    options: Tuple[int, ...]  # successor memory indices


@dataclass
class BeliefProduct:
    pomdp: Pomdp
    levels: Tuple[int, ...]
    memories: List[MemoryElement] = field(default_factory=list)
    # branches[m][a] and moves[m][a][i] for the i-th member of Y(m):
    # tuple of (successor state, branch index or LOSE)
    branches: List[List[List[Branch]]] = field(default_factory=list)
    moves: List[List[List[Tuple[Tuple[int, int], ...]]]] = field(default_factory=list)
    members: List[Tuple[int, ...]] = field(default_factory=list)
    odd_transient: int = 1

    @property
    def initial(self) -> int:
        return 0

    @property
    def n_memories(self) -> int:
        return len(self.memories)

    def n_states(self) -> int:
        """Product states including the Lose sink."""
        return sum(len(m) for m in self.members) + 1

    def priority(self, s: int, m: int) -> int:
        if s == LOSE:
            return 1
        if self.memories[m].b >> s & 1:
            return self.pomdp.priority[s]
        return self.odd_transient

    def max_support(self) -> int:
        return max(len(m) for m in self.members)

    def states(self):
        for m, mem in enumerate(self.members):
            for s in mem:
                yield s, m


def levels_of(pomdp: Pomdp) -> Tuple[int, ...]:
    return tuple(sorted(p for p in pomdp.priority_set() if p % 2 == 0))


def _closed_locks(pomdp: Pomdp, region: int) -> List[int]:
    succ = pomdp.succ_mask
    result = [region]
    groups = [(a,) for a in range(pomdp.n_actions)]
    if pomdp.n_actions > 1:
        groups.append(tuple(range(pomdp.n_actions)))
    for group in groups:
        c = region
        while True:
            keep = c
            for s in bits(c):
                if any(succ[s][a] & ~c for a in group):
                    keep &= ~(1 << s)
            if keep == c:
                break
            c = keep
        if c and c not in result:
            result.append(c)
    return result


def build(pomdp: Pomdp, cap: Optional[int] = None) -> BeliefProduct:
    """Construct the reachable product breadth-first from ``(start, no claim)``."""
    cap = cap_from_env(DEFAULT_PRODUCT_CAP) if cap is None else cap
    levels = levels_of(pomdp)
    top = max(pomdp.priority)
    prod = BeliefProduct(pomdp, levels, odd_transient=top + 1 if top % 2 == 0 else top + 2)
    allowed = {}
    for level in levels:
        mask = 0
        for s, p in enumerate(pomdp.priority):
            if p >= level:
                mask |= 1 << s
        allowed[level] = mask
    # lock candidates: all allowed states, and the largest allowed subsets
    # closed under each single action and under every action at once
    locks = {level: _closed_locks(pomdp, allowed[level]) for level in levels}
    index: Dict[MemoryElement, int] = {}
    queue = deque()
    n_states = [1]

    def visit(mem: MemoryElement) -> int:
        i = index.get(mem)
        if i is None:
            i = len(prod.memories)
            index[mem] = i
            prod.memories.append(mem)
            prod.members.append(tuple(bits(mem.y)))
            n_states[0] += len(prod.members[-1])
            if n_states[0] > cap:
                raise ResourceLimitError(f"product exceeds {cap} states")
            queue.append(i)
        return i

    def fresh_menu(y2):
        menu = [MemoryElement(y2, 0, None)]
        for level in levels:
            for c in locks[level]:
                lock = y2 & c
                if lock:
                    menu.append(MemoryElement(y2, lock, level))
        return list(dict.fromkeys(menu))

    obs_of = pomdp.obs_of
    succ = pomdp.succ_mask
    visit(MemoryElement(pomdp.start_mask, 0, None))
    while queue:
        i = queue.popleft()
        mem = prod.memories[i]
        ok = allowed[mem.level] if mem.b else 0
        row_branches = []
        row_moves = []
        for a in range(pomdp.n_actions):
            post = post_mask(pomdp, mem.y, a)
            claimed_post = post_mask(pomdp, mem.b, a) if mem.b else 0
            branches = []
            branch_of = {}
            for z, y2 in split_by_observation(pomdp, post):
                closure = claimed_post & y2 & ok
                if closure:
                    menu = [MemoryElement(y2, closure, mem.level)]
                    lock = y2 & ok
                    if lock != closure:
                        menu.append(MemoryElement(y2, lock, mem.level))
                else:
                    menu = fresh_menu(y2)
                branch_of[z] = len(branches)
                branches.append(Branch(z, tuple(visit(m2) for m2 in menu)))
            moves = []
            for s in prod.members[i]:
                claimed = mem.b >> s & 1
                out = []
                for t in bits(succ[s][a]):
                    if claimed and not ok >> t & 1:
                        out.append((t, LOSE))
                    else:
                        out.append((t, branch_of[obs_of[t]]))
                moves.append(tuple(out))
            row_branches.append(branches)
            row_moves.append(moves)
        prod.branches.append(row_branches)
        prod.moves.append(row_moves)
    return prod


def to_pomdp(prod: BeliefProduct, max_actions: int = 256) -> Pomdp:
    """Flatten the product into an ordinary POMDP (debug dumps only).

    Composite actions are numbered per memory in mixed radix over the branch
    menus; memories with fewer combinations reuse them cyclically.
    """
    pomdp = prod.pomdp
    combos = []
    for m in range(prod.n_memories):
        per_action = []
        for a in range(pomdp.n_actions):
            count = 1
            for br in prod.branches[m][a]:
                count *= len(br.options)
            per_action.append(count)
        combos.append(per_action)
    width = max(max(c) for c in combos)
    if width * pomdp.n_actions > max_actions:
        raise ResourceLimitError("too many composite actions to flatten the product")
    index = {}
    names = []
    for s, m in prod.states():
        index[(s, m)] = len(names)
        names.append(f"{pomdp.state_names[s]}_m{m}")
    lose = len(names)
    names.append("Lose")
    actions = [f"{pomdp.action_names[a]}_{k}" for a in range(pomdp.n_actions) for k in range(width)]
    rows = []
    for s, m in prod.states():
        pos = prod.members[m].index(s)
        row = []
        for a in range(pomdp.n_actions):
            for k in range(width):
                code = k % combos[m][a]
                choice = []
                for br in prod.branches[m][a]:
                    choice.append(br.options[code % len(br.options)])
                    code //= len(br.options)
                dist = {}
                for t, bi in prod.moves[m][a][pos]:
                    p = pomdp.transitions[s][a][t]
                    key = lose if bi == LOSE else index[(t, choice[bi])]
                    dist[key] = dist.get(key, 0) + p
                row.append(dist)
        rows.append(tuple(row))
    rows.append(tuple({lose: Fraction(1)} for _ in actions))
    obs_names = [f"m{m}" for m in range(prod.n_memories)] + ["Lose"]
    return Pomdp(
        state_names=tuple(names),
        action_names=tuple(actions),
        obs_names=tuple(obs_names),
        transitions=tuple(rows),
        obs_of=tuple([m for _, m in prod.states()] + [prod.n_memories]),
        start={index[(s, 0)]: p for s, p in pomdp.start.items() if p > 0},
        priority=tuple([prod.priority(s, m) for s, m in prod.states()] + [1]),
    )


def dump(prod: BeliefProduct) -> str:
    """Readable listing of memories and their per-action branch menus."""
    pomdp = prod.pomdp
    names = pomdp.state_names

    def fmt(mask):
        return "{" + ",".join(names[s] for s in bits(mask)) + "}"

    lines = [f"product: {prod.n_memories} memories, {prod.n_states()} states (incl. Lose), "
             f"levels {list(prod.levels)}"]
    for m, mem in enumerate(prod.memories):
        level = "-" if mem.level is None else mem.level
        lines.append(f"m{m}: Y={fmt(mem.y)} B={fmt(mem.b)} L={level}")
        for a in range(pomdp.n_actions):
            loses = sorted({names[s] for pos, s in enumerate(prod.members[m])
                            for _, j in prod.moves[m][a][pos] if j == LOSE})
            parts = [f"{pomdp.obs_names[br.obs]}->" + "|".join(f"m{o}" for o in br.options)
                     for br in prod.branches[m][a]]
            if loses:
                parts.append("Lose<-" + ",".join(loses))
            lines.append(f"  {pomdp.action_names[a]}: " + " ".join(parts))
    return "\n".join(lines) + "\n"
