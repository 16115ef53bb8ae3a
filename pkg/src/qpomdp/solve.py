"""Memoryless almost-sure winning on the belief-observation product.

The winning region is computed by an outer pruning loop over memories
(the product's observations):

* keep, per memory, the actions whose every branch still has a surviving
  next memory and which never send a claimed-recurrent state to Lose;
* inside the claimed-recurrent states, compute per even level the largest
  set that the remaining actions keep closed and from which a state of
  exactly that priority stays reachable (the recurrence core);
* drop memories with a state that cannot reach a core.

An assignment maps each memory to base actions with, per branch, the set of
allowed next memories; the induced randomized policy plays uniformly.
"""
from collections import deque
from dataclasses import dataclass, field
import time
from typing import Dict, List, Optional, Tuple

from .model import Pomdp, bits
from .product import BeliefProduct, LOSE, build

ALMOST_SURE = "AlmostSure"
NOT_FOUND = "NotFoundInClass"

# assignment[m] = {action: (options of branch 0, options of branch 1, ...)}
Assignment = Dict[int, Dict[int, Tuple[Tuple[int, ...], ...]]]


@dataclass
class Solution:
    verdict: str
    winning: frozenset
    assignment: Assignment
    core: Dict[int, int] = field(default_factory=dict)  # memory -> state mask
    iterations: int = 0

    @property
    def almost_sure(self) -> bool:
        return self.verdict == ALMOST_SURE


def _lose_free(prod: BeliefProduct) -> List[List[bool]]:
    return [[all(j != LOSE for mv in prod.moves[m][a] for _, j in mv)
             for a in range(prod.pomdp.n_actions)]
            for m in range(prod.n_memories)]


def safe_actions(prod: BeliefProduct, alive: List[bool], lose_free=None) -> Assignment:
    """Shrink ``alive`` in place until every alive memory has a safe action."""
    if lose_free is None:
        lose_free = _lose_free(prod)
    n_act = prod.pomdp.n_actions
    preds: List[set] = [set() for _ in range(prod.n_memories)]
    for m in range(prod.n_memories):
        for a in range(n_act):
            for br in prod.branches[m][a]:
                for o in br.options:
                    preds[o].add(m)

    def compute(m):
        acts = {}
        for a in range(n_act):
            if not lose_free[m][a]:
                continue
            opts = []
            for br in prod.branches[m][a]:
                live = tuple(o for o in br.options if alive[o])
                if not live:
                    break
                opts.append(live)
            else:
                acts[a] = tuple(opts)
        return acts

    result: Assignment = {}
    queue = deque(m for m in range(prod.n_memories) if alive[m])
    queued = [alive[m] for m in range(prod.n_memories)]
    while queue:
        m = queue.popleft()
        queued[m] = False
        if not alive[m]:
            continue
        acts = compute(m)
        if acts:
            result[m] = acts
            continue
        alive[m] = False
        result.pop(m, None)
        for p in preds[m]:
            if alive[p] and not queued[p]:
                queued[p] = True
                queue.append(p)
    # predecessors re-checked above may still carry stale options
    for m in list(result):
        result[m] = compute(m)
        if not result[m]:
            raise AssertionError("safe action set collapsed after fixpoint")
    return result


def safe_core(prod: BeliefProduct, safe: Assignment, level: int):
    """Recurrence core for ``level`` within the memories of ``safe``.

    Returns ``(core, core_actions)``: ``core[m]`` is the mask of claimed
    states of memory ``m`` in the core and ``core_actions[m]`` the actions
    (with per-branch options) keeping those states inside the core.
    """
    prio = prod.pomdp.priority
    core = {m: prod.memories[m].b for m in safe
            if prod.memories[m].b and prod.memories[m].level == level}
    core_actions: Assignment = {}
    while True:
        changed = False
        core_actions = {}
        for m in sorted(core):
            cmask = core[m]
            members = prod.members[m]
            acts = {}
            for a, opts in safe[m].items():
                touched: Dict[int, int] = {}
                for pos, s in enumerate(members):
                    if cmask >> s & 1:
                        for t, j in prod.moves[m][a][pos]:
                            touched[j] = touched.get(j, 0) | (1 << t)
                new_opts = []
                for j, live in enumerate(opts):
                    need = touched.get(j)
                    if need is None:
                        new_opts.append(live)
                        continue
                    keep = tuple(o for o in live if core.get(o, 0) & need == need)
                    if not keep:
                        break
                    new_opts.append(keep)
                else:
                    acts[a] = tuple(new_opts)
            if acts:
                core_actions[m] = acts
            else:
                changed = True
        if changed:
            core = {m: c for m, c in core.items() if m in core_actions}
            continue
        # states that can reach a state of priority exactly ``level`` in the core
        preds: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        goal = []
        for m, cmask in core.items():
            members = prod.members[m]
            for pos, s in enumerate(members):
                if not cmask >> s & 1:
                    continue
                if prio[s] == level:
                    goal.append((s, m))
                for a, opts in core_actions[m].items():
                    for t, j in prod.moves[m][a][pos]:
                        for o in opts[j]:
                            preds.setdefault((t, o), []).append((s, m))
        seen = set(goal)
        queue = deque(goal)
        while queue:
            node = queue.popleft()
            for p in preds.get(node, ()):
                if p not in seen:
                    seen.add(p)
                    queue.append(p)
        new_core = {}
        for m, cmask in core.items():
            keep = 0
            for s in bits(cmask):
                if (s, m) in seen:
                    keep |= 1 << s
            if keep != cmask:
                changed = True
            if keep:
                new_core[m] = keep
        core = new_core
        if not changed:
            return core, core_actions


def _reach_targets(prod: BeliefProduct, assignment: Assignment, core) -> set:
    preds: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
    for m, acts in assignment.items():
        for a, opts in acts.items():
            for pos, s in enumerate(prod.members[m]):
                for t, j in prod.moves[m][a][pos]:
                    for o in opts[j]:
                        preds.setdefault((t, o), []).append((s, m))
    goal = [(s, m) for m, cmask in core.items() for s in bits(cmask)]
    seen = set(goal)
    queue = deque(goal)
    while queue:
        node = queue.popleft()
        for p in preds.get(node, ()):
            if p not in seen:
                seen.add(p)
                queue.append(p)
    return seen


def _prune(prod: BeliefProduct, alive: List[bool]):
    lose_free = _lose_free(prod)
    rounds = 0
    while True:
        rounds += 1
        safe = safe_actions(prod, alive, lose_free)
        core: Dict[int, int] = {}
        assignment: Assignment = dict(safe)
        for level in prod.levels:
            c, acts = safe_core(prod, safe, level)
            core.update(c)
            for m in c:
                assignment[m] = acts[m]
        reached = _reach_targets(prod, assignment, core)
        dropped = False
        for m in list(assignment):
            if any((s, m) not in reached for s in prod.members[m]):
                alive[m] = False
                dropped = True
        if not dropped:
            return assignment, core, rounds


def almost_sure_win(prod: BeliefProduct) -> Solution:
    alive = [True] * prod.n_memories
    assignment, core, rounds = _prune(prod, alive)
    winning = frozenset(m for m in range(prod.n_memories) if alive[m])
    if not alive[prod.initial]:
        return Solution(NOT_FOUND, winning, {}, {}, rounds)
    return Solution(ALMOST_SURE, winning, assignment, core, rounds)


def check_maximality(prod: BeliefProduct, solution: Solution) -> bool:
    """Adding back any single dropped memory must break safety or reachability."""
    for m in range(prod.n_memories):
        if m in solution.winning:
            continue
        alive = [i in solution.winning or i == m for i in range(prod.n_memories)]
        _prune(prod, alive)
        if alive[m]:
            return False
    return True


# -- pipeline -----------------------------------------------------------------


class WitnessError(AssertionError):
    """An emitted witness failed independent verification (a solver bug)."""


@dataclass
class Analysis:
    """Everything the pipeline produced for one model/objective pair."""

    model: Pomdp            # objective product, before normalization
    analyzed: Pomdp         # the model actually solved
    reduction: str          # identity | sink | unsupported
    product: BeliefProduct
    solution: Solution
    policy: Optional[object] = None
    certificate: Optional[object] = None
    seconds: float = 0.0

    @property
    def verdict(self) -> str:
        return self.solution.verdict


def prepare(pomdp: Pomdp, objective=None, reads: str = "entered"):
    """Objective product, priority normalization and coBuchi reduction."""
    from .objective import ObjectiveSpec, ParityAutomaton, normalize_priorities, product, reduce_to_cobuchi
    model = pomdp
    if objective is not None:
        if isinstance(objective, ObjectiveSpec):
            alphabet = set(pomdp.labels or ()) or None
            objective = objective.to_automaton(alphabet)
        if not isinstance(objective, ParityAutomaton):
            raise TypeError("objective must be an ObjectiveSpec or ParityAutomaton")
        model = product(pomdp, objective, reads=reads)
    normalized = normalize_priorities(model)
    reduction = reduce_to_cobuchi(normalized)
    return model, reduction


def solve(pomdp: Pomdp, objective=None, cap: Optional[int] = None,
          reads: str = "entered") -> Analysis:
    """Decide almost-sure winnability and return a certified witness if found."""
    from .policy import extract
    from .verify import check
    t0 = time.perf_counter()
    model, reduction = prepare(pomdp, objective, reads)
    analyzed = reduction.model
    prod = build(analyzed, cap)
    solution = almost_sure_win(prod)
    result = Analysis(model, analyzed, reduction.kind, prod, solution)
    if solution.almost_sure:
        policy = extract(solution, prod)
        cert = check(analyzed, policy)
        if not cert.verdict:
            raise WitnessError("emitted witness failed verification:\n" + cert.to_text(analyzed))
        result.policy = policy
        result.certificate = cert
    result.seconds = time.perf_counter() - t0
    return result
