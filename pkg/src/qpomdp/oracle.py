"""Brute-force ground truth for tiny POMDPs.

Enumerates observation-based policies with at most ``k`` memory states: an
action-support set per memory and a memory update on (memory, observation,
action played).
Only the part of each policy reachable in the induced chain is enumerated,
with memories numbered in order of first use, which removes relabelings.
A quick perfect-information check refutes instances no policy at all can win.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Optional

from .model import Pomdp, bits
from .policy import FiniteMemoryPolicy
from .verify import check, strongly_connected_components

MAX_STATES, MAX_ACTIONS, MAX_OBS, MAX_MEMORY = 8, 3, 4, 3

YES = "YES"
NO = "NO_within_spec"


class OracleCapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class PolicyClassSpec:
    memory: int = 3
    randomized: bool = True  # all action-support sets; False = single actions

    def __post_init__(self):
        if self.memory < 1:
            raise ValueError("memory bound must be >= 1")


@dataclass
class OracleResult:
    answer: str
    witness: Optional[FiniteMemoryPolicy] = None
    candidates: int = 0

    @property
    def yes(self) -> bool:
        return self.answer == YES


# -- perfect-information refutation ------------------------------------------

def _end_components(pomdp: Pomdp, states: int):
    """Maximal end components of the MDP restricted to ``states`` (bitmasks)."""
    succ = pomdp.succ_mask
    acts = {s: [a for a in range(pomdp.n_actions) if not succ[s][a] & ~states]
            for s in bits(states)}
    result = []
    work = [states]
    while work:
        region = work.pop()
        while True:
            live = [s for s in bits(region) if acts[s]]
            region = sum(1 << s for s in live)
            comps = strongly_connected_components(
                live, lambda v: [t for a in acts[v] for t in bits(succ[v][a]) if region >> t & 1])
            changed = False
            for comp in comps:
                cmask = sum(1 << s for s in comp)
                for s in comp:
                    keep = [a for a in acts[s] if not succ[s][a] & ~cmask]
                    if len(keep) != len(acts[s]):
                        acts[s] = keep
                        changed = True
            if not changed:
                break
        for comp in strongly_connected_components(
                [s for s in bits(region) if acts[s]],
                lambda v: [t for a in acts[v] for t in bits(succ[v][a]) if region >> t & 1]):
            cmask = sum(1 << s for s in comp)
            if all(acts[s] for s in comp):
                if len(comp) > 1 or any(succ[comp[0]][a] == cmask for a in acts[comp[0]]):
                    result.append(cmask)
    return result


def _almost_sure_reach(pomdp: Pomdp, target: int) -> int:
    succ = pomdp.succ_mask
    n = pomdp.n_states
    alive = (1 << n) - 1
    while True:
        acts = {s: [a for a in range(pomdp.n_actions) if not succ[s][a] & ~alive]
                for s in bits(alive)}
        reach = target & alive
        while True:
            new = reach
            for s in bits(alive & ~reach):
                if any(succ[s][a] & reach for a in acts[s]):
                    new |= 1 << s
            if new == reach:
                break
            reach = new
        if reach == alive:
            return alive
        alive = reach


def mdp_almost_sure(pomdp: Pomdp, priorities=None) -> bool:
    """Can a controller that sees the state win almost surely?"""
    prio = pomdp.priority if priorities is None else priorities
    good = 0
    for d in sorted({p for p in prio if p % 2 == 0}):
        region = sum(1 << s for s in range(pomdp.n_states) if prio[s] >= d)
        for ec in _end_components(pomdp, region):
            if any(prio[s] == d for s in bits(ec)):
                good |= ec
    win = _almost_sure_reach(pomdp, good)
    return pomdp.start_mask & ~win == 0


# -- enumeration --------------------------------------------------------------

def _supports(n_actions: int, randomized: bool):
    if not randomized:
        return [(a,) for a in range(n_actions)]
    return [c for r in range(1, n_actions + 1) for c in combinations(range(n_actions), r)]


def _winning(nodes, edges, prio) -> bool:
    for comp in strongly_connected_components(nodes, lambda v: edges[v]):
        members = set(comp)
        if all(w in members for v in comp for w in edges[v]):
            if min(prio[s] for s, _ in comp) % 2:
                return False
    return True


def _search(pomdp: Pomdp, prio, k: int, supports, counter):
    succ = pomdp.succ_mask
    obs_of = pomdp.obs_of
    init = [(s, 0) for s in bits(pomdp.start_mask)]

    def run(act, upd, used, order, seen, edges, pos, partial):
        # ``partial`` holds successors already produced for order[pos]
        while pos < len(order):
            s, m = order[pos]
            if act[m] is None:
                for sup in supports:
                    act2 = list(act)
                    act2[m] = sup
                    found = run(act2, upd, used, order, seen, edges, pos, partial)
                    if found:
                        return found
                return None
            out = list(partial)
            for a in act[m]:
                for t in bits(succ[s][a]):
                    key = (m, obs_of[t], a)
                    if key not in upd:
                        limit = min(used + 1, k)
                        for m2 in range(limit):
                            upd2 = dict(upd)
                            upd2[key] = m2
                            found = run(act, upd2, max(used, m2 + 1), list(order),
                                        set(seen), dict(edges), pos, ())
                            if found:
                                return found
                        return None
                    out.append((t, upd[key]))
            succs = tuple(dict.fromkeys(out))
            edges[(s, m)] = succs
            for node in succs:
                if node not in seen:
                    seen.add(node)
                    order.append(node)
            pos += 1
            partial = ()
        counter[0] += 1
        if _winning(order, edges, prio):
            return act, upd, used
        return None

    return run([None] * k, {}, 1, list(init), set(init), {}, 0, ())


def decide(pomdp: Pomdp, spec: PolicyClassSpec = PolicyClassSpec(), priorities=None,
           prefilter: bool = True) -> OracleResult:
    if (pomdp.n_states > MAX_STATES or pomdp.n_actions > MAX_ACTIONS
            or pomdp.n_obs > MAX_OBS or spec.memory > MAX_MEMORY):
        raise OracleCapExceeded(
            f"oracle caps: |S|<={MAX_STATES}, |A|<={MAX_ACTIONS}, |Z|<={MAX_OBS}, k<={MAX_MEMORY}")
    prio = pomdp.priority if priorities is None else tuple(priorities)
    if prefilter and not mdp_almost_sure(pomdp, prio):
        return OracleResult(NO)
    supports = _supports(pomdp.n_actions, spec.randomized)
    counter = [0]
    for k in range(1, spec.memory + 1):
        found = _search(pomdp, prio, k, supports, counter)
        if found:
            act, upd, used = found
            policy = _as_policy(pomdp, act, upd, used)
            if not check(pomdp, policy, prio).verdict:
                raise AssertionError("oracle witness failed verification")
            return OracleResult(YES, policy, counter[0])
    return OracleResult(NO, None, counter[0])


def _as_policy(pomdp: Pomdp, act, upd, used) -> FiniteMemoryPolicy:
    actions = tuple(act[m] if act[m] is not None else (0,) for m in range(used))
    update = {}
    for key, m2 in upd.items():
        update[key] = (m2,)
    return FiniteMemoryPolicy(tuple(f"m{i}" for i in range(used)), 0, actions, update)
