"""Exact certification of finite-memory controllers, plus simulation.

Fixing a finite-memory policy turns the POMDP into a finite Markov chain;
almost-sure parity satisfaction then depends only on which bottom strongly
connected components are reachable and on their minimum priorities.
"""
from collections import Counter
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import Pomdp, bits

Node = Tuple[int, int]  # (state, memory)


class PolicyMismatch(ValueError):
    """The policy does not fit the model (unknown names or a missing update)."""


def strongly_connected_components(nodes: Sequence, successors) -> List[List]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index: Dict = {}
    low: Dict = {}
    on_stack = set()
    stack: List = []
    result: List[List] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        work = [(root, iter(successors(root)))]
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(successors(w))))
                    advanced = True
                    break
                if w in on_stack and index[w] < low[v]:
                    low[v] = index[w]
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
    return result


@dataclass
class InducedChain:
    nodes: List[Node]
    edges: Dict[Node, Tuple[Node, ...]]
    initial: Tuple[Node, ...]


def induced_chain(pomdp: Pomdp, policy) -> InducedChain:
    if not 0 <= policy.initial < policy.n_memories:
        raise PolicyMismatch("initial memory out of range")
    succ = pomdp.succ_mask
    obs_of = pomdp.obs_of
    init = tuple((s, policy.initial) for s in bits(pomdp.start_mask))
    edges: Dict[Node, Tuple[Node, ...]] = {}
    order: List[Node] = list(init)
    seen = set(init)
    i = 0
    while i < len(order):
        s, m = order[i]
        i += 1
        out = []
        for a in policy.actions[m]:
            if not 0 <= a < pomdp.n_actions:
                raise PolicyMismatch(f"unknown action index {a}")
            for t in bits(succ[s][a]):
                key = (m, obs_of[t], a)
                if key not in policy.update:
                    raise PolicyMismatch(
                        f"no memory update for memory {policy.names[m]}, observation "
                        f"{pomdp.obs_names[obs_of[t]]}, action {pomdp.action_names[a]}")
                for m2 in policy.update[key]:
                    node = (t, m2)
                    out.append(node)
                    if node not in seen:
                        seen.add(node)
                        order.append(node)
        edges[(s, m)] = tuple(dict.fromkeys(out))
    return InducedChain(order, edges, init)


@dataclass
class Certificate:
    verdict: bool
    components: List[Tuple[Tuple[Node, ...], int]]  # bottom SCC, min priority
    n_nodes: int = 0

    def to_text(self, pomdp: Optional[Pomdp] = None, policy=None) -> str:
        lines = [f"verdict: {'ALMOST-SURE' if self.verdict else 'REFUTED'}",
                 f"nodes: {self.n_nodes}"]
        for nodes, low in self.components:
            lines.append("component: " + " ".join(_node_name(n, pomdp, policy) for n in nodes)
                         + f" ; min={low}")
        return "\n".join(lines) + "\n"

    def to_csv(self, pomdp: Optional[Pomdp] = None, policy=None) -> str:
        rows = ["nodes,min_priority"]
        for nodes, low in self.components:
            rows.append(" ".join(_node_name(n, pomdp, policy) for n in nodes) + f",{low}")
        return "\n".join(rows) + "\n"


def _node_name(node: Node, pomdp, policy) -> str:
    s, m = node
    s_name = pomdp.state_names[s] if pomdp is not None else str(s)
    m_name = policy.names[m] if policy is not None else str(m)
    return f"{s_name}@{m_name}"


def check(pomdp: Pomdp, policy, priorities: Optional[Sequence[int]] = None) -> Certificate:
    """Decide almost-sure parity satisfaction of ``policy`` exactly."""
    prio = pomdp.priority if priorities is None else priorities
    chain = induced_chain(pomdp, policy)
    comps = strongly_connected_components(chain.nodes, lambda v: chain.edges[v])
    bottoms = []
    for comp in comps:
        members = set(comp)
        if all(w in members for v in comp for w in chain.edges[v]):
            nodes = tuple(sorted(comp))
            bottoms.append((nodes, min(prio[s] for s, _ in nodes)))
    bottoms.sort()
    verdict = all(low % 2 == 0 for _, low in bottoms)
    return Certificate(verdict, bottoms, len(chain.nodes))


# -- simulation ---------------------------------------------------------------

@dataclass
class SimulationStats:
    episodes: int
    steps: int
    tail_histograms: List[Counter]      # priorities seen in the second half of each episode
    final_states: List[int]
    lock_times: List[Optional[int]]     # first step with a nonempty recurrence claim

    def tail_min_counts(self) -> Counter:
        return Counter(min(h) for h in self.tail_histograms if h)

    def fraction_final_in(self, states) -> float:
        states = set(states)
        return sum(s in states for s in self.final_states) / self.episodes


def _sampler(dist: Dict[int, object]):
    keys = sorted(dist)
    weights = np.array([float(dist[k]) for k in keys])
    return keys, np.cumsum(weights / weights.sum())


def simulate(pomdp: Pomdp, policy, steps: int, episodes: int, seed: int) -> SimulationStats:
    """Monte Carlo runs under ``policy``; reproducible for a given seed.

    Uses numpy's PCG64 generator; episode ``i`` draws from the ``i``-th
    child of ``SeedSequence(seed)``.
    """
    if steps < 1 or episodes < 1:
        raise ValueError("steps and episodes must be >= 1")
    trans = {}
    start_keys, start_cdf = _sampler(pomdp.start)
    children = np.random.SeedSequence(seed).spawn(episodes)
    histos, finals, locks = [], [], []
    half = steps // 2
    for child in children:
        rng = np.random.Generator(np.random.PCG64(child))
        draws = rng.random(3 * steps + 1)
        k = 0
        s = start_keys[int(np.searchsorted(start_cdf, draws[k], side="right"))]
        k += 1
        m = policy.initial
        hist = Counter()
        lock = None
        for step in range(steps):
            acts = policy.actions[m]
            a = acts[min(int(draws[k] * len(acts)), len(acts) - 1)]
            k += 1
            key = (s, a)
            if key not in trans:
                trans[key] = _sampler(pomdp.transitions[s][a])
            keys, cdf = trans[key]
            t = keys[min(int(np.searchsorted(cdf, draws[k], side="right")), len(keys) - 1)]
            k += 1
            nxt = policy.update[(m, pomdp.obs_of[t], a)]
            m = nxt[min(int(draws[k] * len(nxt)), len(nxt) - 1)]
            k += 1
            s = t
            if lock is None and policy.info and policy.info[m] is not None and policy.info[m][1]:
                lock = step + 1
            if step >= half:
                hist[pomdp.priority[s]] += 1
        histos.append(hist)
        finals.append(s)
        locks.append(lock)
    return SimulationStats(episodes, steps, histos, finals, locks)
