"""Finite-memory controllers: extraction from solutions and ``.qpol`` files.

Grammar::

    QPOL v1
    mem: <name> [Y=<s,s,..> B=<s,..> L=<k|->]   # one line per memory, in order
    init: <name>
    act: <memory> <action> [<action> ...]        # uniform over the listed actions
    upd: <memory> <obs> <action> <memory> [...]  # uniform over the listed memories

Memory updates are deterministic whenever one successor is listed.
"""
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .ingest import ParseError, SemanticError, tokenize, split_keyword, check_ident
from .model import Pomdp, bits, to_mask

QPOL_HEADER = "QPOL v1"


@dataclass(frozen=True)
class FiniteMemoryPolicy:
    names: Tuple[str, ...]
    initial: int
    actions: Tuple[Tuple[int, ...], ...]                  # per memory
    update: Dict[Tuple[int, int, int], Tuple[int, ...]]   # (m, obs, a) -> memories
    info: Tuple[Optional[Tuple[int, int, Optional[int]]], ...] = field(default=())

    @property
    def n_memories(self) -> int:
        return len(self.names)

    @property
    def deterministic_update(self) -> bool:
        return all(len(v) == 1 for v in self.update.values())

    def next_memories(self, m: int, obs: int, a: int) -> Tuple[int, ...]:
        return self.update[(m, obs, a)]

    def replay(self, pomdp: Pomdp, observations, actions) -> List[int]:
        """Memory sequence along an observation/action history (first update only)."""
        m = self.initial
        seq = [m]
        for z, a in zip(observations[1:], actions):
            m = self.update[(m, z, a)][0]
            seq.append(m)
        return seq


class ContractError(RuntimeError):
    pass


def _reachable(initial, acts_of, succ_of):
    order = [initial]
    seen = {initial}
    queue = deque(order)
    while queue:
        m = queue.popleft()
        for a in acts_of(m):
            for _, nxt in succ_of(m, a):
                for m2 in nxt:
                    if m2 not in seen:
                        seen.add(m2)
                        order.append(m2)
                        queue.append(m2)
    return order


def _from_choice(prod, solution, choose) -> FiniteMemoryPolicy:
    assignment = solution.assignment

    def succ_of(m, a):
        return [(br.obs, choose(m, a, j, opts))
                for j, (br, opts) in enumerate(zip(prod.branches[m][a], assignment[m][a]))]

    order = _reachable(prod.initial, lambda m: sorted(assignment[m]), succ_of)
    local = {m: i for i, m in enumerate(order)}
    actions = []
    update = {}
    for m in order:
        acts = tuple(sorted(assignment[m]))
        actions.append(acts)
        for a in acts:
            for z, nxt in succ_of(m, a):
                update[(local[m], z, a)] = tuple(local[o] for o in nxt)
    info = tuple((prod.memories[m].y, prod.memories[m].b, prod.memories[m].level) for m in order)
    return FiniteMemoryPolicy(tuple(f"m{i}" for i in range(len(order))), 0,
                              tuple(actions), update, info)


def memory_distances(prod, solution) -> Dict[int, int]:
    """Memory-graph distance to a memory holding recurrence-core states."""
    preds: Dict[int, set] = {}
    for m, acts in solution.assignment.items():
        for opts in acts.values():
            for live in opts:
                for o in live:
                    preds.setdefault(o, set()).add(m)
    dist = {m: 0 for m in solution.core}
    queue = deque(sorted(dist))
    while queue:
        m = queue.popleft()
        for p in sorted(preds.get(m, ())):
            if p not in dist:
                dist[p] = dist[m] + 1
                queue.append(p)
    return dist


def extract(solution, prod, prefer_deterministic: bool = True) -> FiniteMemoryPolicy:
    """Witness controller induced by an AlmostSure solution.

    A deterministic memory update (the option closest to a recurrence core
    per branch) is tried first and kept if it certifies; otherwise every
    allowed option stays and the update randomizes uniformly.
    """
    if not solution.almost_sure:
        raise ContractError("cannot extract a policy from a NotFoundInClass solution")
    randomized = _from_choice(prod, solution, lambda m, a, j, opts: opts)
    if not prefer_deterministic or randomized.deterministic_update:
        return randomized
    from .verify import check
    dist = memory_distances(prod, solution)
    far = len(dist) + 1

    def nearest(m, a, j, opts):
        return (min(opts, key=lambda o: (dist.get(o, far), o)),)

    det = _from_choice(prod, solution, nearest)
    if check(prod.pomdp, det).verdict:
        return det
    return randomized


# -- serialization ------------------------------------------------------------

def _fmt_set(pomdp: Pomdp, mask: int) -> str:
    return ",".join(pomdp.state_names[s] for s in bits(mask))


def export(policy: FiniteMemoryPolicy, pomdp: Pomdp) -> str:
    out = [QPOL_HEADER]
    for i, name in enumerate(policy.names):
        line = f"mem: {name}"
        if policy.info and policy.info[i] is not None:
            y, b, level = policy.info[i]
            line += f" Y={_fmt_set(pomdp, y)} B={_fmt_set(pomdp, b)} L={'-' if level is None else level}"
        out.append(line)
    out.append(f"init: {policy.names[policy.initial]}")
    an, zn = pomdp.action_names, pomdp.obs_names
    for m, acts in enumerate(policy.actions):
        out.append(f"act: {policy.names[m]} " + " ".join(an[a] for a in acts))
    for (m, z, a) in sorted(policy.update):
        targets = " ".join(policy.names[o] for o in policy.update[(m, z, a)])
        out.append(f"upd: {policy.names[m]} {zn[z]} {an[a]} {targets}")
    return "\n".join(out) + "\n"


def import_policy(text: str, pomdp: Pomdp) -> FiniteMemoryPolicy:
    lines = list(tokenize(text))
    if not lines or " ".join(lines[0][1]) != QPOL_HEADER:
        raise ParseError(f"missing header {QPOL_HEADER!r}", lines[0][0] if lines else 1)
    names: List[str] = []
    info: List = []
    initial = None
    acts: Dict[int, Tuple[int, ...]] = {}
    update: Dict[Tuple[int, int, int], Tuple[int, ...]] = {}
    pending_upd = []
    pending_act = []

    def states_of(token, number):
        if not token:
            return 0
        try:
            return to_mask(pomdp.state_index[s] for s in token.split(","))
        except KeyError as exc:
            raise SemanticError(f"unknown state {exc.args[0]}", number)

    for number, tokens in lines[1:]:
        key, args = split_keyword(tokens, number)
        if key == "mem":
            if not args:
                raise ParseError("mem expects a name", number)
            name = check_ident(args[0], number)
            if name in names:
                raise SemanticError(f"duplicate memory {name}", number)
            names.append(name)
            meta = dict(tok.split("=", 1) for tok in args[1:] if "=" in tok)
            if len(meta) != len(args) - 1:
                raise ParseError("memory metadata must be KEY=VALUE", number)
            if meta:
                if set(meta) != {"Y", "B", "L"}:
                    raise ParseError("memory metadata needs Y, B and L", number)
                level = None if meta["L"] == "-" else int(meta["L"])
                info.append((states_of(meta["Y"], number), states_of(meta["B"], number), level))
            else:
                info.append(None)
        elif key == "init":
            if initial is not None or len(args) != 1:
                raise ParseError("init expects one memory (once)", number)
            initial = (number, args[0])
        elif key == "act":
            pending_act.append((number, args))
        elif key == "upd":
            pending_upd.append((number, args))
        else:
            raise ParseError(f"unknown directive {key!r}", number)
    m_idx = {n: i for i, n in enumerate(names)}

    def look(table, name, kind, number):
        if name not in table:
            raise SemanticError(f"unknown {kind} {name}", number)
        return table[name]

    if initial is None:
        raise ParseError("missing init line")
    init = look(m_idx, initial[1], "memory", initial[0])
    for number, args in pending_act:
        if len(args) < 2:
            raise ParseError("act expects: memory action ...", number)
        m = look(m_idx, args[0], "memory", number)
        if m in acts:
            raise SemanticError(f"duplicate act line for {args[0]}", number)
        acts[m] = tuple(sorted({look(pomdp.action_index, a, "action", number) for a in args[1:]}))
    for number, args in pending_upd:
        if len(args) < 4:
            raise ParseError("upd expects: memory obs action memory ...", number)
        m = look(m_idx, args[0], "memory", number)
        z = look(pomdp.obs_index, args[1], "observation", number)
        a = look(pomdp.action_index, args[2], "action", number)
        if (m, z, a) in update:
            raise SemanticError("duplicate upd line", number)
        update[(m, z, a)] = tuple(look(m_idx, o, "memory", number) for o in args[3:])
    for i, name in enumerate(names):
        if i not in acts:
            raise SemanticError(f"memory {name} has no act line")
    keep_info = tuple(info) if any(x is not None for x in info) else ()
    return FiniteMemoryPolicy(tuple(names), init, tuple(acts[i] for i in range(len(names))),
                              update, keep_info)


def load_policy(path, pomdp: Pomdp) -> FiniteMemoryPolicy:
    with open(path, encoding="utf-8") as fh:
        return import_policy(fh.read(), pomdp)
