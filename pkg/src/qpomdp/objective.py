"""Objectives as deterministic parity automata over state labels.

The automaton reads the label of the state being *entered* and the product
state carries the priority of the automaton state after that read, so the
initial product state is ``(s0, delta(q0, label(s0)))``; the product can
instead read the label of the state being left.  The automaton
component is hidden: a product state is observed as its POMDP state.
"""
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as cartesian
from typing import Dict, List, Optional, Sequence, Tuple

from .ingest import ParseError, SemanticError, tokenize, split_keyword, check_ident
from .model import Pomdp, bits

DEFAULT_SYMBOL = "_"

KINDS = ("liveness", "safety", "reach_avoid", "sequencing", "coverage",
         "recurrence", "recurrence_avoid")


@dataclass(frozen=True)
class ParityAutomaton:
    """Deterministic parity automaton with total transition table."""

    state_names: Tuple[str, ...]
    alphabet: Tuple[str, ...]
    delta: Tuple[Tuple[int, ...], ...]  # delta[q][symbol index]
    initial: int
    priority: Tuple[int, ...]

    def __post_init__(self):
        if len(self.delta) != len(self.state_names):
            raise ValueError("delta must cover every automaton state")
        for row in self.delta:
            if len(row) != len(self.alphabet):
                raise ValueError("delta must be total over the alphabet")
        if any(p < 0 for p in self.priority):
            raise ValueError("priorities must be non-negative")

    @property
    def n_states(self) -> int:
        return len(self.state_names)

    def step(self, q: int, symbol: str) -> int:
        return self.delta[q][self.alphabet.index(symbol)]

    def run(self, word: Sequence[str]) -> List[int]:
        """Automaton states after reading each letter of ``word``."""
        q = self.initial
        out = []
        for sym in word:
            q = self.step(q, sym)
            out.append(q)
        return out

    def accepts_lasso(self, prefix: Sequence[str], loop: Sequence[str]) -> bool:
        """Acceptance of the ultimately periodic word ``prefix loop^omega``."""
        if not loop:
            raise ValueError("loop must be nonempty")
        q = self.initial
        for sym in prefix:
            q = self.step(q, sym)
        # iterate the loop until the state at the loop boundary repeats
        seen = {}
        boundary = []
        while q not in seen:
            seen[q] = len(boundary)
            boundary.append(q)
            for sym in loop:
                q = self.step(q, sym)
        prios = []
        q = boundary[seen[q]]
        start = q
        while True:
            for sym in loop:
                q = self.step(q, sym)
                prios.append(self.priority[q])
            if q == start:
                break
        return min(prios) % 2 == 0


def _build(names, alphabet, step, initial, priority) -> ParityAutomaton:
    index = {n: i for i, n in enumerate(names)}
    delta = tuple(tuple(index[step(q, sym)] for sym in alphabet) for q in names)
    return ParityAutomaton(tuple(str(n) for n in names), tuple(alphabet), delta,
                           index[initial], tuple(priority[q] for q in names))


def template(kind: str, regions: Sequence[Sequence[str]], avoid: Sequence[str] = (),
             alphabet: Optional[Sequence[str]] = None) -> ParityAutomaton:
    """Parity automaton for one of the standard robot-planning objectives.

    ``regions`` is an ordered list of symbol sets: the goal for liveness,
    the safe symbols for safety, the stages for reach_avoid/sequencing, the
    locations for coverage and the recurrently visited sets for the
    recurrence kinds.  ``avoid`` lists obstacle symbols (reach_avoid,
    sequencing and recurrence_avoid).
    """
    if kind not in KINDS:
        raise ValueError(f"unknown objective kind {kind!r}")
    regions = [frozenset(r) for r in regions]
    if not regions or any(not r for r in regions):
        raise ValueError("region sets must be nonempty")
    avoid = frozenset(avoid)
    if alphabet is None:
        symbols = set().union(*regions) | avoid | {DEFAULT_SYMBOL}
        alphabet = sorted(symbols)
    alphabet = tuple(alphabet)
    missing = (set().union(*regions) | avoid) - set(alphabet)
    if missing:
        raise ValueError(f"region symbols not in alphabet: {sorted(missing)}")

    if kind == "liveness":
        if len(regions) != 1:
            raise ValueError("liveness takes one goal set")
        goal = regions[0]
        return _build(["wait", "done"], alphabet,
                      lambda q, x: "done" if q == "done" or x in goal else "wait",
                      "wait", {"wait": 1, "done": 2})
    if kind == "safety":
        if len(regions) != 1:
            raise ValueError("safety takes one safe set")
        safe = regions[0]
        return _build(["safe", "fail"], alphabet,
                      lambda q, x: "fail" if q == "fail" or x not in safe else "safe",
                      "safe", {"safe": 2, "fail": 1})
    if kind in ("reach_avoid", "sequencing"):
        n = len(regions)
        names = [f"stage{i}" for i in range(n)] + ["done", "fail"]

        def step(q, x):
            if q in ("done", "fail"):
                return q
            i = int(q[5:])
            while i < n and x in regions[i]:
                i += 1
            if i == n:
                return "done"
            if x in avoid:
                return "fail"
            return f"stage{i}"

        prio = {q: 1 for q in names}
        prio["done"] = 2
        return _build(names, alphabet, step, "stage0", prio)
    if kind == "coverage":
        n = len(regions)
        subsets = [frozenset(c) for r in range(n + 1)
                   for c in combinations(range(n), r)]
        name = {c: "got" + ("".join(str(i) for i in sorted(c)) or "none") for c in subsets}
        full = frozenset(range(n))

        def step(q, x):
            c = next(k for k, v in name.items() if v == q)
            return name[c | {i for i in range(n) if x in regions[i]}]

        names = [name[c] for c in subsets]
        prio = {name[c]: 2 if c == full else 1 for c in subsets}
        return _build(names, alphabet, step, name[frozenset()], prio)
    # recurrence kinds: remember which sets were seen since the last
    # completed round; completing a round is the only good event
    n = len(regions)
    subsets = [frozenset(c) for r in range(n) for c in combinations(range(n), r)]
    name = {c: "seen" + ("".join(str(i) for i in sorted(c)) or "none") for c in subsets}
    full = frozenset(range(n))
    name[full] = "round"
    by_name = {v: k for k, v in name.items()}
    names = [name[c] for c in subsets] + ["round"]
    prio = {q: 3 for q in names}
    prio["round"] = 2
    if kind == "recurrence_avoid":
        names.append("bad")
        prio["bad"] = 1

    def step(q, x):
        if kind == "recurrence_avoid" and x in avoid:
            return "bad"
        seen = frozenset() if q in ("round", "bad") else by_name[q]
        return name[seen | {i for i in range(n) if x in regions[i]}]

    return _build(names, alphabet, step, name[frozenset()], prio)


def identity_automaton(alphabet: Sequence[str] = (DEFAULT_SYMBOL,), priority: int = 2):
    alphabet = tuple(alphabet)
    return ParityAutomaton(("q",), alphabet, ((0,) * len(alphabet),), 0, (priority,))


READS = ("entered", "left")


def product(pomdp: Pomdp, dpa: ParityAutomaton, labeling: Optional[Sequence[str]] = None,
            reads: str = "entered") -> Pomdp:
    """Synchronous product restricted to the reachable part of S x Q.

    With ``reads="entered"`` the automaton consumes the label of the state
    being entered, so the initial product state is ``(s0, delta(q0, l(s0)))``.
    With ``reads="left"`` it consumes the label of the state being left and
    starts in ``(s0, q0)``.  Both give the same acceptance; they differ in
    which product states are reachable.
    """
    if reads not in READS:
        raise ValueError(f"reads must be one of {READS}")
    entered = reads == "entered"
    labels = labeling if labeling is not None else pomdp.labels
    if labels is None:
        labels = (DEFAULT_SYMBOL,) * pomdp.n_states
    if len(labels) != pomdp.n_states:
        raise ValueError("labeling must be total over states")
    sym_index = {sym: i for i, sym in enumerate(dpa.alphabet)}
    try:
        lab = [sym_index[x] for x in labels]
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not in automaton alphabet")
    index: Dict[Tuple[int, int], int] = {}
    order: List[Tuple[int, int]] = []

    def visit(s, q):
        key = (s, q)
        if key not in index:
            index[key] = len(order)
            order.append(key)
            queue.append(key)
        return index[key]

    queue = deque()
    start = {}
    for s, p in sorted(pomdp.start.items()):
        start[visit(s, dpa.delta[dpa.initial][lab[s]] if entered else dpa.initial)] = p
    rows = []
    while queue:
        s, q = queue.popleft()
        row = []
        for a in range(pomdp.n_actions):
            dist = {}
            for t, p in sorted(pomdp.transitions[s][a].items()):
                dist[visit(t, dpa.delta[q][lab[t] if entered else lab[s]])] = p
            row.append(dist)
        rows.append(tuple(row))
    # observations of unreachable states only are dropped
    used = sorted({pomdp.obs_of[s] for s, _ in order})
    z_new = {z: i for i, z in enumerate(used)}
    return Pomdp(
        state_names=tuple(f"{pomdp.state_names[s]}_{dpa.state_names[q]}" for s, q in order),
        action_names=pomdp.action_names,
        obs_names=tuple(pomdp.obs_names[z] for z in used),
        transitions=tuple(rows),
        obs_of=tuple(z_new[pomdp.obs_of[s]] for s, _ in order),
        start=start,
        priority=tuple(dpa.priority[q] for _, q in order),
        labels=tuple(labels[s] for s, _ in order),
    )


def priority_map(values) -> Dict[int, int]:
    """Compacting map: runs of same parity merge, first run goes to 1 or 2."""
    mapping = {}
    current = None
    for v in sorted(set(values)):
        if current is None:
            current = 1 if v % 2 else 2
        elif v % 2 != mapping[prev] % 2:
            current += 1
        mapping[v] = current
        prev = v
    return mapping


def normalize_priorities(pomdp: Pomdp) -> Pomdp:
    mapping = priority_map(pomdp.priority)
    new = tuple(mapping[p] for p in pomdp.priority)
    if new == pomdp.priority:
        return pomdp
    return pomdp.replace(priority=new)


@dataclass(frozen=True)
class Reduction:
    """Outcome of the coBuchi reduction: ``kind`` is identity, sink or unsupported."""

    kind: str
    model: Pomdp

    @property
    def supported(self) -> bool:
        return self.kind != "unsupported"


SINK = "sink"


def _closed(pomdp: Pomdp, region: int) -> bool:
    for s in bits(region):
        for m in pomdp.succ_mask[s]:
            if m & ~region:
                return False
    return True


def reduce_to_cobuchi(pomdp: Pomdp) -> Reduction:
    """coBuchi form of a normalized model, when this toolkit can build it.

    Reach-type models (a closed accepting region of priority 2, every other
    state priority 1) get one absorbing priority-2 sink that every accepting
    state moves to.  Other models with priorities in {1, 2} are returned as
    they are; anything else is ``unsupported`` and solved as a parity game.
    """
    prios = pomdp.priority_set()
    if not prios <= {1, 2}:
        return Reduction("unsupported", pomdp)
    region = 0
    for s, p in enumerate(pomdp.priority):
        if p == 2:
            region |= 1 << s
    if prios == {1, 2} and _closed(pomdp, region):
        n = pomdp.n_states
        names = pomdp.state_names
        sink_name = SINK
        while sink_name in names:
            sink_name += "_"
        obs_name = SINK
        while obs_name in pomdp.obs_names:
            obs_name += "_"
        to_sink = {n: Fraction(1)}
        rows = []
        for s in range(n):
            if region >> s & 1:
                rows.append(tuple(dict(to_sink) for _ in range(pomdp.n_actions)))
            else:
                rows.append(pomdp.transitions[s])
        rows.append(tuple(dict(to_sink) for _ in range(pomdp.n_actions)))
        model = Pomdp(
            state_names=names + (sink_name,),
            action_names=pomdp.action_names,
            obs_names=pomdp.obs_names + (obs_name,),
            transitions=tuple(rows),
            obs_of=pomdp.obs_of + (pomdp.n_obs,),
            start=pomdp.start,
            priority=pomdp.priority + (2,),
            labels=None if pomdp.labels is None else pomdp.labels + (DEFAULT_SYMBOL,),
        )
        return Reduction("sink", model)
    return Reduction("identity", pomdp)


# -- .qobj files -------------------------------------------------------------

OBJ_HEADER = "OBJ v1"


@dataclass(frozen=True)
class ObjectiveSpec:
    """Either a template (kind + regions) or an explicit automaton."""

    kind: Optional[str] = None
    regions: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    avoid: Tuple[str, ...] = ()
    automaton: Optional[ParityAutomaton] = None

    def to_automaton(self, alphabet: Optional[Sequence[str]] = None) -> ParityAutomaton:
        if self.automaton is not None:
            return self.automaton
        sets = [symbols for _, symbols in self.regions]
        if alphabet is not None:
            alphabet = sorted(set(alphabet) | set().union(*map(set, sets)) | set(self.avoid))
        return template(self.kind, sets, self.avoid, alphabet)


def parse_objective(text: str) -> ObjectiveSpec:
    lines = list(tokenize(text))
    if not lines or " ".join(lines[0][1]) != OBJ_HEADER:
        raise ParseError(f"missing header {OBJ_HEADER!r}", lines[0][0] if lines else 1)
    kind = None
    regions = []
    avoid: Tuple[str, ...] = ()
    auto = {}
    deltas = []
    pris = []
    in_automaton = False
    for number, tokens in lines[1:]:
        if tokens == ["automaton"]:
            in_automaton = True
            continue
        key, args = split_keyword(tokens, number)
        if key == "kind":
            if kind is not None or len(args) != 1:
                raise ParseError("kind expects one name (once)", number)
            kind = args[0]
            if kind not in KINDS:
                raise SemanticError(f"unknown objective kind {kind}", number)
        elif key == "set":
            if len(args) < 2 or not args[0].endswith(":"):
                raise ParseError("set expects: set NAME: sym ...", number)
            name = check_ident(args[0][:-1], number)
            if any(name == n for n, _ in regions):
                raise SemanticError(f"duplicate set {name}", number)
            regions.append((name, tuple(check_ident(x, number) for x in args[1:])))
        elif key == "avoid":
            avoid = tuple(check_ident(x, number) for x in args)
        elif in_automaton and key in ("states", "alphabet", "initial"):
            if key in auto:
                raise SemanticError(f"duplicate {key}", number)
            auto[key] = (number, [check_ident(x, number) for x in args])
        elif in_automaton and key == "delta":
            if len(args) != 3:
                raise ParseError("delta expects: q sym q'", number)
            deltas.append((number, args))
        elif in_automaton and key == "pri":
            if len(args) != 2:
                raise ParseError("pri expects: q k", number)
            pris.append((number, args))
        else:
            raise ParseError(f"unknown directive {key!r}", number)
    if in_automaton:
        for key in ("states", "alphabet", "initial"):
            if key not in auto:
                raise ParseError(f"automaton section misses {key}")
        names = auto["states"][1]
        alphabet = auto["alphabet"][1]
        q_idx = {q: i for i, q in enumerate(names)}
        x_idx = {x: i for i, x in enumerate(alphabet)}
        table = [[None] * len(alphabet) for _ in names]
        for number, (q, x, q2) in deltas:
            for name, tab in ((q, q_idx), (x, x_idx), (q2, q_idx)):
                if name not in tab:
                    raise SemanticError(f"unknown automaton name {name}", number)
            if table[q_idx[q]][x_idx[x]] is not None:
                raise SemanticError(f"duplicate delta for {q} {x}", number)
            table[q_idx[q]][x_idx[x]] = q_idx[q2]
        prio = [None] * len(names)
        for number, (q, k) in pris:
            if q not in q_idx or not k.isdigit():
                raise SemanticError(f"bad priority line for {q}", number)
            prio[q_idx[q]] = int(k)
        if any(v is None for row in table for v in row) or None in prio:
            raise SemanticError("automaton transition/priority table is not total")
        init = auto["initial"][1]
        if len(init) != 1 or init[0] not in q_idx:
            raise SemanticError("bad initial automaton state", auto["initial"][0])
        dpa = ParityAutomaton(tuple(names), tuple(alphabet),
                              tuple(tuple(r) for r in table), q_idx[init[0]], tuple(prio))
        return ObjectiveSpec(automaton=dpa)
    if kind is None:
        raise ParseError("objective needs a kind or an automaton section")
    return ObjectiveSpec(kind=kind, regions=tuple(regions), avoid=avoid)


def write_objective(spec: ObjectiveSpec) -> str:
    out = [OBJ_HEADER]
    if spec.automaton is not None:
        dpa = spec.automaton
        out += ["automaton",
                "states: " + " ".join(dpa.state_names),
                "alphabet: " + " ".join(dpa.alphabet),
                "initial: " + dpa.state_names[dpa.initial]]
        for q, row in enumerate(dpa.delta):
            for i, q2 in enumerate(row):
                out.append(f"delta: {dpa.state_names[q]} {dpa.alphabet[i]} {dpa.state_names[q2]}")
        for q, p in enumerate(dpa.priority):
            out.append(f"pri: {dpa.state_names[q]} {p}")
    else:
        out.append(f"kind: {spec.kind}")
        for name, symbols in spec.regions:
            out.append(f"set {name}: " + " ".join(symbols))
        if spec.avoid:
            out.append("avoid: " + " ".join(spec.avoid))
    return "\n".join(out) + "\n"


def lasso_words(alphabet: Sequence[str], max_len: int):
    """All (prefix, loop) pairs with total length <= max_len and nonempty loop."""
    for total in range(1, max_len + 1):
        for loop_len in range(1, total + 1):
            for prefix in cartesian(alphabet, repeat=total - loop_len):
                for loop in cartesian(alphabet, repeat=loop_len):
                    yield prefix, loop
