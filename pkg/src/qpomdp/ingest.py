"""Line-oriented text format for POMDPs (``.qpomdp``) and observation
normalization.

Grammar (one directive per line, ``#`` starts a comment)::

    QPOMDP v1
    states: s0 s1 ...
    actions: a0 a1 ...
    observations: z0 z1 ...
    obs: <state> <observation>
    start: <state> <prob> [<state> <prob> ...]
    T: <state> <action> <state> <prob>
    priority: <state> <int>
    label: <state> <symbol>

Probabilities are integers, rationals ``p/q`` (kept exact) or decimals.
The writer emits the canonical form: sections in the order above and
every list in index order.
"""
from fractions import Fraction
import re
from typing import Dict, Iterable, List, Optional, Tuple

from .model import Pomdp, ModelError, validate, is_exact, row_sum_ok

IDENT = re.compile(r"^[A-Za-z0-9_]+$")
HEADER = "QPOMDP v1"


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line else message)


class SemanticError(ParseError):
    pass


def tokenize(text: str) -> Iterable[Tuple[int, List[str]]]:
    """Yield ``(line_number, tokens)`` for every non-blank line."""
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def split_keyword(tokens: List[str], number: int) -> Tuple[str, List[str]]:
    head = tokens[0]
    if head.endswith(":"):
        return head[:-1], tokens[1:]
    if ":" in head:
        key, rest = head.split(":", 1)
        return key, [rest] + tokens[1:]
    return head, tokens[1:]


def parse_prob(token: str, number: int):
    try:
        if "/" in token:
            value = Fraction(token)
        elif re.fullmatch(r"[0-9]+", token):
            value = Fraction(int(token))
        else:
            value = float(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad probability literal {token!r}", number)
    if value < 0 or value > 1:
        raise SemanticError(f"probability {token} outside [0,1]", number)
    return value


def format_prob(p) -> str:
    if isinstance(p, Fraction):
        return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"
    if isinstance(p, int):
        return str(p)
    return repr(float(p))


def check_ident(name: str, number: int) -> str:
    if not IDENT.match(name):
        raise ParseError(f"bad identifier {name!r}", number)
    return name


def _declare(names: List[str], number: int, kind: str) -> Dict[str, int]:
    index = {}
    for name in names:
        check_ident(name, number)
        if name in index:
            raise SemanticError(f"duplicate {kind} {name}", number)
        index[name] = len(index)
    return index


def parse(text: str) -> Pomdp:
    """Parse ``.qpomdp`` text; raises ParseError/SemanticError with line numbers."""
    lines = list(tokenize(text))
    if not lines or " ".join(lines[0][1]) != HEADER:
        raise ParseError(f"missing header {HEADER!r}", lines[0][0] if lines else 1)
    decl: Dict[str, Tuple[int, List[str]]] = {}
    body = []
    for number, tokens in lines[1:]:
        key, args = split_keyword(tokens, number)
        if key in ("states", "actions", "observations", "start"):
            if key in decl:
                raise SemanticError(f"duplicate section {key}", number)
            decl[key] = (number, args)
        elif key in ("obs", "T", "priority", "label"):
            body.append((number, key, args))
        else:
            raise ParseError(f"unknown directive {key!r}", number)
    for key in ("states", "actions", "observations"):
        if key not in decl:
            raise ParseError(f"missing section {key}")
    s_idx = _declare(decl["states"][1], decl["states"][0], "state")
    a_idx = _declare(decl["actions"][1], decl["actions"][0], "action")
    z_idx = _declare(decl["observations"][1], decl["observations"][0], "observation")
    if not s_idx or not a_idx:
        raise SemanticError("states and actions must be nonempty", decl["states"][0])

    def look(table, name, kind, number):
        if name not in table:
            raise SemanticError(f"unknown {kind} {name}", number)
        return table[name]

    n, k = len(s_idx), len(a_idx)
    trans = [[{} for _ in range(k)] for _ in range(n)]
    obs_of: List[Optional[int]] = [None] * n
    prio: List[Optional[int]] = [None] * n
    labels: Dict[int, str] = {}
    for number, key, args in body:
        if key == "T":
            if len(args) != 4:
                raise ParseError("T expects: state action state prob", number)
            s = look(s_idx, args[0], "state", number)
            a = look(a_idx, args[1], "action", number)
            t = look(s_idx, args[2], "state", number)
            if t in trans[s][a]:
                raise SemanticError(f"duplicate transition {args[0]} {args[1]} {args[2]}", number)
            p = parse_prob(args[3], number)
            if p > 0:
                trans[s][a][t] = p
        elif key == "obs":
            if len(args) != 2:
                raise ParseError("obs expects: state observation", number)
            s = look(s_idx, args[0], "state", number)
            if obs_of[s] is not None:
                raise SemanticError(f"duplicate observation for {args[0]}", number)
            obs_of[s] = look(z_idx, args[1], "observation", number)
        elif key == "priority":
            if len(args) != 2 or not re.fullmatch(r"-?[0-9]+", args[1]):
                raise ParseError("priority expects: state integer", number)
            s = look(s_idx, args[0], "state", number)
            if prio[s] is not None:
                raise SemanticError(f"duplicate priority for {args[0]}", number)
            prio[s] = int(args[1])
            if prio[s] < 0:
                raise SemanticError("priorities must be non-negative", number)
        elif key == "label":
            if len(args) != 2:
                raise ParseError("label expects: state symbol", number)
            s = look(s_idx, args[0], "state", number)
            if s in labels:
                raise SemanticError(f"duplicate label for {args[0]}", number)
            labels[s] = check_ident(args[1], number)
    names = list(s_idx)
    for s in range(n):
        if obs_of[s] is None:
            raise SemanticError(f"no observation for state {names[s]}")
        if prio[s] is None:
            raise SemanticError(f"no priority for state {names[s]}")
    if "start" in decl:
        number, args = decl["start"]
        if len(args) == 1:
            args = args + ["1"]
        if len(args) % 2:
            raise ParseError("start expects: state prob pairs", number)
        start = {}
        for i in range(0, len(args), 2):
            s = look(s_idx, args[i], "state", number)
            p = parse_prob(args[i + 1], number)
            if p > 0:
                start[s] = p
    else:
        start = {0: Fraction(1)}
    for s in range(n):
        for a in range(k):
            if not trans[s][a]:
                raise SemanticError(f"missing transition at ({names[s]},{list(a_idx)[a]})")
            if not row_sum_ok(trans[s][a]):
                raise SemanticError(f"row sum at ({names[s]},{list(a_idx)[a]}) is "
                                    f"{sum(float(p) for p in trans[s][a].values())}")
    try:
        pomdp = Pomdp(
            state_names=tuple(names),
            action_names=tuple(a_idx),
            obs_names=tuple(z_idx),
            transitions=tuple(tuple(row) for row in trans),
            obs_of=tuple(obs_of),
            start=start,
            priority=tuple(prio),
            labels=tuple(labels.get(s, "_") for s in range(n)) if labels else None,
        )
    except ModelError as exc:
        raise SemanticError(str(exc))
    problems = validate(pomdp)
    if problems:
        raise SemanticError(problems[0])
    return pomdp


def write(pomdp: Pomdp) -> str:
    """Canonical text form of ``pomdp``."""
    sn, an, zn = pomdp.state_names, pomdp.action_names, pomdp.obs_names
    out = [HEADER,
           "states: " + " ".join(sn),
           "actions: " + " ".join(an),
           "observations: " + " ".join(zn)]
    start = " ".join(f"{sn[s]} {format_prob(p)}" for s, p in sorted(pomdp.start.items()))
    out.append("start: " + start)
    for s in range(pomdp.n_states):
        out.append(f"obs: {sn[s]} {zn[pomdp.obs_of[s]]}")
    for s in range(pomdp.n_states):
        for a in range(pomdp.n_actions):
            for t, p in sorted(pomdp.transitions[s][a].items()):
                out.append(f"T: {sn[s]} {an[a]} {sn[t]} {format_prob(p)}")
    for s in range(pomdp.n_states):
        out.append(f"priority: {sn[s]} {pomdp.priority[s]}")
    if pomdp.labels is not None:
        for s, sym in enumerate(pomdp.labels):
            if sym != "_":
                out.append(f"label: {sn[s]} {sym}")
    return "\n".join(out) + "\n"


def load(path) -> Pomdp:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def save(pomdp: Pomdp, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write(pomdp))


def _mul(p, q):
    if is_exact(p) and is_exact(q):
        return Fraction(p) * Fraction(q)
    return float(p) * float(q)


def normalize_observations(pomdp: Pomdp, multi=None, probabilistic=None,
                           initial_obs: str = "init") -> Pomdp:
    """Reduce richer observation functions to a deterministic state map.

    ``multi`` maps each state index to a nonempty set of observation names:
    the new alphabet is the nonempty subsets, named ``{z1,z2}``-style with
    ``_`` separators (``z1_z2``) so names stay identifiers.

    ``probabilistic`` maps ``(state, action)`` to ``{obs_name: prob}`` for
    the observation emitted on *entering* the state under that action.  The
    state space becomes pairs ``(s, z)``, with
    ``T'((s,z),a)((s',z')) = T(s,a)(s') * O(s',a)(z')``.  Start states get a
    dedicated copy under ``initial_obs`` since no action precedes them.
    """
    if multi is None and probabilistic is None:
        return pomdp
    if multi is not None and probabilistic is not None:
        raise ValueError("give either multi or probabilistic observations")
    if multi is not None:
        subsets = []
        obs_of = []
        for s in range(pomdp.n_states):
            group = tuple(sorted(set(multi[s])))
            if not group:
                raise ValueError(f"state {pomdp.state_names[s]} has no observation")
            if group not in subsets:
                subsets.append(group)
            obs_of.append(subsets.index(group))
        return pomdp.replace(obs_names=tuple("_".join(g) for g in subsets),
                             obs_of=tuple(obs_of))

    z_names: List[str] = []
    for dist in probabilistic.values():
        if not row_sum_ok(dist):
            raise ValueError("observation distribution does not sum to 1")
        for z in dist:
            if z not in z_names:
                z_names.append(z)
    z_names.sort()
    if initial_obs in z_names:
        raise ValueError(f"initial observation name {initial_obs!r} already used")
    emits = {s: set() for s in range(pomdp.n_states)}
    for (s, a), dist in probabilistic.items():
        emits[s].update(z for z, p in dist.items() if p > 0)
    pairs = [(s, z) for s in range(pomdp.n_states) for z in z_names if z in emits[s]]
    starts = sorted(pomdp.start)
    index = {pair: i for i, pair in enumerate(pairs)}
    first_start = len(pairs)
    names = [f"{pomdp.state_names[s]}_{z}" for s, z in pairs]
    names += [f"{pomdp.state_names[s]}_{initial_obs}" for s in starts]
    all_obs = z_names + [initial_obs]
    z_of = [z_names.index(z) for _, z in pairs] + [len(z_names)] * len(starts)

    def row(s, a):
        out = {}
        for t, p in pomdp.transitions[s][a].items():
            for z, q in probabilistic[(t, a)].items():
                if q > 0:
                    out[index[(t, z)]] = _mul(p, q)
        return out

    table = [tuple(row(s, a) for a in range(pomdp.n_actions)) for s, _ in pairs]
    table += [tuple(row(s, a) for a in range(pomdp.n_actions)) for s in starts]
    sources = [s for s, _ in pairs] + starts
    return Pomdp(
        state_names=tuple(names),
        action_names=pomdp.action_names,
        obs_names=tuple(all_obs),
        transitions=tuple(table),
        obs_of=tuple(z_of),
        start={first_start + i: pomdp.start[s] for i, s in enumerate(starts)},
        priority=tuple(pomdp.priority[s] for s in sources),
        labels=None if pomdp.labels is None else tuple(pomdp.labels[s] for s in sources),
    )
