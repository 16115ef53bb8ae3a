"""Space shuttle docking, cheese mazes and trap grids."""
from fractions import Fraction

from ..model import Pomdp, simple_pomdp

ONE = Fraction(1)


def _f(x: str) -> Fraction:
    return Fraction(x)


# -- space shuttle ------------------------------------------------------------

SHUTTLE_VARIANTS = {"small": 1, "medium": 2, "large": 3}


def shuttle(variant: str = "small") -> Pomdp:
    """Shuttle shuttling between a most-recently-visited (MRV) and a least-
    recently-visited (LRV) station; delivering at LRV swaps their roles.

    The small model has the classic eleven states; larger variants put more
    space cells between the stations (two extra states per cell).
    """
    cells = SHUTTLE_VARIANTS[variant]
    # The corridor from MRV to LRV: near-MRV, space cells, near-LRV.  Each
    # position has a heading toward MRV ("m") or toward LRV ("l").
    space = [("2", "5")] + [(str(11 + 2 * i), str(12 + 2 * i)) for i in range(cells - 1)]
    to_mrv = ["1"] + [m for m, _ in space] + ["3"]   # heading toward MRV, ordered MRV->LRV
    to_lrv = ["4"] + [l for _, l in space] + ["6"]   # heading toward LRV
    n_pos = len(to_mrv)
    states = [str(i) for i in range(11)] + [s for pair in space[1:] for s in pair]
    trans = {}

    def put(s, a, dist):
        trans[(s, a)] = {t: _f(p) if isinstance(p, str) else p for t, p in dist.items()}

    for i in range(n_pos):
        fm, fl = to_mrv[i], to_lrv[i]
        # forward
        put(fm, "f", {"10": ONE} if i == 0 else {to_mrv[i - 1]: ONE})
        put(fl, "f", {"9": ONE} if i == n_pos - 1 else {to_lrv[i + 1]: ONE})
        # turn around
        put(fm, "a", {fl: ONE})
        put(fl, "a", {fm: ONE})
    # backup facing a station: succeeds 0.3, nothing 0.4, turns around 0.3
    put("1", "b", {to_mrv[1]: "0.3", "1": "0.4", "4": "0.3"})
    put("6", "b", {to_lrv[-2]: "0.3", "6": "0.4", "3": "0.3"})
    # backing into a station from the adjacent cell docks with probability 0.7
    put("4", "b", {"7": "0.7", "4": "0.3"})
    put("3", "b", {"8": "0.7", "3": "0.3"})
    # in space: 0.8 moves back, 0.1 nothing, 0.1 turns around and backs up
    for i in range(1, n_pos - 1):
        fm, fl = to_mrv[i], to_lrv[i]
        put(fm, "b", {to_mrv[i + 1]: "0.8", fm: "0.1", to_lrv[i - 1]: "0.1"})
        put(fl, "b", {to_lrv[i - 1]: "0.8", fl: "0.1", to_mrv[i + 1]: "0.1"})
    for a in "fab":
        put("8", a, {"7": ONE})   # delivery: LRV becomes the MRV we are docked at
        put("9", a, {"6": ONE})
        put("10", a, {"1": ONE})
    put("7", "f", {"4": ONE})
    put("0", "f", {"3": ONE})
    for a in "ab":
        put("7", a, {"7": ONE})
        put("0", a, {"0": ONE})
    obs = {"6": "o0", "1": "o1", "7": "o2", "0": "o4", "9": "o5", "10": "o5", "8": "o6"}
    obs_of = {s: obs.get(s, "o3") for s in states}
    priority = {s: 3 for s in states}
    priority.update({"8": 2, "9": 1, "10": 1})
    return simple_pomdp(states, ["f", "a", "b"], [f"o{i}" for i in range(7)], obs_of,
                        trans, "7", priority)


# -- cheese mazes -------------------------------------------------------------

_MOVES = {"n": (0, -1), "e": (1, 0), "s": (0, 1), "w": (-1, 0)}


def _maze_moves(cells):
    """Deterministic compass moves over a set of (x, y) cells (walls block)."""
    out = {}
    for (x, y) in cells:
        for a, (dx, dy) in _MOVES.items():
            nxt = (x + dx, y + dy)
            out[((x, y), a)] = nxt if nxt in cells else (x, y)
    return out


def _wall_obs(cells, cell):
    x, y = cell
    walls = "".join(d.upper() for d, (dx, dy) in _MOVES.items() if (x + dx, y + dy) not in cells)
    return {"NW": "o0", "NS": "o1", "N": "o2", "NE": "o3", "EW": "o4"}[walls]


def cheese(size: str = "small", variant: str = "easy") -> Pomdp:
    """Cheese maze: a top corridor with dead-end columns hanging below it.

    The bottom cell of one column holds the cheese (goal), the others poison.
    Reaching the goal restarts the game at a random cell of the restart set.
    """
    width = {"small": 5, "large": 11}[size]
    columns = list(range(0, width, 2))
    goal_x = columns[len(columns) // 2]
    top = [(x, 0) for x in range(width)]
    mid = [(x, 1) for x in columns]
    bottom = [(x, 2) for x in columns]
    cells = set(top + mid + bottom)
    # numbering as in the classic figure: top row, middle row, then poison, goal last
    poison = [c for c in bottom if c[0] != goal_x]
    goal = (goal_x, 2)
    order = top + mid + poison + [goal]
    name = {c: str(i) for i, c in enumerate(order)}
    restart_cells = {
        "easy": [(x, 0) for x in (0, goal_x, width - 1)] if size == "small"
        else [(x, 0) for x in (0, width // 2, width - 1)],
        "medium": top,
        "hard": top + mid,
    }[variant]
    restart = {name[c]: Fraction(1, len(restart_cells)) for c in restart_cells}
    moves = _maze_moves(cells)
    trans = {}
    for c in order:
        for a in _MOVES:
            trans[(name[c], a)] = dict(restart) if c == goal else {name[moves[(c, a)]]: ONE}
    obs_of = {}
    for c in order:
        if c == goal:
            obs_of[name[c]] = "o6"
        elif c in poison:
            obs_of[name[c]] = "o5"
        else:
            obs_of[name[c]] = _wall_obs(cells, c)
    priority = {name[c]: 3 for c in order}
    priority.update({name[c]: 1 for c in poison})
    priority[name[goal]] = 2
    start = name[(goal_x, 1)]
    return simple_pomdp([name[c] for c in order], list(_MOVES), [f"o{i}" for i in range(7)],
                        obs_of, trans, start, priority)


# -- trap grids ---------------------------------------------------------------

def grid_traps(n: int):
    """Trap cells (row, col) of the two hidden layouts."""
    first = {(1, c) for c in range(1, n)} | {(n - 1, 1)}
    second = {(r, 1) for r in range(1, n)} | {(1, n - 1)}
    return first, second


def grid(n: int = 4) -> Pomdp:
    """Two copies of an n-by-n grid with different hidden trap layouts.

    ``start`` moves to the top-left cell of either copy with probability 1/2;
    the goal (bottom-right) restarts the game in the top-left of the same copy.
    """
    if n < 3:
        raise ValueError("grid size must be at least 3")
    traps = grid_traps(n)
    states = ["start"] + [f"{i}_{r}_{c}" for i in range(2) for r in range(n) for c in range(n)]
    trans = {}
    obs_of = {"start": "o0"}
    priority = {"start": 3}
    for a in _MOVES:
        trans[("start", a)] = {"0_0_0": Fraction(1, 2), "1_0_0": Fraction(1, 2)}
    for i in range(2):
        for r in range(n):
            for c in range(n):
                s = f"{i}_{r}_{c}"
                goal = (r, c) == (n - 1, n - 1)
                for a, (dx, dy) in _MOVES.items():
                    if goal:
                        t = f"{i}_0_0"
                    else:
                        r2, c2 = r + dy, c + dx
                        if not (0 <= r2 < n and 0 <= c2 < n):
                            r2, c2 = r, c
                        t = f"{i}_{r2}_{c2}"
                    trans[(s, a)] = {t: ONE}
                if goal:
                    obs_of[s], priority[s] = "o3", 2
                elif (r, c) in traps[i]:
                    obs_of[s], priority[s] = "o2", 1
                else:
                    obs_of[s], priority[s] = "o1", 3
    return simple_pomdp(states, list(_MOVES), ["o0", "o1", "o2", "o3"], obs_of, trans,
                        "start", priority)
