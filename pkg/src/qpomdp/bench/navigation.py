"""Office hallways and grid mazes with labelled areas A-D.

Cells are (x, y) with y growing northwards.  Both families label the four
highlighted areas with the symbols ``A``..``D`` (``_`` elsewhere) so that
objective automata can be composed with them.
"""
from fractions import Fraction

from ..model import Pomdp, simple_pomdp

HEADINGS = "NESW"
_STEP = {"N": (0, 1), "E": (1, 0), "S": (0, -1), "W": (-1, 0)}
SUCCESS = Fraction(4, 5)


def _hallway_layout(which: int):
    if which == 1:
        cells = {(x, 1) for x in range(11)}
        areas = {(2, 0): "A", (4, 0): "B", (6, 0): "C", (8, 0): "D"}
        plus = [(x, 1) for x in (0, 3, 5, 7, 10)]
    elif which == 2:
        cells = {(x, y) for x in range(2, 7) for y in range(1, 6)}
        cells -= {(x, y) for x in (3, 5) for y in range(2, 5)}
        areas = {(1, 4): "A", (7, 4): "B", (1, 2): "C", (7, 2): "D"}
        plus = [(x, y) for y in (5, 3, 1) for x in (2, 6)]
    else:
        raise ValueError("hallway variant must be 1 or 2")
    cells |= set(areas)
    return cells, areas, plus


def _turn(h: str, by: int) -> str:
    return HEADINGS[(HEADINGS.index(h) + by) % 4]


def hallway(which: int = 1) -> Pomdp:
    """Agent with a heading; sees only which adjacent sides are walls.

    Actions forward / turn-left / turn-right succeed with probability 0.8 and
    otherwise leave the state unchanged; a blocked forward move never changes
    the state.  A start state spreads uniformly over the ``+`` cells and all
    headings; an absorbing lose state completes the classic state space.
    """
    cells, areas, plus = _hallway_layout(which)
    order = sorted(cells, key=lambda c: (-c[1], c[0]))
    name = {(c, h): f"x{c[0]}y{c[1]}{h}" for c in order for h in HEADINGS}
    states = ["start"] + [name[(c, h)] for c in order for h in HEADINGS] + ["lose"]

    def free(c, h):
        dx, dy = _STEP[h]
        return (c[0] + dx, c[1] + dy) in cells

    obs_of = {"start": "start", "lose": "lose"}
    for c in order:
        for h in HEADINGS:
            # wall signature relative to the heading: forward, left, right, back
            sig = "".join("1" if not free(c, d) else "0"
                          for d in (h, _turn(h, -1), _turn(h, 1), _turn(h, 2)))
            obs_of[name[(c, h)]] = "w" + sig
    observations = ["start"] + sorted({z for s, z in obs_of.items() if s not in ("start", "lose")}) + ["lose"]
    trans = {}
    first = {name[(c, h)]: Fraction(1, 4 * len(plus)) for c in plus for h in HEADINGS}
    for a in ("forward", "left", "right"):
        trans[("start", a)] = dict(first)
        trans[("lose", a)] = {"lose": Fraction(1)}
    for c in order:
        for h in HEADINGS:
            s = name[(c, h)]
            dx, dy = _STEP[h]
            ahead = (c[0] + dx, c[1] + dy)
            trans[(s, "forward")] = ({name[(ahead, h)]: SUCCESS, s: 1 - SUCCESS}
                                     if ahead in cells else {s: Fraction(1)})
            trans[(s, "left")] = {name[(c, _turn(h, -1))]: SUCCESS, s: 1 - SUCCESS}
            trans[(s, "right")] = {name[(c, _turn(h, 1))]: SUCCESS, s: 1 - SUCCESS}
    labels = {name[(c, h)]: areas[c] for c in areas for h in HEADINGS}
    return simple_pomdp(states, ["forward", "left", "right"], observations, obs_of, trans,
                        "start", {s: 2 for s in states}, labels)


# -- grid mazes ---------------------------------------------------------------

def _rect(x0, y0, x1, y1):
    """Cells covered by the rectangle with corners (x0, y0) and (x1, y1)."""
    return {(x, y) for x in range(min(x0, x1), max(x0, x1)) for y in range(min(y0, y1), max(y0, y1))}


MAZES = {
    "A": dict(size=(10, 10),
              walls=_rect(2, 9, 3, 3) | _rect(3, 3, 7, 4) | _rect(7, 3, 8, 9),
              areas={"A": _rect(0, 8, 2, 9), "B": _rect(8, 8, 10, 9),
                     "C": _rect(3, 4, 8, 5), "D": _rect(0, 0, 10, 1)},
              plus=[(4, 6), (6, 6), (4, 8), (6, 8)]),
    "B": dict(size=(10, 10),
              walls=_rect(0, 1, 4, 3) | _rect(7, 1, 10, 2) | _rect(7, 1, 8, 7) | _rect(3, 6, 7, 7),
              areas={"A": _rect(8, 2, 10, 3), "B": _rect(4, 9, 6, 10),
                     "C": _rect(3, 5, 7, 6), "D": _rect(0, 0, 10, 1)},
              plus=[(8, 3), (9, 3)]),
    "C": dict(size=(9, 7),
              walls=_rect(7, 5, 8, 7) | _rect(8, 6, 9, 7) | _rect(7, 3, 8, 4)
              | _rect(7, 0, 8, 2) | _rect(8, 0, 9, 1),
              areas={"A": _rect(0, 0, 7, 1) | _rect(0, 6, 7, 7), "B": _rect(7, 4, 8, 5),
                     "C": _rect(7, 2, 8, 3), "D": _rect(8, 1, 9, 6)},
              plus=[(0, 2), (0, 3), (0, 4), (1, 3)]),
}


def maze(which: str = "A") -> Pomdp:
    """Noise-free compass moves; only the labelled areas are observable.

    The unique initial state moves uniformly to the ``+`` cells under every
    action; bumping into a wall or the border leaves the robot in place.
    """
    spec = MAZES[which]
    width, height = spec["size"]
    cells = {(x, y) for x in range(width) for y in range(height)} - spec["walls"]
    area_of = {}
    for letter, region in spec["areas"].items():
        for c in region:
            if c in cells:
                area_of[c] = letter
    order = sorted(cells, key=lambda c: (-c[1], c[0]))
    name = {c: f"x{c[0]}y{c[1]}" for c in order}
    states = ["init"] + [name[c] for c in order]
    first = {name[c]: Fraction(1, len(spec["plus"])) for c in spec["plus"]}
    trans = {}
    for a, (dx, dy) in _STEP.items():
        trans[("init", a)] = dict(first)
        for c in order:
            nxt = (c[0] + dx, c[1] + dy)
            trans[(name[c], a)] = {name[nxt if nxt in cells else c]: Fraction(1)}
    obs_of = {"init": "start"}
    obs_of.update({name[c]: area_of.get(c, "none") for c in order})
    labels = {name[c]: letter for c, letter in area_of.items()}
    return simple_pomdp(states, list(_STEP), ["start", "A", "B", "C", "D", "none"], obs_of,
                        trans, "init", {s: 2 for s in states}, labels)
