"""RockSample variant where good rocks refuel the rover.

A state is (position, rock types, temporarily-bad rocks, fuel) plus one
initial state.  Every move costs one unit of fuel; bumping into the border
leaves the rover in place but still costs fuel.  Arriving on a good rock that
is not temporarily bad refuels to capacity and marks the rock temporarily
bad; once every good rock is temporarily bad, all marks except the one just
set are cleared (with a single good rock the mark is cleared at once).
"""
from fractions import Fraction
from itertools import product as cartesian

from ..model import Pomdp

SIZE = 4
START = (0, 2)
ROCKS = {2: ((1, 2), (3, 0)), 3: ((1, 3), (0, 0), (2, 1))}
_MOVES = {"N": (0, 1), "S": (0, -1), "E": (1, 0), "W": (-1, 0)}


def _arrive(rocks, pos, types, temp, fuel, capacity):
    """(temp, fuel) after arriving at ``pos`` with ``fuel`` left."""
    if pos in rocks:
        i = rocks.index(pos)
        if types[i] and not temp[i]:
            temp = list(temp)
            temp[i] = True
            if all(t for g, t in zip(types, temp) if g):
                temp = [j == i and sum(types) > 1 for j in range(len(rocks))]
            return tuple(temp), capacity
    return temp, fuel


def rocksample(rocks: int = 2, capacity: int = 3) -> Pomdp:
    layout = ROCKS[rocks]
    k = len(layout)
    positions = [(x, y) for y in range(SIZE) for x in range(SIZE)]
    bools = list(cartesian((False, True), repeat=k))
    keys = [(p, ty, tm, f) for p in positions for ty in bools for tm in bools
            for f in range(capacity + 1)]
    index = {key: i + 1 for i, key in enumerate(keys)}

    def label(key):
        (x, y), ty, tm, f = key
        g = "".join("G" if b else "B" for b in ty)
        t = "".join("T" if b else "n" for b in tm)
        return f"x{x}y{y}_{g}_{t}_f{f}"

    names = ["init"] + [label(key) for key in keys]
    obs_names = ("init", "good", "bad", "other")
    obs_of = [0] * len(names)
    priority = [2] * len(names)
    # observation and priority of a state are those of arriving in it
    for key in keys:
        pos, ty, tm, f = key
        if f == 0:
            obs, pri = "other", 1
        elif pos in layout:
            i = layout.index(pos)
            # a rock just used for refuelling is marked (or was reset) and fuel is full
            sampled_good = ty[i] and f == capacity
            obs, pri = ("good", 2) if sampled_good else ("bad", 1)
        else:
            obs, pri = "other", 2
        obs_of[index[key]] = obs_names.index(obs)
        priority[index[key]] = pri
    transitions = [None] * len(names)
    starts = [ty for ty in bools if any(ty)]
    no_temp = tuple(False for _ in range(k))
    first = {index[(START, ty, no_temp, capacity)]: Fraction(1, len(starts)) for ty in starts}
    transitions[0] = tuple(dict(first) for _ in _MOVES)
    for key in keys:
        (x, y), ty, tm, f = key
        row = []
        for dx, dy in _MOVES.values():
            if f == 0:
                row.append({index[key]: Fraction(1)})
                continue
            nx, ny = x + dx, y + dy
            pos = (nx, ny) if 0 <= nx < SIZE and 0 <= ny < SIZE else (x, y)
            tm2, f2 = _arrive(layout, pos, ty, tm, f - 1, capacity)
            row.append({index[(pos, ty, tm2, f2)]: Fraction(1)})
        transitions[index[key]] = tuple(row)
    return Pomdp(tuple(names), tuple(_MOVES), obs_names, tuple(transitions), tuple(obs_of),
                 {0: Fraction(1)}, tuple(priority))
