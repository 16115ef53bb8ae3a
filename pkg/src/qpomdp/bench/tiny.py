"""Hand-sized instances used throughout the tests and demos."""
from fractions import Fraction

from ..model import simple_pomdp

HALF = Fraction(1, 2)
ONE = Fraction(1)


def single_state(priority=2):
    return simple_pomdp(["s0"], ["a0"], ["z0"], {"s0": "z0"},
                        {("s0", "a0"): {"s0": ONE}}, "s0", {"s0": priority})


def straddle():
    """x is absorbing (priority 2); y flips a coin between x and y (priority 1).

    Both states look the same and the game starts uncertain between them.
    """
    return simple_pomdp(
        ["x", "y"], ["a"], ["z0"], {"x": "z0", "y": "z0"},
        {("x", "a"): {"x": ONE}, ("y", "a"): {"x": HALF, "y": HALF}},
        {"x": HALF, "y": HALF}, {"x": 2, "y": 1})


def trap():
    """A coin decides between an absorbing good and an absorbing bad state."""
    return simple_pomdp(
        ["i", "g", "b"], ["a"], ["zi", "z"], {"i": "zi", "g": "z", "b": "z"},
        {("i", "a"): {"g": HALF, "b": HALF}, ("g", "a"): {"g": ONE}, ("b", "a"): {"b": ONE}},
        "i", {"i": 1, "g": 2, "b": 1})


def all_priority(p, n=3):
    names = [f"s{i}" for i in range(n)]
    trans = {(s, "a"): {names[(i + 1) % n]: ONE} for i, s in enumerate(names)}
    trans.update({(s, "b"): {s: ONE} for s in names})
    return simple_pomdp(names, ["a", "b"], ["z"], {s: "z" for s in names}, trans,
                        "s0", {s: p for s in names})


def guess_door():
    """Two hidden worlds; the right action differs per world and nothing
    distinguishes them, so no observation-based policy wins surely."""
    return simple_pomdp(
        ["i", "l", "r", "win", "lose"], ["left", "right"], ["zi", "z", "zw", "zl"],
        {"i": "zi", "l": "z", "r": "z", "win": "zw", "lose": "zl"},
        {("i", "left"): {"l": HALF, "r": HALF}, ("i", "right"): {"l": HALF, "r": HALF},
         ("l", "left"): {"win": ONE}, ("l", "right"): {"lose": ONE},
         ("r", "left"): {"lose": ONE}, ("r", "right"): {"win": ONE},
         ("win", "left"): {"win": ONE}, ("win", "right"): {"win": ONE},
         ("lose", "left"): {"lose": ONE}, ("lose", "right"): {"lose": ONE}},
        "i", {"i": 1, "l": 1, "r": 1, "win": 2, "lose": 1})
