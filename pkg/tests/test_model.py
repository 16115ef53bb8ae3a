from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qpomdp.bench import classic, tiny
from qpomdp.bench.corpus import random_pomdp, reweight
from qpomdp.model import (ModelError, ResourceLimitError, Trace, belief_update,
                          max_observation_size, post_mask, reachable_belief_supports,
                          simple_pomdp, split_by_observation, to_mask, validate)


def test_validate_trivial_model():
    assert validate(tiny.single_state()) == []


def test_validate_reports_row_sum():
    m = simple_pomdp(["s0"], ["a0"], ["z0"], {"s0": "z0"},
                     {("s0", "a0"): {"s0": 0.9}}, "s0", {"s0": 2})
    problems = validate(m)
    assert len(problems) == 1
    assert "row-sum" in problems[0] and "(s0,a0)" in problems[0]


def test_negative_priority_rejected_at_construction():
    with pytest.raises(ModelError):
        simple_pomdp(["s0"], ["a0"], ["z0"], {"s0": "z0"},
                     {("s0", "a0"): {"s0": 1}}, "s0", {"s0": -1})


def test_validate_unused_observation_and_missing_row():
    m = simple_pomdp(["s0"], ["a0", "a1"], ["z0", "z1"], {"s0": "z0"},
                     {("s0", "a0"): {"s0": 1}}, "s0", {"s0": 2})
    problems = validate(m)
    assert any("missing transition" in p for p in problems)
    assert any("z1 has no state" in p for p in problems)


def test_belief_update_deterministic_step():
    m = tiny.trap()
    g = m.state_index["g"]
    assert belief_update(m, {g}, 0, m.obs_of[g]) == {g}


def test_belief_update_straddle(straddle):
    assert belief_update(straddle, {0, 1}, 0, 0) == {0, 1}


def test_belief_update_impossible_observation(trap):
    # from i the observation zi can never be seen again
    assert belief_update(trap, {0}, 0, trap.obs_index["zi"]) == frozenset()


def test_cheese_restart_split():
    m = classic.cheese("small", "easy")
    goal = m.priority.index(2)
    row = m.transitions[goal][0]
    restart = {m.state_names[t]: p for t, p in row.items()}
    assert restart == {"0": Fraction(1, 3), "2": Fraction(1, 3), "4": Fraction(1, 3)}
    zero = m.state_index["0"]
    # state 0 has an observation of its own: the update lands on a singleton
    assert belief_update(m, {goal}, 0, m.obs_of[zero]) == {zero}


def test_reachable_supports_small_cases(straddle):
    assert reachable_belief_supports(tiny.single_state()) == {frozenset({0})}
    assert reachable_belief_supports(straddle) == {frozenset({0, 1})}


def test_grid4_supports_bounded():
    m = classic.grid(4)
    supports = reachable_belief_supports(m)
    assert max(len(y) for y in supports) == 2
    counts = Counter(m.obs_of)
    assert max_observation_size(m) == max(counts.values()) == 22  # frozen golden value


def test_support_cap_is_an_error():
    m = classic.grid(4)
    with pytest.raises(ResourceLimitError):
        reachable_belief_supports(m, cap=3)


def test_max_observation_size():
    assert max_observation_size(tiny.trap()) == 2
    assert max_observation_size(tiny.straddle()) == 2
    distinct = simple_pomdp(["a", "b"], ["x"], ["za", "zb"], {"a": "za", "b": "zb"},
                            {("a", "x"): {"b": 1}, ("b", "x"): {"a": 1}}, "a", {"a": 1, "b": 2})
    assert max_observation_size(distinct) == 1


def test_trace_consistency(straddle):
    assert Trace((1, 1, 0), (0, 0)).is_consistent(straddle)
    assert not Trace((0, 1), (0,)).is_consistent(straddle)
    assert Trace((1, 0), (0,)).observations(straddle) == (0, 0)


seeds = st.integers(0, 10_000)


@settings(max_examples=60, deadline=None)
@given(seeds, st.data())
def test_belief_update_monotone_and_partition(seed, data):
    m = random_pomdp(seed)
    y2 = data.draw(st.integers(1, (1 << m.n_states) - 1))
    y1 = y2 & data.draw(st.integers(0, (1 << m.n_states) - 1))
    a = data.draw(st.integers(0, m.n_actions - 1))
    for z in range(m.n_obs):
        small = belief_update(m, [s for s in range(m.n_states) if y1 >> s & 1], a, z)
        big = belief_update(m, [s for s in range(m.n_states) if y2 >> s & 1], a, z)
        assert small <= big
    parts = split_by_observation(m, post_mask(m, y2, a))
    union = 0
    for _, part in parts:
        assert union & part == 0
        union |= part
    assert union == post_mask(m, y2, a)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_supports_bounded_and_support_only(seed):
    m = random_pomdp(seed)
    supports = reachable_belief_supports(m)
    assert all(len(y) <= max_observation_size(m) for y in supports)
    assert reachable_belief_supports(reweight(m, seed + 1)) == supports
    assert validate(m) == [] or any("has no state" in p for p in validate(m))


def test_to_mask_roundtrip():
    assert to_mask([0, 3]) == 0b1001
