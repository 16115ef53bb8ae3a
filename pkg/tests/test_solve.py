from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from qpomdp.bench import classic, tiny
from qpomdp.bench.corpus import random_pomdp, reweight
from qpomdp.model import ResourceLimitError, simple_pomdp, to_mask
from qpomdp.objective import normalize_priorities, template
from qpomdp.policy import extract
from qpomdp.product import build
from qpomdp.solve import (ALMOST_SURE, NOT_FOUND, almost_sure_win, check_maximality, safe_actions,
                          safe_core, solve)
from qpomdp.verify import check


def _core(model, level=2):
    prod = build(model)
    safe = safe_actions(prod, [True] * prod.n_memories)
    core, acts = safe_core(prod, safe, level)
    return prod, core, acts


def test_core_all_priority_two():
    prod, core, _ = _core(tiny.all_priority(2))
    locked = {m: mem.b for m, mem in enumerate(prod.memories) if mem.b}
    assert core == locked and core


def test_core_straddle(straddle):
    prod, core, acts = _core(straddle)
    (m, mask), = core.items()
    assert prod.memories[m].b == mask == to_mask([0])
    assert list(acts[m]) == [0]


def _never_two():
    # s1 (priority 2) leads into the priority-3 loop at s0 and never comes back
    return simple_pomdp(["s0", "s1"], ["a"], ["z"], {"s0": "z", "s1": "z"},
                        {("s0", "a"): {"s0": 1}, ("s1", "a"): {"s0": 1}},
                        "s1", {"s0": 3, "s1": 2})


def test_core_empty_without_recurrent_even_visit():
    model = _never_two()
    _, core, _ = _core(model)
    assert core == {}
    # brute force: no nonempty closed state set visits priority 2 recurrently
    succ = model.succ_mask
    for r in (1, 2):
        for c in combinations(range(2), r):
            mask = to_mask(c)
            closed = all(succ[s][0] & ~mask == 0 for s in c)
            recurrent_two = [s for s in c if model.priority[s] == 2
                             and any(succ[t][0] >> s & 1 for t in c)]
            assert not (closed and recurrent_two)


def test_single_state_locks_immediately():
    r = solve(tiny.single_state(2))
    assert r.verdict == ALMOST_SURE
    assert r.policy.n_memories == 2  # pre-lock and locked
    assert r.certificate.verdict


def test_trap_not_found(trap):
    assert solve(trap).verdict == NOT_FOUND


def test_all_priority_one_not_found():
    assert solve(tiny.all_priority(1)).verdict == NOT_FOUND
    assert solve(tiny.single_state(1)).verdict == NOT_FOUND


def test_straddle_direct_witness(straddle):
    prod = build(straddle)
    sol = almost_sure_win(prod)
    assert sol.almost_sure
    pol = extract(sol, prod)
    assert pol.actions == ((0,), (0,))
    assert pol.update == {(0, 0, 0): (1,), (1, 0, 0): (1,)}
    assert [prod.memories[i].b for i in range(2)] == [0, to_mask([0])]
    cert = check(straddle, pol)
    assert cert.verdict and cert.components == [(((0, 1),), 2)]


def test_straddle_pipeline(straddle):
    r = solve(straddle)
    assert r.verdict == ALMOST_SURE and r.reduction == "sink"
    assert r.certificate.verdict


def test_grid4_certified():
    r = solve(classic.grid(4))
    assert r.verdict == ALMOST_SURE and r.certificate.verdict
    assert r.policy.n_memories <= len(r.solution.winning) + 1
    assert r.policy.n_memories == 49  # golden


def test_guess_door_not_found():
    assert solve(tiny.guess_door()).verdict == NOT_FOUND


def test_cap_propagates():
    with pytest.raises(ResourceLimitError):
        solve(classic.grid(4), cap=5)


def test_objective_template_input():
    m = simple_pomdp(["u", "g"], ["a"], ["z"], {"u": "z", "g": "z"},
                     {("u", "a"): {"u": 0.5, "g": 0.5}, ("g", "a"): {"u": 1}},
                     "u", {"u": 0, "g": 0}, {"g": "T"})
    assert solve(m, template("recurrence", [{"T"}])).verdict == ALMOST_SURE
    assert solve(m, template("safety", [{"_"}], alphabet=("T", "_"))).verdict == NOT_FOUND
    with pytest.raises(TypeError):
        solve(m, "recurrence")


def test_determinism():
    a, b = solve(classic.cheese("small", "hard")), solve(classic.cheese("small", "hard"))
    assert a.solution.assignment == b.solution.assignment
    assert a.policy == b.policy


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000))
def test_random_sound_and_maximal(seed):
    m = random_pomdp(seed, priorities=(1, 2, 3, 4))
    r = solve(m)
    if r.verdict == ALMOST_SURE:
        assert r.certificate.verdict
        assert r.solution.winning and 0 in r.solution.winning
    assert check_maximality(r.product, r.solution)
    assert solve(reweight(m, seed)).verdict == r.verdict


def test_normalized_priorities_do_not_change_verdict():
    for seed in range(40):
        m = random_pomdp(seed, priorities=(3, 4, 7))
        assert solve(m).verdict == solve(normalize_priorities(m)).verdict
