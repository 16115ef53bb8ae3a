import pytest
from hypothesis import given, settings, strategies as st

from qpomdp.bench import classic, tiny
from qpomdp.bench.corpus import random_pomdp, reweight
from qpomdp.model import ResourceLimitError, max_observation_size, reachable_belief_supports, to_mask
from qpomdp.objective import normalize_priorities
from qpomdp.product import LOSE, MemoryElement, build, dump, to_pomdp


def _pairs(prod):
    return {(m.y, m.b) for m in prod.memories}


def test_single_state_product():
    prod = build(tiny.single_state(2))
    assert _pairs(prod) == {(1, 0), (1, 1)}
    assert prod.n_states() == 3  # two product states plus Lose
    # the lock is offered from the start
    options = prod.branches[0][0][0].options
    assert [prod.memories[i].b for i in options] == [0, 1]


def test_straddle_memories(straddle):
    prod = build(straddle)
    x, y = to_mask([0]), to_mask([1])
    pairs = _pairs(prod)
    assert (x | y, 0) in pairs
    assert (x | y, x) in pairs
    assert (x | y, x | y) not in pairs  # y has priority 1, never lockable


def test_cheese_heuristic_bound():
    m = normalize_priorities(classic.cheese("small", "easy"))
    prod = build(m)
    assert prod.max_support() <= 3
    assert prod.max_support() <= max_observation_size(m)


def _check_invariants(prod):
    m = prod.pomdp
    supports = {to_mask(y) for y in reachable_belief_supports(m)}
    for i, mem in enumerate(prod.memories):
        assert mem.b & ~mem.y == 0
        assert mem.y in supports
        # belief-observation property: all members share one observation
        assert len({m.obs_of[s] for s in prod.members[i]}) == 1
        if mem.b:
            assert mem.level % 2 == 0
            assert all(m.priority[s] >= mem.level for s in prod.members[i] if mem.b >> s & 1)
        for a in range(m.n_actions):
            branches = prod.branches[i][a]
            for s, moves in zip(prod.members[i], prod.moves[i][a]):
                assert {t for t, _ in moves} == set(m.succ_mask[s][a] and
                                                    [t for t in range(m.n_states)
                                                     if m.succ_mask[s][a] >> t & 1])
                for t, j in moves:
                    if j == LOSE:
                        assert mem.b >> s & 1 and m.priority[t] < mem.level
                        continue
                    br = branches[j]
                    assert m.obs_of[t] == br.obs
                    for o in br.options:
                        succ = prod.memories[o]
                        assert succ.y >> t & 1
                        if mem.b >> s & 1:  # closure soundness
                            assert succ.b >> t & 1


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 50_000))
def test_product_invariants_random(seed):
    m = normalize_priorities(random_pomdp(seed, priorities=(1, 2, 3, 4)))
    _check_invariants(build(m))


def test_product_invariants_benchmarks():
    for m in (classic.grid(4), classic.shuttle("small"), classic.cheese("large", "hard")):
        _check_invariants(build(normalize_priorities(m)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 50_000))
def test_product_support_only(seed):
    m = normalize_priorities(random_pomdp(seed))
    a, b = build(m), build(reweight(m, seed))
    assert a.memories == b.memories and a.moves == b.moves


def test_cap():
    with pytest.raises(ResourceLimitError):
        build(classic.grid(4), cap=10)


def test_odd_transient_priority():
    prod = build(tiny.straddle())
    assert prod.odd_transient == 3
    assert prod.priority(1, 0) == 3
    assert prod.priority(LOSE, 0) == 1


def test_dump_and_flatten(straddle):
    prod = build(straddle)
    text = dump(prod)
    assert text == ("product: 2 memories, 5 states (incl. Lose), levels [2]\n"
                    "m0: Y={x,y} B={} L=-\n  a: z0->m0|m1\n"
                    "m1: Y={x,y} B={x} L=2\n  a: z0->m1\n")
    flat = to_pomdp(prod)
    assert flat.n_states == prod.n_states()
    assert MemoryElement(3, 0, None).support == {0, 1}
