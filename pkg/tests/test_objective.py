from itertools import product as cartesian

import pytest
from hypothesis import given, settings, strategies as st

from qpomdp import objective as obj
from qpomdp.bench import classic, tiny
from qpomdp.bench.corpus import random_pomdp
from qpomdp.bench.navigation import hallway
from qpomdp.bench.rocksample import rocksample
from qpomdp.ingest import ParseError
from qpomdp.model import simple_pomdp, validate
from qpomdp.objective import (ObjectiveSpec, identity_automaton, lasso_words, normalize_priorities,
                              parse_objective, priority_map, reduce_to_cobuchi, template,
                              write_objective)

SIGMA = ("A", "B", "C", "D", "_")


def _unroll(prefix, loop, times):
    return list(prefix) + list(loop) * times


def _sequencing_reference(stages, avoid, prefix, loop):
    word = _unroll(prefix, loop, len(stages) + 1)
    stage = 0
    for x in word:
        while stage < len(stages) and x in stages[stage]:
            stage += 1
        if stage == len(stages):
            return True
        if x in avoid:
            return False
    return False


REFERENCE = {
    "liveness": lambda r, av, p, l: any(x in r[0] for x in p + l),
    "safety": lambda r, av, p, l: all(x in r[0] for x in p + l),
    "reach_avoid": _sequencing_reference,
    "sequencing": _sequencing_reference,
    "coverage": lambda r, av, p, l: all(any(x in reg for x in p + l) for reg in r),
    "recurrence": lambda r, av, p, l: all(any(x in reg for x in l) for reg in r),
    "recurrence_avoid": lambda r, av, p, l: (all(any(x in reg for x in l) for reg in r)
                                            and not any(x in av for x in l)),
}

CASES = [
    ("liveness", [{"D"}], (), 2),
    ("safety", [{"A", "B", "_"}], (), 2),
    ("reach_avoid", [{"A"}, {"B"}, {"D"}], ("C",), 5),
    ("sequencing", [{"A"}, {"B"}, {"D"}], ("C",), 5),
    ("coverage", [{"A"}, {"B"}, {"C"}], (), 8),
    ("recurrence", [{"A"}, {"C"}], (), 4),
    ("recurrence_avoid", [{"A"}, {"D"}], ("B", "C"), 5),
]


@pytest.mark.parametrize("kind,regions,avoid,size", CASES)
def test_template_size(kind, regions, avoid, size):
    assert template(kind, regions, avoid, SIGMA).n_states == size


@pytest.mark.parametrize("kind,regions,avoid,size", CASES)
def test_template_semantics_on_lassos(kind, regions, avoid, size):
    dpa = template(kind, regions, avoid, SIGMA)
    ref = REFERENCE[kind]
    for prefix, loop in lasso_words(SIGMA, 5):
        assert dpa.accepts_lasso(prefix, loop) == ref(regions, avoid, prefix, loop), (prefix, loop)


def test_liveness_accepting_sink():
    dpa = template("liveness", [{"T"}])
    done = dpa.step(dpa.initial, "T")
    assert dpa.priority[done] == 2
    assert all(dpa.step(done, x) == done for x in dpa.alphabet)


def test_recurrence_word():
    dpa = template("recurrence", [{"S"}])
    assert dpa.accepts_lasso((), ("S", "_"))
    assert not dpa.accepts_lasso(("S",), ("_",))


@pytest.mark.parametrize("args", [("nope", [{"A"}]), ("liveness", []), ("liveness", [set()]),
                                  ("liveness", [{"A"}, {"B"}]), ("coverage", [{"Z"}], (), ("A",))])
def test_template_errors(args):
    with pytest.raises(ValueError):
        template(*args)


# -- product ------------------------------------------------------------------

def test_identity_product_is_isomorphic(straddle):
    p = obj.product(straddle, identity_automaton())
    assert p.n_states == straddle.n_states
    assert p.priority == (2, 2)
    assert [p.obs_of[s] for s in range(2)] == list(straddle.obs_of)


def _two_state_labeled():
    return simple_pomdp(["u", "g"], ["a"], ["z"], {"u": "z", "g": "z"},
                        {("u", "a"): {"u": 0.5, "g": 0.5}, ("g", "a"): {"u": 1}},
                        "u", {"u": 0, "g": 0}, {"g": "T"})


def test_two_state_liveness_product():
    m = _two_state_labeled()
    dpa = template("liveness", [{"T"}])
    p = obj.product(m, dpa)
    assert p.n_states <= 4 and validate(p) == []
    names = dict(zip(p.state_names, p.priority))
    assert names == {"u_wait": 1, "u_done": 2, "g_done": 2}
    assert sorted(p.labels) == ["T", "_", "_"]


def test_hallway_liveness_size_matches_table():
    m = hallway(1)
    dpa = ObjectiveSpec("liveness", (("goal", ("D",)),)).to_automaton(set(m.labels))
    # the hallway geometry is under-determined: published 120, tolerance 15%
    n = obj.product(m, dpa, reads="left").n_states
    assert n == 118 and abs(n - 120) <= 0.15 * 120


def test_product_reads_validation(straddle):
    with pytest.raises(ValueError):
        obj.product(straddle, identity_automaton(), reads="both")
    with pytest.raises(ValueError):
        obj.product(_two_state_labeled(), identity_automaton())  # T not in alphabet


def _lassos(model, max_len):
    """Ultimately periodic state paths of the model, as (prefix, loop) lists."""
    succ = [set().union(*(set(d) for d in row)) for row in model.transitions]
    paths = [[s] for s in model.start]
    for _ in range(max_len):
        nxt = []
        for path in paths:
            last = path[-1]
            for t in sorted(succ[last]):
                if t in path:
                    i = path.index(t)
                    yield path[:i], path[i:]
                nxt.append(path + [t])
        paths = nxt


@pytest.mark.parametrize("reads", obj.READS)
@pytest.mark.parametrize("kind,regions,avoid,size", CASES)
def test_product_acceptance_on_lassos(reads, kind, regions, avoid, size):
    letters = ("A", "B", "C", "D", "_")
    base = random_pomdp(11, max_states=5)
    labels = tuple(letters[i % 5] for i in range(base.n_states))
    dpa = template(kind, regions, avoid, SIGMA)
    p = obj.product(base, dpa, labels, reads=reads)
    seen = 0
    for prefix, loop in _lassos(p, 6):
        seen += 1
        product_wins = min(p.priority[s] for s in loop) % 2 == 0
        word = lambda path: tuple(p.labels[s] for s in path)
        assert product_wins == dpa.accepts_lasso(word(prefix), word(loop))
    assert seen > 0


# -- priorities ---------------------------------------------------------------

def _min_parity(seq):
    return min(seq) % 2


def test_normalization_examples():
    assert priority_map({2}) == {2: 2}
    assert priority_map({3, 5}) == {3: 1, 5: 1}
    assert priority_map({1, 2, 3}) == {1: 1, 2: 2, 3: 3}
    assert priority_map({0, 2, 7}) == {0: 2, 2: 2, 7: 3}


@pytest.mark.parametrize("values", [{3, 5}, {2}, {1, 2, 3}, {0, 4, 5, 9}])
def test_normalization_preserves_lasso_winner(values):
    mapping = priority_map(values)
    for prefix, loop in lasso_words(sorted(values), 4):
        assert _min_parity(loop) == _min_parity([mapping[v] for v in loop])


@settings(max_examples=100, deadline=None)
@given(st.sets(st.integers(0, 12), min_size=1, max_size=6))
def test_normalization_property(values):
    mapping = priority_map(values)
    image = sorted(set(mapping.values()))
    assert image[0] in (1, 2)
    assert image == list(range(image[0], image[0] + len(image)))
    for a, b in cartesian(values, repeat=2):
        assert (a <= b) == (mapping[a] <= mapping[b]) or mapping[a] == mapping[b]
        assert a % 2 == mapping[a] % 2


def test_normalize_model_identity(straddle):
    assert normalize_priorities(straddle) is straddle
    assert normalize_priorities(tiny.all_priority(5)).priority == (1, 1, 1)


# -- coBuchi reduction --------------------------------------------------------

def test_rocksample_is_identity():
    m = rocksample(2, 3)
    r = reduce_to_cobuchi(normalize_priorities(m))
    assert r.kind == "identity" and r.model.n_states == 1025


def test_hallway_liveness_gains_sink():
    m = hallway(1)
    dpa = ObjectiveSpec("liveness", (("goal", ("D",)),)).to_automaton(set(m.labels))
    before = normalize_priorities(obj.product(m, dpa, reads="left"))
    r = reduce_to_cobuchi(before)
    assert r.kind == "sink" and r.model.n_states == before.n_states + 1
    assert validate(r.model) == []


def test_cheese_unsupported():
    m = classic.cheese("small", "easy")
    r = reduce_to_cobuchi(normalize_priorities(m))
    assert r.kind == "unsupported" and not r.supported


def test_sink_name_avoids_clash():
    m = tiny.trap().replace(state_names=("i", "sink", "b"))
    r = reduce_to_cobuchi(m)
    assert r.kind == "sink" and r.model.state_names[-1] == "sink_"


# -- .qobj files --------------------------------------------------------------

def test_template_objective_roundtrip():
    text = "OBJ v1\nkind: sequencing\nset first: A\nset second: B\nset third: D\navoid: C\n"
    spec = parse_objective(text)
    assert spec.kind == "sequencing" and spec.avoid == ("C",)
    assert write_objective(spec) == text


def test_automaton_objective_roundtrip():
    spec = ObjectiveSpec(automaton=template("liveness", [{"D"}]))
    text = write_objective(spec)
    again = parse_objective(text)
    assert again.automaton == spec.automaton
    assert write_objective(again) == text


@pytest.mark.parametrize("text", [
    "kind: liveness\n",
    "OBJ v1\nkind: flying\n",
    "OBJ v1\nset a: A\n",
    "OBJ v1\nautomaton\nstates: q\nalphabet: x\ninitial: q\npri: q 2\n",
])
def test_objective_errors(text):
    with pytest.raises(ParseError):
        parse_objective(text)
