from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qpomdp import ingest
from qpomdp.bench import tiny
from qpomdp.bench.corpus import random_pomdp
from qpomdp.ingest import ParseError, SemanticError, normalize_observations, parse, write
from qpomdp.model import simple_pomdp, validate

from conftest import DATA

MINIMAL = """QPOMDP v1
states: s0
actions: a0
observations: z0
start: s0 1
obs: s0 z0
T: s0 a0 s0 1
priority: s0 2
"""


def test_minimal_file():
    m = parse(MINIMAL)
    assert m.n_states == 1 and validate(m) == []
    assert write(m) == MINIMAL


def test_rational_literal_is_exact():
    text = MINIMAL.replace("states: s0", "states: s0 s1").replace(
        "T: s0 a0 s0 1", "T: s0 a0 s0 2/3\nT: s0 a0 s1 1/3\nT: s1 a0 s1 1") + \
        "obs: s1 z0\npriority: s1 1\n"
    m = parse(text)
    assert m.transitions[0][0][1] == Fraction(1, 3)
    assert "T: s0 a0 s1 1/3" in write(m)


def test_row_sum_names_state_action():
    with pytest.raises(SemanticError, match=r"\(s0,a0\)"):
        parse(MINIMAL.replace("T: s0 a0 s0 1", "T: s0 a0 s0 0.5"))


def test_canonical_state_order():
    text = """QPOMDP v1
# declared out of order on purpose
states: b a
actions: go
observations: z
priority: a 1
T: a go b 1
T: b go a 1
obs: a z
obs: b z
priority: b 2
"""
    out = write(parse(text))
    assert out.splitlines()[1] == "states: b a"
    assert out.index("T: b go a") < out.index("T: a go b")
    assert write(parse(out)) == out


@pytest.mark.parametrize("text,match", [
    ("", "header"),
    ("QPOMDP v1\nstates: s0\nstates: s1\n", "duplicate"),
    (MINIMAL + "obs: s0 z0\n", "duplicate"),
    (MINIMAL.replace("T: s0 a0 s0 1", "T: s0 a0 s9 1"), "unknown state s9"),
    (MINIMAL.replace("T: s0 a0 s0 1", "T: s0 a0 s0 x"), "line 7"),
    (MINIMAL + "bogus: 1\n", "unknown directive"),
    (MINIMAL.replace("priority: s0 2", "priority: s0 -2"), "non-negative"),
    (MINIMAL.replace("states: s0", "states: s-0"), "identifier"),
])
def test_parse_errors(text, match):
    with pytest.raises(ParseError, match=match):
        parse(text)


def test_error_carries_line_number():
    with pytest.raises(ParseError) as info:
        parse(MINIMAL.replace("T: s0 a0 s0 1", "T: s0 a0 s0"))
    assert "line 7" in str(info.value)


def test_data_files_roundtrip():
    for path in sorted(DATA.glob("*.qpomdp")):
        text = path.read_text()
        m = parse(text)
        assert write(m) == text
        assert parse(write(m)) == m


def test_decimal_probabilities_within_tolerance():
    m = parse(MINIMAL.replace("states: s0", "states: s0 s1").replace(
        "T: s0 a0 s0 1", "T: s0 a0 s0 0.3333333333\nT: s0 a0 s1 0.6666666667\nT: s1 a0 s1 1")
        + "obs: s1 z0\npriority: s1 1\n")
    assert isinstance(m.transitions[0][0][0], float)
    assert write(parse(write(m))) == write(m)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 100_000))
def test_roundtrip_random(seed):
    m = random_pomdp(seed)
    assert parse(write(m)) == m


def test_labels_roundtrip():
    from qpomdp.bench.navigation import maze
    m = maze("C")
    assert parse(write(m)) == m


# -- observation normalization ------------------------------------------------

def test_deterministic_observations_unchanged(straddle):
    assert normalize_observations(straddle) is straddle


def test_multi_observations_become_subsets(straddle):
    m = normalize_observations(straddle, multi={0: {"z1", "z2"}, 1: {"z1"}})
    assert m.obs_names == ("z1_z2", "z1")
    assert m.obs_of == (0, 1)


def _two_state():
    half = Fraction(1, 2)
    return simple_pomdp(["u", "v"], ["a"], ["z"], {"u": "z", "v": "z"},
                        {("u", "a"): {"v": 1}, ("v", "a"): {"u": half, "v": half}},
                        "u", {"u": 1, "v": 2})


def test_probabilistic_observations_product():
    half = Fraction(1, 2)
    obs = {(s, 0): {"p": half, "q": half} for s in range(2)}
    m = normalize_observations(_two_state(), probabilistic=obs)
    # four (state, observation) pairs plus the start copy of u
    assert m.state_names == ("u_p", "u_q", "v_p", "v_q", "u_init")
    assert validate(m) == []
    row = {m.state_names[t]: p for t, p in m.transitions[m.state_index["v_p"]][0].items()}
    assert row == {"u_p": Fraction(1, 4), "u_q": Fraction(1, 4),
                   "v_p": Fraction(1, 4), "v_q": Fraction(1, 4)}
    row = {m.state_names[t]: p for t, p in m.transitions[m.state_index["u_init"]][0].items()}
    assert row == {"v_p": half, "v_q": half}


def test_probabilistic_observation_row_sum():
    with pytest.raises(ValueError):
        normalize_observations(_two_state(),
                               probabilistic={(s, 0): {"p": Fraction(1, 3)} for s in range(2)})


def test_probabilistic_preserves_observation_sequences():
    """Empirical observation-sequence frequencies agree between the two models."""
    third = Fraction(1, 3)
    obs = {(0, 0): {"p": third, "q": 2 * third}, (1, 0): {"p": Fraction(1)}}
    base = _two_state()
    norm = normalize_observations(base, probabilistic=obs)
    rng = np.random.default_rng(7)
    runs, length = 4000, 3

    def sample(model, emit):
        counts = {}
        for _ in range(runs):
            s = next(iter(model.start))
            seq = []
            for _ in range(length):
                dist = model.transitions[s][0]
                keys = sorted(dist)
                s = keys[rng.choice(len(keys), p=[float(dist[k]) for k in keys])]
                seq.append(emit(s))
            counts[tuple(seq)] = counts.get(tuple(seq), 0) + 1
        return counts

    def emit_base(s):
        dist = obs[(s, 0)]
        keys = sorted(dist)
        return keys[rng.choice(len(keys), p=[float(dist[k]) for k in keys])]

    a = sample(base, emit_base)
    b = sample(norm, lambda s: norm.obs_names[norm.obs_of[s]])
    for key in set(a) | set(b):
        assert abs(a.get(key, 0) - b.get(key, 0)) / runs < 0.05


def test_load_save(tmp_path):
    path = tmp_path / "m.qpomdp"
    ingest.save(tiny.guess_door(), path)
    assert ingest.load(path) == tiny.guess_door()
