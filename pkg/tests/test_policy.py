import random

import pytest

from smdp import circuit as ct
from smdp.bits import int_to_bits
from smdp.policy import (
    ExplicitPolicy,
    HistoryPolicy,
    PolicyError,
    StationaryPolicy,
    TimedExplicitPolicy,
    compile_explicit,
    load_policy,
    save_policy,
)


def test_stationary_decides_from_circuit():
    b = ct.CircuitBuilder(2)
    p = StationaryPolicy(b.build([b.and_(b.inp(0), b.inp(1))]), action_count=2)
    assert p.decide((1, 1)) == 1
    assert p.decide((1, 0)) == 0
    assert p.decide_batch([(0, 0), (1, 1)]) == [0, 1]


def test_out_of_range_action_is_hard_error():
    b = ct.CircuitBuilder(1)
    p = StationaryPolicy(b.build([b.const(1), b.const(1)]), action_count=3)
    with pytest.raises(PolicyError, match="decoded action 3"):
        p.decide((0,))
    with pytest.raises(PolicyError):
        p.decide_batch([(0,)])


def test_output_width_must_match_action_count():
    b = ct.CircuitBuilder(1)
    with pytest.raises(PolicyError):
        StationaryPolicy(b.build([b.inp(0)]), action_count=3)  # needs 2 bits


def test_compile_explicit_roundtrip():
    rng = random.Random(0)
    for n in (1, 3, 5):
        mapping = {
            tuple(int_to_bits(k, n)): rng.randrange(3) for k in range(1 << n)
        }
        p = compile_explicit(mapping, n, 3)
        for s, a in mapping.items():
            assert p.decide(s) == a


def test_compile_explicit_rejects_partial_maps():
    with pytest.raises(PolicyError, match="partial"):
        compile_explicit({(0,): 0}, 1, 2)


def test_history_policy_layout():
    # act 1 exactly when the first observed state (slot 0) was all-ones
    horizon, n = 2, 2
    b = ct.CircuitBuilder((horizon + 1) * n + 2)
    first = b.and_(b.inp(0), b.inp(1))
    p = HistoryPolicy(b.build([first]), action_count=2, horizon=horizon, num_vars=n)
    assert p.decide_history([(1, 1), (0, 0)], 1) == 1
    assert p.decide_history([(0, 1), (1, 1)], 1) == 0
    with pytest.raises(PolicyError):
        p.decide_history([(0, 0)], 1)  # time index beyond observed states


def test_explicit_and_timed_policies():
    p = ExplicitPolicy({(0,): 1, (1,): 0}, 2)
    assert p.decide((0,)) == 1
    with pytest.raises(PolicyError):
        p.decide((0, 1))
    t = TimedExplicitPolicy({((0,), 1): 1, ((0,), 2): 0}, 2)
    assert t.decide_timed((0,), 1) == 1
    assert t.decide_timed((0,), 2) == 0
    with pytest.raises(PolicyError):
        t.decide_timed((1,), 1)


def test_save_load_roundtrip(tmp_path):
    b = ct.CircuitBuilder(2)
    p = StationaryPolicy(b.build([b.xor(b.inp(0), b.inp(1))]), 2, name="parity")
    p2 = load_policy(save_policy(p, tmp_path))
    assert p2.name == "parity"
    assert all(p2.decide(s) == p.decide(s) for s in [(0, 0), (0, 1), (1, 0), (1, 1)])

    hb = ct.CircuitBuilder(3 * 2 + 2)
    h = HistoryPolicy(hb.build([hb.inp(0)]), 2, horizon=2, num_vars=2)
    h2 = load_policy(save_policy(h, tmp_path, "hist"))
    assert h2.kind == "history"
    assert h2.horizon == 2 and h2.num_vars == 2
    assert h2.decide_history([(1, 0)], 0) == 1
