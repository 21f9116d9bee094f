import random
from fractions import Fraction

import pytest

from smdp import circuit as ct
from smdp import mdp as md
from smdp.bits import width_for_count
from smdp.policy import TimedExplicitPolicy
from smdp.random_models import random_bounded_mdp, random_stationary_policy
from smdp.valuefn import (
    InconsistentValueError,
    ValueCircuit,
    ValueTable,
    check_consistency,
    extract_policy,
    load_valuefn,
    save_valuefn,
    value_of_policy,
)


def test_value_table_base_case_is_reward():
    rng = random.Random(0)
    rm = random_bounded_mdp(rng, 2, 2)
    p = random_stationary_policy(rng, 2, 2)
    em = md.expand(rm.mdp)
    table = value_of_policy(em, p, 3)
    for s in em.states:
        assert table.value(s, 0) == md.reward(rm.mdp, s)


def test_value_recursion_identity():
    rng = random.Random(1)
    rm = random_bounded_mdp(rng, 2, 2)
    p = random_stationary_policy(rng, 2, 2)
    em = md.expand(rm.mdp)
    table = value_of_policy(em, p, 4)
    for s in em.states:
        for i in range(1, 5):
            a = p.decide(s)
            total = Fraction(md.reward(rm.mdp, s))
            for s2, pr in md.successors(rm.mdp, s, a):
                total += pr * table.value(s2, i - 1)
            assert total == table.value(s, i)


def test_consistency_accepts_realized_tables():
    rng = random.Random(2)
    for _ in range(5):
        rm = random_bounded_mdp(rng, rng.randint(1, 3), rng.randint(1, 3))
        p = random_stationary_policy(rng, rm.mdp.num_vars, len(rm.mdp.actions))
        horizon = rng.randint(1, 3)
        em = md.expand_many(rm.mdp, sorted(rm.rewards))[0]
        table = value_of_policy(em, p, horizon)
        res = check_consistency(rm.mdp, table, horizon)
        assert res.consistent
        assert set(res.witness) == set(table.values)


def test_consistency_rejects_perturbed_tables():
    rng = random.Random(3)
    rm = random_bounded_mdp(rng, 2, 2)
    p = random_stationary_policy(rng, 2, 2)
    em = md.expand_many(rm.mdp, sorted(rm.rewards))[0]
    table = value_of_policy(em, p, 2)
    s0 = sorted(table.values)[0]
    broken = dict(table.values)
    row = list(broken[s0])
    row[2] += Fraction(1, 97)
    broken[s0] = tuple(row)
    res = check_consistency(rm.mdp, ValueTable(broken, 2), 2)
    assert not res.consistent
    assert res.counterexample is not None


def test_consistency_base_case_mismatch_reported():
    rng = random.Random(4)
    rm = random_bounded_mdp(rng, 2, 2)
    table = ValueTable(
        {s: (Fraction(rm.rewards[s] + 1),) for s in rm.rewards}, horizon=0
    )
    res = check_consistency(rm.mdp, table, 0)
    assert not res.consistent
    assert "r(s)" in res.reason


def test_extract_policy_roundtrip_identity():
    rng = random.Random(5)
    for _ in range(5):
        rm = random_bounded_mdp(rng, rng.randint(1, 3), rng.randint(1, 3))
        p = random_stationary_policy(rng, rm.mdp.num_vars, len(rm.mdp.actions))
        horizon = rng.randint(1, 3)
        em = md.expand_many(rm.mdp, sorted(rm.rewards))[0]
        table = value_of_policy(em, p, horizon)
        mapping = {}
        for s in table.values:
            for i in range(1, horizon + 1):
                mapping[(s, i)] = extract_policy(rm.mdp, table, horizon, s, i)
        extracted = TimedExplicitPolicy(mapping, len(rm.mdp.actions))
        again = value_of_policy(em, extracted, horizon)
        assert again.values == table.values


def test_extract_policy_raises_on_unrealizable_values():
    rng = random.Random(6)
    rm = random_bounded_mdp(rng, 2, 1)
    s0 = sorted(rm.rewards)[0]
    table = ValueTable(
        {s: (Fraction(rm.rewards[s]), Fraction(10**6)) for s in rm.rewards}, 1
    )
    with pytest.raises(InconsistentValueError):
        extract_policy(rm.mdp, table, 1, s0, 1)


def test_value_circuit_signed_reading_and_io(tmp_path):
    horizon = 2
    iw = width_for_count(horizon + 1)
    b = ct.CircuitBuilder(2 + iw)
    # value = -1 (all-ones two's complement) when the first state bit is set
    out = [b.inp(0), b.inp(0)]
    v = ValueCircuit(b.build(out), horizon, value_denominator=4, name="toy")
    assert v.value((1, 0), 0) == Fraction(-1, 4)
    assert v.value((0, 1), 2) == 0
    v2 = load_valuefn(save_valuefn(v, tmp_path))
    assert v2.name == "toy"
    assert v2.value((1, 0), 1) == Fraction(-1, 4)
    table = v2.value_table([(0, 0), (1, 1)])
    assert table.value((1, 1), 2) == Fraction(-1, 4)
