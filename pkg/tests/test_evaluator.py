import random
from fractions import Fraction

import pytest

from smdp import circuit as ct
from smdp import mdp as md
from smdp.evaluator import (
    enumerate_trajectories,
    expected_reward_exact,
    expected_reward_mc,
    history_probability,
)
from smdp.policy import HistoryPolicy, StationaryPolicy
from smdp.random_models import random_bounded_mdp, random_stationary_policy
from smdp.valuefn import value_of_policy


def coin_mdp():
    """One bit, one action, fair flip; reward 1 on heads."""
    b = ct.CircuitBuilder(3)
    t = b.build([b.const(1)])  # numerator 1 for both successors, D = 2
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0), rb.inp(0)])
    return md.SuccinctMdp(("x1",), (0,), ("toss",), t, r, prob_denominator=2)


def always_act0(num_vars):
    b = ct.CircuitBuilder(num_vars)
    return StationaryPolicy(b.build([b.const(0)]), 1)


def test_coin_reward_by_hand():
    m = coin_mdp()
    p = always_act0(1)
    # r(s0)=0, each later depth contributes 1/2
    for horizon in range(4):
        rep = expected_reward_exact(m, p, horizon)
        assert rep.expected_reward == Fraction(horizon, 2)
        assert all(mass == 1 for mass in rep.per_depth_mass)
    assert expected_reward_exact(m, p, 2).trajectory_count == 4


def test_exact_matches_value_recursion_on_random_models():
    rng = random.Random(0)
    for _ in range(10):
        rm = random_bounded_mdp(rng, rng.randint(1, 3), rng.randint(1, 3))
        p = random_stationary_policy(rng, rm.mdp.num_vars, len(rm.mdp.actions))
        horizon = rng.randint(0, 4)
        got = expected_reward_exact(rm.mdp, p, horizon).expected_reward
        em = md.expand(rm.mdp)
        want = value_of_policy(em, p, horizon).value(tuple(rm.mdp.initial), horizon)
        assert got == want


def test_trajectory_probabilities_sum_to_one():
    rng = random.Random(1)
    rm = random_bounded_mdp(rng, 2, 2)
    p = random_stationary_policy(rng, 2, 2)
    for depth in range(4):
        total = Fraction(0)
        for traj in enumerate_trajectories(rm.mdp, p, depth):
            assert history_probability(rm.mdp, p, traj.states) == traj.probability
            total += traj.probability
        assert total == 1


def test_history_policy_reduces_to_stationary_when_memoryless():
    m = coin_mdp()
    # history circuit that ignores everything: action 0
    b = ct.CircuitBuilder(3 * 1 + 2)
    h = HistoryPolicy(b.build([b.const(0)]), 1, horizon=2, num_vars=1)
    got = expected_reward_exact(m, h, 2).expected_reward
    assert got == expected_reward_exact(m, always_act0(1), 2).expected_reward


def test_history_policy_can_depend_on_past():
    m = coin_mdp()
    # an MDP with two actions: toss (fair) or stay put
    b = ct.CircuitBuilder(3)
    same = b.not_(b.xor(b.inp(0), b.inp(1)))
    is_stay = b.inp(2)
    num = b.select_value([(b.and_(is_stay, same), 2), (b.not_(is_stay), 1)], 2)
    t = b.build(num)
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0), rb.inp(0)])
    m2 = md.SuccinctMdp(("x1",), (0,), ("toss", "stay"), t, r, prob_denominator=2)
    # toss once; if the first toss came up heads, stay forever
    hb = ct.CircuitBuilder(3 * 1 + 2)
    saw_heads = hb.inp(1)  # slot 1 = state after the first step
    h = HistoryPolicy(hb.build([saw_heads]), 2, horizon=2, num_vars=1)
    rep = expected_reward_exact(m2, h, 2)
    # 1/2 heads then stay (reward 1+1), 1/2 tails then toss again (E=1/2)
    assert rep.expected_reward == Fraction(1, 2) * 2 + Fraction(1, 2) * Fraction(1, 2)


def test_mc_deterministic_and_close():
    rng = random.Random(2)
    rm = random_bounded_mdp(rng, 2, 2)
    p = random_stationary_policy(rng, 2, 2)
    exact = expected_reward_exact(rm.mdp, p, 3).expected_reward
    est1 = expected_reward_mc(rm.mdp, p, 3, samples=4000, seed=42)
    est2 = expected_reward_mc(rm.mdp, p, 3, samples=4000, seed=42)
    assert est1 == est2  # reproducible
    assert abs(float(est1.mean - exact)) <= max(5 * est1.stderr, 1e-12)


def test_mc_requires_samples():
    m = coin_mdp()
    with pytest.raises(ValueError):
        expected_reward_mc(m, always_act0(1), 1, samples=0, seed=0)
