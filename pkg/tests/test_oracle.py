import random
from fractions import Fraction

import pytest

from smdp import circuit as ct
from smdp import mdp as md
from smdp import oracle
from smdp.cnf import Cnf
from smdp.policy import compile_explicit
from smdp.random_models import random_bounded_mdp, random_stationary_policy
from smdp.valuefn import value_of_policy


def test_sat_family_oracles():
    assert oracle.sat_oracle(Cnf(2, ((1, 2),)))
    assert not oracle.sat_oracle(Cnf(1, ((1,), (-1,))))
    assert oracle.model_count(Cnf(2, ())) == 4
    assert oracle.model_count(Cnf(2, ((1, 2),))) == 3
    assert oracle.model_count(Cnf(1, ((1,), (-1,)))) == 0


def test_emajsat_and_forall_exists():
    # x1 <-> y1: either x-choice satisfies exactly half the extensions
    iff = Cnf(2, ((1, -2), (-1, 2)))
    assert oracle.emajsat_oracle(iff, 1)
    assert not oracle.forall_exists_oracle(iff, 1)
    # Q = x1: choosing x1 true satisfies every extension
    assert oracle.forall_exists_oracle(Cnf(2, ((1,),)), 1)
    # Q = y1 and not y1: no extension ever satisfies
    assert not oracle.emajsat_oracle(Cnf(2, ((2,), (-2,))), 1)


def test_oracle_var_limit():
    with pytest.raises(oracle.OracleScaleError):
        oracle.model_count(Cnf(30, ()))


def test_solve_single_action_equals_policy_value():
    rng = random.Random(0)
    rm = random_bounded_mdp(rng, 2, 1)
    em = md.expand(rm.mdp)
    sol = oracle.solve_optimal(em, 3)
    only = compile_explicit({s: 0 for s in rm.rewards}, 2, 1)
    table = value_of_policy(em, only, 3)
    for s in em.states:
        for i in range(4):
            assert sol.values[s][i] == table.value(s, i)


def test_optimal_dominates_every_policy_and_greedy_attains():
    rng = random.Random(1)
    for _ in range(5):
        rm = random_bounded_mdp(rng, 2, 2)
        em = md.expand(rm.mdp)
        horizon = 3
        sol = oracle.solve_optimal(em, horizon)
        for _ in range(5):
            p = random_stationary_policy(rng, 2, 2)
            table = value_of_policy(em, p, horizon)
            for s in em.states:
                assert sol.values[s][horizon] >= table.value(s, horizon)
        greedy_table = value_of_policy(em, sol.greedy, horizon)
        for s in em.states:
            assert greedy_table.value(s, horizon) == sol.values[s][horizon]


def test_ties_return_all_actions():
    # two actions with identical dynamics and rewards
    b = ct.CircuitBuilder(3)
    t = b.build([b.const(1)])  # fair flip under either action
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0), rb.inp(0)])
    m = md.SuccinctMdp(("x1",), (0,), ("u", "v"), t, r, prob_denominator=2)
    acts = oracle.best_next_action(m, 2, (0,))
    assert acts == (0, 1)


def test_bounded_policy_exists_micro_regime():
    # coin MDP with a good and a bad action: stay at 0 (reward 0) or flip to 1
    b = ct.CircuitBuilder(3)
    same = b.not_(b.xor(b.inp(0), b.inp(1)))
    diff = b.xor(b.inp(0), b.inp(1))
    num = b.select_value([(b.and_(b.not_(b.inp(2)), same), 1),
                          (b.and_(b.inp(2), diff), 1)], 1)
    t = b.build(num)
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0), rb.inp(0)])
    m = md.SuccinctMdp(("x1",), (0,), ("stay", "go"), t, r, prob_denominator=1)
    yes, witness = oracle.bounded_policy_exists(m, 2, 2, Fraction(2))
    assert yes and witness is not None
    # reward 2 needs the go action; a policy that cannot express it fails
    no, _ = oracle.bounded_policy_exists(m, 2, 2, Fraction(5, 2))
    assert not no


def test_bounded_policy_exists_monotone_in_bounds():
    rng = random.Random(2)
    rm = random_bounded_mdp(rng, 2, 2)
    horizon = 2
    vac = len(rm.mdp.actions) * (1 << rm.mdp.num_vars)
    em = md.expand(rm.mdp)
    best = oracle.solve_optimal(em, horizon).values[tuple(rm.mdp.initial)][horizon]
    assert oracle.bounded_policy_exists(rm.mdp, horizon, vac, best)[0]
    assert not oracle.bounded_policy_exists(rm.mdp, horizon, vac, best + 1)[0]


def test_bounded_policy_exists_refuses_midscale():
    rng = random.Random(3)
    rm = random_bounded_mdp(rng, 2, 2)
    with pytest.raises(oracle.OracleScaleError):
        oracle.bounded_policy_exists(rm.mdp, 2, 7, Fraction(1, 2))
