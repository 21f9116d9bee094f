import os
import random
from fractions import Fraction

import pytest

from smdp import circuit as ct
from smdp import mdp as md
from smdp.random_models import random_bounded_mdp


def make_random(seed=0, **kw):
    rng = random.Random(seed)
    return random_bounded_mdp(rng, kw.pop("num_vars", 3), kw.pop("num_actions", 2), **kw)


def test_successors_match_ground_truth_tables():
    rm = make_random(1)
    m = rm.mdp
    for (s, a), want in rm.transitions.items():
        got = md.successors(m, s, a)
        assert sorted(got) == sorted(want)


def test_transition_prob_pointwise():
    rm = make_random(2)
    m = rm.mdp
    for (s, a), pairs in list(rm.transitions.items())[:16]:
        by_state = dict(pairs)
        for row in range(1 << m.num_vars):
            s2 = tuple(int(b) for b in format(row, f"0{m.num_vars}b"))
            assert md.transition_prob(m, s, s2, a) == by_state.get(s2, Fraction(0))


def test_rewards_match_tables():
    rm = make_random(3)
    states = sorted(rm.rewards)
    got = md.reward_batch(rm.mdp, states)
    assert got == [rm.rewards[s] for s in states]
    for s in states[:8]:
        assert md.reward(rm.mdp, s) == rm.rewards[s]


def test_plain_succinct_agrees_with_bounded():
    rm = make_random(4)
    m = rm.mdp
    plain = m.base
    for (s, a) in list(rm.transitions)[:12]:
        assert sorted(md.successors(m, s, a)) == sorted(md.successors(plain, s, a))


def test_expand_covers_reachable_closure():
    rm = make_random(5)
    em = md.expand(rm.mdp)
    assert em.states[em.initial] == tuple(rm.mdp.initial)
    # every listed transition stays inside the state set and normalizes
    for k in range(len(em.states)):
        for a in range(len(em.actions)):
            total = sum((p for _, p in em.transitions[k][a]), Fraction(0))
            assert total == 1
            assert all(0 <= j < len(em.states) for j, _ in em.transitions[k][a])


def test_expand_many_shares_states():
    rm = make_random(6)
    roots = sorted(rm.rewards)[:3]
    em, idx = md.expand_many(rm.mdp, roots)
    assert [em.states[i] for i in idx] == [tuple(s) for s in roots]


def test_non_normalizing_model_rejected():
    # transition circuit constantly outputs numerator 0
    b = ct.CircuitBuilder(3)
    t = b.build([b.const(0)])
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0)])
    m = md.SuccinctMdp(("x1",), (0,), ("a",), t, r, prob_denominator=2)
    with pytest.raises(md.ModelError, match="sum to"):
        md.successors(m, (0,), 0)


def test_numerator_above_denominator_rejected():
    b = ct.CircuitBuilder(3)
    t = b.build([b.const(1), b.const(1)])  # numerator 3 everywhere
    rb = ct.CircuitBuilder(1)
    r = rb.build([rb.const(0)])
    m = md.SuccinctMdp(("x1",), (0,), ("a",), t, r, prob_denominator=2)
    with pytest.raises(md.ModelError, match="exceeds denominator"):
        md.successors(m, (0,), 0)


def test_state_limit_env(monkeypatch):
    monkeypatch.setenv("SMDP_LIMIT_STATES", "2")
    rm = make_random(7)
    with pytest.raises(md.EnumerationLimitError):
        md.expand(rm.mdp)
    monkeypatch.setenv("SMDP_LIMIT_STATES", "0")
    with pytest.raises(md.ModelError):
        md.state_limit()


def test_save_load_roundtrip(tmp_path):
    rm = make_random(8)
    manifest = md.save_mdp(rm.mdp, tmp_path, horizon=3)
    m2, horizon = md.load_mdp(manifest)
    assert horizon == 3
    assert isinstance(m2, md.BoundedActionMdp)
    assert m2.actions == rm.mdp.actions
    assert m2.prob_denominator == rm.mdp.prob_denominator
    for (s, a) in list(rm.transitions)[:8]:
        assert md.successors(m2, s, a) == md.successors(rm.mdp, s, a)


def test_load_rejects_missing_fields(tmp_path):
    rm = make_random(9)
    manifest = md.save_mdp(rm.mdp, tmp_path)
    lines = [
        ln for ln in open(manifest).read().splitlines() if not ln.startswith("actions")
    ]
    with open(manifest, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with pytest.raises(md.ModelError, match="actions"):
        md.load_mdp(manifest)


def test_validate_passes_on_generated_models():
    for seed in range(3):
        rm = make_random(seed)
        assert md.validate(rm.mdp) == []


def test_validate_reports_enumerator_mismatch():
    rm = make_random(10)
    m = rm.mdp
    # swap successor circuits between two actions with different dynamics
    broken = md.BoundedActionMdp(
        m.base,
        (m.successor_circuits[1], m.successor_circuits[0]),
        m.max_branching,
    )
    assert md.validate(broken) != []
