"""Acceptance gate: ten end-to-end checks, each printing a pass/fail line.

Every numeric comparison is exact rational equality unless the check is
explicitly statistical (criterion 10).  Runtime bounds are asserted so that
regressions in the batch evaluator or the expansion code fail loudly.
"""

import random
import time
from fractions import Fraction

from smdp import mdp as md
from smdp import verify
from smdp.evaluator import expected_reward_exact, expected_reward_mc
from smdp.policy import TimedExplicitPolicy
from smdp.random_models import random_bounded_mdp, random_stationary_policy
from smdp.valuefn import extract_policy, value_of_policy


def _report(criterion: str, ok: bool, detail: str):
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def _random_suite(count: int, seed: int = 0):
    rng = random.Random(seed)
    suite = []
    for _ in range(count):
        n = rng.randint(1, 4)
        k = rng.randint(1, 3)
        rm = random_bounded_mdp(rng, n, k)
        p = random_stationary_policy(rng, n, k)
        horizon = rng.randint(1, 4)
        suite.append((rm, p, horizon))
    return suite


def _suite_rows_ok(rows):
    bad = [r for r in rows if not r.ok]
    detail = f"{len(rows) - len(bad)}/{len(rows)} cases"
    if bad:
        detail += f"; first failure {bad[0].case}: expected {bad[0].expected}, got {bad[0].got}"
    return not bad, detail


def test_criterion_1_evaluator_matches_value_recursion():
    start = time.monotonic()
    suite = _random_suite(50)
    mismatches = 0
    for rm, p, horizon in suite:
        got = expected_reward_exact(rm.mdp, p, horizon).expected_reward
        em = md.expand(rm.mdp)
        want = value_of_policy(em, p, horizon).value(tuple(rm.mdp.initial), horizon)
        if got != want:
            mismatches += 1
    elapsed = time.monotonic() - start
    ok = mismatches == 0 and elapsed < 30
    _report(
        "criterion 1 (evaluator = value recursion)",
        ok,
        f"{len(suite)} random models, {mismatches} mismatches, {elapsed:.1f}s (< 30s)",
    )


def test_criterion_2_trajectory_mass_is_one():
    suite = _random_suite(50)
    bad = 0
    for rm, p, horizon in suite:
        rep = expected_reward_exact(rm.mdp, p, horizon)
        if any(mass != 1 for mass in rep.per_depth_mass):
            bad += 1
    _report(
        "criterion 2 (trajectory mass normalization)",
        bad == 0,
        f"{len(suite)} models, every depth mass exactly 1" if bad == 0 else f"{bad} models off",
    )


def test_criterion_3_next_action_correspondence():
    start = time.monotonic()
    rows = verify.suite_nextaction(max_n=3, cases=100, seed=0)
    elapsed = time.monotonic() - start
    ok, detail = _suite_rows_ok(rows)
    ok = ok and elapsed < 60
    _report(
        "criterion 3 (next-action vs SAT, exhaustive n<=2 + 100 random n=3)",
        ok,
        f"{detail}, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_4_eval_reward_is_model_fraction():
    start = time.monotonic()
    rows = verify.suite_evalreward(max_n=10, cases=50, seed=0)
    elapsed = time.monotonic() - start
    ok, detail = _suite_rows_ok(rows)
    ok = ok and elapsed < 60
    _report(
        "criterion 4 (generated-policy reward = model count / 2^n)",
        ok,
        f"{detail}, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_5_consistency_matches_unsat():
    start = time.monotonic()
    rows = verify.suite_consistency(max_n=8, cases=50, seed=0)
    elapsed = time.monotonic() - start
    ok, detail = _suite_rows_ok(rows)
    ok = ok and elapsed < 60
    _report(
        "criterion 5 (zero value function consistent iff formula unsatisfiable)",
        ok,
        f"{detail}, {elapsed:.1f}s (< 60s)",
    )


def test_criterion_6_valuefn_grid_correspondence():
    rows = verify.suite_valuechoice()
    ok, detail = _suite_rows_ok(rows)
    _report("criterion 6 (reward-1 x-choice iff forall-exists oracle)", ok, detail)


def test_criterion_7_bounded_policy_micro_grid():
    rows = verify.suite_boundedpolicy()
    ok, detail = _suite_rows_ok(rows)
    _report("criterion 7 (bounded-policy existence vs e-majsat grid)", ok, detail)


def test_criterion_8_dnf_bound_and_policy_compilation():
    rows = verify.suite_dnf(max_n=8, cases=100, seed=0)
    ok, detail = _suite_rows_ok(rows)
    _report("criterion 8 (canonical DNF equivalent, <= 2^n terms)", ok, detail)


def test_criterion_9_extraction_round_trip():
    rng = random.Random(0)
    bad = 0
    total = 25
    for _ in range(total):
        n = rng.randint(1, 4)
        k = rng.randint(1, 3)
        rm = random_bounded_mdp(rng, n, k, max_branching=rng.randint(1, 4))
        p = random_stationary_policy(rng, n, k)
        horizon = rng.randint(1, 4)
        em = md.expand_many(rm.mdp, sorted(rm.rewards))[0]
        table = value_of_policy(em, p, horizon)
        mapping = {
            (s, i): extract_policy(rm.mdp, table, horizon, s, i)
            for s in table.values
            for i in range(1, horizon + 1)
        }
        again = value_of_policy(em, TimedExplicitPolicy(mapping, k), horizon)
        if again.values != table.values:
            bad += 1
    _report(
        "criterion 9 (extract-policy round trip)",
        bad == 0,
        f"{total} bounded-action models, identical value tables" if bad == 0 else f"{bad} mismatches",
    )


def test_criterion_10_monte_carlo_within_error_bars():
    rng = random.Random(0)
    hits = 0
    total = 40
    for _ in range(total):
        n = rng.randint(1, 3)
        k = rng.randint(1, 3)
        rm = random_bounded_mdp(rng, n, k)
        p = random_stationary_policy(rng, n, k)
        horizon = rng.randint(1, 4)
        exact = expected_reward_exact(rm.mdp, p, horizon).expected_reward
        est = expected_reward_mc(rm.mdp, p, horizon, samples=10000, seed=0)
        err = abs(float(est.mean - exact))
        if err <= max(5 * est.stderr, 1e-12):
            hits += 1
    ok = hits >= int(0.95 * total)
    _report(
        "criterion 10 (Monte-Carlo within 5 standard errors)",
        ok,
        f"{hits}/{total} cases within 5*stderr (need >= {int(0.95 * total)})",
    )
