"""Brute-force ground truth: finite-horizon backward induction, the
next-action decision, bounded-size policy existence at micro scale, and
exhaustive SAT-family oracles.

Nothing here is clever on purpose; every answer comes from exhaustive
enumeration with exact arithmetic, so these routines can arbitrate the
circuit-backed implementations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from . import circuit as ct
from . import mdp as md
from .bits import BitVector
from .cnf import Cnf, assignments
from .policy import ExplicitPolicy, PolicyError, StationaryPolicy, TimedExplicitPolicy
from .valuefn import value_of_policy

ORACLE_VAR_LIMIT = 20
MICRO_GATE_BOUND = 6
MICRO_INPUT_BOUND = 4
MICRO_CANDIDATE_CAP = 500_000


class OracleScaleError(ValueError):
    pass


# ---------------------------------------------------------------- SAT family


def _check_var_limit(cnf: Cnf):
    if cnf.num_vars > ORACLE_VAR_LIMIT:
        raise OracleScaleError(
            f"{cnf.num_vars} variables exceeds oracle limit {ORACLE_VAR_LIMIT}"
        )


def model_count(cnf: Cnf) -> int:
    _check_var_limit(cnf)
    return sum(1 for a in assignments(cnf.num_vars) if cnf.satisfied_by(a))


def sat_oracle(cnf: Cnf) -> bool:
    _check_var_limit(cnf)
    return any(cnf.satisfied_by(a) for a in assignments(cnf.num_vars))


def emajsat_oracle(cnf: Cnf, num_x: int) -> bool:
    """Some assignment to the first num_x variables has at least half of its
    extensions satisfying the formula."""
    _check_var_limit(cnf)
    num_y = cnf.num_vars - num_x
    half = 1 << num_y
    for xs in assignments(num_x):
        good = sum(
            1 for ys in assignments(num_y) if cnf.satisfied_by(xs + ys)
        )
        if 2 * good >= half:
            return True
    return False


def forall_exists_oracle(cnf: Cnf, num_x: int) -> bool:
    """Some assignment to the first num_x variables has all extensions
    satisfying the formula."""
    _check_var_limit(cnf)
    num_y = cnf.num_vars - num_x
    for xs in assignments(num_x):
        if all(cnf.satisfied_by(xs + ys) for ys in assignments(num_y)):
            return True
    return False


# ------------------------------------------------------- backward induction


@dataclass(frozen=True)
class OptimalSolution:
    explicit: md.ExplicitMdp
    horizon: int
    values: Dict[BitVector, Tuple[Fraction, ...]]
    optimal_actions: Dict[BitVector, Tuple[Tuple[int, ...], ...]]
    greedy: TimedExplicitPolicy

    def value(self, s: BitVector, i: int) -> Fraction:
        return self.values[tuple(s)][i]

    def greedy_stationary(self, i: Optional[int] = None) -> ExplicitPolicy:
        """Greedy table at one step index (the horizon by default)."""
        i = self.horizon if i is None else i
        mapping = {
            s: (acts[i][0] if i >= 1 else 0)
            for s, acts in self.optimal_actions.items()
        }
        return ExplicitPolicy(mapping, len(self.explicit.actions))


def solve_optimal(em: md.ExplicitMdp, horizon: int) -> OptimalSolution:
    """Exact backward induction; ties keep every optimal action, greedy picks
    the lowest index."""
    n_states = len(em.states)
    n_actions = len(em.actions)
    all_actions = tuple(range(n_actions))
    values: List[List[Fraction]] = [[Fraction(em.rewards[k])] for k in range(n_states)]
    opt: List[List[Tuple[int, ...]]] = [[all_actions] for _ in range(n_states)]
    for i in range(1, horizon + 1):
        for k in range(n_states):
            best = None
            best_actions: List[int] = []
            for a in range(n_actions):
                total = Fraction(em.rewards[k])
                for j, p in em.transitions[k][a]:
                    total += p * values[j][i - 1]
                if best is None or total > best:
                    best, best_actions = total, [a]
                elif total == best:
                    best_actions.append(a)
            values[k].append(best)
            opt[k].append(tuple(best_actions))
    greedy_map = {}
    for k in range(n_states):
        for i in range(1, horizon + 1):
            greedy_map[(em.states[k], i)] = opt[k][i][0]
    return OptimalSolution(
        explicit=em,
        horizon=horizon,
        values={em.states[k]: tuple(values[k]) for k in range(n_states)},
        optimal_actions={em.states[k]: tuple(opt[k]) for k in range(n_states)},
        greedy=TimedExplicitPolicy(greedy_map, n_actions),
    )


def best_next_action(
    m: md.Mdp, steps_remaining: int, s: BitVector, max_states: Optional[int] = None
) -> Tuple[int, ...]:
    """Actions taken at s by some optimal policy with the given number of
    steps before the horizon, from exhaustive expansion rooted at s."""
    if steps_remaining < 1:
        raise ValueError("need at least one step before the horizon")
    em = md.expand(m, s, max_states=max_states)
    sol = solve_optimal(em, steps_remaining)
    return sol.optimal_actions[tuple(s)][steps_remaining]


# ------------------------------------------------ bounded policy existence


def _enumerate_candidate_circuits(
    num_inputs: int, out_width: int, max_gates: int
) -> Iterator[ct.Circuit]:
    kinds2 = ("AND", "OR", "XOR")

    def gate_choices(num_prior: int):
        refs = [f"i{k}" for k in range(num_inputs)] + [f"g{j}" for j in range(num_prior)]
        for kind in kinds2:
            for a, b in itertools.combinations(refs, 2):
                yield (kind, (a, b))
        for a in refs:
            yield ("NOT", (a,))
        yield ("CONST0", ())
        yield ("CONST1", ())

    def rec(gates: List[ct.Gate]):
        refs = [f"i{k}" for k in range(num_inputs)] + [f"g{j}" for j in range(len(gates))]
        for outs in itertools.product(refs, repeat=out_width):
            yield ct.Circuit(num_inputs, tuple(gates), outs, name="cand")
        if len(gates) < max_gates:
            for kind, args in gate_choices(len(gates)):
                yield from rec(gates + [ct.Gate(len(gates), kind, args)])

    if num_inputs == 0 and max_gates == 0:
        return
    yield from rec([])


def bounded_policy_exists(
    m: md.Mdp,
    horizon: int,
    size_bound: int,
    reward_bound: Fraction,
    strict: bool = False,
) -> Tuple[bool, Optional[object]]:
    """Is there a stationary policy circuit of at most size_bound gates whose
    exact expected reward meets reward_bound (>= by default, > if strict)?

    Two regimes only: a vacuous size bound (>= |A| * 2**n, the universal
    compilation bound) answered by backward induction, or micro-scale circuit
    enumeration. Anything in between is refused: no efficient search exists.
    """
    n_bits = m.num_vars
    n_actions = len(m.actions)
    meets = (lambda v: v > reward_bound) if strict else (lambda v: v >= reward_bound)
    if n_bits < 60 and size_bound >= n_actions * (1 << n_bits):
        em = md.expand(m)
        sol = solve_optimal(em, horizon)
        best = sol.values[tuple(m.initial)][horizon]
        if meets(best):
            return True, sol.greedy
        return False, None
    if size_bound > MICRO_GATE_BOUND or n_bits > MICRO_INPUT_BOUND:
        raise OracleScaleError(
            f"size bound {size_bound} with {n_bits} state bits is outside the "
            f"micro-enumeration regime (<= {MICRO_GATE_BOUND} gates, "
            f"<= {MICRO_INPUT_BOUND} state bits)"
        )
    em = md.expand(m)
    seen_behaviors = set()
    examined = 0
    aw = m.action_width
    for cand in _enumerate_candidate_circuits(n_bits, aw, size_bound):
        examined += 1
        if examined > MICRO_CANDIDATE_CAP:
            raise OracleScaleError(
                f"candidate count exceeds cap {MICRO_CANDIDATE_CAP}"
            )
        key = ct.truth_table(cand).tobytes()
        if key in seen_behaviors:
            continue
        seen_behaviors.add(key)
        try:
            policy = StationaryPolicy(cand, n_actions)
            table = value_of_policy(em, policy, horizon)
        except PolicyError:
            continue  # decodes an out-of-range action somewhere
        if meets(table.value(em.states[em.initial], horizon)):
            return True, policy
    return False, None
