"""Succinct MDPs, bounded-action MDPs, and their explicit expansion.

States are assignments to Boolean variables. The transition circuit takes
``[s bits | s' bits | action-index bits]`` and outputs the probability
numerator over a single declared denominator D, so all probability
arithmetic is exact. The reward circuit maps a state to a two's-complement
integer.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import circuit as ct
from .bits import BitVector, bits_to_int, int_to_bits, twos_to_int, width_for_count

DEFAULT_STATE_LIMIT = 1 << 20


class ModelError(ValueError):
    pass


class EnumerationLimitError(ModelError):
    pass


def state_limit() -> int:
    raw = os.environ.get("SMDP_LIMIT_STATES")
    if raw is None:
        return DEFAULT_STATE_LIMIT
    limit = int(raw)
    if limit <= 0:
        raise ModelError(f"SMDP_LIMIT_STATES must be positive, got {limit}")
    return limit


@dataclass(frozen=True)
class SuccinctMdp:
    var_names: Tuple[str, ...]
    initial: BitVector
    actions: Tuple[str, ...]
    t_circuit: ct.Circuit
    r_circuit: ct.Circuit
    prob_denominator: int
    name: str = "mdp"

    def __post_init__(self):
        n = len(self.var_names)
        if len(self.initial) != n:
            raise ModelError("initial state width does not match variable count")
        if not self.actions:
            raise ModelError("need at least one action")
        if self.prob_denominator < 1:
            raise ModelError("probability denominator must be positive")
        want_t = 2 * n + self.action_width
        if self.t_circuit.num_inputs != want_t:
            raise ModelError(
                f"transition circuit takes {self.t_circuit.num_inputs} inputs, expected {want_t}"
            )
        if self.r_circuit.num_inputs != n:
            raise ModelError(
                f"reward circuit takes {self.r_circuit.num_inputs} inputs, expected {n}"
            )
        if self.t_circuit.num_outputs < 1 or self.r_circuit.num_outputs < 1:
            raise ModelError("transition and reward circuits need at least one output")

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def action_width(self) -> int:
        return width_for_count(len(self.actions))

    @property
    def prob_num_width(self) -> int:
        return self.t_circuit.num_outputs

    @property
    def reward_width(self) -> int:
        return self.r_circuit.num_outputs


@dataclass(frozen=True)
class BoundedActionMdp:
    base: SuccinctMdp
    successor_circuits: Tuple[ct.Circuit, ...]
    max_branching: int

    def __post_init__(self):
        if len(self.successor_circuits) != len(self.base.actions):
            raise ModelError("need one successor circuit per action")
        if self.max_branching < 1:
            raise ModelError("max branching must be positive")
        n = self.base.num_vars
        want_in = n + self.slot_width
        for a, c in zip(self.base.actions, self.successor_circuits):
            if c.num_inputs != want_in:
                raise ModelError(
                    f"successor circuit for {a} takes {c.num_inputs} inputs, expected {want_in}"
                )
            if c.num_outputs != 1 + n:
                raise ModelError(
                    f"successor circuit for {a} has {c.num_outputs} outputs, expected {1 + n}"
                )

    @property
    def slot_width(self) -> int:
        return width_for_count(self.max_branching)

    # proxies so callers can treat both model kinds uniformly
    @property
    def var_names(self):
        return self.base.var_names

    @property
    def initial(self):
        return self.base.initial

    @property
    def actions(self):
        return self.base.actions

    @property
    def t_circuit(self):
        return self.base.t_circuit

    @property
    def r_circuit(self):
        return self.base.r_circuit

    @property
    def prob_denominator(self):
        return self.base.prob_denominator

    @property
    def name(self):
        return self.base.name

    @property
    def num_vars(self):
        return self.base.num_vars

    @property
    def action_width(self):
        return self.base.action_width


Mdp = Union[SuccinctMdp, BoundedActionMdp]


@dataclass(frozen=True)
class ExplicitMdp:
    states: Tuple[BitVector, ...]
    initial: int
    actions: Tuple[str, ...]
    transitions: Tuple[Tuple[Tuple[Tuple[int, Fraction], ...], ...], ...]
    rewards: Tuple[int, ...]

    def index_of(self, s: BitVector) -> int:
        try:
            return self._index[tuple(s)]
        except AttributeError:
            object.__setattr__(self, "_index", {st: i for i, st in enumerate(self.states)})
            return self._index[tuple(s)]


def _unsigned_rows(out: np.ndarray) -> np.ndarray:
    width = out.shape[1]
    weights = (1 << np.arange(width - 1, -1, -1)).astype(np.int64)
    return out.astype(np.int64) @ weights


def transition_prob(m: Mdp, s: BitVector, s2: BitVector, a: int) -> Fraction:
    """Exact probability of reaching s2 from s under action index a."""
    if not 0 <= a < len(m.actions):
        raise ModelError(f"action index {a} out of range")
    base = m.base if isinstance(m, BoundedActionMdp) else m
    bits = tuple(s) + tuple(s2) + int_to_bits(a, base.action_width)
    num = bits_to_int(ct.eval(base.t_circuit, bits))
    if num > base.prob_denominator:
        raise ModelError(
            f"transition numerator {num} exceeds denominator {base.prob_denominator}"
        )
    return Fraction(num, base.prob_denominator)


def reward(m: Mdp, s: BitVector) -> int:
    """Two's-complement reading of the reward circuit output."""
    return twos_to_int(ct.eval(m.r_circuit, tuple(s)))


def reward_batch(m: Mdp, states: Sequence[BitVector]) -> List[int]:
    if not states:
        return []
    out = ct.eval_batch(m.r_circuit, np.array(states, dtype=bool))
    width = out.shape[1]
    vals = _unsigned_rows(out)
    vals = np.where(out[:, 0], vals - (1 << width), vals)
    return [int(v) for v in vals]


def successors(m: Mdp, s: BitVector, a: int) -> List[Tuple[BitVector, Fraction]]:
    """All positive-probability successors of s under action a, with exact
    probabilities summing to 1."""
    return successors_batch(m, [tuple(s)], a)[0]


def successors_batch(
    m: Mdp, states: Sequence[BitVector], a: int
) -> List[List[Tuple[BitVector, Fraction]]]:
    if not 0 <= a < len(m.actions):
        raise ModelError(f"action index {a} out of range")
    if not states:
        return []
    if isinstance(m, BoundedActionMdp):
        cands, cand_arr, src_idx = _bounded_candidates(m, states, a)
    else:
        cands, cand_arr, src_idx = _enumerated_candidates(m, states, a)
    base = m.base if isinstance(m, BoundedActionMdp) else m
    # one transition-circuit evaluation over every (s, s') candidate pair
    a_bits = int_to_bits(a, base.action_width)
    if len(cand_arr):
        states_arr = np.array(states, dtype=bool)
        rows = np.concatenate(
            [
                states_arr[src_idx],
                cand_arr,
                np.tile(np.array(a_bits, dtype=bool), (len(cand_arr), 1)),
            ],
            axis=1,
        )
        nums = _unsigned_rows(ct.eval_batch(base.t_circuit, rows))
    else:
        nums = []
    result = []
    pos = 0
    D = base.prob_denominator
    for s, succ_list in zip(states, cands):
        pairs = []
        total = 0
        for s2 in succ_list:
            num = int(nums[pos])
            pos += 1
            if num > D:
                raise ModelError(f"transition numerator {num} exceeds denominator {D}")
            if num > 0:
                pairs.append((s2, Fraction(num, D)))
                total += num
            elif isinstance(m, BoundedActionMdp):
                raise ModelError(
                    f"successor enumerator for {m.actions[a]} lists a zero-probability state"
                )
        if total != D:
            raise ModelError(
                f"probabilities from state {s} under {m.actions[a]} sum to {total}/{D}, not 1"
            )
        result.append(pairs)
    return result


def _bounded_candidates(m: BoundedActionMdp, states, a):
    """Candidate successors per state plus the flat bool array and source-state
    index of every candidate (for one batched transition evaluation)."""
    n_states = len(states)
    B = m.max_branching
    slot_rows = ct.all_input_rows(m.slot_width)[:B]
    states_arr = np.array(states, dtype=bool)
    rows = np.concatenate(
        [np.repeat(states_arr, B, axis=0), np.tile(slot_rows, (n_states, 1))], axis=1
    )
    out = ct.eval_batch(m.successor_circuits[a], rows)
    valid = out[:, 0]
    succ_tuples = [tuple(r) for r in out[:, 1:].astype(np.uint8).tolist()]
    result = []
    keep = []
    for si in range(n_states):
        succ = []
        seen = set()
        for slot in range(si * B, (si + 1) * B):
            if valid[slot]:
                s2 = succ_tuples[slot]
                if s2 in seen:
                    raise ModelError(
                        f"duplicate successor slot in enumerator for {m.actions[a]}"
                    )
                seen.add(s2)
                succ.append(s2)
                keep.append(slot)
        result.append(succ)
    keep_arr = np.array(keep, dtype=np.int64)
    return result, out[keep_arr, 1:] if keep else out[:0, 1:], keep_arr // B


def _enumerated_candidates(m: SuccinctMdp, states, a):
    n = m.num_vars
    if (1 << n) > state_limit():
        raise EnumerationLimitError(
            f"cannot enumerate 2^{n} successor candidates (limit {state_limit()})"
        )
    rows = ct.all_input_rows(n)
    all_states = [tuple(r) for r in rows.astype(np.uint8).tolist()]
    cand_arr = np.tile(rows, (len(states), 1))
    src_idx = np.repeat(np.arange(len(states), dtype=np.int64), len(all_states))
    return [list(all_states) for _ in states], cand_arr, src_idx


def expand(
    m: Mdp, s0: Optional[BitVector] = None, max_states: Optional[int] = None
) -> ExplicitMdp:
    """Enumerate the states reachable from s0 (closure under all actions)."""
    if s0 is None:
        s0 = m.initial
    em, _ = expand_many(m, [s0], max_states=max_states)
    return em


def _candidate_arrays(m: Mdp, states_arr: np.ndarray, a: int):
    """Flat candidate-successor array plus the source-state index per row.

    For bounded-action models only the enumerator's valid slots appear; for
    plain succinct models every state appears as a candidate of every source.
    """
    n_states = len(states_arr)
    if isinstance(m, BoundedActionMdp):
        B = m.max_branching
        slot_rows = ct.all_input_rows(m.slot_width)[:B]
        rows = np.concatenate(
            [np.repeat(states_arr, B, axis=0), np.tile(slot_rows, (n_states, 1))],
            axis=1,
        )
        out = ct.eval_batch(m.successor_circuits[a], rows)
        keep = np.flatnonzero(out[:, 0])
        return out[keep, 1:], keep // B
    n = m.num_vars
    if (1 << n) > state_limit():
        raise EnumerationLimitError(
            f"cannot enumerate 2^{n} successor candidates (limit {state_limit()})"
        )
    all_rows = ct.all_input_rows(n)
    cand = np.tile(all_rows, (n_states, 1))
    src = np.repeat(np.arange(n_states, dtype=np.int64), len(all_rows))
    return cand, src


def _pack_keys(arr: np.ndarray) -> Tuple[bytes, int]:
    """Per-row byte keys of a bool array: (flat buffer, bytes per row)."""
    if arr.shape[1] == 0:
        return b"\x00" * len(arr), 1
    packed = np.packbits(arr, axis=1)
    return packed.tobytes(), packed.shape[1]


def expand_many(
    m: Mdp, roots: Sequence[BitVector], max_states: Optional[int] = None
) -> Tuple[ExplicitMdp, List[int]]:
    """Joint closure of several root states; returns the model plus the index
    of each root. Useful when many instances share one circuit MDP."""
    if not roots:
        raise ModelError("need at least one root state")
    limit = max_states if max_states is not None else state_limit()
    base = m.base if isinstance(m, BoundedActionMdp) else m
    D = base.prob_denominator
    frac = [Fraction(num, D) for num in range(D + 1)]
    n_actions = len(m.actions)
    a_bits = [
        np.tile(np.array(int_to_bits(a, base.action_width), dtype=bool), (1, 1))
        for a in range(n_actions)
    ]

    states: List[BitVector] = []
    index: Dict[bytes, int] = {}
    root_arr = np.array([tuple(s) for s in roots], dtype=bool)
    root_keys, _ = _pack_keys(root_arr)
    root_kw = max(1, (root_arr.shape[1] + 7) // 8)
    frontier_rows: List[BitVector] = []
    for i, s in enumerate(roots):
        key = root_keys[i * root_kw : (i + 1) * root_kw]
        if key not in index:
            index[key] = len(states)
            states.append(tuple(s))
            frontier_rows.append(tuple(s))
    rows: List[List[Tuple[Tuple[int, Fraction], ...]]] = []
    frontier_arr = np.array(frontier_rows, dtype=bool)
    while len(frontier_arr):
        n_frontier = len(frontier_arr)
        layer: List[List[Optional[Tuple]]] = [[None] * n_actions for _ in range(n_frontier)]
        next_frontier: List[BitVector] = []
        for a in range(n_actions):
            cand, src = _candidate_arrays(m, frontier_arr, a)
            t_rows = np.concatenate(
                [frontier_arr[src], cand, np.repeat(a_bits[a], len(cand), axis=0)],
                axis=1,
            )
            nums = _unsigned_rows(ct.eval_batch(base.t_circuit, t_rows))
            keys, kw = _pack_keys(cand)
            bounded = isinstance(m, BoundedActionMdp)
            pairs: List[Tuple[int, Fraction]] = []
            seen = set()
            total = 0
            prev_src = src[0] if len(src) else -1
            cand_list = None  # lazy row unpacking for new states only

            def flush(si: int):
                nonlocal pairs, seen, total
                if total != D:
                    raise ModelError(
                        f"probabilities from state {states_of(si)} under "
                        f"{m.actions[a]} sum to {total}/{D}, not 1"
                    )
                layer[si][a] = tuple(pairs)
                pairs, seen, total = [], set(), 0

            def states_of(si: int) -> BitVector:
                return tuple(int(b) for b in frontier_arr[si])

            for r in range(len(src)):
                si = int(src[r])
                if si != prev_src:
                    flush(prev_src)
                    prev_src = si
                num = int(nums[r])
                if num > D:
                    raise ModelError(
                        f"transition numerator {num} exceeds denominator {D}"
                    )
                key = keys[r * kw : (r + 1) * kw]
                if bounded:
                    if key in seen:
                        raise ModelError(
                            f"duplicate successor slot in enumerator for {m.actions[a]}"
                        )
                    seen.add(key)
                    if num == 0:
                        raise ModelError(
                            f"successor enumerator for {m.actions[a]} lists a "
                            f"zero-probability state"
                        )
                if num == 0:
                    continue
                j = index.get(key)
                if j is None:
                    j = len(states)
                    if j >= limit:
                        raise EnumerationLimitError(
                            f"reachable state count exceeds limit {limit}"
                        )
                    if cand_list is None:
                        cand_list = cand.astype(np.uint8)
                    s2 = tuple(int(b) for b in cand_list[r])
                    index[key] = j
                    states.append(s2)
                    next_frontier.append(s2)
                pairs.append((j, frac[num]))
                total += num
            if len(src):
                flush(prev_src)
            # states with no candidate rows at all cannot normalize
            for si in range(n_frontier):
                if layer[si][a] is None:
                    raise ModelError(
                        f"probabilities from state {states_of(si)} under "
                        f"{m.actions[a]} sum to 0/{D}, not 1"
                    )
        rows.extend([tuple(row) for row in layer])
        frontier_arr = np.array(next_frontier, dtype=bool) if next_frontier else np.zeros(
            (0, root_arr.shape[1]), dtype=bool
        )
    rewards = tuple(reward_batch(m, states))
    em = ExplicitMdp(
        states=tuple(states),
        initial=0,
        actions=tuple(m.actions),
        transitions=tuple(tuple(row) for row in rows),
        rewards=rewards,
    )
    root_idx = [
        index[root_keys[i * root_kw : (i + 1) * root_kw]] for i in range(len(roots))
    ]
    return em, root_idx


def save_mdp(m: Mdp, directory, horizon: Optional[int] = None) -> str:
    """Write the manifest and companion netlists; returns the manifest path."""
    base = m.base if isinstance(m, BoundedActionMdp) else m
    os.makedirs(directory, exist_ok=True)
    ct.write_netlist(base.t_circuit, os.path.join(directory, "transition.net"))
    ct.write_netlist(base.r_circuit, os.path.join(directory, "reward.net"))
    lines = [
        f"mdp {base.name}",
        "vars " + " ".join(base.var_names),
        "init " + "".join(str(b) for b in base.initial),
        "actions " + " ".join(base.actions),
        f"prob_denominator {base.prob_denominator}",
        f"prob_width {base.prob_num_width}",
        f"reward_width {base.reward_width}",
        "transition transition.net",
        "reward reward.net",
    ]
    if isinstance(m, BoundedActionMdp):
        for a, c in zip(base.actions, m.successor_circuits):
            fname = f"succ_{a}.net"
            ct.write_netlist(c, os.path.join(directory, fname))
            lines.append(f"successor {a} {fname} branching {m.max_branching}")
    if horizon is not None:
        lines.append(f"horizon {horizon}")
    path = os.path.join(directory, "mdp.manifest")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_mdp(manifest_path) -> Tuple[Mdp, Optional[int]]:
    """Read a manifest; returns the model and the declared horizon, if any."""
    fields: Dict[str, str] = {}
    succ_lines: List[Tuple[str, str, int]] = []
    with open(manifest_path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "successor":
                if len(parts) != 5 or parts[3] != "branching":
                    raise ModelError(f"line {lineno}: malformed successor line")
                succ_lines.append((parts[1], parts[2], int(parts[4])))
            else:
                fields[parts[0]] = " ".join(parts[1:])
    for key in (
        "mdp", "vars", "init", "actions", "prob_denominator",
        "prob_width", "reward_width", "transition", "reward",
    ):
        if key not in fields:
            raise ModelError(f"MDP manifest missing {key!r} line")
    directory = os.path.dirname(os.path.abspath(manifest_path))
    t_circuit = ct.read_netlist(os.path.join(directory, fields["transition"]))
    r_circuit = ct.read_netlist(os.path.join(directory, fields["reward"]))
    init = fields["init"]
    if any(ch not in "01" for ch in init):
        raise ModelError(f"bad init bitstring {init!r}")
    base = SuccinctMdp(
        var_names=tuple(fields["vars"].split()),
        initial=tuple(int(ch) for ch in init),
        actions=tuple(fields["actions"].split()),
        t_circuit=t_circuit,
        r_circuit=r_circuit,
        prob_denominator=int(fields["prob_denominator"]),
        name=fields["mdp"],
    )
    if base.prob_num_width != int(fields["prob_width"]):
        raise ModelError("declared prob_width does not match transition circuit")
    if base.reward_width != int(fields["reward_width"]):
        raise ModelError("declared reward_width does not match reward circuit")
    horizon = int(fields["horizon"]) if "horizon" in fields else None
    if not succ_lines:
        return base, horizon
    by_action = {a: (f, b) for a, f, b in succ_lines}
    if set(by_action) != set(base.actions):
        raise ModelError("successor lines must cover every action exactly once")
    branchings = {b for _, b in by_action.values()}
    if len(branchings) != 1:
        raise ModelError("successor lines disagree on branching")
    circuits = tuple(
        ct.read_netlist(os.path.join(directory, by_action[a][0])) for a in base.actions
    )
    return BoundedActionMdp(base, circuits, branchings.pop()), horizon


def validate(m: Mdp, sample: int = 64, seed: int = 0) -> List[str]:
    """Best-effort well-formedness report; empty list means no violation found.

    Checks normalization and (for bounded-action models) enumerator fidelity,
    exhaustively when the state space is small and on a seeded random sample
    otherwise.
    """
    import random

    report: List[str] = []
    base = m.base if isinstance(m, BoundedActionMdp) else m
    n = base.num_vars
    if (1 << n) <= 4096:
        states = [tuple(int(b) for b in row) for row in ct.all_input_rows(n)]
        exhaustive = True
    else:
        rng = random.Random(seed)
        states = [tuple(rng.randrange(2) for _ in range(n)) for _ in range(sample)]
        states.append(tuple(base.initial))
        exhaustive = False
    for a in range(len(base.actions)):
        try:
            succ = successors_batch(m, states, a)
        except ModelError as exc:
            report.append(f"action {base.actions[a]}: {exc}")
            continue
        if isinstance(m, BoundedActionMdp) and exhaustive and (1 << n) <= 256:
            # cross-check the enumerator against brute-force t enumeration
            plain = SuccinctMdp(
                base.var_names,
                base.initial,
                base.actions,
                base.t_circuit,
                base.r_circuit,
                base.prob_denominator,
                base.name,
            )
            brute = successors_batch(plain, states, a)
            for s, got, want in zip(states, succ, brute):
                if sorted(got) != sorted(want):
                    report.append(
                        f"action {base.actions[a]}: enumerator mismatch at state {s}"
                    )
                    break
    return report
