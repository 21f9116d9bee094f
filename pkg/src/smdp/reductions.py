"""Generators for the five hardness constructions, each emitting a
circuit-backed MDP plus the companion objects (state, policy, value
function, bounds) and a description of the brute-force check that decides
the instance.

Sequence-encoded states use the layout ``[length counter | slot 1 | ... |
slot L]``. Slot elements are coded as integers: 0 for an empty slot, then
``2v`` / ``2v + 1`` for the positive / negative literal of variable v, and
two trailing codes for the sat / unsat markers when present. Transition
circuits are built so every state, including junk encodings, normalizes
exactly: any state from which the action cannot act is a self-loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .bits import BitVector, bits_to_int, int_to_bits, width_for_count
from .circuit import Circuit, CircuitBuilder
from .cnf import Cnf
from .mdp import BoundedActionMdp, SuccinctMdp
from .policy import StationaryPolicy
from .valuefn import ValueCircuit


class ReductionError(ValueError):
    pass


@dataclass(frozen=True)
class SequenceStateLayout:
    """Bit layout of states that encode bounded element sequences."""

    num_formula_vars: int
    max_length: int
    clause_block: int = 0  # leading slots that spell out the clause list
    with_markers: bool = False

    @property
    def max_code(self) -> int:
        top = 2 * self.num_formula_vars + 1
        return top + 2 if self.with_markers else top

    @property
    def element_width(self) -> int:
        return width_for_count(self.max_code + 1)

    @property
    def count_width(self) -> int:
        return width_for_count(self.max_length + 1)

    @property
    def state_width(self) -> int:
        return self.count_width + self.max_length * self.element_width

    @property
    def sat_code(self) -> int:
        if not self.with_markers:
            raise ReductionError("layout has no marker elements")
        return 2 * self.num_formula_vars + 2

    @property
    def unsat_code(self) -> int:
        return self.sat_code + 1

    def literal_code(self, lit: int) -> int:
        v = abs(lit)
        if lit == 0 or v > self.num_formula_vars:
            raise ReductionError(f"literal {lit} out of range")
        return 2 * v + (1 if lit < 0 else 0)

    def var_names(self) -> Tuple[str, ...]:
        names = [f"q{i + 1}" for i in range(self.count_width)]
        for j in range(self.max_length):
            names.extend(f"e{j + 1}b{k + 1}" for k in range(self.element_width))
        return tuple(names)

    def encode(self, codes: Sequence[int]) -> BitVector:
        if len(codes) > self.max_length:
            raise ReductionError(
                f"sequence of {len(codes)} elements exceeds max length {self.max_length}"
            )
        bits = list(int_to_bits(len(codes), self.count_width))
        for j in range(self.max_length):
            code = codes[j] if j < len(codes) else 0
            bits.extend(int_to_bits(code, self.element_width))
        return tuple(bits)

    def decode(self, bits: Sequence[int]) -> List[int]:
        if len(bits) != self.state_width:
            raise ReductionError("state width mismatch")
        length = bits_to_int(bits[: self.count_width])
        if length > self.max_length:
            raise ReductionError(f"decoded length {length} exceeds max {self.max_length}")
        codes = []
        ew = self.element_width
        for j in range(length):
            off = self.count_width + j * ew
            codes.append(bits_to_int(bits[off : off + ew]))
        return codes


class _SeqView:
    """Cached predicates over the wires of one sequence-encoded state."""

    def __init__(self, b: CircuitBuilder, layout: SequenceStateLayout, offset: int):
        self.b = b
        self.layout = layout
        cw, ew, L = layout.count_width, layout.element_width, layout.max_length
        self.q = [b.inp(offset + i) for i in range(cw)]
        self.slots = [
            [b.inp(offset + cw + j * ew + k) for k in range(ew)] for j in range(L)
        ]
        self.all_refs = [b.inp(offset + i) for i in range(layout.state_width)]
        self._len_eq: Dict[int, str] = {}
        self._slot_is: Dict[Tuple[int, int], str] = {}

    def len_eq(self, k: int) -> str:
        ref = self._len_eq.get(k)
        if ref is None:
            ref = self.b.eq_const(self.q, k)
            self._len_eq[k] = ref
        return ref

    def slot_is(self, j: int, code: int) -> str:
        ref = self._slot_is.get((j, code))
        if ref is None:
            ref = self.b.eq_const(self.slots[j], code)
            self._slot_is[(j, code)] = ref
        return ref

    def can_append(self) -> str:
        return self.b.or_all([self.len_eq(k) for k in range(self.layout.max_length)])

    def has_code(self, code: int) -> str:
        return self.b.or_all(
            [self.slot_is(j, code) for j in range(self.layout.max_length)]
        )

    def slot_is_literal(self, j: int) -> str:
        return self.b.or_all(
            [
                self.slot_is(j, c)
                for c in range(2, 2 * self.layout.num_formula_vars + 2)
            ]
        )


class _SeqPair:
    """Current/next state pair for transition circuits: appends and identity."""

    def __init__(self, b: CircuitBuilder, layout: SequenceStateLayout):
        self.b = b
        self.layout = layout
        self.cur = _SeqView(b, layout, 0)
        self.nxt = _SeqView(b, layout, layout.state_width)
        self.slot_same = [
            b.eq_refs(self.nxt.slots[j], self.cur.slots[j])
            for j in range(layout.max_length)
        ]
        # all slots equal except position k
        pre = [b.const(1)]
        for j in range(layout.max_length):
            pre.append(b.and_(pre[-1], self.slot_same[j]))
        suf = [b.const(1)]
        for j in range(layout.max_length - 1, -1, -1):
            suf.append(b.and_(suf[-1], self.slot_same[j]))
        suf.reverse()
        self.others_same = [
            b.and_(pre[k], suf[k + 1]) for k in range(layout.max_length)
        ]
        self.same = b.and_(pre[-1], b.eq_refs(self.nxt.q, self.cur.q))

    def append_cond(self, code: int) -> str:
        """Next state equals current state with `code` appended."""
        b = self.b
        terms = []
        for k in range(self.layout.max_length):
            terms.append(
                b.and_all(
                    [
                        self.cur.len_eq(k),
                        self.nxt.len_eq(k + 1),
                        self.nxt.slot_is(k, code),
                        self.others_same[k],
                    ]
                )
            )
        return b.or_all(terms)


def _append_outputs(
    b: CircuitBuilder, view: _SeqView, code_bits: Sequence[str]
) -> List[str]:
    """State wires for view-with-code-appended (garbage when the sequence is
    full; callers mux that case away)."""
    layout = view.layout
    out = b.select_value(
        [(view.len_eq(k), k + 1) for k in range(layout.max_length)],
        layout.count_width,
    )
    for j in range(layout.max_length):
        here = view.len_eq(j)
        out.extend(b.mux_refs(here, code_bits, view.slots[j]))
    return out


def _const_bits(b: CircuitBuilder, value: int, width: int) -> List[str]:
    return [b.const(bit) for bit in int_to_bits(value, width)]


def _assignment_wires(b, view: _SeqView, tail_offset: int, n: int) -> List[str]:
    """True-wires for variables 1..n read off ordered tail slots."""
    # positive literal codes are even, so the slot LSB is the negation flag
    return [b.not_(view.slots[tail_offset + i][-1]) for i in range(n)]


def _cnf_sat_wire(b, cnf: Cnf, var_true: Sequence[str]) -> str:
    clause_wires = []
    for clause in cnf.clauses:
        lits = [
            var_true[abs(lit) - 1] if lit > 0 else b.not_(var_true[abs(lit) - 1])
            for lit in clause
        ]
        clause_wires.append(b.or_all(lits))
    return b.and_all(clause_wires)


@dataclass(frozen=True)
class ReductionInstance:
    name: str
    mdp: BoundedActionMdp
    horizon: int
    cnf: Cnf
    layout: Optional[SequenceStateLayout]
    expected: str
    state: Optional[BitVector] = None
    action: Optional[str] = None
    policy: Optional[StationaryPolicy] = None
    value: Optional[ValueCircuit] = None
    size_bound: Optional[int] = None
    reward_bound: Optional[Fraction] = None
    mode: str = ""
    num_x: Optional[int] = None

    def steps_remaining(self) -> int:
        if self.state is None or self.layout is None:
            return self.horizon
        return self.horizon - len(self.layout.decode(self.state))


def write_instance(
    inst: ReductionInstance, directory, extra_expected: Sequence[str] = ()
) -> str:
    """Write the instance directory: MDP manifest plus netlists, companion
    policy / value-function manifests, the formula, the instance record, and
    `expected.txt` describing the oracle correspondence."""
    import os

    from . import mdp as md
    from .cnf import to_dimacs
    from .policy import save_policy
    from .valuefn import save_valuefn

    os.makedirs(directory, exist_ok=True)
    md.save_mdp(inst.mdp, directory, horizon=inst.horizon)
    with open(os.path.join(directory, "formula.cnf"), "w", encoding="ascii") as fh:
        fh.write(to_dimacs(inst.cnf))
    if inst.policy is not None:
        save_policy(inst.policy, directory, "policy")
    if inst.value is not None:
        save_valuefn(inst.value, directory, "valuefn")
    lines = [f"instance {inst.name}"]
    if inst.mode:
        lines.append(f"mode {inst.mode}")
    lines.append(f"horizon {inst.horizon}")
    if inst.state is not None:
        lines.append("state " + "".join(str(b) for b in inst.state))
        lines.append(f"steps_remaining {inst.steps_remaining()}")
    if inst.action is not None:
        lines.append(f"action {inst.action}")
    if inst.size_bound is not None:
        lines.append(f"size_bound {inst.size_bound}")
    if inst.reward_bound is not None:
        lines.append(
            f"reward_bound {inst.reward_bound.numerator}/{inst.reward_bound.denominator}"
        )
    if inst.num_x is not None:
        lines.append(f"num_x {inst.num_x}")
    with open(os.path.join(directory, "instance.txt"), "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    expected_path = os.path.join(directory, "expected.txt")
    with open(expected_path, "w", encoding="ascii") as fh:
        fh.write(inst.expected + "\n")
        for line in extra_expected:
            fh.write(line + "\n")
    return expected_path


# ----------------------------------------------------- satisfiability / next action


def sat_to_next_action(cnf: Cnf, mode: str = "compact") -> ReductionInstance:
    """Next-action instance: from the state spelling out the clause list, the
    sat-marker action is optimal iff the formula is satisfiable.

    Faithful mode reserves the full clause block of (2n)^3 clauses; compact
    mode shrinks the block to the actual clause count, which preserves the
    decision at the given state while keeping the suffix enumerable.
    """
    if mode not in ("faithful", "compact"):
        raise ReductionError(f"unknown mode {mode!r}")
    n = cnf.num_vars
    if n < 1 or not cnf.clauses:
        raise ReductionError("need at least one variable and one clause")
    for clause in cnf.clauses:
        if len(clause) != 3:
            raise ReductionError(
                f"clause {clause} does not have exactly three literals"
            )
    m = (2 * n) ** 3 if mode == "faithful" else len(cnf.clauses)
    if m < len(cnf.clauses):
        raise ReductionError("clause count exceeds the faithful clause block")
    layout = SequenceStateLayout(
        num_formula_vars=n,
        max_length=3 * m + n + 1,
        clause_block=3 * m,
        with_markers=True,
    )
    actions = ("A", "S", "U") + tuple(f"a{i}" for i in range(1, n + 1))
    D = 2 * n
    base = SuccinctMdp(
        var_names=layout.var_names(),
        initial=layout.encode([]),
        actions=actions,
        t_circuit=_satnext_transition(layout, actions, D),
        r_circuit=_satnext_reward(layout, m, n),
        prob_denominator=D,
        name=f"satnext_{mode}",
    )
    mdp = BoundedActionMdp(
        base, _satnext_successors(layout, actions), max_branching=2 * n
    )
    # the clause block spells out the formula (repeating the last clause when
    # the faithful block is larger than the instance)
    block: List[int] = []
    for ci in range(m):
        clause = cnf.clauses[min(ci, len(cnf.clauses) - 1)]
        block.extend(layout.literal_code(lit) for lit in clause)
    state = layout.encode(block)
    policy = _satnext_optimal_policy(layout, m, n, len(actions)) if n <= 6 else None
    return ReductionInstance(
        name=base.name,
        mdp=mdp,
        horizon=layout.max_length,
        cnf=cnf,
        layout=layout,
        state=state,
        action="S",
        policy=policy,
        mode=mode,
        expected=(
            "best next action at the encoded state is S iff the formula is "
            "satisfiable (brute-force SAT check); the unsat branch is worth "
            "exactly 2"
        ),
    )


def _satnext_transition(layout: SequenceStateLayout, actions, D: int) -> Circuit:
    n = layout.num_formula_vars
    aw = width_for_count(len(actions))
    b = CircuitBuilder(2 * layout.state_width + aw)
    pair = _SeqPair(b, layout)
    a_refs = [b.inp(2 * layout.state_width + i) for i in range(aw)]
    cur = pair.cur
    has_sat = cur.has_code(layout.sat_code)
    has_unsat = cur.has_code(layout.unsat_code)
    terminated = b.or_(has_sat, has_unsat)
    room = cur.can_append()
    cases: List[Tuple[str, int]] = []

    def act(idx: int) -> str:
        return b.eq_const(a_refs, idx)

    # A: uniform random literal, frozen once a marker is present
    a_frozen = b.or_(terminated, b.not_(room))
    cases.append((b.and_all([act(0), a_frozen, pair.same]), D))
    for code in range(2, 2 * n + 2):
        cases.append(
            (b.and_all([act(0), b.not_(a_frozen), pair.append_cond(code)]), 1)
        )
    # S and U: deterministic marker appends
    for idx, code in ((1, layout.sat_code), (2, layout.unsat_code)):
        cases.append((b.and_all([act(idx), room, pair.append_cond(code)]), D))
        cases.append((b.and_all([act(idx), b.not_(room), pair.same]), D))
    # a_i: coin-flip literal of variable i, active once exactly one marker is in
    marker_xor = b.xor(has_sat, has_unsat)
    for i in range(1, n + 1):
        sel = act(2 + i)
        active = b.and_(marker_xor, room)
        cases.append((b.and_all([sel, active, pair.append_cond(2 * i)]), n))
        cases.append((b.and_all([sel, active, pair.append_cond(2 * i + 1)]), n))
        cases.append((b.and_all([sel, b.not_(active), pair.same]), D))
    out = b.select_value(cases, width_for_count(D + 1))
    return b.build(out, "t_satnext")


def _satnext_reward(layout: SequenceStateLayout, m: int, n: int) -> Circuit:
    b = CircuitBuilder(layout.state_width)
    v = _SeqView(b, layout, 0)
    block = layout.clause_block
    shape = [v.len_eq(layout.max_length)]
    shape += [v.slot_is_literal(j) for j in range(block)]
    for i in range(1, n + 1):
        # tail slot i must hold variable i (either polarity): high bits == i
        shape.append(b.eq_const(v.slots[block + i][:-1], i))
    proper = b.and_all(shape)
    is_sat_m = v.slot_is(block, layout.sat_code)
    is_unsat_m = v.slot_is(block, layout.unsat_code)
    var_true = _assignment_wires(b, v, block + 1, n)
    clause_wires = []
    for c in range(m):
        lits = []
        for p in range(3):
            slot = 3 * c + p
            for i in range(1, n + 1):
                lits.append(b.and_(v.slot_is(slot, 2 * i), var_true[i - 1]))
                lits.append(
                    b.and_(v.slot_is(slot, 2 * i + 1), b.not_(var_true[i - 1]))
                )
        clause_wires.append(b.or_all(lits))
    formula_sat = b.and_all(clause_wires)
    width = n + 3  # holds 2^(n+1) as a positive two's-complement value
    cases = [
        (b.and_(proper, is_unsat_m), 2),
        (b.and_all([proper, is_sat_m, formula_sat]), 1 << (n + 1)),
        (b.and_all([proper, is_sat_m, b.not_(formula_sat)]), 1),
    ]
    return b.build(b.select_value(cases, width), "r_satnext")


def _satnext_successors(layout: SequenceStateLayout, actions) -> Tuple[Circuit, ...]:
    n = layout.num_formula_vars
    B = 2 * n
    sw = width_for_count(B)
    circuits = []
    for idx, name in enumerate(actions):
        b = CircuitBuilder(layout.state_width + sw)
        v = _SeqView(b, layout, 0)
        slot_refs = [b.inp(layout.state_width + i) for i in range(sw)]
        has_sat = v.has_code(layout.sat_code)
        has_unsat = v.has_code(layout.unsat_code)
        room = v.can_append()
        slot0 = b.eq_const(slot_refs, 0)
        if name == "A":
            frozen = b.or_(b.or_(has_sat, has_unsat), b.not_(room))
            code = b.select_value(
                [(b.eq_const(slot_refs, k), k + 2) for k in range(2 * n)],
                layout.element_width,
            )
            appended = _append_outputs(b, v, code)
            valid = b.mux(frozen, slot0, b.const(1))
            state_out = b.mux_refs(frozen, v.all_refs, appended)
        elif name in ("S", "U"):
            code_val = layout.sat_code if name == "S" else layout.unsat_code
            appended = _append_outputs(b, v, _const_bits(b, code_val, layout.element_width))
            valid = slot0
            state_out = b.mux_refs(b.not_(room), v.all_refs, appended)
        else:
            i = int(name[1:])
            active = b.and_(b.xor(has_sat, has_unsat), room)
            slot1 = b.eq_const(slot_refs, 1)
            code = b.select_value(
                [(slot0, 2 * i), (slot1, 2 * i + 1)], layout.element_width
            )
            appended = _append_outputs(b, v, code)
            valid = b.mux(active, b.or_(slot0, slot1), slot0)
            state_out = b.mux_refs(active, appended, v.all_refs)
        circuits.append(b.build([valid] + state_out, f"succ_{name}"))
    return tuple(circuits)


def _satnext_optimal_policy(
    layout: SequenceStateLayout, m: int, n: int, action_count: int
) -> StationaryPolicy:
    """A for the clause block, then S iff the encoded formula is satisfiable
    (exhaustive disjunction over assignments), then the tail coin flips."""
    b = CircuitBuilder(layout.state_width)
    v = _SeqView(b, layout, 0)
    block = layout.clause_block
    sat_any = []
    for row in range(1 << n):
        truth = [(row >> (n - 1 - i)) & 1 for i in range(n)]
        clause_wires = []
        for c in range(m):
            lits = []
            for p in range(3):
                slot = 3 * c + p
                for i in range(1, n + 1):
                    code = 2 * i if truth[i - 1] else 2 * i + 1
                    lits.append(v.slot_is(slot, code))
            clause_wires.append(b.or_all(lits))
        sat_any.append(b.and_all(clause_wires))
    satisfiable = b.or_all(sat_any)
    at_block = v.len_eq(block)
    cases: List[Tuple[str, int]] = [
        (b.and_(at_block, satisfiable), 1),  # S
        (b.and_(at_block, b.not_(satisfiable)), 2),  # U
    ]
    for i in range(1, n + 1):
        cases.append((v.len_eq(block + i), 2 + i))  # a_i
    out = b.select_value(cases, width_for_count(action_count))  # default: A
    return StationaryPolicy(
        b.build(out, "p_satnext"), action_count, name="satnext_optimal"
    )


# ------------------------------------------------------------------ majority SAT


def majsat_to_eval(cnf: Cnf) -> ReductionInstance:
    """Policy-evaluation instance whose exact reward is model-count / 2^n."""
    n = cnf.num_vars
    if n < 1:
        raise ReductionError("need at least one variable")
    layout = SequenceStateLayout(num_formula_vars=n, max_length=n)
    actions = tuple(f"a{i}" for i in range(1, n + 1))
    base = SuccinctMdp(
        var_names=layout.var_names(),
        initial=layout.encode([]),
        actions=actions,
        t_circuit=_coin_append_transition(layout, actions, random_vars=range(1, n + 1)),
        r_circuit=_majsat_reward(layout, cnf),
        prob_denominator=2,
        name="majsat",
    )
    mdp = BoundedActionMdp(
        base,
        _coin_append_successors(layout, actions, {f"a{i}": (2 * i, 2 * i + 1) for i in range(1, n + 1)}),
        max_branching=2,
    )
    aw = width_for_count(len(actions))
    b = CircuitBuilder(layout.state_width)
    v = _SeqView(b, layout, 0)
    out = b.select_value([(v.len_eq(k), k) for k in range(1, n)], aw)
    policy = StationaryPolicy(b.build(out, "p_majsat"), len(actions), name="majsat_seq")
    return ReductionInstance(
        name="majsat",
        mdp=mdp,
        horizon=n,
        cnf=cnf,
        layout=layout,
        policy=policy,
        reward_bound=Fraction(1, 2),
        expected=(
            "exact reward of the sequential policy equals model_count / 2^n "
            "(brute-force model count)"
        ),
    )


def _coin_append_transition(layout, actions, random_vars) -> Circuit:
    """Transitions where action a_i appends the literals of variable i with
    equal probability (denominator 2), self-looping when the sequence is full."""
    aw = width_for_count(len(actions))
    b = CircuitBuilder(2 * layout.state_width + aw)
    pair = _SeqPair(b, layout)
    a_refs = [b.inp(2 * layout.state_width + i) for i in range(aw)]
    room = pair.cur.can_append()
    cases: List[Tuple[str, int]] = []
    for idx, var in enumerate(random_vars):
        sel = b.eq_const(a_refs, idx)
        cases.append((b.and_all([sel, room, pair.append_cond(2 * var)]), 1))
        cases.append((b.and_all([sel, room, pair.append_cond(2 * var + 1)]), 1))
        cases.append((b.and_all([sel, b.not_(room), pair.same]), 2))
    return b.build(b.select_value(cases, 2), "t_coin")


def _coin_append_successors(layout, actions, codes_by_action) -> Tuple[Circuit, ...]:
    """Successor enumerators for actions that append one of one or two fixed
    codes (two slots for coin flips, one for deterministic appends)."""
    sw = 1
    circuits = []
    for name in actions:
        codes = codes_by_action[name]
        b = CircuitBuilder(layout.state_width + sw)
        v = _SeqView(b, layout, 0)
        slot = b.inp(layout.state_width)
        room = v.can_append()
        slot0 = b.not_(slot)
        if len(codes) == 2:
            code = b.select_value(
                [(slot0, codes[0]), (slot, codes[1])], layout.element_width
            )
            valid_when_room = b.const(1)
        else:
            code = _const_bits(b, codes[0], layout.element_width)
            valid_when_room = slot0
        appended = _append_outputs(b, v, code)
        valid = b.mux(room, valid_when_room, slot0)
        state_out = b.mux_refs(room, appended, v.all_refs)
        circuits.append(b.build([valid] + state_out, f"succ_{name}"))
    return tuple(circuits)


def _majsat_reward(layout, cnf: Cnf) -> Circuit:
    """Reward 1 exactly on full sequences that mention every variable once
    (any order) and whose assignment satisfies the formula."""
    n = cnf.num_vars
    b = CircuitBuilder(layout.state_width)
    v = _SeqView(b, layout, 0)
    conds = [v.len_eq(n)]
    conds += [v.slot_is_literal(j) for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            same_var = b.eq_refs(v.slots[j][:-1], v.slots[k][:-1])
            conds.append(b.not_(same_var))
    var_true = [
        b.or_all([v.slot_is(j, 2 * var) for j in range(n)]) for var in range(1, n + 1)
    ]
    conds.append(_cnf_sat_wire(b, cnf, var_true))
    return b.build(b.select_value([(b.and_all(conds), 1)], 2), "r_majsat")


# ------------------------------------------------- X/Y sequence constructions


def _xy_mdp(cnf: Cnf, num_x: int, name: str) -> Tuple[BoundedActionMdp, SequenceStateLayout]:
    """Shared MDP of the bounded-policy and value-function hardness
    constructions: deterministic choices over X, then coin flips over Y,
    reward 1 on ordered full sequences that satisfy the formula."""
    if 2 * num_x != cnf.num_vars:
        raise ReductionError(
            f"need |X| = |Y|: {num_x} vs {cnf.num_vars - num_x} variables"
        )
    n = num_x
    layout = SequenceStateLayout(num_formula_vars=2 * n, max_length=2 * n)
    actions = (
        tuple(f"b{i}" for i in range(1, n + 1))
        + tuple(f"c{i}" for i in range(1, n + 1))
        + tuple(f"a{i}" for i in range(1, n + 1))
    )
    aw = width_for_count(len(actions))
    b = CircuitBuilder(2 * layout.state_width + aw)
    pair = _SeqPair(b, layout)
    a_refs = [b.inp(2 * layout.state_width + i) for i in range(aw)]
    room = pair.cur.can_append()
    cases: List[Tuple[str, int]] = []
    for idx in range(len(actions)):
        sel = b.eq_const(a_refs, idx)
        if idx < n:  # b_i appends x_i
            appends = [(2 * (idx + 1), 2)]
        elif idx < 2 * n:  # c_i appends not x_i
            appends = [(2 * (idx - n + 1) + 1, 2)]
        else:  # a_i flips y_i
            var = n + (idx - 2 * n) + 1
            appends = [(2 * var, 1), (2 * var + 1, 1)]
        for code, num in appends:
            cases.append((b.and_all([sel, room, pair.append_cond(code)]), num))
        cases.append((b.and_all([sel, b.not_(room), pair.same]), 2))
    t_circuit = b.build(b.select_value(cases, 2), f"t_{name}")

    rb = CircuitBuilder(layout.state_width)
    v = _SeqView(rb, layout, 0)
    conds = [v.len_eq(2 * n)]
    for j in range(2 * n):
        conds.append(rb.eq_const(v.slots[j][:-1], j + 1))  # ordered: slot j holds var j+1
    var_true = _assignment_wires(rb, v, 0, 2 * n)
    conds.append(_cnf_sat_wire(rb, cnf, var_true))
    r_circuit = rb.build(rb.select_value([(rb.and_all(conds), 1)], 2), f"r_{name}")

    codes_by_action = {}
    for i in range(1, n + 1):
        codes_by_action[f"b{i}"] = (2 * i,)
        codes_by_action[f"c{i}"] = (2 * i + 1,)
        codes_by_action[f"a{i}"] = (2 * (n + i), 2 * (n + i) + 1)
    base = SuccinctMdp(
        var_names=layout.var_names(),
        initial=layout.encode([]),
        actions=actions,
        t_circuit=t_circuit,
        r_circuit=r_circuit,
        prob_denominator=2,
        name=name,
    )
    mdp = BoundedActionMdp(
        base, _coin_append_successors(layout, actions, codes_by_action), max_branching=2
    )
    return mdp, layout


def xy_sequential_policy(
    mdp: BoundedActionMdp, layout: SequenceStateLayout, x_assignment: Sequence[bool]
) -> StationaryPolicy:
    """The shape every positive-reward policy must take: commit to the given
    X-assignment in order, then flip each Y variable."""
    n = layout.num_formula_vars // 2
    if len(x_assignment) != n:
        raise ReductionError(f"need {n} X-assignment bits")
    b = CircuitBuilder(layout.state_width)
    v = _SeqView(b, layout, 0)
    aw = width_for_count(len(mdp.actions))
    cases = []
    for k in range(n):
        idx = k if x_assignment[k] else n + k  # b_{k+1} or c_{k+1}
        if idx != 0:
            cases.append((v.len_eq(k), idx))
    for k in range(n, 2 * n):
        cases.append((v.len_eq(k), 2 * n + (k - n)))  # a_{k-n+1}
    out = b.select_value(cases, aw)
    return StationaryPolicy(
        b.build(out, "p_xy_seq"), len(mdp.actions), name="xy_sequential"
    )


def emajsat_to_bounded_policy(cnf: Cnf, num_x: int, faithful_k: bool = False) -> ReductionInstance:
    """Bounded-size policy existence instance for the majority-of-extensions
    question. The reward bound defaults to 1/2 (the majority reading);
    `faithful_k` selects the literal bound of 1."""
    mdp, layout = _xy_mdp(cnf, num_x, "emajsat")
    reference = xy_sequential_policy(mdp, layout, [True] * num_x)
    return ReductionInstance(
        name="emajsat",
        mdp=mdp,
        horizon=2 * num_x,
        cnf=cnf,
        layout=layout,
        policy=reference,
        size_bound=len(reference.circuit.gates),
        reward_bound=Fraction(1) if faithful_k else Fraction(1, 2),
        num_x=num_x,
        expected=(
            "a policy meeting the reward bound exists iff some X-assignment "
            "has at least half of its Y-extensions satisfying the formula "
            "(brute-force enumeration)"
        ),
    )


def forallexists_to_valuefn(cnf: Cnf, num_x: int) -> ReductionInstance:
    """Value-function existence instance: a reward-1 deterministic X-choice
    exists iff some X-assignment has every Y-extension satisfying the formula."""
    mdp, layout = _xy_mdp(cnf, num_x, "forallexists")
    reference = xy_sequential_policy(mdp, layout, [True] * num_x)
    return ReductionInstance(
        name="forallexists",
        mdp=mdp,
        horizon=2 * num_x,
        cnf=cnf,
        layout=layout,
        policy=reference,
        reward_bound=Fraction(1),
        num_x=num_x,
        expected=(
            "a reward-1 deterministic X-choice exists iff some X-assignment "
            "has all Y-extensions satisfying the formula (brute-force check)"
        ),
    )


# -------------------------------------------------------- consistency / UNSAT


def unsat_to_consistency(cnf: Cnf) -> ReductionInstance:
    """Single-action variable-flip MDP with reward 1 on models: the all-zero
    value function is consistent iff the formula is unsatisfiable."""
    n = cnf.num_vars
    if n < 1:
        raise ReductionError("need at least one variable")
    horizon = n
    aw = 1

    tb = CircuitBuilder(2 * n + aw)
    s = [tb.inp(i) for i in range(n)]
    s2 = [tb.inp(n + i) for i in range(n)]
    a0 = tb.not_(tb.inp(2 * n))
    diff = [tb.xor(x, y) for x, y in zip(s, s2)]
    pre = [tb.const(1)]
    for d in diff:
        pre.append(tb.and_(pre[-1], tb.not_(d)))
    suf = [tb.const(1)]
    for d in reversed(diff):
        suf.append(tb.and_(suf[-1], tb.not_(d)))
    suf.reverse()
    exactly_one = tb.or_all(
        [tb.and_all([pre[i], diff[i], suf[i + 1]]) for i in range(n)]
    )
    width = width_for_count(n + 1)
    t_circuit = tb.build(
        tb.select_value([(tb.and_(a0, exactly_one), 1)], width), "t_flip"
    )

    rb = CircuitBuilder(n)
    var_true = [rb.inp(i) for i in range(n)]
    r_circuit = rb.build(
        rb.select_value([(_cnf_sat_wire(rb, cnf, var_true), 1)], 2), "r_models"
    )

    sw = width_for_count(n)
    sb = CircuitBuilder(n + sw)
    state = [sb.inp(i) for i in range(n)]
    slot = [sb.inp(n + i) for i in range(sw)]
    out = []
    for i in range(n):
        here = sb.eq_const(slot, i)
        out.append(sb.xor(state[i], here))
    succ = sb.build([sb.const(1)] + out, "succ_flip")

    base = SuccinctMdp(
        var_names=tuple(f"x{i + 1}" for i in range(n)),
        initial=tuple([0] * n),
        actions=("a",),
        t_circuit=t_circuit,
        r_circuit=r_circuit,
        prob_denominator=n,
        name="unsatcons",
    )
    mdp = BoundedActionMdp(base, (succ,), max_branching=n)

    vb = CircuitBuilder(n + width_for_count(horizon + 1))
    value = ValueCircuit(
        vb.build([vb.const(0)], "e_zero"), horizon, value_denominator=1, name="zero"
    )
    return ReductionInstance(
        name="unsatcons",
        mdp=mdp,
        horizon=horizon,
        cnf=cnf,
        layout=None,
        value=value,
        expected=(
            "the all-zero value function is consistent iff the formula has "
            "no model (brute-force model count)"
        ),
    )
