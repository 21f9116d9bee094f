"""Boolean circuits: representation, evaluation, netlist text format, and
full-literal DNF canonicalization.

A circuit is a DAG of two-input AND/OR/XOR gates, one-input NOT gates, and
zero-input constants. References are strings: ``i<k>`` for input k, ``g<j>``
for the gate with id j. Gate ids are strictly increasing and every operand
must refer to an input or an earlier gate, so acyclicity holds by
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .bits import bits_to_int, int_to_bits

ARITY = {"AND": 2, "OR": 2, "XOR": 2, "NOT": 1, "CONST0": 0, "CONST1": 0}


class CircuitError(ValueError):
    pass


class NetlistError(CircuitError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Gate:
    gid: int
    kind: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class Circuit:
    num_inputs: int
    gates: Tuple[Gate, ...]
    outputs: Tuple[str, ...]
    name: str = "c"

    def __post_init__(self):
        known = {}
        prev = -1
        for pos, g in enumerate(self.gates):
            if g.gid <= prev:
                raise CircuitError(f"gate ids must be strictly increasing, got g{g.gid}")
            prev = g.gid
            if g.kind not in ARITY:
                raise CircuitError(f"unknown gate kind {g.kind}")
            if len(g.args) != ARITY[g.kind]:
                raise CircuitError(
                    f"gate g{g.gid}: {g.kind} takes {ARITY[g.kind]} operands, got {len(g.args)}"
                )
            for ref in g.args:
                self._check_ref(ref, known, f"gate g{g.gid}")
            known[f"g{g.gid}"] = pos
        for ref in self.outputs:
            self._check_ref(ref, known, "outputs")
        object.__setattr__(self, "_gate_pos", known)

    def _check_ref(self, ref: str, known: Dict[str, int], where: str):
        if ref.startswith("i"):
            try:
                k = int(ref[1:])
            except ValueError:
                raise CircuitError(f"{where}: bad ref {ref!r}")
            if not 0 <= k < self.num_inputs:
                raise CircuitError(f"{where}: input ref {ref} out of range")
        elif ref.startswith("g"):
            if ref not in known:
                raise CircuitError(f"{where}: ref {ref} is undefined or a forward reference")
        else:
            raise CircuitError(f"{where}: bad ref {ref!r}")

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)


def size(c: Circuit) -> int:
    """Gate count (inputs and output taps are free)."""
    return len(c.gates)


def eval(c: Circuit, inputs: Sequence[int]) -> Tuple[int, ...]:  # noqa: A001 - deliberate shadowing
    """Evaluate the circuit on one input vector; returns output bits in order."""
    if len(inputs) != c.num_inputs:
        raise CircuitError(f"expected {c.num_inputs} input bits, got {len(inputs)}")
    vals: Dict[str, int] = {f"i{k}": (1 if b else 0) for k, b in enumerate(inputs)}
    for g in c.gates:
        if g.kind == "AND":
            v = vals[g.args[0]] & vals[g.args[1]]
        elif g.kind == "OR":
            v = vals[g.args[0]] | vals[g.args[1]]
        elif g.kind == "XOR":
            v = vals[g.args[0]] ^ vals[g.args[1]]
        elif g.kind == "NOT":
            v = 1 - vals[g.args[0]]
        elif g.kind == "CONST0":
            v = 0
        else:
            v = 1
        vals[f"g{g.gid}"] = v
    return tuple(vals[ref] for ref in c.outputs)


def eval_batch(c: Circuit, inputs: np.ndarray) -> np.ndarray:
    """Evaluate on a (rows, num_inputs) bool array; returns (rows, num_outputs)."""
    inputs = np.asarray(inputs, dtype=bool)
    if inputs.ndim != 2 or inputs.shape[1] != c.num_inputs:
        raise CircuitError(
            f"expected (rows, {c.num_inputs}) input array, got {inputs.shape}"
        )
    rows = inputs.shape[0]
    vals: Dict[str, np.ndarray] = {f"i{k}": inputs[:, k] for k in range(c.num_inputs)}
    for g in c.gates:
        if g.kind == "AND":
            v = vals[g.args[0]] & vals[g.args[1]]
        elif g.kind == "OR":
            v = vals[g.args[0]] | vals[g.args[1]]
        elif g.kind == "XOR":
            v = vals[g.args[0]] ^ vals[g.args[1]]
        elif g.kind == "NOT":
            v = ~vals[g.args[0]]
        elif g.kind == "CONST0":
            v = np.zeros(rows, dtype=bool)
        else:
            v = np.ones(rows, dtype=bool)
        vals[f"g{g.gid}"] = v
    if not c.outputs:
        return np.zeros((rows, 0), dtype=bool)
    return np.stack([vals[ref] for ref in c.outputs], axis=1)


def all_input_rows(n: int) -> np.ndarray:
    """All 2**n input vectors as a bool array, row k encoding k MSB-first."""
    if n == 0:
        return np.zeros((1, 0), dtype=bool)
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(bool)


def truth_table(c: Circuit, max_inputs: int = 20) -> np.ndarray:
    """Exhaustive (2**n, num_outputs) output table."""
    if c.num_inputs > max_inputs:
        raise CircuitError(
            f"refusing exhaustive table over {c.num_inputs} inputs (limit {max_inputs})"
        )
    return eval_batch(c, all_input_rows(c.num_inputs))


def equivalent(c1: Circuit, c2: Circuit, max_inputs: int = 16) -> bool:
    """Exhaustive input-output equivalence over all 2**n input vectors."""
    if c1.num_inputs != c2.num_inputs:
        raise CircuitError(
            f"width mismatch: {c1.num_inputs} vs {c2.num_inputs} inputs"
        )
    if c1.num_outputs != c2.num_outputs:
        raise CircuitError(
            f"width mismatch: {c1.num_outputs} vs {c2.num_outputs} outputs"
        )
    if c1.num_inputs > max_inputs:
        raise CircuitError(
            f"refusing exhaustive check over {c1.num_inputs} inputs (limit {max_inputs})"
        )
    return bool(np.array_equal(truth_table(c1, max_inputs), truth_table(c2, max_inputs)))


class CircuitBuilder:
    """Constructs circuits gate by gate with structural hashing.

    Identical (kind, operands) nodes are merged, and trivial identities
    involving constants or repeated operands are folded away, so generated
    circuits stay reasonably small without a separate minimization pass.
    """

    def __init__(self, num_inputs: int):
        self.num_inputs = num_inputs
        self.gates: List[Gate] = []
        self._cache: Dict[Tuple[str, Tuple[str, ...]], str] = {}
        self._c0: str | None = None
        self._c1: str | None = None
        self._not_arg: Dict[str, str] = {}

    def inp(self, k: int) -> str:
        if not 0 <= k < self.num_inputs:
            raise CircuitError(f"input index {k} out of range")
        return f"i{k}"

    def inputs(self) -> List[str]:
        return [f"i{k}" for k in range(self.num_inputs)]

    def _emit(self, kind: str, *args: str) -> str:
        key = (kind, args)
        ref = self._cache.get(key)
        if ref is None:
            gid = len(self.gates)
            self.gates.append(Gate(gid, kind, args))
            ref = f"g{gid}"
            self._cache[key] = ref
        return ref

    def const(self, bit: int) -> str:
        if bit:
            if self._c1 is None:
                self._c1 = self._emit("CONST1")
            return self._c1
        if self._c0 is None:
            self._c0 = self._emit("CONST0")
        return self._c0

    def not_(self, a: str) -> str:
        if a == self._c0:
            return self.const(1)
        if a == self._c1:
            return self.const(0)
        if a in self._not_arg:  # fold double negation
            return self._not_arg[a]
        ref = self._emit("NOT", a)
        self._not_arg[ref] = a
        return ref

    def and_(self, a: str, b: str) -> str:
        if a == b:
            return a
        if a == self._c0 or b == self._c0:
            return self.const(0)
        if a == self._c1:
            return b
        if b == self._c1:
            return a
        if b < a:
            a, b = b, a
        return self._emit("AND", a, b)

    def or_(self, a: str, b: str) -> str:
        if a == b:
            return a
        if a == self._c1 or b == self._c1:
            return self.const(1)
        if a == self._c0:
            return b
        if b == self._c0:
            return a
        if b < a:
            a, b = b, a
        return self._emit("OR", a, b)

    def xor(self, a: str, b: str) -> str:
        if a == b:
            return self.const(0)
        if a == self._c0:
            return b
        if b == self._c0:
            return a
        if a == self._c1:
            return self.not_(b)
        if b == self._c1:
            return self.not_(a)
        if b < a:
            a, b = b, a
        return self._emit("XOR", a, b)

    def and_all(self, refs: Sequence[str]) -> str:
        if not refs:
            return self.const(1)
        acc = refs[0]
        for r in refs[1:]:
            acc = self.and_(acc, r)
        return acc

    def or_all(self, refs: Sequence[str]) -> str:
        if not refs:
            return self.const(0)
        acc = refs[0]
        for r in refs[1:]:
            acc = self.or_(acc, r)
        return acc

    def eq(self, a: str, b: str) -> str:
        return self.not_(self.xor(a, b))

    def eq_refs(self, xs: Sequence[str], ys: Sequence[str]) -> str:
        if len(xs) != len(ys):
            raise CircuitError("eq_refs width mismatch")
        return self.and_all([self.eq(a, b) for a, b in zip(xs, ys)])

    def eq_const(self, refs: Sequence[str], value: int) -> str:
        bits = int_to_bits(value, len(refs))
        return self.and_all([r if b else self.not_(r) for r, b in zip(refs, bits)])

    def mux(self, sel: str, if_true: str, if_false: str) -> str:
        return self.or_(self.and_(sel, if_true), self.and_(self.not_(sel), if_false))

    def mux_refs(self, sel: str, if_true: Sequence[str], if_false: Sequence[str]) -> List[str]:
        return [self.mux(sel, t, f) for t, f in zip(if_true, if_false)]

    def select_value(self, cases: Sequence[Tuple[str, int]], width: int) -> List[str]:
        """Numeric output from mutually exclusive (condition, value) cases.

        Bits of value default to 0 when no case fires.
        """
        out = []
        for b in range(width):
            hits = [cond for cond, value in cases if int_to_bits(value, width)[b]]
            out.append(self.or_all(hits))
        return out

    def build(self, outputs: Sequence[str], name: str = "c") -> Circuit:
        return Circuit(self.num_inputs, tuple(self.gates), tuple(outputs), name)


def canonical_dnf(c: Circuit, max_inputs: int = 20) -> Circuit:
    """Rewrite every output as a disjunction of full-literal terms.

    One term per satisfying assignment of that output, so at most 2**n terms
    per output. CONST0 stands in for the empty disjunction.
    """
    tt = truth_table(c, max_inputs)
    n = c.num_inputs
    b = CircuitBuilder(n)
    lits_pos = [b.inp(k) for k in range(n)]
    lits_neg = [b.not_(b.inp(k)) for k in range(n)]
    outputs = []
    for o in range(c.num_outputs):
        rows = np.flatnonzero(tt[:, o])
        if n == 0:
            outputs.append(b.const(1 if len(rows) else 0))
            continue
        terms = []
        for row in rows:
            bits = int_to_bits(int(row), n)
            terms.append(b.and_all([lits_pos[k] if bit else lits_neg[k] for k, bit in enumerate(bits)]))
        outputs.append(b.or_all(terms) if terms else b.const(0))
    return b.build(outputs, name=f"{c.name}_dnf")


def count_dnf_terms(c: Circuit, output_index: int) -> int:
    """Number of terms in the OR ladder feeding one output of a DNF circuit."""
    by_ref = {f"g{g.gid}": g for g in c.gates}

    def walk(ref: str) -> int:
        g = by_ref.get(ref)
        if g is None:  # bare input literal
            return 1
        if g.kind == "CONST0":
            return 0
        if g.kind == "OR":
            return walk(g.args[0]) + walk(g.args[1])
        return 1

    return walk(c.outputs[output_index])


def circuit_from_values(
    num_inputs: int, out_width: int, values: Sequence[int], name: str = "table"
) -> Circuit:
    """Compile an explicit truth table (unsigned value per input row) to a circuit."""
    if len(values) != 1 << num_inputs:
        raise CircuitError(
            f"need {1 << num_inputs} rows for {num_inputs} inputs, got {len(values)}"
        )
    b = CircuitBuilder(num_inputs)
    ins = b.inputs()
    minterms: Dict[int, str] = {}

    def minterm(row: int) -> str:
        ref = minterms.get(row)
        if ref is None:
            ref = b.eq_const(ins, row) if num_inputs else b.const(1)
            minterms[row] = ref
        return ref

    outputs = []
    for bit in range(out_width):
        hits = [
            minterm(row)
            for row, v in enumerate(values)
            if (v >> (out_width - 1 - bit)) & 1
        ]
        outputs.append(b.or_all(hits))
    return b.build(outputs, name)


def serialize(c: Circuit) -> str:
    lines = [f"circuit {c.name}", f"inputs {c.num_inputs}"]
    for g in c.gates:
        lines.append(" ".join([f"gate g{g.gid}", g.kind] + list(g.args)))
    lines.append("outputs " + " ".join(c.outputs) if c.outputs else "outputs")
    return "\n".join(lines) + "\n"


def parse(text: str) -> Circuit:
    name = None
    num_inputs = None
    gates: List[Gate] = []
    outputs = None
    seen_gids = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        if kw == "circuit":
            if len(parts) != 2:
                raise NetlistError("circuit line needs a name", lineno)
            name = parts[1]
        elif kw == "inputs":
            if len(parts) != 2 or not parts[1].isdigit():
                raise NetlistError("inputs line needs a count", lineno)
            num_inputs = int(parts[1])
        elif kw == "gate":
            if num_inputs is None:
                raise NetlistError("gate before inputs declaration", lineno)
            if len(parts) < 3 or not parts[1].startswith("g"):
                raise NetlistError("malformed gate line", lineno)
            try:
                gid = int(parts[1][1:])
            except ValueError:
                raise NetlistError(f"bad gate id {parts[1]!r}", lineno)
            kind = parts[2]
            if kind not in ARITY:
                raise NetlistError(f"unknown gate kind {kind!r}", lineno)
            args = tuple(parts[3:])
            if len(args) != ARITY[kind]:
                raise NetlistError(
                    f"{kind} takes {ARITY[kind]} operands, got {len(args)}", lineno
                )
            if gates and gid <= gates[-1].gid:
                raise NetlistError(f"gate id g{gid} not strictly increasing", lineno)
            for ref in args:
                _check_parse_ref(ref, num_inputs, seen_gids, lineno)
            gates.append(Gate(gid, kind, args))
            seen_gids.add(gid)
        elif kw == "outputs":
            if num_inputs is None:
                raise NetlistError("outputs before inputs declaration", lineno)
            for ref in parts[1:]:
                _check_parse_ref(ref, num_inputs, seen_gids, lineno)
            outputs = tuple(parts[1:])
        else:
            raise NetlistError(f"unknown construct {kw!r}", lineno)
    if num_inputs is None:
        raise NetlistError("missing inputs declaration", 1)
    if outputs is None:
        raise NetlistError("missing outputs declaration", 1)
    return Circuit(num_inputs, tuple(gates), outputs, name or "c")


def _check_parse_ref(ref: str, num_inputs: int, seen_gids, lineno: int):
    if ref.startswith("i"):
        try:
            k = int(ref[1:])
        except ValueError:
            raise NetlistError(f"bad ref {ref!r}", lineno)
        if not 0 <= k < num_inputs:
            raise NetlistError(f"input ref {ref} out of range", lineno)
    elif ref.startswith("g"):
        try:
            gid = int(ref[1:])
        except ValueError:
            raise NetlistError(f"bad ref {ref!r}", lineno)
        if gid not in seen_gids:
            raise NetlistError(f"ref {ref} is undefined or a forward reference", lineno)
    else:
        raise NetlistError(f"bad ref {ref!r}", lineno)


def read_netlist(path) -> Circuit:
    with open(path, "r", encoding="ascii") as fh:
        return parse(fh.read())


def write_netlist(c: Circuit, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize(c))
