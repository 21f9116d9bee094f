"""Circuit policies and explicit (table) policies.

A stationary policy circuit maps a state to an action index; a
history-dependent policy circuit takes the padded state sequence
``[slot_0 | ... | slot_T | current-time bits]`` with slots beyond the
current time zero-filled. A decoded index outside the action range is a
hard error, never clamped: a malformed policy must not silently pass a
correspondence check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from . import circuit as ct
from .bits import BitVector, bits_to_int, int_to_bits, width_for_count


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class StationaryPolicy:
    circuit: ct.Circuit
    action_count: int
    name: str = "policy"
    kind = "stationary"

    def __post_init__(self):
        if self.circuit.num_outputs != width_for_count(self.action_count):
            raise PolicyError(
                f"policy outputs {self.circuit.num_outputs} bits, expected "
                f"{width_for_count(self.action_count)} for {self.action_count} actions"
            )

    @property
    def num_vars(self) -> int:
        return self.circuit.num_inputs

    def decide(self, s: BitVector) -> int:
        a = bits_to_int(ct.eval(self.circuit, tuple(s)))
        if a >= self.action_count:
            raise PolicyError(f"policy decoded action {a} >= {self.action_count} at {s}")
        return a

    def decide_batch(self, states: Sequence[BitVector]) -> List[int]:
        if not states:
            return []
        out = ct.eval_batch(self.circuit, np.array(states, dtype=bool))
        width = out.shape[1]
        weights = (1 << np.arange(width - 1, -1, -1)).astype(np.int64)
        vals = out.astype(np.int64) @ weights
        bad = np.flatnonzero(vals >= self.action_count)
        if bad.size:
            raise PolicyError(
                f"policy decoded action {int(vals[bad[0]])} >= {self.action_count} "
                f"at {states[int(bad[0])]}"
            )
        return [int(v) for v in vals]


@dataclass(frozen=True)
class HistoryPolicy:
    circuit: ct.Circuit
    action_count: int
    horizon: int
    num_vars: int
    name: str = "policy"
    kind = "history"

    def __post_init__(self):
        want = (self.horizon + 1) * self.num_vars + width_for_count(self.horizon + 1)
        if self.circuit.num_inputs != want:
            raise PolicyError(
                f"history policy takes {self.circuit.num_inputs} inputs, expected {want}"
            )
        if self.circuit.num_outputs != width_for_count(self.action_count):
            raise PolicyError("history policy output width does not match action count")

    def decide_history(self, states: Sequence[BitVector], j: int) -> int:
        """Action after observing states[0..j]; later slots are zero-filled."""
        if j >= len(states) or j > self.horizon:
            raise PolicyError(f"time index {j} out of range")
        bits: List[int] = []
        for idx in range(self.horizon + 1):
            if idx <= j:
                bits.extend(states[idx])
            else:
                bits.extend([0] * self.num_vars)
        bits.extend(int_to_bits(j, width_for_count(self.horizon + 1)))
        a = bits_to_int(ct.eval(self.circuit, tuple(bits)))
        if a >= self.action_count:
            raise PolicyError(f"policy decoded action {a} >= {self.action_count}")
        return a


@dataclass(frozen=True)
class ExplicitPolicy:
    mapping: Dict[BitVector, int]
    action_count: int
    kind = "stationary"

    def decide(self, s: BitVector) -> int:
        try:
            a = self.mapping[tuple(s)]
        except KeyError:
            raise PolicyError(f"explicit policy undefined at state {s}")
        if a >= self.action_count:
            raise PolicyError(f"explicit policy maps {s} to action {a} >= {self.action_count}")
        return a

    def decide_batch(self, states: Sequence[BitVector]) -> List[int]:
        return [self.decide(s) for s in states]


@dataclass(frozen=True)
class TimedExplicitPolicy:
    """Step-indexed table policy: the action may depend on steps remaining."""

    mapping: Dict[Tuple[BitVector, int], int]
    action_count: int
    kind = "timed"

    def decide_timed(self, s: BitVector, steps_remaining: int) -> int:
        try:
            return self.mapping[(tuple(s), steps_remaining)]
        except KeyError:
            raise PolicyError(
                f"timed policy undefined at state {s} with {steps_remaining} steps remaining"
            )


def compile_explicit(
    mapping: Dict[BitVector, int], num_vars: int, action_count: int
) -> StationaryPolicy:
    """Compile a total explicit policy over all 2**n states to a circuit.

    Each output bit of the result is a full-literal DNF, so the per-output
    term count is at most 2**n.
    """
    if len(mapping) != 1 << num_vars:
        raise PolicyError(
            f"explicit policy is partial: {len(mapping)} of {1 << num_vars} states mapped"
        )
    values = []
    for row in range(1 << num_vars):
        s = tuple(int_to_bits(row, num_vars)) if num_vars else ()
        a = mapping[s]
        if not 0 <= a < action_count:
            raise PolicyError(f"action {a} out of range at state {s}")
        values.append(a)
    width = width_for_count(action_count)
    c = ct.circuit_from_values(num_vars, width, values, name="compiled_policy")
    return StationaryPolicy(c, action_count, name="compiled_policy")


def save_policy(p, directory, basename: str = "policy") -> str:
    import os

    netfile = f"{basename}.net"
    ct.write_netlist(p.circuit, os.path.join(directory, netfile))
    lines = [f"policy {p.name}", f"kind {p.kind}", f"actions {p.action_count}"]
    if p.kind == "history":
        lines.append(f"horizon {p.horizon}")
    lines.append(f"circuit {netfile}")
    path = os.path.join(directory, f"{basename}.manifest")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def load_policy(manifest_path):
    import os

    fields: Dict[str, str] = {}
    with open(manifest_path, "r", encoding="ascii") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            fields[key] = rest.strip()
    for key in ("policy", "kind", "actions", "circuit"):
        if key not in fields:
            raise PolicyError(f"policy manifest missing {key!r} line")
    base = os.path.dirname(os.path.abspath(manifest_path))
    circ = ct.read_netlist(os.path.join(base, fields["circuit"]))
    count = int(fields["actions"])
    if fields["kind"] == "stationary":
        return StationaryPolicy(circ, count, name=fields["policy"])
    if fields["kind"] == "history":
        horizon = int(fields["horizon"])
        tw = width_for_count(horizon + 1)
        num_vars = (circ.num_inputs - tw) // (horizon + 1)
        return HistoryPolicy(circ, count, horizon, num_vars, name=fields["policy"])
    raise PolicyError(f"unknown policy kind {fields['kind']!r}")
