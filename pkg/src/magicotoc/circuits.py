"""Circuit containers, random t-doped construction and JSON serialization.

A circuit's op list is time ordered: ``ops[0]`` acts first.  The operator
``U = C1 V C2`` therefore stores the ops of C2, then V, then C1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import gates
from .tensor import (
    DENSE_CAP,
    DimensionError,
    QuditState,
    apply_1q_tensor,
    apply_2q_tensor,
    operator_from_circuit_action,
)


@dataclass(frozen=True)
class GateOp:
    gate: str
    targets: tuple

    def __post_init__(self):
        targets = tuple(int(t) for t in self.targets)
        if len(set(targets)) != len(targets):
            raise ValueError(f"targets must be distinct, got {targets}")
        object.__setattr__(self, "targets", targets)


@dataclass(frozen=True)
class CircuitMeta:
    seed: int | None = None
    n_t: int = 0
    cycles_per_block: int = 0


@dataclass(frozen=True)
class Circuit:
    q: int
    n_sites: int
    ops: tuple = ()
    meta: CircuitMeta = field(default_factory=CircuitMeta)

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        registry = gates.gate_names(self.q)
        for op in self.ops:
            if op.gate not in registry:
                raise gates.UnknownGateError(f"unknown gate {op.gate!r} for q={self.q}")
            g = gates.gate(self.q, op.gate)
            if len(op.targets) != g.arity:
                raise ValueError(f"{op.gate} needs {g.arity} targets, got {op.targets}")
            if any(not 0 <= t < self.n_sites for t in op.targets):
                raise IndexError(f"targets {op.targets} out of range")

    @classmethod
    def empty(cls, q: int, n_sites: int) -> "Circuit":
        return cls(q, n_sites)

    @property
    def dim(self) -> int:
        return self.q**self.n_sites

    def count(self, name: str) -> int:
        return sum(op.gate == name for op in self.ops)

    def shifted(self, offset: int, n_sites: int) -> "Circuit":
        """Same ops on sites ``offset + i`` of a larger register."""
        ops = tuple(GateOp(op.gate, tuple(t + offset for t in op.targets)) for op in self.ops)
        return Circuit(self.q, n_sites, ops, self.meta)

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "n_sites": self.n_sites,
            "meta": {
                "seed": self.meta.seed,
                "n_t": self.meta.n_t,
                "cycles_per_block": self.meta.cycles_per_block,
            },
            "ops": [{"gate": op.gate, "targets": list(op.targets)} for op in self.ops],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Circuit":
        meta = data.get("meta", {})
        circuit = cls(
            int(data["q"]),
            int(data["n_sites"]),
            tuple(GateOp(op["gate"], tuple(op["targets"])) for op in data["ops"]),
            CircuitMeta(
                meta.get("seed"), int(meta.get("n_t", 0)), int(meta.get("cycles_per_block", 0))
            ),
        )
        if circuit.meta.n_t != circuit.count("T"):
            raise ValueError("meta.n_t does not match the number of T ops")
        return circuit

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def loads(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def _as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    from .streams import stream

    return stream(int(rng)), int(rng)


def _clifford_ops(q: int, n_sites: int, cycles: int, rng: np.random.Generator) -> list:
    ent = gates.entangler_name(q)
    ops = []
    for _ in range(cycles):
        picks = rng.integers(len(gates.SINGLE_CLIFFORDS), size=n_sites)
        ops.extend(GateOp(gates.SINGLE_CLIFFORDS[k], (s,)) for s, k in enumerate(picks))
        for _ in range(2):
            pair = rng.choice(n_sites, size=2, replace=False)
            ops.append(GateOp(ent, (int(pair[0]), int(pair[1]))))
    return ops


def build_clifford_block(q: int, n_sites: int, cycles: int, rng, *, seed=None) -> Circuit:
    """``cycles`` rounds of a random single-qudit Clifford on every site
    followed by two entanglers on random ordered pairs.

    ``rng`` is a Generator or an integer seed; ``seed`` only fills metadata.
    """
    if n_sites < 2:
        raise ValueError("a Clifford block needs at least two sites")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    rng, own_seed = _as_rng(rng)
    ops = _clifford_ops(q, n_sites, cycles, rng)
    return Circuit(q, n_sites, ops, CircuitMeta(seed if seed is not None else own_seed, 0, cycles))


def build_tdoped_circuit(
    q: int, n_sites: int, n_t: int, cycles: int, rng, *, seed=None
) -> Circuit:
    """``n_t`` repetitions of [Clifford block, T on a random site].

    ``n_t = 0`` yields a single Clifford block rather than an empty circuit.
    """
    if n_t < 0:
        raise ValueError("n_t must be >= 0")
    if n_sites < 2:
        raise ValueError("a Clifford block needs at least two sites")
    rng, own_seed = _as_rng(rng)
    ops = []
    for _ in range(max(n_t, 1)):
        ops.extend(_clifford_ops(q, n_sites, cycles, rng))
        if n_t:
            ops.append(GateOp("T", (int(rng.integers(n_sites)),)))
    meta = CircuitMeta(seed if seed is not None else own_seed, n_t, cycles)
    return Circuit(q, n_sites, ops, meta)


def sandwich(c1: Circuit, v: Circuit, c2: Circuit) -> Circuit:
    """Circuit for the operator ``C1 V C2`` (C2 acts first)."""
    for c in (c1, c2):
        if (c.q, c.n_sites) != (v.q, v.n_sites):
            raise DimensionError("sandwich parts must share q and n_sites")
    ops = c2.ops + v.ops + c1.ops
    n_t = sum(op.gate == "T" for op in ops)
    return Circuit(v.q, v.n_sites, ops, replace(v.meta, n_t=n_t))


def concat(circuits: Sequence[Circuit]) -> Circuit:
    first = circuits[0]
    ops = tuple(op for c in circuits for op in c.ops)
    n_t = sum(op.gate == "T" for op in ops)
    return Circuit(first.q, first.n_sites, ops, replace(first.meta, n_t=n_t))


def apply_circuit_tensor(tensor: np.ndarray, circuit: Circuit, adjoint: bool = False) -> np.ndarray:
    """Apply every op to a ``(q,)*n + batch`` tensor, in time order.

    With ``adjoint=True`` the inverse circuit is applied instead.
    """
    ops = reversed(circuit.ops) if adjoint else circuit.ops
    for op in ops:
        m = gates.gate(circuit.q, op.gate).matrix
        if adjoint:
            m = m.conj().T
        if len(op.targets) == 1:
            tensor = apply_1q_tensor(tensor, m, op.targets[0])
        else:
            tensor = apply_2q_tensor(tensor, m, op.targets[0], op.targets[1])
    return tensor


def apply_circuit_columns(columns: np.ndarray, circuit: Circuit, adjoint: bool = False) -> np.ndarray:
    """Apply the circuit (or its inverse) to each column of a ``(d, k)`` array."""
    shape = (circuit.q,) * circuit.n_sites + (columns.shape[1],)
    out = apply_circuit_tensor(columns.reshape(shape), circuit, adjoint)
    return np.ascontiguousarray(out).reshape(circuit.dim, columns.shape[1])


def apply_circuit(state: QuditState, circuit: Circuit) -> QuditState:
    if (state.q, state.n_sites) != (circuit.q, circuit.n_sites):
        raise DimensionError("state and circuit dimensions differ")
    out = apply_circuit_tensor(state.tensor(), circuit)
    return QuditState(state.q, state.n_sites, np.ascontiguousarray(out).reshape(-1))


def circuit_unitary(circuit: Circuit, cap: int = DENSE_CAP) -> np.ndarray:
    return operator_from_circuit_action(
        lambda cols: apply_circuit_columns(cols, circuit), circuit.dim, batched=True, cap=cap
    )
