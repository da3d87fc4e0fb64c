"""Clifford and non-Clifford gate matrices for qubits and qutrits."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .tensor import WeylLabel, clock, is_unitary, omega, shift, weyl_matrix

SINGLE_CLIFFORDS = ("H", "S", "X", "Y", "Z", "I")


class UnknownGateError(KeyError):
    pass


@dataclass(frozen=True, eq=False)
class GateDef:
    name: str
    q: int
    arity: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if m.shape != (self.q**self.arity,) * 2:
            raise ValueError(f"{self.name}: matrix shape {m.shape} does not match arity")


def hadamard(d: int) -> np.ndarray:
    """``H_d |j> = d^{-1/2} sum_i omega^{ij} |i>``."""
    i, j = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    return omega(d) ** (i * j) / np.sqrt(d)


def phase_gate(d: int) -> np.ndarray:
    """``P_d |j> = omega^{j(j-1)/2} |j>``; the qubit case is diag(1, i)."""
    if d == 2:
        return np.diag([1, 1j]).astype(np.complex128)
    j = np.arange(d)
    return np.diag(omega(d) ** ((j * (j - 1) // 2) % d))


def csum(d: int) -> np.ndarray:
    """``CSUM_d |i, j> = |i, i + j mod d>`` with the control first."""
    m = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            m[i * d + (i + j) % d, i * d + j] = 1.0
    return m


def _qubit_matrices() -> dict:
    x = shift(2)
    z = clock(2)
    return {
        "H": hadamard(2),
        "S": phase_gate(2),
        "X": x,
        "Y": 1j * x @ z,
        "Z": z,
        "I": np.eye(2, dtype=np.complex128),
        "T": np.diag([1, np.exp(1j * np.pi / 4)]),
        "CNOT": csum(2),
    }


def _qutrit_matrices() -> dict:
    x = shift(3)
    z = clock(3)
    return {
        "H": hadamard(3),
        "S": phase_gate(3),
        "X": x,
        # Y is not fixed by the gate set's source; Z X is a Weyl operator.
        "Y": z @ x,
        "Z": z,
        "I": np.eye(3, dtype=np.complex128),
        "T": np.diag([1, np.exp(2j * np.pi / 9), np.exp(-2j * np.pi / 9)]),
        "CSUM": csum(3),
    }


@lru_cache(maxsize=None)
def _registry(q: int) -> dict:
    if q == 2:
        mats = _qubit_matrices()
    elif q == 3:
        mats = _qutrit_matrices()
    else:
        raise UnknownGateError(f"no gate set registered for q={q}")
    return {
        name: GateDef(name, q, 2 if m.shape[0] == q * q else 1, m)
        for name, m in mats.items()
    }


def gate(q: int, name: str) -> GateDef:
    try:
        return _registry(q)[name]
    except KeyError:
        raise UnknownGateError(f"unknown gate {name!r} for q={q}") from None


def qubit_gate(name: str) -> GateDef:
    return gate(2, name)


def qutrit_gate(name: str) -> GateDef:
    return gate(3, name)


def gate_names(q: int) -> tuple:
    return tuple(_registry(q))


def entangler_name(q: int) -> str:
    return "CNOT" if q == 2 else "CSUM"


def weyl_decomposition(matrix: np.ndarray, q: int, n_sites: int) -> np.ndarray:
    """Coefficients ``c_b = tr(T_b^dagger M) / q^n`` over all labels b."""
    coeffs = np.empty(q ** (2 * n_sites), dtype=np.complex128)
    dim = q**n_sites
    for idx in range(coeffs.size):
        t = weyl_matrix(q, WeylLabel.from_index(idx, q, n_sites))
        coeffs[idx] = np.trace(t.conj().T @ matrix) / dim
    return coeffs


def conjugation_table(matrix: np.ndarray, q: int, n_sites: int, atol: float = 1e-10):
    """Map each label b to (b', phase) with ``G T_b G^dagger = phase T_b'``.

    Returns None if some Weyl operator is not mapped onto a single Weyl
    operator, i.e. the gate is not Clifford.
    """
    g = np.asarray(matrix)
    table = {}
    for idx in range(q ** (2 * n_sites)):
        t = weyl_matrix(q, WeylLabel.from_index(idx, q, n_sites))
        coeffs = weyl_decomposition(g @ t @ g.conj().T, q, n_sites)
        mags = np.abs(coeffs)
        top = int(np.argmax(mags))
        rest = np.delete(mags, top)
        if abs(mags[top] - 1.0) > atol or (rest.size and rest.max() > atol):
            return None
        table[idx] = (top, complex(coeffs[top]))
    return table


def is_clifford(g: GateDef, atol: float = 1e-10) -> bool:
    """True iff conjugation by the gate permutes Weyl operators up to phase."""
    if g.arity > 2:
        raise ValueError("only arity <= 2 is supported")
    if not is_unitary(g.matrix):
        return False
    return conjugation_table(g.matrix, g.q, g.arity, atol) is not None


@lru_cache(maxsize=None)
def heisenberg_tables(q: int, name: str):
    """Label maps for ``G T G^dagger`` and ``G^dagger T G`` on the gate's support.

    Each table is an int array ``dest[src]`` over flattened local labels, with
    a matching array of unit-modulus phases.
    """
    g = gate(q, name)
    fwd = conjugation_table(g.matrix, q, g.arity)
    bwd = conjugation_table(g.matrix.conj().T, q, g.arity)
    if fwd is None or bwd is None:
        raise ValueError(f"{name} is not Clifford for q={q}")
    n = q ** (2 * g.arity)

    def pack(table):
        dest = np.array([table[i][0] for i in range(n)], dtype=np.int64)
        ph = np.array([table[i][1] for i in range(n)], dtype=np.complex128)
        return dest, ph

    return pack(fwd), pack(bwd)


def certified_cliffords(q: int) -> tuple:
    return tuple(
        name for name in gate_names(q) if is_clifford(gate(q, name))
    )
