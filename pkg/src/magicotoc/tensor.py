"""Dense statevector kernels for registers of prime-dimensional qudits.

Amplitudes are stored flat, big-endian in the site index: site 0 is the most
significant digit of the basis index.  Gates are applied by contracting the
reshaped ``(q,) * n_sites`` tensor along the target axes, so no ``q**n``
square matrix is ever built on the state-vector paths.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

UNITARY_ATOL = 1e-10
DENSE_CAP = 2**13


class DimensionError(ValueError):
    """Raised when operand shapes or local dimensions do not line up."""


class CapExceededError(ValueError):
    """Raised when a dense path would exceed the configured size cap."""


@dataclass(frozen=True, eq=False)
class QuditState:
    """Pure state of ``n_sites`` qudits of local dimension ``q``."""

    q: int
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.size != self.q**self.n_sites:
            raise DimensionError(
                f"expected {self.q ** self.n_sites} amplitudes, got {amps.size}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.q**self.n_sites

    @classmethod
    def zero(cls, q: int, n_sites: int) -> "QuditState":
        return cls.basis(q, n_sites, 0)

    @classmethod
    def basis(cls, q: int, n_sites: int, index) -> "QuditState":
        """Computational basis state; ``index`` is an int or a digit sequence."""
        if not isinstance(index, (int, np.integer)):
            index = digits_to_index(index, q)
        amps = np.zeros(q**n_sites, dtype=np.complex128)
        amps[index] = 1.0
        return cls(q, n_sites, amps)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((self.q,) * self.n_sites)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def kron(self, other: "QuditState") -> "QuditState":
        if other.q != self.q:
            raise DimensionError("local dimensions differ")
        return QuditState(
            self.q, self.n_sites + other.n_sites, np.kron(self.amplitudes, other.amplitudes)
        )

    def allclose(self, other: "QuditState", atol: float = 1e-12) -> bool:
        return (
            self.q == other.q
            and self.n_sites == other.n_sites
            and np.allclose(self.amplitudes, other.amplitudes, rtol=0, atol=atol)
        )


@dataclass(frozen=True)
class WeylLabel:
    """Exponent pair (a, a') of the Weyl string ``prod_i T_{a_i a'_i}``."""

    a: tuple
    a_prime: tuple
    q: int | None = None

    def __post_init__(self):
        a = tuple(int(v) for v in self.a)
        ap = tuple(int(v) for v in self.a_prime)
        if len(a) != len(ap):
            raise DimensionError("a and a_prime must have equal length")
        if self.q is not None and any(not 0 <= v < self.q for v in a + ap):
            raise ValueError(f"label components must lie in [0, {self.q})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_prime", ap)

    @property
    def n_sites(self) -> int:
        return len(self.a)

    @classmethod
    def identity(cls, n_sites: int, q: int | None = None) -> "WeylLabel":
        return cls((0,) * n_sites, (0,) * n_sites, q)

    @classmethod
    def from_index(cls, index: int, q: int, n_sites: int) -> "WeylLabel":
        """Inverse of :meth:`index`: lexicographic over (a, a') digits."""
        digits = index_to_digits(index, q, 2 * n_sites)
        return cls(digits[:n_sites], digits[n_sites:], q)

    def index(self, q: int) -> int:
        return digits_to_index(self.a + self.a_prime, q)

    def neg(self, q: int) -> "WeylLabel":
        return WeylLabel(
            tuple((-v) % q for v in self.a), tuple((-v) % q for v in self.a_prime), q
        )

    def is_identity(self) -> bool:
        return not any(self.a) and not any(self.a_prime)


def digits_to_index(digits, q: int) -> int:
    index = 0
    for v in digits:
        index = index * q + int(v)
    return index


def index_to_digits(index: int, q: int, width: int) -> tuple:
    out = []
    for _ in range(width):
        index, r = divmod(index, q)
        out.append(r)
    return tuple(reversed(out))


def omega(q: int) -> complex:
    return np.exp(2j * np.pi / q)


def weyl_phase(q: int, a: int, a_prime: int) -> complex:
    """Scalar in front of ``Z^a X^a'``.

    For odd q this is ``omega^(-2^{-1} a a')`` with ``2^{-1} = (q+1)/2 mod q``.
    For q = 2 the same expression with ``omega = -1`` and ``2^{-1} = 1/2`` gives
    ``(-i)^(a a')``, the Hermitian Pauli convention with ``Y = -i Z X``.
    """
    if q == 2:
        return (-1j) ** ((a * a_prime) % 4)
    half = (q + 1) // 2
    return omega(q) ** ((-half * a * a_prime) % q)


def clock(q: int) -> np.ndarray:
    return np.diag(omega(q) ** np.arange(q))


def shift(q: int) -> np.ndarray:
    return np.roll(np.eye(q, dtype=np.complex128), 1, axis=0)


def weyl_matrix(q: int, label: WeylLabel) -> np.ndarray:
    """Dense ``q**n`` matrix of a Weyl string (small registers only)."""
    out = np.ones((1, 1), dtype=np.complex128)
    z, x = clock(q), shift(q)
    for a, ap in zip(label.a, label.a_prime):
        local = (
            weyl_phase(q, a, ap)
            * np.linalg.matrix_power(z, a)
            @ np.linalg.matrix_power(x, ap)
        )
        out = np.kron(out, local)
    return out


def is_unitary(matrix: np.ndarray, atol: float = UNITARY_ATOL) -> bool:
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= atol)


def _check_gate(gate: np.ndarray, dim: int, check_unitary: bool) -> np.ndarray:
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (dim, dim):
        raise DimensionError(f"gate has shape {gate.shape}, expected {(dim, dim)}")
    if check_unitary and not is_unitary(gate):
        raise ValueError("gate is not unitary")
    return gate


# Batched kernels.  ``tensor`` has shape (q,)*n_sites + extra, where the extra
# trailing axes (if any) index independent vectors, e.g. matrix columns.


def apply_1q_tensor(tensor: np.ndarray, gate: np.ndarray, site: int) -> np.ndarray:
    out = np.tensordot(gate, tensor, axes=([1], [site]))
    return np.moveaxis(out, 0, site)


def apply_2q_tensor(
    tensor: np.ndarray, gate: np.ndarray, control: int, target: int
) -> np.ndarray:
    q = tensor.shape[control]
    g = gate.reshape(q, q, q, q)
    out = np.tensordot(g, tensor, axes=([2, 3], [control, target]))
    return np.moveaxis(out, [0, 1], [control, target])


def _weyl_factors(q: int, n_sites: int, label: WeylLabel):
    if label.n_sites != n_sites:
        raise DimensionError(
            f"label acts on {label.n_sites} sites, state has {n_sites}"
        )
    a = np.array(label.a) % q
    ap = np.array(label.a_prime) % q
    phase = complex(np.prod([weyl_phase(q, int(x), int(y)) for x, y in zip(a, ap)]))
    clock_phase = np.ones((1,) * n_sites, dtype=np.complex128)
    w = omega(q)
    for site in range(n_sites):
        if a[site]:
            shape = [1] * n_sites
            shape[site] = q
            clock_phase = clock_phase * (w ** (a[site] * np.arange(q))).reshape(shape)
    return phase, clock_phase, tuple(int(v) for v in ap)


def apply_weyl_tensor(tensor: np.ndarray, q: int, n_sites: int, label: WeylLabel):
    phase, clock_phase, ap = _weyl_factors(q, n_sites, label)
    out = tensor
    if any(ap):
        out = np.roll(out, shift=ap, axis=tuple(range(n_sites)))
    extra = out.ndim - n_sites
    cp = clock_phase.reshape(clock_phase.shape + (1,) * extra)
    return phase * cp * out


# Public state-level operations.


def apply_single_qudit_gate(
    state: QuditState, gate: np.ndarray, site: int, check_unitary: bool = True
) -> QuditState:
    gate = _check_gate(gate, state.q, check_unitary)
    if not 0 <= site < state.n_sites:
        raise IndexError(f"site {site} out of range for {state.n_sites} sites")
    out = apply_1q_tensor(state.tensor(), gate, site)
    return QuditState(state.q, state.n_sites, out.reshape(-1))


def apply_two_qudit_gate(
    state: QuditState,
    gate: np.ndarray,
    control: int,
    target: int,
    check_unitary: bool = True,
) -> QuditState:
    if control == target:
        raise ValueError("control and target must differ")
    for s in (control, target):
        if not 0 <= s < state.n_sites:
            raise IndexError(f"site {s} out of range for {state.n_sites} sites")
    gate = _check_gate(gate, state.q**2, check_unitary)
    out = apply_2q_tensor(state.tensor(), gate, control, target)
    return QuditState(state.q, state.n_sites, out.reshape(-1))


def apply_weyl_string(state: QuditState, label: WeylLabel) -> QuditState:
    out = apply_weyl_tensor(state.tensor(), state.q, state.n_sites, label)
    return QuditState(state.q, state.n_sites, out.reshape(-1))


def weyl_expectation(state: QuditState, label: WeylLabel) -> complex:
    """``<psi| T_label |psi>``."""
    moved = apply_weyl_string(state, label)
    return complex(np.vdot(state.amplitudes, moved.amplitudes))


def operator_from_circuit_action(
    apply_fn: Callable[[np.ndarray], np.ndarray],
    dim: int,
    *,
    batched: bool = False,
    cap: int = DENSE_CAP,
) -> np.ndarray:
    """Dense matrix whose column j is ``apply_fn(|j>)``.

    With ``batched=True`` the function receives the identity matrix and must
    act on every column at once, which is how circuits build their unitary.
    """
    if dim > cap:
        raise CapExceededError(f"dense dimension {dim} exceeds cap {cap}")
    if batched:
        return np.asarray(apply_fn(np.eye(dim, dtype=np.complex128)), dtype=np.complex128)
    out = np.empty((dim, dim), dtype=np.complex128)
    for j in range(dim):
        e = np.zeros(dim, dtype=np.complex128)
        e[j] = 1.0
        out[:, j] = apply_fn(e)
    return out
