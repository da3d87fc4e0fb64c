"""Exact non-stabilizerness measures: mana and stabilizer Renyi entropies."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, apply_circuit
from .tensor import (
    DENSE_CAP,
    CapExceededError,
    DimensionError,
    QuditState,
    WeylLabel,
    apply_weyl_string,
    omega,
    weyl_matrix,
)

MANA_MAX_SITES = 4
MANA_OVERRIDE_MAX_SITES = 6
SRE_MAX_SITES = 12
SRE_WARN_SITES = 10


def _require_odd_prime(q: int, what: str) -> None:
    if q % 2 == 0 or q < 3 or any(q % p == 0 for p in range(2, int(q**0.5) + 1)):
        raise ValueError(f"{what} is only defined for odd prime local dimension, got q={q}")


def compensated_sum(values) -> float:
    """Correctly rounded sum of a flat float sequence (order independent)."""
    return math.fsum(np.asarray(values, dtype=np.float64).ravel().tolist())


@dataclass(frozen=True, eq=False)
class WignerSpectrum:
    """Discrete Wigner function indexed by u = (a, a') with a's digits first."""

    q: int
    n_sites: int
    values: np.ndarray

    def total(self) -> float:
        return compensated_sum(self.values)

    def negativity_sum(self) -> float:
        return compensated_sum(np.abs(self.values))

    def label(self, index: int) -> WeylLabel:
        return WeylLabel.from_index(index, self.q, self.n_sites)


def weyl_operator_dense(q: int, n_sites: int, label: WeylLabel) -> np.ndarray:
    _require_odd_prime(q, "the dense Weyl operator")
    if label.n_sites != n_sites:
        raise DimensionError("label length does not match n_sites")
    return weyl_matrix(q, label)


def phase_point_operator(q: int, n_sites: int, b: WeylLabel, cap: int = DENSE_CAP) -> np.ndarray:
    """``A_b = q^-N T_b (sum_a T_a) T_b^dagger`` built from its definition."""
    _require_odd_prime(q, "the phase-point operator")
    dim = q**n_sites
    if dim > cap:
        raise CapExceededError(f"dimension {dim} exceeds cap {cap}")
    total = np.zeros((dim, dim), dtype=np.complex128)
    for idx in range(q ** (2 * n_sites)):
        total += weyl_matrix(q, WeylLabel.from_index(idx, q, n_sites))
    tb = weyl_operator_dense(q, n_sites, b)
    return tb @ total @ tb.conj().T / dim


def _parity_expectation(tensor: np.ndarray) -> complex:
    flipped = tensor
    for axis in range(tensor.ndim):
        flipped = np.roll(np.flip(flipped, axis=axis), 1, axis=axis)
    return complex(np.vdot(tensor.reshape(-1), flipped.reshape(-1)))


def _wigner_via_weyl(state: QuditState) -> np.ndarray:
    # A_u = T_u P T_u^dagger with P the parity |x> -> |-x>, and T_u^dagger is
    # T_{-u} up to a phase that cancels in the expectation.
    q, n = state.q, state.n_sites
    out = np.empty(q ** (2 * n))
    for idx in range(out.size):
        label = WeylLabel.from_index(idx, q, n).neg(q)
        phi = apply_weyl_string(state, label)
        out[idx] = _parity_expectation(phi.tensor()).real
    return out / q**n


def _wigner_via_fft(state: QuditState) -> np.ndarray:
    # <psi|A_u|psi> = omega^{2 a.a'} sum_x omega^{-2 a.x} psi(x) conj(psi(2a' - x)),
    # so for every shift a' the a-dependence is one n-dimensional DFT.
    q, n = state.q, state.n_sites
    dim = q**n
    psi = state.amplitudes
    digits = np.array(list(itertools.product(range(q), repeat=n)), dtype=np.int64)
    weights = q ** np.arange(n - 1, -1, -1)
    mirror = ((2 * digits[:, None, :] - digits[None, :, :]) % q) @ weights
    g = psi[None, :] * np.conj(psi[mirror])
    spec = np.fft.fftn(g.reshape((dim,) + (q,) * n), axes=tuple(range(1, n + 1)))
    spec = spec.reshape(dim, dim)
    doubled = ((2 * digits) % q) @ weights
    spec = spec[:, doubled]
    phase = omega(q) ** ((2 * digits @ digits.T) % q)
    values = phase * spec
    # rows index a', columns index a; flip to the (a, a') ordering.
    return np.ascontiguousarray(values.T).reshape(-1).real / dim


def wigner_function(state: QuditState, method: str = "fft") -> WignerSpectrum:
    """Wigner coefficients ``W(u) = q^-N <psi|A_u|psi>`` without dense A_u."""
    _require_odd_prime(state.q, "the discrete Wigner function")
    if method == "fft":
        values = _wigner_via_fft(state)
    elif method == "weyl":
        values = _wigner_via_weyl(state)
    else:
        raise ValueError(f"unknown method {method!r}")
    return WignerSpectrum(state.q, state.n_sites, values)


def mana(state: QuditState, allow_large: bool = False) -> float:
    """``log2 sum_u |W(u)|``."""
    _require_odd_prime(state.q, "mana")
    limit = MANA_OVERRIDE_MAX_SITES if allow_large else MANA_MAX_SITES
    if state.n_sites > limit:
        raise CapExceededError(
            f"mana on {state.n_sites} sites exceeds the cap of {limit}"
            + ("" if allow_large else " (pass allow_large=True for up to 6)")
        )
    return max(0.0, math.log2(wigner_function(state).negativity_sum()))


def _fwht_rows(block: np.ndarray, n: int) -> np.ndarray:
    """Walsh-Hadamard transform along the last axis (length 2**n), unnormalized."""
    rows = block.shape[0]
    work = block.reshape((rows,) + (2,) * n)
    for axis in range(1, n + 1):
        lo = np.take(work, 0, axis=axis)
        hi = np.take(work, 1, axis=axis)
        work = np.stack((lo + hi, lo - hi), axis=axis)
    return work.reshape(rows, -1)


def pauli_expectations(state: QuditState, chunk_rows: int | None = None):
    """Yield ``|<psi|P|psi>|`` for all qubit Pauli strings, in row blocks.

    Row r holds the strings with X-part r, column c the strings with Z-part c;
    ``<Z^c X^r> = sum_x (-1)^{c.x} conj(psi(x)) psi(x xor r)`` is a
    Walsh-Hadamard transform over x.
    """
    if state.q != 2:
        raise ValueError("Pauli enumeration needs q = 2")
    n, dim = state.n_sites, state.dim
    psi = state.amplitudes
    x = np.arange(dim)
    if chunk_rows is None:
        chunk_rows = max(1, min(dim, 2**22 // dim))
    for start in range(0, dim, chunk_rows):
        r = np.arange(start, min(dim, start + chunk_rows))
        f = np.conj(psi)[None, :] * psi[x[None, :] ^ r[:, None]]
        yield np.abs(_fwht_rows(f, n))


def stabilizer_renyi_entropy(state: QuditState, n: int = 2, max_sites: int = SRE_MAX_SITES) -> float:
    """``M_n = (1-n)^-1 log2 sum_P <P>^{2n} / 2^N`` over all 4^N Pauli strings."""
    if state.q != 2:
        raise ValueError("the stabilizer Renyi entropy here is defined for qubits")
    if int(n) != n or n < 2:
        raise ValueError("order n must be an integer >= 2")
    if state.n_sites > max_sites:
        raise CapExceededError(f"{state.n_sites} qubits exceeds the enumeration cap {max_sites}")
    if state.n_sites > SRE_WARN_SITES:
        warnings.warn(
            f"Pauli enumeration over 4^{state.n_sites} strings may take minutes",
            RuntimeWarning,
            stacklevel=2,
        )
    parts = [np.ravel(block ** (2 * n)) for block in pauli_expectations(state)]
    total = compensated_sum(np.concatenate(parts)) / 2**state.n_sites
    return math.log2(total) / (1 - n)


def sre_bruteforce(state: QuditState, n: int = 2) -> float:
    """Direct enumeration with one Weyl-string expectation per Pauli string."""
    from .tensor import weyl_expectation

    terms = []
    for idx in range(4**state.n_sites):
        label = WeylLabel.from_index(idx, 2, state.n_sites)
        terms.append(abs(weyl_expectation(state, label)) ** (2 * n))
    return math.log2(compensated_sum(terms) / 2**state.n_sites) / (1 - n)


def maximally_entangled(q: int, n_sites: int) -> QuditState:
    """``|I> = q^{-N/2} sum_i |i>|i>`` on 2N sites (reference register first)."""
    dim = q**n_sites
    return QuditState(q, 2 * n_sites, np.eye(dim, dtype=np.complex128).reshape(-1) / np.sqrt(dim))


def choi_state(v, q: int | None = None) -> QuditState:
    """``(I (x) V)|I>``; ``v`` is a Circuit or a dense unitary matrix."""
    if isinstance(v, Circuit):
        big = v.shifted(v.n_sites, 2 * v.n_sites)
        return apply_circuit(maximally_entangled(v.q, v.n_sites), big)
    u = np.asarray(v, dtype=np.complex128)
    q = 2 if q is None else q
    dim = u.shape[0]
    n_sites = round(math.log(dim, q))
    if q**n_sites != dim:
        raise DimensionError(f"matrix dimension {dim} is not a power of {q}")
    # amplitude of |i>|j> is V[j, i] / sqrt(d)
    return QuditState(q, 2 * n_sites, u.T.reshape(-1) / np.sqrt(dim))
