"""Independent dense reference implementations.

Nothing here imports the package.  Everything is written from definitions
with explicit Kronecker products so that the production kernels (strides,
FFT, Walsh-Hadamard) are checked against a separate code path.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
Y2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z2 = np.diag([1, -1]).astype(complex)
PAULIS = (I2, X2, Y2, Z2)


def kron_all(mats):
    return reduce(np.kron, mats)


def pauli_strings(n):
    for combo in itertools.product(PAULIS, repeat=n):
        yield kron_all(combo)


def sre_enumeration(psi, alpha=2):
    """``-log2(sum_P <P>^(2 alpha) / d) / (alpha - 1)`` over every Pauli string."""
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    n = int(round(np.log2(d)))
    total = sum(abs(np.vdot(psi, p @ psi)) ** (2 * alpha) for p in pauli_strings(n))
    return float(-np.log2(total / d) / (alpha - 1))


def m2_via_q_operator(psi):
    """M2 from the four-copy expectation of ``Q = d^-2 sum_P P^{x4}``.

    ``sum_P <P>^4 / d = d <psi^{x4}| Q |psi^{x4}>``.  Each ``P^{x4}`` acts on
    the reshaped four-copy tensor one copy at a time; fine for up to four
    qubits in total.
    """
    psi = np.asarray(psi, dtype=complex)
    d = psi.size
    n = int(round(np.log2(d)))
    four = np.einsum("a,b,c,e->abce", psi, psi, psi, psi)
    acc = 0.0
    for p in pauli_strings(n):
        t = np.einsum("ia,abce->ibce", p, four)
        t = np.einsum("jb,ibce->ijce", p, t)
        t = np.einsum("kc,ijce->ijke", p, t)
        t = np.einsum("le,ijke->ijkl", p, t)
        acc += np.vdot(four, t).real
    q_expect = acc / d**2
    return float(-np.log2(d * q_expect))


def m2_choi_via_Q(v):
    """``-log2 tr(Q V^{x4} Q V^dag{x4}) / d^2`` with ``Q = d^-2 sum_P P^{x4}``.

    Dense d^4 x d^4 operators, so only one or two qubits.
    """
    v = np.asarray(v, dtype=complex)
    d = v.shape[0]
    n = int(round(np.log2(d)))
    if n > 2:
        raise ValueError("the four-copy oracle is limited to two qubits")
    q_op = sum(kron_all([p] * 4) for p in pauli_strings(n)) / d**2
    v4 = kron_all([v] * 4)
    value = np.trace(q_op @ v4 @ q_op @ v4.conj().T).real / d**2
    return float(-np.log2(value))


def choi_vector(u):
    """``(I x U)|I>`` with ``|I> = d^-1/2 sum_i |i>|i>``."""
    d = u.shape[0]
    ident = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    return np.kron(np.eye(d), u) @ ident


def clock_shift(q):
    w = np.exp(2j * np.pi / q)
    z = np.diag([w**k for k in range(q)])
    x = np.roll(np.eye(q), 1, axis=0)
    return z, x


def phase_point_operators(q, n):
    """Odd-q phase-point operators ``A_u = q^-n sum_b w^{<u,b>} T_b``, built literally.

    ``T_(a,a') = w^{-a a' / 2} Z^a X^a'`` per site, ``<u,b>`` the symplectic
    form ``u_a b_a' - u_a' b_a`` with the ordering fixed by the caller.
    """
    w = np.exp(2j * np.pi / q)
    half = (q + 1) // 2
    z, x = clock_shift(q)

    def t1(a, ap):
        return w ** (-(half * a * ap) % q) * np.linalg.matrix_power(z, a) @ np.linalg.matrix_power(x, ap)

    local = {(a, ap): t1(a, ap) for a in range(q) for ap in range(q)}
    pts = list(itertools.product(range(q), repeat=2 * n))
    ops = []
    for u in pts:
        ua, uap = u[:n], u[n:]
        acc = np.zeros((q**n, q**n), dtype=complex)
        for b in pts:
            ba, bap = b[:n], b[n:]
            sym = sum(ua[i] * bap[i] - uap[i] * ba[i] for i in range(n)) % q
            acc += w**sym * kron_all([local[(ba[i], bap[i])] for i in range(n)])
        ops.append(acc / q**n)
    return ops


def mana_dense(psi, q):
    psi = np.asarray(psi, dtype=complex)
    n = int(round(np.log(psi.size) / np.log(q)))
    rho = np.outer(psi, psi.conj())
    w = np.array([np.trace(a @ rho).real for a in phase_point_operators(q, n)]) / q**n
    return float(np.log2(np.abs(w).sum())), w


def otoc_definition(u, a, b):
    """``Re tr(U^dag A^dag U B^dag U^dag A U B) / d`` by plain matrix products."""
    ud = u.conj().T
    d = u.shape[0]
    return float(np.trace(ud @ a.conj().T @ u @ b.conj().T @ ud @ a @ u @ b).real / d)
