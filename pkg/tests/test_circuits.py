import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicotoc import gates
from magicotoc.circuits import (
    Circuit,
    CircuitMeta,
    GateOp,
    apply_circuit,
    build_clifford_block,
    build_tdoped_circuit,
    circuit_unitary,
    sandwich,
)
from magicotoc.tensor import QuditState, is_unitary

from oracles import kron_all


def dense_op(q, n, op):
    m = gates.gate(q, op.gate).matrix
    if len(op.targets) == 1:
        return kron_all([m if i == op.targets[0] else np.eye(q) for i in range(n)])
    c, t = op.targets
    out = np.zeros((q**n, q**n), dtype=complex)
    for col in range(q**n):
        dig = list(np.unravel_index(col, (q,) * n))
        for k in range(q * q):
            new = list(dig)
            new[c], new[t] = divmod(k, q)
            out[np.ravel_multi_index(new, (q,) * n), col] += m[k, dig[c] * q + dig[t]]
    return out


def test_block_structure():
    c = build_clifford_block(3, 4, 5, 11)
    assert len(c.ops) == 5 * (4 + 2)
    assert c.count("T") == 0
    assert c.meta.cycles_per_block == 5
    for k in range(5):
        cycle = c.ops[6 * k: 6 * k + 6]
        assert [op.targets for op in cycle[:4]] == [(0,), (1,), (2,), (3,)]
        assert all(op.gate in gates.SINGLE_CLIFFORDS for op in cycle[:4])
        assert all(op.gate == "CSUM" for op in cycle[4:])


def test_block_errors():
    with pytest.raises(ValueError):
        build_clifford_block(2, 1, 3, 0)
    with pytest.raises(ValueError):
        build_clifford_block(2, 3, 0, 0)


@pytest.mark.parametrize("n_t", [0, 1, 5])
def test_tdoped_structure(n_t):
    c = build_tdoped_circuit(2, 4, n_t, 3, 7)
    assert c.count("T") == n_t == c.meta.n_t
    assert len(c.ops) == max(n_t, 1) * 3 * 6 + n_t


def test_same_seed_same_circuit():
    a = build_tdoped_circuit(2, 5, 4, 3, 123)
    b = build_tdoped_circuit(2, 5, 4, 3, 123)
    assert a == b
    assert a != build_tdoped_circuit(2, 5, 4, 3, 124)


def test_uniform_single_qudit_draws():
    c = build_clifford_block(2, 6, 400, 3)
    singles = [op.gate for op in c.ops if len(op.targets) == 1]
    counts = np.array([singles.count(g) for g in gates.SINGLE_CLIFFORDS])
    expected = len(singles) / 6
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 20.5  # 5 dof, p = 0.001


@settings(max_examples=15, deadline=None)
@given(q=st.sampled_from([2, 3]), n=st.integers(2, 3), n_t=st.integers(0, 3), seed=st.integers(0, 10**6))
def test_serialization_roundtrip(q, n, n_t, seed):
    c = build_tdoped_circuit(q, n, n_t, 2, seed)
    back = Circuit.loads(c.dumps())
    assert back == c
    assert back.dumps() == c.dumps()


def test_loads_rejects_bad_meta():
    c = build_tdoped_circuit(2, 3, 2, 1, 0)
    data = c.to_dict()
    data["meta"]["n_t"] = 5
    with pytest.raises(ValueError):
        Circuit.from_dict(data)


def test_validation():
    with pytest.raises(gates.UnknownGateError):
        Circuit(2, 2, (GateOp("CSUM", (0, 1)),))
    with pytest.raises(ValueError):
        Circuit(2, 2, (GateOp("CNOT", (0,)),))
    with pytest.raises(IndexError):
        Circuit(2, 2, (GateOp("H", (2,)),))
    with pytest.raises(ValueError):
        GateOp("CNOT", (1, 1))


@pytest.mark.parametrize("q,n", [(2, 3), (3, 2)])
def test_unitary_matches_dense_product(q, n):
    c = build_tdoped_circuit(q, n, 2, 2, 5)
    u = np.eye(q**n, dtype=complex)
    for op in c.ops:
        u = dense_op(q, n, op) @ u
    got = circuit_unitary(c)
    assert np.max(np.abs(got - u)) <= 1e-12
    assert is_unitary(got)
    s = apply_circuit(QuditState.zero(q, n), c)
    assert np.allclose(s.amplitudes, u[:, 0], atol=1e-12)


def test_sandwich_order():
    c1 = build_clifford_block(2, 2, 2, 1)
    v = build_tdoped_circuit(2, 2, 1, 1, 2)
    c2 = build_clifford_block(2, 2, 2, 3)
    u = circuit_unitary(sandwich(c1, v, c2))
    assert np.allclose(u, circuit_unitary(c1) @ circuit_unitary(v) @ circuit_unitary(c2))
    assert sandwich(c1, v, c2).meta.n_t == 1


def test_empty_circuit_is_identity():
    assert np.allclose(circuit_unitary(Circuit.empty(3, 2)), np.eye(9))
    assert Circuit.empty(2, 2).meta == CircuitMeta()
