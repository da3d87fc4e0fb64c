import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magicotoc import gates, magic
from magicotoc.circuits import apply_circuit, build_clifford_block, build_tdoped_circuit, circuit_unitary
from magicotoc.tensor import CapExceededError, QuditState, WeylLabel

import oracles

# Oracle value (dense phase-point operators), frozen as a regression anchor.
MANA_T3_PLUS = 0.6656263738622611


def random_state(q, n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=q**n) + 1j * rng.normal(size=q**n)
    return QuditState(q, n, v / np.linalg.norm(v))


def t_on_plus(q):
    h = gates.gate(q, "H").matrix
    t = gates.gate(q, "T").matrix
    return QuditState(q, 1, t @ h @ np.eye(q)[0])


def test_single_qubit_sre_anchor():
    m2 = magic.stabilizer_renyi_entropy(t_on_plus(2))
    assert abs(m2 - math.log2(4 / 3)) <= 1e-12
    assert abs(m2 - oracles.sre_enumeration(t_on_plus(2).amplitudes)) <= 1e-12


def test_qutrit_mana_anchor():
    psi = t_on_plus(3)
    value, _ = oracles.mana_dense(psi.amplitudes, 3)
    assert abs(value - MANA_T3_PLUS) <= 1e-12
    assert abs(magic.mana(psi) - MANA_T3_PLUS) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_wigner_matches_dense_oracle(n):
    psi = random_state(3, n, 40 + n)
    _, w = oracles.mana_dense(psi.amplitudes, 3)
    for method in ("fft", "weyl"):
        spec = magic.wigner_function(psi, method)
        assert np.max(np.abs(spec.values - w)) <= 1e-12


def test_wigner_matches_phase_point_operator():
    psi = random_state(3, 2, 5)
    spec = magic.wigner_function(psi)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    for idx in (0, 7, 40, 80):
        a = magic.phase_point_operator(3, 2, spec.label(idx))
        assert abs(np.trace(a @ rho).real / 9 - spec.values[idx]) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 3), seed=st.integers(0, 10**6))
def test_wigner_sums_to_one(n, seed):
    spec = magic.wigner_function(random_state(3, n, seed))
    assert abs(spec.total() - 1) <= 1e-12
    assert spec.negativity_sum() >= 1 - 1e-12


def test_stabilizer_states_have_zero_magic():
    for seed in range(5):
        c = build_clifford_block(3, 3, 6, seed)
        assert magic.mana(apply_circuit(QuditState.zero(3, 3), c)) <= 1e-9
        c = build_clifford_block(2, 5, 6, seed)
        assert abs(magic.stabilizer_renyi_entropy(apply_circuit(QuditState.zero(2, 5), c))) <= 1e-9


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 4), seed=st.integers(0, 10**6))
def test_fwht_sre_matches_bruteforce(n, seed):
    psi = random_state(2, n, seed)
    assert abs(magic.stabilizer_renyi_entropy(psi) - magic.sre_bruteforce(psi)) <= 1e-12


@pytest.mark.parametrize("n", [1, 2])
def test_sre_matches_enumeration_oracle(n):
    psi = random_state(2, n, 9)
    assert abs(magic.stabilizer_renyi_entropy(psi) - oracles.sre_enumeration(psi.amplitudes)) <= 1e-12
    assert abs(magic.stabilizer_renyi_entropy(psi, n=3)
               - oracles.sre_enumeration(psi.amplitudes, alpha=3)) <= 1e-12


def test_pauli_expectations_normalization():
    psi = random_state(2, 3, 2)
    sq = np.concatenate([np.ravel(b**2) for b in magic.pauli_expectations(psi, chunk_rows=3)])
    assert abs(sq.sum() - 8) <= 1e-12


def test_product_state_additivity():
    t = t_on_plus(2)
    assert abs(magic.stabilizer_renyi_entropy(t.kron(t)) - 2 * math.log2(4 / 3)) <= 1e-12
    t3 = t_on_plus(3)
    assert abs(magic.mana(t3.kron(t3)) - 2 * MANA_T3_PLUS) <= 1e-12


def test_choi_state_matches_oracle():
    v = build_tdoped_circuit(2, 2, 2, 2, 3)
    u = circuit_unitary(v)
    ref = oracles.choi_vector(u)
    assert np.allclose(magic.choi_state(v).amplitudes, ref, atol=1e-13)
    assert np.allclose(magic.choi_state(u).amplitudes, ref, atol=1e-13)


@pytest.mark.parametrize("which", ["t-gate", "two-qubit"])
def test_choi_m2_matches_four_copy_oracle(which):
    if which == "t-gate":
        u = gates.qubit_gate("T").matrix
    else:
        u = circuit_unitary(build_tdoped_circuit(2, 2, 2, 2, 17))
    choi = magic.choi_state(u)
    assert abs(magic.stabilizer_renyi_entropy(choi) - oracles.m2_via_q_operator(choi.amplitudes)) <= 1e-12


def test_choi_of_t_gate_is_single_t_magic():
    choi = magic.choi_state(gates.qubit_gate("T").matrix)
    assert abs(magic.stabilizer_renyi_entropy(choi) - math.log2(4 / 3)) <= 1e-12


def test_caps_and_domains():
    with pytest.raises(CapExceededError):
        magic.mana(QuditState.zero(3, 5))
    assert magic.mana(QuditState.zero(3, 5), allow_large=True) <= 1e-12
    with pytest.raises(ValueError):
        magic.mana(QuditState.zero(2, 2))
    with pytest.raises(ValueError):
        magic.stabilizer_renyi_entropy(QuditState.zero(3, 2))
    with pytest.raises(CapExceededError):
        magic.stabilizer_renyi_entropy(QuditState.zero(2, 3), max_sites=2)


def test_large_sre_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert abs(magic.stabilizer_renyi_entropy(QuditState.zero(2, 11))) <= 1e-12
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_weyl_operator_only_for_odd_q():
    with pytest.raises(ValueError):
        magic.weyl_operator_dense(2, 1, WeylLabel((1,), (0,)))


@pytest.mark.parametrize("q,n", [(2, 3), (3, 2)])
def test_appending_cliffords_keeps_magic(q, n):
    from magicotoc.circuits import Circuit, GateOp, concat

    prep = Circuit(q, n, tuple(GateOp(g, (s,)) for s in range(n) for g in ("H", "T")))
    v = concat([prep, build_clifford_block(q, n, 3, 21)])
    measure = magic.stabilizer_renyi_entropy if q == 2 else magic.mana
    base = measure(apply_circuit(QuditState.zero(q, n), v))
    assert base > 0.1
    for name in gates.certified_cliffords(q):
        targets = (0, 1) if gates.gate(q, name).arity == 2 else (1,)
        extended = concat([v, Circuit(q, n, (GateOp(name, targets),))])
        assert abs(measure(apply_circuit(QuditState.zero(q, n), extended)) - base) <= 1e-9


def test_choi_q_oracle_anchors():
    assert abs(oracles.m2_choi_via_Q(np.eye(2))) <= 1e-12
    assert abs(oracles.m2_choi_via_Q(gates.qubit_gate("H").matrix)) <= 1e-12
    t = gates.qubit_gate("T").matrix
    assert abs(oracles.m2_choi_via_Q(t) - magic.stabilizer_renyi_entropy(magic.choi_state(t))) <= 1e-8
    with pytest.raises(ValueError):
        oracles.m2_choi_via_Q(np.eye(8))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_choi_sre_matches_q_oracle_two_qubits(seed):
    u = circuit_unitary(build_tdoped_circuit(2, 2, 1 + seed, 3, seed))
    assert abs(oracles.m2_choi_via_Q(u) - magic.stabilizer_renyi_entropy(magic.choi_state(u))) <= 1e-8
