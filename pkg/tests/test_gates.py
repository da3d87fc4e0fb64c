import numpy as np
import pytest

from magicotoc import gates
from magicotoc.tensor import is_unitary


@pytest.mark.parametrize("q", [2, 3])
def test_registry_is_unitary(q):
    for name in gates.gate_names(q):
        assert is_unitary(gates.gate(q, name).matrix), name


@pytest.mark.parametrize("q", [2, 3])
def test_clifford_certification(q):
    certified = set(gates.certified_cliffords(q))
    assert certified == set(gates.gate_names(q)) - {"T"}
    assert not gates.is_clifford(gates.gate(q, "T"))


def test_qubit_matrices():
    assert np.allclose(gates.qubit_gate("S").matrix, np.diag([1, 1j]))
    assert np.allclose(gates.qubit_gate("T").matrix, np.diag([1, np.exp(1j * np.pi / 4)]))
    h = gates.qubit_gate("H").matrix
    assert np.allclose(h, np.array([[1, 1], [1, -1]]) / np.sqrt(2))


def test_qutrit_matrices():
    w = np.exp(2j * np.pi / 3)
    h = gates.qutrit_gate("H").matrix
    assert np.allclose(h * np.sqrt(3), [[1, 1, 1], [1, w, w**2], [1, w**2, w]])
    zeta = np.exp(2j * np.pi / 9)
    assert np.allclose(gates.qutrit_gate("T").matrix, np.diag([1, zeta, zeta.conjugate()]))
    assert np.allclose(gates.qutrit_gate("S").matrix, np.diag([1, 1, w]))


def test_csum_is_control_first():
    m = gates.csum(3)
    assert m[1 * 3 + 2, 1 * 3 + 1] == 1
    assert np.allclose(gates.qubit_gate("CNOT").matrix, gates.csum(2))


def test_unknown_gate():
    with pytest.raises(gates.UnknownGateError):
        gates.gate(2, "CSUM")
    with pytest.raises(gates.UnknownGateError):
        gates.gate(5, "H")


def test_matrices_are_read_only():
    with pytest.raises(ValueError):
        gates.qubit_gate("H").matrix[0, 0] = 2


@pytest.mark.parametrize("q,name", [(2, "H"), (2, "S"), (2, "CNOT"), (3, "H"), (3, "S"), (3, "CSUM")])
def test_heisenberg_tables_are_inverse(q, name):
    (fd, fp), (bd, bp) = gates.heisenberg_tables(q, name)
    assert np.array_equal(bd[fd], np.arange(fd.size))
    assert np.allclose(fp * bp[fd], 1.0)
