import numpy as np
import pytest

from eapm import linalg, quantum
from eapm.errors import DimMismatch, IncompleteChannel, InvalidPovm, InvalidState
from eapm.quantum import DensityMatrix, KrausChannel, Povm

X = np.array([[0, 1], [1, 0]], dtype=complex)
PHI = np.array([1, 0, 0, 1]) / np.sqrt(2)


def random_state(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_density_matrix_validation():
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([1.1, -0.1]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(DimMismatch):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_density_matrix_clips_tiny_negative_eigenvalues():
    rho = DensityMatrix(np.diag([1 + 5e-11, -5e-11]))
    assert np.linalg.eigvalsh(rho.matrix)[0] >= 0
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-15)


def test_from_ket_normalizes():
    rho = DensityMatrix.from_ket(np.array([3.0, 4.0j]))
    np.testing.assert_allclose(rho.matrix, np.array([[9, -12j], [12j, 16]]) / 25)


def test_kraus_completeness():
    with pytest.raises(IncompleteChannel):
        KrausChannel((np.diag([1.0, 0.5]),), 2, 2)
    with pytest.raises(DimMismatch):
        KrausChannel((np.eye(2),), 3, 3)


def test_povm_validation():
    with pytest.raises(InvalidPovm):
        Povm((np.diag([1.0, 0.0]), np.diag([0.0, 0.5])))
    with pytest.raises(InvalidPovm):
        Povm((np.diag([1.5, 0.0]), np.diag([-0.5, 1.0])))


def test_apply_channel_examples():
    rng = np.random.default_rng(0)
    rho = DensityMatrix(random_state(4, rng), (2, 2))
    same = quantum.apply_channel(KrausChannel.identity(2), rho, 0)
    np.testing.assert_allclose(same.matrix, rho.matrix, atol=1e-14)
    flipped = quantum.apply_channel(KrausChannel((X,), 2, 2), DensityMatrix(np.diag([1.0, 0.0])), 0)
    np.testing.assert_allclose(flipped.matrix, np.diag([0, 1]))
    reset = KrausChannel((np.array([[1, 0], [0, 0]]), np.array([[0, 1], [0, 0]])), 2, 2)
    out = quantum.apply_channel(reset, DensityMatrix(np.eye(2) / 2), 0)
    np.testing.assert_allclose(out.matrix, np.diag([1, 0]), atol=1e-15)


def test_apply_channel_matches_explicit_sum():
    rng = np.random.default_rng(1)
    rho = DensityMatrix(random_state(6, rng), (2, 3))
    v = np.linalg.qr(rng.normal(size=(6, 3)) + 1j * rng.normal(size=(6, 3)))[0]
    ops = [v[2 * i : 2 * i + 2] for i in range(3)]
    chan = KrausChannel(tuple(ops), 3, 2)
    out = quantum.apply_channel(chan, rho, 1)
    expected = sum(np.kron(np.eye(2), k) @ rho.matrix @ np.kron(np.eye(2), k).conj().T for k in ops)
    assert out.dims == (2, 2)
    np.testing.assert_allclose(out.matrix, expected, atol=1e-13)


def test_vacuum_weight_examples():
    assert quantum.vacuum_weight(DensityMatrix(np.diag([1.0, 0.0]))) == 1.0
    assert quantum.vacuum_weight(DensityMatrix(np.diag([0.0, 1.0]))) == 0.0
    rho = DensityMatrix(np.kron(np.diag([0.7, 0.3]), np.eye(3) / 3), (2, 3))
    assert quantum.vacuum_weight(rho, 0) == pytest.approx(0.7)
    np.testing.assert_allclose(quantum.vacuum_operator((2, 3), 0), np.kron(np.diag([1, 0]), np.eye(3)))


def test_helstrom_examples():
    rho = DensityMatrix(np.diag([0.3, 0.7]))
    assert quantum.helstrom(rho, rho)[0] == pytest.approx(0.5, abs=1e-15)
    w2, povm = quantum.helstrom(DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0])))
    assert w2 == pytest.approx(1.0, abs=1e-15)
    np.testing.assert_allclose(povm.elements[0], np.diag([1, 0]))


@pytest.mark.parametrize("omega", [0.05, 0.2, 0.3, 0.45])
def test_helstrom_pure_states_with_energy_overlap(omega):
    # |psi_x> = sqrt(1-w)|0> +- sqrt(w)|1> has overlap c = 1 - 2w
    c = 1 - 2 * omega
    psi0 = np.array([np.sqrt(1 - omega), np.sqrt(omega)])
    psi1 = np.array([np.sqrt(1 - omega), -np.sqrt(omega)])
    w2, _ = quantum.helstrom(DensityMatrix.from_ket(psi0), DensityMatrix.from_ket(psi1))
    assert w2 == pytest.approx(0.5 * (1 + np.sqrt(1 - c**2)), abs=1e-12)
    assert w2 == pytest.approx(0.5 * (np.sqrt(1 - omega) + np.sqrt(omega)) ** 2, abs=1e-12)


def test_helstrom_matches_trace_norm_and_povm():
    rng = np.random.default_rng(2)
    for _ in range(10):
        t0, t1 = DensityMatrix(random_state(3, rng)), DensityMatrix(random_state(3, rng))
        w2, povm = quantum.helstrom(t0, t1)
        assert w2 == pytest.approx(0.5 + 0.25 * linalg.trace_norm(t0.matrix - t1.matrix), abs=1e-12)
        table = quantum.correlations([t0, t1], [povm])
        assert table.success() == pytest.approx(w2, abs=1e-12)


def test_correlations_examples():
    states = [DensityMatrix(np.diag([1.0, 0.0])), DensityMatrix(np.diag([0.0, 1.0]))]
    comp = Povm((np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))
    table = quantum.correlations(states, [comp])
    np.testing.assert_allclose(table.probs[:, :, 0], np.eye(2))
    mixed = [DensityMatrix(np.eye(2) / 2)] * 2
    half = Povm((np.eye(2) / 2, np.eye(2) / 2))
    np.testing.assert_allclose(quantum.correlations(mixed, [half, comp]).probs, 0.5)


def test_ppt_and_ccnr_examples():
    rng = np.random.default_rng(3)
    prod = DensityMatrix(np.kron(random_state(2, rng), random_state(2, rng)), (2, 2))
    ok, _ = quantum.is_ppt(prod)
    assert ok
    pure_prod = DensityMatrix.from_ket(np.kron([0.6, 0.8], [1, 0]), (2, 2))
    assert quantum.ccnr_value(pure_prod) == pytest.approx(1.0, abs=1e-12)
    bell = DensityMatrix.from_ket(PHI, (2, 2))
    ok, min_eig = quantum.is_ppt(bell)
    assert not ok
    assert min_eig == pytest.approx(-0.5, abs=1e-12)
    assert quantum.ccnr_value(bell) == pytest.approx(2.0, abs=1e-12)


def test_purity_examples():
    assert quantum.purity(DensityMatrix.from_ket(np.array([1.0, 1.0]))) == pytest.approx(1.0)
    assert quantum.purity(DensityMatrix(np.eye(2) / 2)) == pytest.approx(0.5)


def test_check_omega():
    assert quantum.check_omega(0.3) == 0.3
    with pytest.raises(ValueError):
        quantum.check_omega(-0.1)
    with pytest.raises(ValueError):
        quantum.check_omega(1.2)
