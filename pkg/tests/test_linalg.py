import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eapm import linalg
from eapm.errors import DimMismatch, NonHermitian, NonSquare

X = np.array([[0, 1], [1, 0]], dtype=complex)
PHI = np.array([1, 0, 0, 1]) / np.sqrt(2)


def random_state(n, rng, rank=None):
    g = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def loop_partial_trace_b(m, da, db):
    out = np.zeros((da, da), dtype=complex)
    for i in range(da):
        for j in range(da):
            for k in range(db):
                out[i, j] += m[i * db + k, j * db + k]
    return out


def test_eig_hermitian_examples():
    np.testing.assert_allclose(linalg.eig_hermitian(np.eye(2))[0], [1, 1])
    np.testing.assert_allclose(linalg.eig_hermitian(np.diag([1.0, -2.0]))[0], [-2, 1])
    w, v = linalg.eig_hermitian(X)
    np.testing.assert_allclose(w, [-1, 1])
    np.testing.assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-12)


def test_eig_hermitian_rejects_bad_input():
    with pytest.raises(NonSquare):
        linalg.eig_hermitian(np.zeros((2, 3)))
    with pytest.raises(NonHermitian):
        linalg.eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_eig_hermitian_reconstructs():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    h = a + a.conj().T
    w, v = linalg.eig_hermitian(h)
    assert np.all(np.diff(w) >= 0)
    np.testing.assert_allclose((v * w) @ v.conj().T, h, atol=1e-12)


def test_kron_examples():
    np.testing.assert_array_equal(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))
    p0 = np.diag([1.0, 0.0])
    np.testing.assert_array_equal(linalg.kron(p0, p0), np.diag([1.0, 0, 0, 0]))
    np.testing.assert_array_equal(linalg.kron(X, np.eye(2)) @ linalg.ket([2, 2], 0, 0), linalg.ket([2, 2], 1, 0))


def test_partial_trace_examples():
    p00 = linalg.projector(linalg.ket([2, 2], 0, 0))
    np.testing.assert_allclose(linalg.partial_trace(p00, [2, 2], [0]), np.diag([1, 0]))
    bell = np.outer(PHI, PHI)
    np.testing.assert_allclose(linalg.partial_trace(bell, [2, 2], [1]), np.eye(2) / 2)


def test_partial_trace_matches_loops():
    rng = np.random.default_rng(2)
    m = random_state(6, rng)
    np.testing.assert_allclose(linalg.partial_trace(m, [3, 2], [0]), loop_partial_trace_b(m, 3, 2), atol=1e-14)


def test_partial_trace_dim_mismatch():
    with pytest.raises(DimMismatch):
        linalg.partial_trace(np.eye(4), [2, 3], [0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(1, 4), st.integers(1, 4))
def test_partial_trace_of_product(seed, da, db):
    rng = np.random.default_rng(seed)
    rho = random_state(da, rng)
    sigma = 2.5 * random_state(db, rng)
    m = np.kron(rho, sigma)
    np.testing.assert_allclose(linalg.partial_trace(m, [da, db], [0]), rho * np.trace(sigma), atol=1e-12)
    np.testing.assert_allclose(linalg.partial_trace(m, [da, db], [1]), sigma, atol=1e-12)


def test_partial_transpose_examples():
    rng = np.random.default_rng(3)
    rho, sigma = random_state(2, rng), random_state(3, rng)
    np.testing.assert_allclose(linalg.partial_transpose(np.kron(rho, sigma), [2, 3], 0), np.kron(rho.T, sigma))
    np.testing.assert_allclose(linalg.partial_transpose(np.kron(rho, sigma), [2, 3], 1), np.kron(rho, sigma.T))
    d = np.diag([0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(linalg.partial_transpose(d, [2, 2], 1), d)
    pt = linalg.partial_transpose(np.outer(PHI, PHI), [2, 2], 1)
    assert np.linalg.eigvalsh(pt)[0] == pytest.approx(-0.5, abs=1e-12)


def test_partial_transpose_is_involution():
    rng = np.random.default_rng(4)
    m = random_state(6, rng)
    for sub in (0, 1):
        once = linalg.partial_transpose(m, [2, 3], sub)
        np.testing.assert_allclose(linalg.partial_transpose(once, [2, 3], sub), m)


def test_realign_trace_norm_examples():
    prod = linalg.projector(np.kron([1, 0], [np.cos(0.3), np.sin(0.3)]))
    # singular values come from sqrt(eig(M^dag M)), so zero singular values carry ~sqrt(eps) error
    assert linalg.trace_norm(linalg.realign(prod, [2, 2])) == pytest.approx(1.0, abs=1e-7)
    assert linalg.trace_norm(linalg.realign(np.outer(PHI, PHI), [2, 2])) == pytest.approx(2.0, abs=1e-12)
    assert linalg.trace_norm(np.zeros((4, 4))) == 0.0


def test_realign_entries():
    rng = np.random.default_rng(5)
    m = random_state(6, rng)
    r = linalg.realign(m, [2, 3])
    assert r.shape == (4, 9)
    # R[(i,j),(k,l)] = M[(i,k),(j,l)]
    for i, j, k, l in [(0, 1, 2, 0), (1, 1, 0, 2), (1, 0, 1, 1)]:
        assert r[i * 2 + j, k * 3 + l] == m[i * 3 + k, j * 3 + l]


def test_singular_values_match_numpy():
    rng = np.random.default_rng(6)
    a = rng.normal(size=(4, 7)) + 1j * rng.normal(size=(4, 7))
    np.testing.assert_allclose(np.sort(linalg.singular_values(a)), np.sort(np.linalg.svd(a, compute_uv=False)))


def test_hermitian_basis_is_orthogonal_and_spans():
    basis = linalg.hermitian_basis(3)
    assert len(basis) == 9
    gram = np.array([[np.vdot(a, b) for b in basis] for a in basis])
    np.testing.assert_allclose(gram, np.diag([1, 1, 1, 2, 2, 2, 2, 2, 2]), atol=1e-12)
    flat = np.array([b.ravel() for b in basis])
    assert np.linalg.matrix_rank(flat) == 9
    for b in basis:
        np.testing.assert_allclose(b, b.conj().T)
