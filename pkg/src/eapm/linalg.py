"""Dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays. Subsystem structure is described by a
sequence of dimensions whose product equals the matrix side length.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimMismatch, NonHermitian, NonSquare

HERMITIAN_TOL = 1e-10


def _check_square(m: np.ndarray) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSquare(f"expected a square matrix, got shape {m.shape}")


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimMismatch(f"invalid subsystem dimensions {dims}")
    if int(np.prod(dims)) != m.shape[0]:
        raise DimMismatch(f"dims {dims} do not match matrix side {m.shape[0]}")
    return dims


def hermitian_deviation(h: np.ndarray) -> float:
    return float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0


def eig_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    The input is symmetrized as ``(H + H^dagger)/2`` before decomposition.
    Returns ascending eigenvalues and the matching orthonormal eigenvectors as
    columns.

    Raises ``NonSquare`` for rectangular input and ``NonHermitian`` when
    ``max|H - H^dagger|`` exceeds ``tol``.
    """
    h = np.asarray(h, dtype=complex)
    _check_square(h)
    dev = hermitian_deviation(h)
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    return np.linalg.eigh(0.5 * (h + h.conj().T))


def eigvals_hermitian(h: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    _check_square(h)
    dev = hermitian_deviation(h)
    if dev > tol:
        raise NonHermitian(f"matrix deviates from Hermitian by {dev:.3e}")
    return np.linalg.eigvalsh(0.5 * (h + h.conj().T))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(out, m)
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems appear in the result in ascending index order. Keeping no
    subsystem returns the 1x1 matrix holding the full trace.
    """
    m = np.asarray(m)
    _check_square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimMismatch(f"subsystem indices {keep} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    # einsum labels: rows 0..n-1, columns n..2n-1; traced pairs share a label
    row = list(range(n))
    col = [k + n if k in keep else k for k in range(n)]
    out = [k for k in keep] + [k + n for k in keep]
    res = np.einsum(t, row + col, out)
    side = int(np.prod([dims[k] for k in keep])) if keep else 1
    return np.asarray(res).reshape(side, side)


def partial_transpose(m: np.ndarray, dims: Sequence[int], subsystem: int) -> np.ndarray:
    m = np.asarray(m)
    _check_square(m)
    dims = _check_dims(m, dims)
    n = len(dims)
    if not 0 <= subsystem < n:
        raise DimMismatch(f"subsystem {subsystem} out of range for {n} subsystems")
    t = m.reshape(dims + dims)
    perm = list(range(2 * n))
    perm[subsystem], perm[subsystem + n] = perm[subsystem + n], perm[subsystem]
    return t.transpose(perm).reshape(m.shape)


def realign(m: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Realignment R(M)_{(i,k),(j,l)} = M_{(i,j),(k,l)} of a bipartite operator.

    The result has shape ``(d_A**2, d_B**2)``.
    """
    m = np.asarray(m)
    _check_square(m)
    dims = _check_dims(m, dims)
    if len(dims) != 2:
        raise DimMismatch(f"realignment needs exactly two subsystems, got {len(dims)}")
    da, db = dims
    return m.reshape(da, db, da, db).transpose(0, 2, 1, 3).reshape(da * da, db * db)


def singular_values(m: np.ndarray) -> np.ndarray:
    """Singular values as square roots of the spectrum of ``M^dagger M``.

    Negative eigenvalues caused by rounding are clipped to zero. Ordered
    descending.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise NonSquare(f"expected a matrix, got {m.ndim} dimensions")
    gram = m.conj().T @ m if m.shape[0] >= m.shape[1] else m @ m.conj().T
    ev = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    return np.sqrt(np.clip(ev, 0.0, None))[::-1]


def trace_norm(m: np.ndarray) -> float:
    return float(np.sum(singular_values(m)))


def ket(dims: Sequence[int], *levels: int) -> np.ndarray:
    """Computational basis vector |l_1 l_2 ...> on subsystems of the given dims."""
    dims = tuple(dims)
    if len(levels) != len(dims):
        raise DimMismatch(f"{len(levels)} levels for {len(dims)} subsystems")
    v = np.zeros(int(np.prod(dims)), dtype=complex)
    v[np.ravel_multi_index(levels, dims)] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def hermitian_basis(n: int) -> list[np.ndarray]:
    """Orthogonal basis of n x n Hermitian matrices: E_ii, E_ij + E_ji, i(E_ij - E_ji)."""
    basis = []
    for i in range(n):
        e = np.zeros((n, n), dtype=complex)
        e[i, i] = 1.0
        basis.append(e)
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
            f = np.zeros((n, n), dtype=complex)
            f[i, j] = 1j
            f[j, i] = -1j
            basis.append(f)
    return basis
