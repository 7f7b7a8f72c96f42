"""States, channels, measurements and the evaluators of the communication models.

The vacuum |0> of a message system is the first computational basis vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimMismatch, IncompleteChannel, InvalidEnergy, InvalidPovm, InvalidState, ShapeMismatch

PSD_TOL = 1e-9
TRACE_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
HELSTROM_ZERO_TOL = 1e-12


def check_omega(omega: float) -> float:
    omega = float(omega)
    if not 0.0 <= omega <= 1.0 or not np.isfinite(omega):
        raise InvalidEnergy(f"energy bound must lie in [0, 1], got {omega}")
    return omega


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Unit-trace positive semidefinite matrix with subsystem dimensions.

    Eigenvalues in ``[-1e-9, 0)`` are clipped to zero and the matrix is
    renormalized; larger violations raise ``InvalidState``.
    """

    matrix: np.ndarray
    dims: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidState(f"density matrix must be square, got {m.shape}")
        dims = tuple(int(d) for d in self.dims) if self.dims else (m.shape[0],)
        if int(np.prod(dims)) != m.shape[0]:
            raise DimMismatch(f"dims {dims} do not match side {m.shape[0]}")
        if linalg.hermitian_deviation(m) > linalg.HERMITIAN_TOL:
            raise InvalidState("density matrix is not Hermitian")
        m = 0.5 * (m + m.conj().T)
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"trace is {tr!r}, expected 1")
        w, v = np.linalg.eigh(m)
        if w[0] < -PSD_TOL:
            raise InvalidState(f"minimum eigenvalue {w[0]:.3e} below -{PSD_TOL}")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            m = (v * w) @ v.conj().T
            m /= np.trace(m).real
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_ket(cls, vec: np.ndarray, dims: Sequence[int] = ()) -> "DensityMatrix":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()), tuple(dims))

    @classmethod
    def repair(cls, matrix: np.ndarray, dims: Sequence[int] = ()) -> "DensityMatrix":
        """Build a state from a numerically noisy matrix (e.g. solver output).

        Symmetrizes, clips negative eigenvalues and renormalizes the trace.
        Use only where the input is known to be a state up to solver precision.
        """
        m = np.asarray(matrix, dtype=complex)
        m = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(m)
        m = (v * np.clip(w, 0.0, None)) @ v.conj().T
        return cls(m / np.trace(m).real, tuple(dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def reduce(self, keep: Sequence[int]) -> np.ndarray:
        return linalg.partial_trace(self.matrix, self.dims, keep)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]
    in_dim: int
    out_dim: int

    def __post_init__(self) -> None:
        ops = tuple(np.array(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise IncompleteChannel("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.out_dim, self.in_dim):
                raise DimMismatch(f"Kraus operator shape {k.shape}, expected {(self.out_dim, self.in_dim)}")
        dev = np.max(np.abs(sum(k.conj().T @ k for k in ops) - np.eye(self.in_dim)))
        if dev > COMPLETENESS_TOL:
            raise IncompleteChannel(f"completeness relation violated by {dev:.3e}")
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls((np.eye(dim),), dim, dim)


@dataclass(frozen=True, eq=False)
class Povm:
    elements: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        els = tuple(np.array(e, dtype=complex) for e in self.elements)
        if not els:
            raise InvalidPovm("a POVM needs at least one element")
        n = els[0].shape[0]
        for e in els:
            if e.shape != (n, n):
                raise DimMismatch("POVM elements must share one square shape")
            if linalg.hermitian_deviation(e) > linalg.HERMITIAN_TOL:
                raise InvalidPovm("POVM element is not Hermitian")
            if np.linalg.eigvalsh(0.5 * (e + e.conj().T))[0] < -PSD_TOL:
                raise InvalidPovm("POVM element is not positive semidefinite")
        dev = np.max(np.abs(sum(els) - np.eye(n)))
        if dev > PSD_TOL:
            raise InvalidPovm(f"POVM elements sum to identity only within {dev:.3e}")
        object.__setattr__(self, "elements", els)

    @classmethod
    def two_outcome(cls, m0: np.ndarray) -> "Povm":
        m0 = np.asarray(m0, dtype=complex)
        return cls((m0, np.eye(m0.shape[0]) - m0))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """Conditional distribution ``probs[b, x, y] = p(b|x,y)``."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.array(self.probs, dtype=float)
        if p.ndim != 3:
            raise ShapeMismatch(f"expected probs[b, x, y], got {p.ndim} axes")
        if np.any(p < -1e-9) or np.any(p > 1 + 1e-9):
            raise ShapeMismatch("probabilities outside [0, 1]")
        if np.max(np.abs(p.sum(axis=0) - 1.0)) > 1e-9:
            raise ShapeMismatch("p(.|x,y) does not sum to one")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.probs.shape

    def correlators(self, y: int = 0) -> np.ndarray:
        """E_x = p(0|x) - p(1|x) for two-outcome tables."""
        return self.probs[0, :, y] - self.probs[1, :, y]

    def success(self, y: int = 0) -> float:
        """Average probability of b = x over uniformly chosen x."""
        nb, nx, _ = self.probs.shape
        return float(np.mean([self.probs[x, x, y] for x in range(min(nb, nx))]))


def apply_channel(channel: KrausChannel, state: DensityMatrix, subsystem: int) -> DensityMatrix:
    dims = state.dims
    if not 0 <= subsystem < len(dims):
        raise DimMismatch(f"subsystem {subsystem} out of range for dims {dims}")
    if dims[subsystem] != channel.in_dim:
        raise DimMismatch(f"channel input dim {channel.in_dim} != subsystem dim {dims[subsystem]}")
    n = len(dims)
    t = state.matrix.reshape(dims + dims)
    out = np.zeros_like(t, shape=tuple(channel.out_dim if k % n == subsystem else dims[k % n] for k in range(2 * n)))
    for k in channel.kraus_ops:
        kt = np.tensordot(k, t, axes=([1], [subsystem]))
        kt = np.moveaxis(kt, 0, subsystem)
        kt = np.tensordot(kt, k.conj(), axes=([n + subsystem], [1]))
        out = out + np.moveaxis(kt, -1, n + subsystem)
    new_dims = tuple(channel.out_dim if i == subsystem else d for i, d in enumerate(dims))
    side = int(np.prod(new_dims))
    return DensityMatrix.repair(out.reshape(side, side), new_dims)


def vacuum_weight(state: DensityMatrix, message_subsystem: int = 0) -> float:
    """<0| tau^C |0> for the message reduction tau^C."""
    red = state.reduce([message_subsystem])
    return float(red[0, 0].real)


def vacuum_operator(dims: Sequence[int], message_subsystem: int = 0) -> np.ndarray:
    """|0><0| on the message system tensored with identity elsewhere."""
    mats = []
    for i, d in enumerate(dims):
        if i == message_subsystem:
            p = np.zeros((d, d), dtype=complex)
            p[0, 0] = 1.0
            mats.append(p)
        else:
            mats.append(np.eye(d))
    return linalg.kron_all(mats)


def helstrom(tau0: DensityMatrix, tau1: DensityMatrix) -> tuple[float, Povm]:
    """Optimal equal-prior discrimination of two states.

    Returns ``(w2, povm)`` with ``w2 = 1/2 + 1/2 * lambda_plus(tau0 - tau1)``.
    ``povm.elements[0]`` projects onto eigenvectors of ``tau0 - tau1`` with
    eigenvalue above 1e-12, so evaluating the POVM reproduces ``w2`` exactly.
    """
    if tau0.dim != tau1.dim:
        raise DimMismatch(f"state sizes differ: {tau0.dim} vs {tau1.dim}")
    w, v = linalg.eig_hermitian(tau0.matrix - tau1.matrix)
    pos = w > HELSTROM_ZERO_TOL
    vp = v[:, pos]
    m0 = vp @ vp.conj().T
    return 0.5 + 0.5 * float(np.sum(w[pos])), Povm.two_outcome(m0)


def helstrom_value(rho0: np.ndarray, rho1: np.ndarray) -> float:
    w = np.linalg.eigvalsh(rho0 - rho1)
    return 0.5 + 0.5 * float(np.sum(w[w > HELSTROM_ZERO_TOL]))


def correlations(states: Sequence[DensityMatrix], povms: Sequence[Povm]) -> CorrelationTable:
    if not states or not povms:
        raise DimMismatch("need at least one state and one measurement")
    nb = len(povms[0])
    dim = states[0].dim
    for s in states:
        if s.dim != dim:
            raise DimMismatch("states of different sizes")
    for m in povms:
        if len(m) != nb or m.dim != dim:
            raise DimMismatch("measurements must share outcome count and size with the states")
    p = np.empty((nb, len(states), len(povms)))
    for x, s in enumerate(states):
        for y, m in enumerate(povms):
            for b, e in enumerate(m.elements):
                p[b, x, y] = np.real(np.trace(s.matrix @ e))
    return CorrelationTable(np.clip(p, 0.0, 1.0))


def is_ppt(state: DensityMatrix, tol: float = PSD_TOL) -> tuple[bool, float]:
    if len(state.dims) != 2:
        raise DimMismatch(f"PPT test needs a bipartite state, got dims {state.dims}")
    pt = linalg.partial_transpose(state.matrix, state.dims, 1)
    min_eig = float(linalg.eigvals_hermitian(pt)[0])
    return min_eig >= -tol, min_eig


def ccnr_value(state: DensityMatrix) -> float:
    if len(state.dims) != 2:
        raise DimMismatch(f"CCNR test needs a bipartite state, got dims {state.dims}")
    return linalg.trace_norm(linalg.realign(state.matrix, state.dims))


def purity(state: DensityMatrix) -> float:
    return float(np.real(np.vdot(state.matrix, state.matrix)))
