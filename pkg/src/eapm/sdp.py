"""Small dense semidefinite programs over Hermitian block variables.

Problems are stated in primal standard form::

    maximize    sum_k tr(C_k X_k) + constant
    subject to  sum_k tr(A_ik X_k) == b_i
                sum_k tr(G_jk X_k) <= h_j
                X_k >= 0 (Hermitian PSD)

and handed to cvxopt's primal-dual interior-point solver (Nesterov-Todd
scaling) through the dual LMI ``sum_i y_i A_i - C >= 0`` with one free
variable per constraint. Complex blocks are embedded as real symmetric blocks
of doubled size, ``R(H) = [[Re H, -Im H], [Im H, Re H]]``; cvxopt's cone
multiplier for the LMI is ``R(X)/2``, from which the Hermitian optimizer is
read back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

import numpy as np
import scipy.linalg
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers

from .errors import Infeasible, NonHermitian, NumericalFailure, ShapeMismatch

MAX_BLOCK = 16
PSD_TOL = 1e-9
VIOLATION_TOL = 1e-8
GAP_TOL = 1e-7

SOLVER_OPTIONS = {"show_progress": False, "maxiters": 200, "refinement": 1}
# tightest first; looser settings are retried when the solver stalls or the
# Nesterov-Todd scaling update breaks down near the boundary of the cone
TOLERANCE_LADDER = (1e-9, 1e-8)


def realify(h: np.ndarray) -> np.ndarray:
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def unrealify(z: np.ndarray) -> np.ndarray:
    n = z.shape[0] // 2
    return (z[:n, :n] + z[n:, n:]) / 2 + 1j * (z[n:, :n] - z[:n, n:]) / 2


def herm_coeffs(c: np.ndarray) -> np.ndarray:
    """Real vector v with tr(C X) = v . params(X) in the (diag, Re, Im) layout."""
    n = c.shape[0]
    iu = np.triu_indices(n, 1)
    return np.concatenate([c.diagonal().real, 2 * c[iu].real, 2 * c[iu].imag])


@dataclass
class LinearConstraint:
    coeffs: dict[int, np.ndarray]
    target: float


@dataclass
class SdpProblem:
    """Builder for a block Hermitian SDP (maximization).

    Blocks are indexed by position in ``block_dims``; each has side at most 16.
    """

    block_dims: tuple[int, ...]
    objective: dict[int, np.ndarray] = field(default_factory=dict)
    constant: float = 0.0
    equalities: list[LinearConstraint] = field(default_factory=list)
    inequalities: list[LinearConstraint] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.block_dims = tuple(int(d) for d in self.block_dims)
        if not self.block_dims or any(d < 1 or d > MAX_BLOCK for d in self.block_dims):
            raise ShapeMismatch(f"block sides must lie in [1, {MAX_BLOCK}], got {self.block_dims}")

    def _coeffs(self, coeffs: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
        out = {}
        for k, a in coeffs.items():
            a = np.asarray(a, dtype=complex)
            n = self.block_dims[k]
            if a.shape != (n, n):
                raise ShapeMismatch(f"block {k} expects {n}x{n} coefficients, got {a.shape}")
            if np.max(np.abs(a - a.conj().T)) > 1e-10:
                raise NonHermitian(f"coefficient matrix for block {k} is not Hermitian")
            out[int(k)] = 0.5 * (a + a.conj().T)
        return out

    def set_objective(self, coeffs: Mapping[int, np.ndarray], constant: float = 0.0) -> None:
        self.objective = self._coeffs(coeffs)
        self.constant = float(constant)

    def add_eq(self, coeffs: Mapping[int, np.ndarray], target: float) -> None:
        self.equalities.append(LinearConstraint(self._coeffs(coeffs), float(target)))

    def add_le(self, coeffs: Mapping[int, np.ndarray], bound: float) -> None:
        self.inequalities.append(LinearConstraint(self._coeffs(coeffs), float(bound)))

    def add_ge(self, coeffs: Mapping[int, np.ndarray], bound: float) -> None:
        self.add_le({k: -a for k, a in self._coeffs(coeffs).items()}, -float(bound))

    def evaluate(self, con: LinearConstraint, blocks: Sequence[np.ndarray]) -> float:
        return float(sum(np.real(np.vdot(a, blocks[k])) for k, a in con.coeffs.items()))

    def objective_value(self, blocks: Sequence[np.ndarray]) -> float:
        return self.constant + float(sum(np.real(np.vdot(c, blocks[k])) for k, c in self.objective.items()))


@dataclass
class SdpSolution:
    value: float
    optimizer: list[np.ndarray]
    dual_value: float
    gap: float
    violation: float
    min_eig: float
    iterations: int
    status: str


def _param_row(problem: SdpProblem, con: LinearConstraint) -> np.ndarray:
    parts = []
    for k, n in enumerate(problem.block_dims):
        a = con.coeffs.get(k)
        parts.append(herm_coeffs(a) if a is not None else np.zeros(n * n))
    return np.concatenate(parts)


def _independent_rows(rows: np.ndarray, targets: np.ndarray) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.zeros(0, dtype=int)
    scale = np.maximum(np.linalg.norm(rows, axis=1), 1e-300)
    _, r, piv = scipy.linalg.qr((rows / scale[:, None]).T, pivoting=True, mode="economic")
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-10 * max(diag[0], 1.0))) if diag.size else 0
    keep = np.sort(piv[:rank])
    if rank < rows.shape[0]:
        sol, *_ = np.linalg.lstsq(rows[keep].T, rows.T, rcond=None)
        if np.max(np.abs(sol.T @ targets[keep] - targets)) > 1e-9:
            raise Infeasible("equality constraints are inconsistent")
    return keep


def sdp_solve(problem: SdpProblem, trace: TextIO | None = None) -> SdpSolution:
    """Solve ``problem`` to optimality with a certified duality gap.

    Raises ``Infeasible`` when the constraints admit no PSD point and
    ``NumericalFailure`` when the solver cannot close the gap to 1e-7 with
    constraint violation below 1e-8.
    """
    dims = problem.block_dims
    width = sum(n * n for n in dims)
    eq_rows = np.array([_param_row(problem, c) for c in problem.equalities]).reshape(len(problem.equalities), width)
    eq_b = np.array([c.target for c in problem.equalities])
    keep = _independent_rows(eq_rows, eq_b)
    eqs = [problem.equalities[i] for i in keep]
    ineqs = problem.inequalities
    m = len(eqs) + len(ineqs)
    n_l = len(ineqs)
    if m == 0:
        raise ShapeMismatch("problem has no constraints; objective is unbounded or trivial")

    s_sizes = [2 * n for n in dims]
    n_rows = n_l + sum(s * s for s in s_sizes)
    g = np.zeros((n_rows, m))
    h = np.zeros(n_rows)
    cons = eqs + list(ineqs)
    for j in range(n_l):
        g[j, len(eqs) + j] = -1.0
    off = n_l
    for k, n in enumerate(dims):
        size = (2 * n) ** 2
        for i, con in enumerate(cons):
            a = con.coeffs.get(k)
            if a is not None:
                g[off : off + size, i] = -realify(a).ravel(order="F")
        c = problem.objective.get(k)
        if c is not None:
            h[off : off + size] = -realify(c).ravel(order="F")
        off += size
    b = np.array([c.target for c in cons])

    data = (cvx_matrix(b), cvx_matrix(g), cvx_matrix(h), {"l": n_l, "q": [], "s": s_sizes})
    failure = "no attempt made"
    for tol in TOLERANCE_LADDER:
        opts = dict(SOLVER_OPTIONS, abstol=tol, reltol=tol, feastol=tol)
        try:
            res = solvers.conelp(*data, options=opts)
        except (ArithmeticError, ValueError) as exc:
            failure = f"solver breakdown at tolerance {tol:g}: {exc!r}"
            continue
        if res["status"] == "dual infeasible":
            raise Infeasible("no positive semidefinite point satisfies the constraints")
        if res["z"] is None or res["x"] is None:
            failure = f"solver returned status {res['status']!r} without iterates"
            continue
        try:
            return _certify(problem, res, cons, len(eqs), n_l, b, trace)
        except NumericalFailure as exc:
            failure = str(exc)
    raise NumericalFailure(failure)


def _certify(problem: SdpProblem, res: dict, cons: list, n_eq: int, n_l: int, b: np.ndarray, trace) -> SdpSolution:
    dims = problem.block_dims
    ineqs = problem.inequalities
    status = res["status"]

    y = np.array(res["x"]).ravel()
    z = np.array(res["z"]).ravel()
    blocks = []
    off = n_l
    for n in dims:
        size = (2 * n) ** 2
        zk = z[off : off + size].reshape(2 * n, 2 * n, order="F")
        xk = 2.0 * unrealify(zk)
        blocks.append(0.5 * (xk + xk.conj().T))
        off += size

    primal = problem.objective_value(blocks)
    dual = problem.constant + float(b @ y)
    violation = 0.0
    for con in problem.equalities:
        violation = max(violation, abs(problem.evaluate(con, blocks) - con.target))
    for con in ineqs:
        violation = max(violation, problem.evaluate(con, blocks) - con.target)
    min_eig = min(float(np.linalg.eigvalsh(x)[0]) for x in blocks)
    dual_min = np.inf
    for k, n in enumerate(dims):
        s = -problem.objective.get(k, np.zeros((n, n)))
        for i, con in enumerate(cons):
            a = con.coeffs.get(k)
            if a is not None:
                s = s + y[i] * a
        dual_min = min(dual_min, float(np.linalg.eigvalsh(s)[0]))
    if n_l:
        dual_min = min(dual_min, float(np.min(y[n_eq:])))
    gap = dual - primal
    iters = int(res.get("iterations", 0))
    if trace is not None:
        trace.write(
            json.dumps(
                {"event": "sdp", "iterations": iters, "status": status, "primal": primal, "dual": dual, "gap": gap}
            )
            + "\n"
        )
    if status == "primal infeasible" and violation > VIOLATION_TOL:
        raise Infeasible("dual certificate of infeasibility found")
    scale = max(1.0, abs(primal))
    if violation > VIOLATION_TOL * scale or abs(gap) > GAP_TOL * scale or min_eig < -PSD_TOL or dual_min < -1e-7:
        raise NumericalFailure(
            f"status {status!r}: gap {gap:.2e}, violation {violation:.2e}, "
            f"min eig {min_eig:.2e}, dual slack min eig {dual_min:.2e}"
        )
    return SdpSolution(primal, blocks, dual, gap, violation, min_eig, iters, status)
