"""Randomness under classical and quantum side information.

An eavesdropper who controls the shared resource picks a hidden branch
``lambda`` with probability ``q(lambda)`` and prepares branch states
``tau_x^lambda`` on message (C) and receiver (B) systems; the receiver measures
a fixed two-outcome POVM. Only the branch average is visible to the honest
parties, while the eavesdropper knows ``lambda``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.optimize

from . import linalg
from .errors import Infeasible, InfeasibleObservation, InvalidParams, NumericalFailure, OptimizationFailure, ShapeMismatch
from .quantum import CorrelationTable, DensityMatrix, Povm, check_omega, helstrom
from .schemes import build_scheme, optimize_r
from .sdp import SdpProblem, sdp_solve
from .seesaw import SeesawConfig, vacuum_projector

ENERGY_TOL = 1e-8
MARGINAL_TOL = 1e-7
STATISTICS_TOL = 1e-7


def binary_entropy(p: float) -> float:
    """h(p) in bits with 0 log 0 = 0."""
    return shannon_entropy([p, 1.0 - p])


def shannon_entropy(probs: Sequence[float]) -> float:
    p = np.clip(np.asarray(probs, dtype=float), 0.0, 1.0)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class ObservedStatistics:
    w2_obs: float
    omega: float
    x_star: int = 0
    y_star: int = 0

    def __post_init__(self) -> None:
        check_omega(self.omega)
        if not 0.5 - 1e-12 <= self.w2_obs <= 1.0 + 1e-12:
            raise InvalidParams(f"observed W2 must lie in [1/2, 1], got {self.w2_obs}")
        if self.x_star not in (0, 1):
            raise InvalidParams("x_star must be 0 or 1")


@dataclass(frozen=True, eq=False)
class AttackModel:
    """Branch weights ``q``, states ``branch_states[l][x]`` and Bob's POVM."""

    q: np.ndarray
    branch_states: tuple[tuple[DensityMatrix, ...], ...]
    measurement: Povm

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float)
        if q.ndim != 1 or q.size != len(self.branch_states):
            raise ShapeMismatch("one weight per branch is required")
        if np.any(q < -1e-12) or abs(q.sum() - 1.0) > 1e-9:
            raise ShapeMismatch("branch weights must form a probability distribution")
        q = np.clip(q, 0.0, None)
        q = q / q.sum()
        n_x = {len(b) for b in self.branch_states}
        if len(n_x) != 1:
            raise ShapeMismatch("every branch needs the same number of inputs")
        for branch in self.branch_states:
            for s in branch:
                if s.dim != self.measurement.dim:
                    raise ShapeMismatch("branch states and measurement act on different spaces")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "branch_states", tuple(tuple(b) for b in self.branch_states))

    @property
    def n_branches(self) -> int:
        return self.q.size

    @property
    def n_inputs(self) -> int:
        return len(self.branch_states[0])

    def outcome_probs(self) -> np.ndarray:
        """``p[l, x, b] = tr(tau_x^l M_b)``."""
        p = np.empty((self.n_branches, self.n_inputs, len(self.measurement)))
        for l, branch in enumerate(self.branch_states):
            for x, s in enumerate(branch):
                for b, e in enumerate(self.measurement.elements):
                    p[l, x, b] = np.real(np.vdot(e, s.matrix))
        return np.clip(p, 0.0, 1.0)

    def visible_table(self) -> CorrelationTable:
        avg = np.einsum("l,lxb->bx", self.q, self.outcome_probs())
        return CorrelationTable(avg[:, :, None])

    def visible_w2(self) -> float:
        p = self.outcome_probs()
        return float(np.mean([self.q @ p[:, x, x] for x in range(min(self.n_inputs, p.shape[2]))]))

    def violations(self, omega: float) -> list[str]:
        """Names of violated model constraints at energy ``omega`` (empty when valid)."""
        out = []
        for l, branch in enumerate(self.branch_states):
            for x, s in enumerate(branch):
                red = s.reduce([0])
                if red[0, 0].real < 1.0 - omega - ENERGY_TOL:
                    out.append(f"energy(l={l}, x={x}) = {red[0, 0].real:.10f}")
            m0 = branch[0].reduce([1])
            for x, s in enumerate(branch[1:], start=1):
                dev = float(np.max(np.abs(s.reduce([1]) - m0)))
                if dev > MARGINAL_TOL:
                    out.append(f"marginal(l={l}, x={x}) deviates by {dev:.2e}")
        return out


def guessing_probability(m: AttackModel, x_star: int = 0) -> float:
    """Sum over branches of q(l) * max_b p^l(b|x_star)."""
    p = m.outcome_probs()[:, x_star, :]
    return float(m.q @ p.max(axis=1))


def min_entropy(m: AttackModel, x_star: int = 0) -> float:
    return float(-np.log2(guessing_probability(m, x_star)))


def conditional_entropy(m: AttackModel, x_star: int = 0) -> float:
    """H(B|E) = sum_l q(l) H(p^l(.|x_star)) for a classical-quantum split over l."""
    p = m.outcome_probs()[:, x_star, :]
    return float(sum(ql * shannon_entropy(row) for ql, row in zip(m.q, p)))


def classical_entropies(
    states: Sequence[Sequence[np.ndarray]],
    measurements: Sequence[Sequence[Povm]],
    q: Sequence[float],
    x_star: int = 0,
    y_star: int = 0,
) -> tuple[float, float]:
    """(H_min, H) of Bob's outcome given the hidden branch for QC models.

    ``states[l][x]`` are message states and ``measurements[l][y]`` Bob's POVMs in
    branch ``l``.
    """
    q = np.asarray(q, dtype=float)
    if len(states) != q.size or len(measurements) != q.size:
        raise ShapeMismatch("states, measurements and q must list the same branches")
    if q.ndim != 1 or np.any(q < -1e-12) or abs(q.sum() - 1.0) > 1e-9:
        raise ShapeMismatch("q must be a probability distribution")
    pg = 0.0
    h = 0.0
    for ql, st, ms in zip(q, states, measurements):
        if not 0 <= x_star < len(st) or not 0 <= y_star < len(ms):
            raise ShapeMismatch("x_star or y_star out of range for a branch")
        rho = np.asarray(st[x_star], dtype=complex)
        povm = ms[y_star]
        if rho.shape != (povm.dim, povm.dim):
            raise ShapeMismatch(f"state of shape {rho.shape} measured by a {povm.dim}-dimensional POVM")
        p = np.clip([np.real(np.vdot(e, rho)) for e in povm.elements], 0.0, 1.0)
        pg += ql * p.max()
        h += ql * shannon_entropy(p)
    return float(-np.log2(pg)), float(h)


def _qq_reference(omega: float):
    """Optimized qutrit scheme at energy min(omega, 1/2) and its W2."""
    w = min(omega, 0.5)
    r, w2 = optimize_r("qutrit", w)
    return build_scheme("qutrit", w, r), min(w2, 1.0)


def explicit_two_branch_attack(obs: ObservedStatistics) -> AttackModel:
    """Mix the optimized qutrit scheme with its input-swapped copy.

    In branch l the eavesdropper guesses b = l and is right with probability
    W2 of the scheme; the weight q(0) tunes the visible W2.
    """
    scheme, w = _qq_reference(obs.omega)
    if not 1.0 - w - 1e-12 <= obs.w2_obs <= w + 1e-12:
        raise InfeasibleObservation(f"observed W2 {obs.w2_obs} outside [{1 - w:.12f}, {w:.12f}]")
    t0, t1 = scheme.post_states
    _, povm = helstrom(t0, t1)
    q0 = 0.5 if 2.0 * w - 1.0 < 1e-12 else (obs.w2_obs - (1.0 - w)) / (2.0 * w - 1.0)
    q0 = float(np.clip(q0, 0.0, 1.0))
    return AttackModel(np.array([q0, 1.0 - q0]), ((t0, t1), (t1, t0)), povm)


# ---------------------------------------------------------------------------
# min-entropy seesaw over unnormalized branch states sigma_x^l = q(l) tau_x^l


def _state_step(omega, obs, m0, n_branches, d, min_w2):
    n = d * d
    ms = (m0, np.eye(n) - m0)
    p = SdpProblem((n,) * (2 * n_branches))
    vac = vacuum_projector(d) - (1.0 - omega) * np.eye(n)
    for l in range(n_branches):
        p.add_eq({2 * l: np.eye(n), 2 * l + 1: -np.eye(n)}, 0.0)
        for x in range(2):
            p.add_ge({2 * l + x: vac}, 0.0)
        for h in linalg.hermitian_basis(d):
            op = np.kron(np.eye(d), h)
            p.add_eq({2 * l: op, 2 * l + 1: -op}, 0.0)
    p.add_eq({2 * l: np.eye(n) for l in range(n_branches)}, 1.0)
    w2 = {2 * l + x: 0.5 * ms[x] for l in range(n_branches) for x in range(2)}
    if min_w2:
        p.add_ge(w2, obs.w2_obs)
    else:
        p.add_eq(w2, obs.w2_obs)
    p.set_objective({2 * l + obs.x_star: ms[l % 2] for l in range(n_branches)})
    sol = sdp_solve(p)
    return sol.value, sol.optimizer


def _measurement_step(obs, sigmas, n_branches, min_w2):
    n = sigmas[0].shape[0]
    p = SdpProblem((n, n))
    for h in linalg.hermitian_basis(n):
        p.add_eq({0: h, 1: h}, float(np.trace(h).real))
    w2 = {
        0: 0.5 * sum(sigmas[2 * l] for l in range(n_branches)),
        1: 0.5 * sum(sigmas[2 * l + 1] for l in range(n_branches)),
    }
    if min_w2:
        p.add_ge(w2, obs.w2_obs)
    else:
        p.add_eq(w2, obs.w2_obs)
    obj = {b: np.zeros((n, n), dtype=complex) for b in (0, 1)}
    for l in range(n_branches):
        obj[l % 2] = obj[l % 2] + sigmas[2 * l + obs.x_star]
    p.set_objective(obj)
    return sdp_solve(p).optimizer[0]


def _model_from_sigmas(sigmas, m0, n_branches, d) -> AttackModel:
    q = np.array([max(np.trace(sigmas[2 * l]).real, 0.0) for l in range(n_branches)])
    keep = [l for l in range(n_branches) if q[l] > 1e-12]
    branches = []
    for l in keep:
        branches.append(tuple(DensityMatrix.repair(sigmas[2 * l + x], (d, d)) for x in range(2)))
    w, v = np.linalg.eigh(0.5 * (m0 + m0.conj().T))
    m0 = (v * np.clip(w, 0.0, 1.0)) @ v.conj().T
    qk = q[keep]
    return AttackModel(qk / qk.sum(), tuple(branches), Povm.two_outcome(m0))


def _random_measurement(n: int, base: np.ndarray | None, rng: np.random.Generator) -> np.ndarray:
    if base is not None and rng.uniform() < 0.5:
        h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        u = scipy.linalg.expm(0.5j * rng.uniform(0.0, 0.6) * (h + h.conj().T))
        return u @ base @ u.conj().T
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(z)
    k = int(rng.integers(1, n))
    return q[:, :k] @ q[:, :k].conj().T


def _accept(model: AttackModel, obs: ObservedStatistics, min_w2: bool) -> bool:
    w2 = model.visible_w2()
    ok = w2 >= obs.w2_obs - STATISTICS_TOL if min_w2 else abs(w2 - obs.w2_obs) <= STATISTICS_TOL
    return ok and not model.violations(obs.omega)


def min_entropy_attack(
    obs: ObservedStatistics,
    cfg: SeesawConfig | None = None,
    n_branches: int = 2,
    local_dim: int = 3,
    min_w2: bool = False,
) -> tuple[float, AttackModel]:
    """Upper bound on H_min(B|E) from the best attack found by seesaw.

    Alternates an SDP over the unnormalized branch states (the eavesdropper
    guesses ``b = l mod 2`` in branch ``l``) with an SDP over Bob's measurement,
    both constrained to reproduce ``obs.w2_obs``. Restart 0 starts from the
    explicit two-branch attack when it is feasible; the result is never worse
    than that attack.
    """
    cfg = cfg or SeesawConfig()
    if n_branches < 2:
        raise InvalidParams("at least two branches are needed")
    d = int(local_dim)
    n = d * d
    omega = check_omega(obs.omega)
    rng = np.random.default_rng(cfg.rng_seed)
    candidates: list[AttackModel] = []
    base = None
    try:
        explicit = explicit_two_branch_attack(obs)
        if d == 3:
            candidates.append(explicit)
            base = explicit.measurement.elements[0]
    except InfeasibleObservation:
        explicit = None
    for k in range(cfg.restarts):
        if candidates and max(guessing_probability(c, obs.x_star) for c in candidates) >= 1.0 - 1e-12:
            break  # already fully predictable
        if k == 0 and base is not None:
            m0 = base
        else:
            m0 = _random_measurement(n, base, rng)
        sigmas, m_used = None, None
        prev = -np.inf
        for it in range(1, cfg.max_iters + 1):
            if sigmas is not None:
                try:
                    m0 = _measurement_step(obs, sigmas, n_branches, min_w2)
                except NumericalFailure:
                    break
            try:
                value, new = _state_step(omega, obs, m0, n_branches, d, min_w2)
            except (NumericalFailure, Infeasible):
                break  # keep the last consistent (states, measurement) pair
            sigmas, m_used = new, m0
            cfg.log(event="min_entropy_attack", restart=k, iteration=it, omega=omega, pg=value)
            if value - prev < cfg.convergence_tol:
                break
            prev = value
        if sigmas is None:
            continue
        model = _model_from_sigmas(sigmas, m_used, n_branches, d)
        if _accept(model, obs, min_w2):
            candidates.append(model)
    if not candidates:
        raise InfeasibleObservation(f"no attack model reproduces W2 = {obs.w2_obs} at omega = {omega}")
    best = max(candidates, key=lambda c: guessing_probability(c, obs.x_star))
    return max(0.0, min_entropy(best, obs.x_star)), best


# ---------------------------------------------------------------------------
# von Neumann attack: smooth parameterization + SLSQP


def _traceless_basis(d: int) -> list[np.ndarray]:
    out = []
    for i in range(1, d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        e[0, 0] = -1.0
        out.append(e)
    return out + linalg.hermitian_basis(d)[d:]


def _sin2_derivative_kernel(lam: np.ndarray) -> np.ndarray:
    """Divided differences of f(x) = sin^2(x) for the Daleckii-Krein formula."""
    f = np.sin(lam) ** 2
    dl = lam[:, None] - lam[None, :]
    df = f[:, None] - f[None, :]
    close = np.abs(dl) < 1e-9
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(close, 0.0, df / np.where(close, 1.0, dl))
    fp = np.sin(2 * lam)
    mid = 0.5 * (fp[:, None] + fp[None, :])
    return np.where(close, mid, k)


class VnProblem:
    """Smooth formulation of the von Neumann attack.

    Variables: branch weights ``q`` (bounded, summing to one), factors ``G`` of
    each branch state ``tau = G G^dagger / tr(G G^dagger)`` (shape n x rank),
    and a Hermitian ``H`` with ``M_0 = sin^2(H)``, which keeps ``0 <= M_0 <= 1``
    and reaches projectors at finite ``H``.
    """

    def __init__(self, obs: ObservedStatistics, n_branches: int, d: int, rank: int, min_w2: bool):
        self.obs = obs
        self.L = n_branches
        self.d = d
        self.n = d * d
        self.r = rank
        self.min_w2 = min_w2
        self.vac = vacuum_projector(d)
        self.margs = [np.kron(np.eye(d), h) for h in _traceless_basis(d)]
        self.g_size = 2 * self.n * self.r
        self.size = self.L + 2 * self.L * self.g_size + self.n * self.n
        self._cache_x: np.ndarray | None = None

    # -- packing ------------------------------------------------------------
    def _g_slice(self, l: int, x: int) -> slice:
        start = self.L + (2 * l + x) * self.g_size
        return slice(start, start + self.g_size)

    def _h_slice(self) -> slice:
        return slice(self.size - self.n * self.n, self.size)

    def unpack_h(self, v: np.ndarray) -> np.ndarray:
        n = self.n
        h = np.diag(v[:n]).astype(complex)
        iu = np.triu_indices(n, 1)
        m = len(iu[0])
        h[iu] = v[n : n + m] + 1j * v[n + m :]
        h[(iu[1], iu[0])] = v[n : n + m] - 1j * v[n + m :]
        return h

    def pack_h_grad(self, g: np.ndarray) -> np.ndarray:
        iu = np.triu_indices(self.n, 1)
        return np.concatenate([g.diagonal().real, 2 * g[iu].real, 2 * g[iu].imag])

    def pack(self, q: np.ndarray, factors, m0: np.ndarray) -> np.ndarray:
        x = np.zeros(self.size)
        x[: self.L] = q
        for l in range(self.L):
            for xi in range(2):
                g = factors[l][xi]
                x[self._g_slice(l, xi)] = np.concatenate([g.real.ravel(), g.imag.ravel()])
        w, u = np.linalg.eigh(0.5 * (m0 + m0.conj().T))
        h = (u * np.arcsin(np.sqrt(np.clip(w, 0.0, 1.0)))) @ u.conj().T
        iu = np.triu_indices(self.n, 1)
        x[self._h_slice()] = np.concatenate([h.diagonal().real, h[iu].real, h[iu].imag])
        return x

    # -- evaluation ---------------------------------------------------------
    def _eval(self, x: np.ndarray) -> None:
        if self._cache_x is not None and np.array_equal(x, self._cache_x):
            return
        n, r, L = self.n, self.r, self.L
        q = x[:L]
        lam, u = np.linalg.eigh(self.unpack_h(x[self._h_slice()]))
        m0 = (u * np.sin(lam) ** 2) @ u.conj().T
        kernel = _sin2_derivative_kernel(lam)
        taus, gs, norms = {}, {}, {}
        for l in range(L):
            for xi in range(2):
                v = x[self._g_slice(l, xi)]
                g = (v[: n * r] + 1j * v[n * r :]).reshape(n, r)
                t = float(np.real(np.vdot(g, g)))
                gs[l, xi], norms[l, xi] = g, t
                taus[l, xi] = g @ g.conj().T / t
        self._cache = dict(q=q, m0=m0, u=u, kernel=kernel, taus=taus, gs=gs, norms=norms)
        self._cache_x = x.copy()

    def _exp_grad_g(self, l: int, xi: int, a: np.ndarray) -> tuple[float, np.ndarray]:
        """tr(tau_{l,x} A) and its gradient w.r.t. the real and imaginary parts of G."""
        c = self._cache
        g, t = c["gs"][l, xi], c["norms"][l, xi]
        val = float(np.real(np.vdot(a, c["taus"][l, xi])))
        w = 2.0 * (a @ g - val * g) / t
        return val, np.concatenate([w.real.ravel(), w.imag.ravel()])

    def _grad_h(self, a: np.ndarray) -> np.ndarray:
        """Gradient of tr(A M_0) w.r.t. the parameters of H."""
        c = self._cache
        u = c["u"]
        gh = u @ (c["kernel"] * (u.conj().T @ a @ u)) @ u.conj().T
        return self.pack_h_grad(gh)

    def p_star(self, x: np.ndarray) -> np.ndarray:
        self._eval(x)
        c = self._cache
        return np.array([np.real(np.vdot(c["m0"], c["taus"][l, self.obs.x_star])) for l in range(self.L)])

    def objective(self, x: np.ndarray) -> float:
        self._eval(x)
        p = self.p_star(x)
        return float(sum(ql * binary_entropy(pl) for ql, pl in zip(self._cache["q"], p)))

    def objective_grad(self, x: np.ndarray) -> np.ndarray:
        self._eval(x)
        c = self._cache
        grad = np.zeros(self.size)
        xs = self.obs.x_star
        for l in range(self.L):
            val, gg = self._exp_grad_g(l, xs, c["m0"])
            pl = float(np.clip(val, 1e-15, 1 - 1e-15))
            grad[l] = binary_entropy(val)
            dh = c["q"][l] * np.log2((1 - pl) / pl)
            grad[self._g_slice(l, xs)] += dh * gg
            grad[self._h_slice()] += dh * self._grad_h(c["taus"][l, xs])
        return grad

    def w2(self, x: np.ndarray) -> tuple[float, np.ndarray]:
        self._eval(x)
        c = self._cache
        eye = np.eye(self.n)
        val = 0.0
        grad = np.zeros(self.size)
        for l in range(self.L):
            ql = c["q"][l]
            v0, g0 = self._exp_grad_g(l, 0, c["m0"])
            v1, g1 = self._exp_grad_g(l, 1, eye - c["m0"])
            val += 0.5 * ql * (v0 + v1)
            grad[l] = 0.5 * (v0 + v1)
            grad[self._g_slice(l, 0)] += 0.5 * ql * g0
            grad[self._g_slice(l, 1)] += 0.5 * ql * g1
            grad[self._h_slice()] += 0.5 * ql * self._grad_h(c["taus"][l, 0] - c["taus"][l, 1])
        return val, grad

    def equalities(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        self._eval(x)
        vals, rows = [np.sum(x[: self.L]) - 1.0], []
        row = np.zeros(self.size)
        row[: self.L] = 1.0
        rows.append(row)
        for l in range(self.L):
            for op in self.margs:
                v0, g0 = self._exp_grad_g(l, 0, op)
                v1, g1 = self._exp_grad_g(l, 1, op)
                row = np.zeros(self.size)
                row[self._g_slice(l, 0)] = g0
                row[self._g_slice(l, 1)] = -g1
                vals.append(v0 - v1)
                rows.append(row)
        if not self.min_w2:
            w, g = self.w2(x)
            vals.append(w - self.obs.w2_obs)
            rows.append(g)
        return np.array(vals), np.array(rows)

    def inequalities(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        self._eval(x)
        vals, rows = [], []
        for l in range(self.L):
            for xi in range(2):
                v, g = self._exp_grad_g(l, xi, self.vac)
                row = np.zeros(self.size)
                row[self._g_slice(l, xi)] = g
                vals.append(v - (1.0 - self.obs.omega))
                rows.append(row)
        if self.min_w2:
            w, g = self.w2(x)
            vals.append(w - self.obs.w2_obs)
            rows.append(g)
        return np.array(vals), np.array(rows)

    def to_model(self, x: np.ndarray) -> AttackModel:
        self._eval(x)
        c = self._cache
        q = np.clip(c["q"], 0.0, None)
        keep = [l for l in range(self.L) if q[l] > 1e-12]
        branches = tuple(
            tuple(DensityMatrix.repair(c["taus"][l, xi], (self.d, self.d)) for xi in range(2)) for l in keep
        )
        return AttackModel(q[keep] / q[keep].sum(), branches, Povm.two_outcome(c["m0"]))

    def from_model(self, m: AttackModel) -> np.ndarray:
        """Parameters reproducing ``m`` (rank-truncated to the factor width)."""
        factors = []
        q = np.zeros(self.L)
        for l in range(self.L):
            src = m.branch_states[min(l, m.n_branches - 1)]
            q[l] = m.q[l] if l < m.n_branches else 0.0
            row = []
            for xi in range(2):
                w, v = np.linalg.eigh(src[xi].matrix)
                idx = np.argsort(w)[::-1][: self.r]
                row.append(v[:, idx] * np.sqrt(np.clip(w[idx], 1e-14, None)))
            factors.append(row)
        return self.pack(q / q.sum(), factors, m.measurement.elements[0])

    def random_point(self, rng: np.random.Generator) -> np.ndarray:
        x = rng.normal(size=self.size)
        x[: self.L] = rng.dirichlet(np.ones(self.L))
        for l in range(self.L):
            for xi in range(2):
                # bias factors towards the vacuum so the energy bound is nearly met
                sl = self._g_slice(l, xi)
                g = x[sl].copy().reshape(2, self.d, self.d, self.r)
                g[:, 1:] *= np.sqrt(self.obs.omega / 2)
                x[sl] = g.ravel()
        return x


def _vn_feasible(prob: VnProblem, x: np.ndarray) -> bool:
    eq, _ = prob.equalities(x)
    ineq, _ = prob.inequalities(x)
    return bool(
        np.all(np.abs(eq[1:]) <= MARGINAL_TOL) and np.all(ineq >= -ENERGY_TOL) and abs(eq[0]) <= 1e-9
    )


def vn_entropy_attack(
    obs: ObservedStatistics,
    cfg: SeesawConfig | None = None,
    n_branches: int = 2,
    local_dim: int = 3,
    min_w2: bool = False,
    rank: int | None = None,
    starts: Sequence[AttackModel] = (),
    maxiter: int = 300,
) -> tuple[float, AttackModel]:
    """Upper bound on H(B|E) from the best attack found by SLSQP with multi-start.

    Start points are the explicit two-branch attack (when feasible), any
    supplied ``starts`` models and ``cfg.restarts`` random points. Candidate
    models are accepted only if they satisfy energy, marginal and statistics
    constraints within tolerance.
    """
    cfg = cfg or SeesawConfig()
    d = int(local_dim)
    prob = VnProblem(obs, n_branches, d, rank or d, min_w2)
    rng = np.random.default_rng(cfg.rng_seed)
    seeds: list[np.ndarray] = []
    candidates: list[AttackModel] = []
    try:
        explicit = explicit_two_branch_attack(obs)
        if d == 3:
            candidates.append(explicit)
            seeds.append(prob.from_model(explicit))
    except InfeasibleObservation:
        pass
    for m in starts:
        if _accept(m, obs, min_w2):
            candidates.append(m)
        if m.measurement.dim == prob.n:
            seeds.append(prob.from_model(m))
    seeds += [prob.random_point(rng) for _ in range(cfg.restarts)]
    bounds = [(0.0, 1.0)] * n_branches + [(None, None)] * (prob.size - n_branches)
    cons = [
        {"type": "eq", "fun": lambda x: prob.equalities(x)[0], "jac": lambda x: prob.equalities(x)[1]},
        {"type": "ineq", "fun": lambda x: prob.inequalities(x)[0], "jac": lambda x: prob.inequalities(x)[1]},
    ]
    for k, x0 in enumerate(seeds):
        if candidates and min(conditional_entropy(c, obs.x_star) for c in candidates) <= 1e-12:
            break  # already zero entropy
        res = scipy.optimize.minimize(
            prob.objective,
            x0,
            jac=prob.objective_grad,
            bounds=bounds,
            constraints=cons,
            method="SLSQP",
            options={"maxiter": maxiter, "ftol": 1e-12},
        )
        cfg.log(event="vn_entropy_attack", start=k, omega=obs.omega, value=float(res.fun), status=int(res.status))
        if not _vn_feasible(prob, res.x):
            continue
        model = prob.to_model(res.x)
        if _accept(model, obs, min_w2):
            candidates.append(model)
    if not candidates:
        raise OptimizationFailure("no feasible attack found from any start point")
    best = min(candidates, key=lambda c: conditional_entropy(c, obs.x_star))
    return max(0.0, conditional_entropy(best, obs.x_star)), best
