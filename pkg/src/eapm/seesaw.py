"""Seesaw searches over entanglement-assisted prepare-and-measure models.

A model with local dimension ``d`` is described by the two post-encoding
states ``tau_x`` on message (C, first factor) and Bob's share (B). Any pair with
equal B-marginals arises from a shared state and local encodings on the
sender's side, so the state step optimizes over such pairs directly and
:func:`realize_scheme` rebuilds explicit channels afterwards.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TextIO

import numpy as np
import scipy.linalg

from . import linalg
from .errors import Infeasible, InvalidParams, NumericalFailure, SamplingExhausted
from .quantum import DensityMatrix, KrausChannel, Povm, apply_channel, check_omega, helstrom, vacuum_weight
from .schemes import Scheme, qc_optimal_w2
from .sdp import SdpProblem, sdp_solve

SUPPORTED_DIMS = (2, 3, 4)


@dataclass(frozen=True)
class SeesawConfig:
    max_iters: int = 300
    convergence_tol: float = 1e-8
    restarts: int = 20
    rng_seed: int = 20240601
    trace: TextIO | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise InvalidParams("max_iters must be at least 1")
        if not self.convergence_tol > 0:
            raise InvalidParams("convergence_tol must be positive")
        if self.restarts < 1:
            raise InvalidParams("restarts must be at least 1")

    def log(self, **record) -> None:
        if self.trace is not None:
            self.trace.write(json.dumps(record) + "\n")


@dataclass(frozen=True, eq=False)
class SeesawResult:
    value: float
    states: tuple[np.ndarray, np.ndarray]
    povm: Povm
    local_dim: int
    iterations: int
    history: tuple[float, ...]

    @property
    def scheme(self) -> Scheme:
        return realize_scheme(self.states, self.local_dim)


def _check_dim(d: int) -> int:
    if d not in SUPPORTED_DIMS:
        raise InvalidParams(f"local dimension must be one of {SUPPORTED_DIMS}, got {d}")
    return int(d)


def vacuum_projector(d: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    p[0, 0] = 1.0
    return np.kron(p, np.eye(d))


def marginal_operators(d: int) -> list[np.ndarray]:
    """Operators 1_C (x) h for a Hermitian basis h of Bob's system."""
    return [np.kron(np.eye(d), h) for h in linalg.hermitian_basis(d)]


def state_pair_problem(d: int, omega: float, iso0: np.ndarray | None = None) -> SdpProblem:
    """Feasible set shared by every state step: two unit-trace PSD states on
    C (x) B obeying the energy bound, with identical B-marginals.

    With ``iso0`` (an isometry V) block 0 holds the compressed variable
    ``sigma`` of ``tau_0 = V sigma V^dagger``.
    """
    n = d * d

    def on0(a: np.ndarray) -> np.ndarray:
        return a if iso0 is None else iso0.conj().T @ a @ iso0

    p = SdpProblem((n if iso0 is None else iso0.shape[1], n))
    p.add_eq({0: on0(np.eye(n))}, 1.0)
    vac = vacuum_projector(d)
    p.add_ge({0: on0(vac)}, 1.0 - omega)
    p.add_ge({1: vac}, 1.0 - omega)
    for op in marginal_operators(d):
        p.add_eq({0: on0(op), 1: -op}, 0.0)
    return p


def random_state_pair(d: int, omega: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random energy-respecting pair with equal B-marginals.

    A random pure state on A (x) B is pushed through two random channels on A
    (Stinespring isometries from QR of a Gaussian matrix), then each output is
    mixed with ``|0><0| (x) tau^B`` just enough to meet the vacuum bound.
    Mixing with the common marginal keeps the B-marginals equal.
    """
    n = d * d
    psi = rng.normal(size=n) + 1j * rng.normal(size=n)
    state = DensityMatrix.from_ket(psi, (d, d))
    taus = []
    for _ in range(2):
        k = int(rng.integers(1, d + 1))
        g = rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d))
        iso, _ = np.linalg.qr(g)
        ops = tuple(iso[i * d : (i + 1) * d, :] for i in range(k))
        taus.append(apply_channel(KrausChannel(ops, d, d), state, 0).matrix)
    tau_b = linalg.partial_trace(taus[0], (d, d), [1])
    vac_state = np.kron(np.diag([1.0] + [0.0] * (d - 1)), tau_b)
    out = []
    for t in taus:
        v = float(np.real(np.trace(vacuum_projector(d) @ t)))
        need = 1.0 - omega
        s = 0.0 if v >= need else (need - v) / (1.0 - v)
        s = min(1.0, s * (1 + rng.uniform(0.0, 0.2)) + 1e-12)
        out.append((1 - s) * t + s * vac_state)
    return out[0], out[1]


def realize_scheme(states: tuple[np.ndarray, np.ndarray], d: int) -> Scheme:
    """Explicit shared state and encodings producing a pair with equal B-marginals.

    The shared state is the purification ``sum_i sqrt(p_i)|i>|e_i>`` of the
    common marginal; channel ``x`` has Choi matrix
    ``D^{-1/2} sigma_x D^{-1/2}`` with ``sigma_x`` written in the marginal's
    eigenbasis. Directions outside the marginal's support are sent to the
    vacuum.
    """
    tau_b = linalg.partial_trace(0.5 * (states[0] + states[1]), (d, d), [1])
    p, vecs = np.linalg.eigh(0.5 * (tau_b + tau_b.conj().T))
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi += np.sqrt(p[i]) * np.kron(np.eye(d)[i], vecs[:, i])
    shared = DensityMatrix.from_ket(psi, (d, d))
    support = p > 1e-12
    u = np.kron(np.eye(d), vecs)
    channels = []
    for tau in states:
        sigma = (u.conj().T @ tau @ u).reshape(d, d, d, d)  # [c, i, c', j]
        choi = np.zeros((d, d, d, d), dtype=complex)  # [i, c, j, c']
        for i in range(d):
            for j in range(d):
                if support[i] and support[j]:
                    choi[i, :, j, :] = sigma[:, i, :, j] / np.sqrt(p[i] * p[j])
            if not support[i]:
                choi[i, 0, i, 0] = 1.0
        choi = choi.reshape(d * d, d * d)
        w, v = np.linalg.eigh(0.5 * (choi + choi.conj().T))
        ops = [np.sqrt(lam) * v[:, k].reshape(d, d).T for k, lam in enumerate(w) if lam > 1e-13]
        s = sum(k.conj().T @ k for k in ops)
        fix = scipy.linalg.inv(scipy.linalg.sqrtm(s))
        channels.append(KrausChannel(tuple(k @ fix for k in ops), d, d))
    posts = tuple(apply_channel(ch, shared, 0) for ch in channels)
    return Scheme(shared, tuple(channels), posts, 0)


def _w2_state_step(d: int, omega: float, m0: np.ndarray) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    n = d * d
    p = state_pair_problem(d, omega)
    p.set_objective({0: 0.5 * m0, 1: 0.5 * (np.eye(n) - m0)})
    sol = sdp_solve(p)
    return sol.value, (sol.optimizer[0], sol.optimizer[1])


def qc_warm_start(d: int, omega: float) -> tuple[np.ndarray, np.ndarray]:
    """Unentangled pair realizing qc_optimal_w2: qubit message states in the
    span of |0>, |1>, tensored with a fixed state of Bob."""
    w = min(omega, 0.5)
    c = np.zeros(d)
    c[0] = np.sqrt(1 - w)
    c[1] = np.sqrt(w)
    c2 = c.copy()
    c2[1] = -c2[1]
    b = np.zeros((d, d))
    b[0, 0] = 1.0
    return np.kron(np.outer(c, c), b).astype(complex), np.kron(np.outer(c2, c2), b).astype(complex)


def _w2_single(d: int, omega: float, init: tuple[np.ndarray, np.ndarray], cfg: SeesawConfig, tag: int) -> SeesawResult:
    states = init
    history: list[float] = []
    best = -np.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        _, povm = helstrom(DensityMatrix.repair(states[0]), DensityMatrix.repair(states[1]))
        value, states = _w2_state_step(d, omega, povm.elements[0])
        history.append(value)
        cfg.log(event="seesaw_w2", restart=tag, iteration=it, value=value)
        if value - best < cfg.convergence_tol:
            best = max(best, value)
            break
        best = value
    t0, t1 = DensityMatrix.repair(states[0], (d, d)), DensityMatrix.repair(states[1], (d, d))
    w2, povm = helstrom(t0, t1)
    return SeesawResult(min(w2, 1.0), (t0.matrix, t1.matrix), povm, d, it, tuple(history))


def seesaw_w2(omega: float, local_dim: int, cfg: SeesawConfig | None = None) -> SeesawResult:
    """Best W2 over alternating Helstrom-measurement / state-pair SDP steps.

    Restart 0 starts from the unentangled optimum; the others start from
    random pairs drawn by :func:`random_state_pair`.
    """
    cfg = cfg or SeesawConfig()
    omega = check_omega(omega)
    d = _check_dim(local_dim)
    rng = np.random.default_rng(cfg.rng_seed)
    best: SeesawResult | None = None
    for k in range(cfg.restarts):
        init = qc_warm_start(d, omega) if k == 0 else random_state_pair(d, omega, rng)
        try:
            res = _w2_single(d, omega, init, cfg, k)
        except NumericalFailure:
            if k == 0 and cfg.restarts == 1:
                raise
            continue
        if best is None or res.value > best.value:
            best = res
        if best.value >= 1.0 - 1e-12:
            break
    if best is None:
        raise NumericalFailure("every seesaw restart failed inside the SDP solver")
    return best


# E0 = -1 forces tau_0 into the kernel of M_0 and has no strictly feasible
# point, so targets this close to the edge use a dedicated alternation in
# which the constraint holds by construction
EDGE_SNAP = 1e-9
KERNEL_TOL = 1e-9
E0_TOL = 1e-7


def _correlators(states, m0) -> tuple[float, float]:
    obs = 2.0 * m0 - np.eye(m0.shape[0])
    e0, e1 = (float(np.real(np.vdot(obs, s))) for s in states)
    return e0, e1


def _correlator_measurement_step(states: tuple[np.ndarray, np.ndarray], e0: float) -> np.ndarray:
    n = states[0].shape[0]
    p = SdpProblem((n, n))
    for h in linalg.hermitian_basis(n):
        p.add_eq({0: h, 1: h}, float(np.trace(h).real))
    p.add_eq({0: 2.0 * states[0]}, e0 + 1.0)
    p.set_objective({0: 2.0 * states[1]}, constant=-1.0)
    return sdp_solve(p).optimizer[0]


def _correlator_state_step(
    d: int, omega: float, m0: np.ndarray, e0: float
) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    obs = 2.0 * m0 - np.eye(d * d)
    p = state_pair_problem(d, omega)
    p.add_eq({0: obs}, e0)
    p.set_objective({1: obs})
    sol = sdp_solve(p)
    return sol.value, (sol.optimizer[0], sol.optimizer[1])


def _edge_measurement_step(states: tuple[np.ndarray, np.ndarray]) -> np.ndarray:
    """Best M_0 with tr(M_0 tau_0) = 0: the projector onto the kernel of tau_0."""
    w, v = np.linalg.eigh(states[0])
    k = v[:, w <= KERNEL_TOL]
    return k @ k.conj().T


def _edge_state_step(d: int, omega: float, m0: np.ndarray) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    w, v = np.linalg.eigh(m0)
    iso = v[:, w < 0.5]
    if iso.shape[1] == 0:
        raise Infeasible("the measurement leaves no room for tau_0 with E0 = -1")
    obs = 2.0 * m0 - np.eye(d * d)
    p = state_pair_problem(d, omega, iso0=iso)
    p.set_objective({1: obs})
    sol = sdp_solve(p)
    tau0 = iso @ sol.optimizer[0] @ iso.conj().T
    return sol.value, (tau0, sol.optimizer[1])


def _edge_random_measurement(d: int, omega: float, rng: np.random.Generator) -> np.ndarray:
    """Random projector M_0 whose complement holds an energy-respecting pure state."""
    n = d * d
    v = random_energy_pure_state(omega, d, rng)
    extra = int(rng.integers(0, n - 1))
    g = rng.normal(size=(n, extra)) + 1j * rng.normal(size=(n, extra))
    q, _ = np.linalg.qr(np.column_stack([v, g]))
    return np.eye(n) - q @ q.conj().T


def _alternate(cfg: SeesawConfig, tag: int, e0: float, states, m0, measure, state_step):
    """Alternate measurement and state steps; starts with the state step when
    ``m0`` is given. Stops at convergence or when a step fails, keeping the
    last consistent (states, m0) pair."""
    prev = -np.inf
    history: list[float] = []
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if not (it == 1 and m0 is not None):
            try:
                m0 = measure(states)
            except NumericalFailure:
                break
        try:
            value, states = state_step(m0)
        except (NumericalFailure, Infeasible):
            break
        history.append(value)
        cfg.log(event="seesaw_correlator", restart=tag, iteration=it, e0=e0, value=value)
        if value - prev < cfg.convergence_tol:
            break
        prev = value
    return states, m0, history, it


def _max_e1(omega: float, e0: float, d: int, cfg: SeesawConfig) -> SeesawResult:
    n = d * d
    if e0 >= 1.0 - EDGE_SNAP:
        states = qc_warm_start(d, omega)
        m0 = np.eye(n, dtype=complex)
        return SeesawResult(1.0, states, Povm.two_outcome(m0), d, 0, (1.0,))
    edge = e0 <= -1.0 + EDGE_SNAP
    if edge:
        e0 = -1.0

        def measure(st):
            return _edge_measurement_step(st)

        def state_step(m):
            return _edge_state_step(d, omega, m)

    else:

        def measure(st):
            return _correlator_measurement_step(st, e0)

        def state_step(m):
            return _correlator_state_step(d, omega, m, e0)

    rng = np.random.default_rng(cfg.rng_seed)
    best: SeesawResult | None = None
    for k in range(cfg.restarts):
        states, m0 = None, None
        if k == 0:
            states = qc_warm_start(d, omega)
        elif edge:
            m0 = _edge_random_measurement(d, omega, rng)
        else:
            states = random_state_pair(d, omega, rng)
        states, m0, history, it = _alternate(cfg, k, e0, states, m0, measure, state_step)
        if states is None or m0 is None:
            continue
        m0 = 0.5 * (m0 + m0.conj().T)
        e0_got, e1 = _correlators(states, m0)
        if abs(e0_got - e0) > E0_TOL:
            continue
        if best is None or e1 > best.value:
            w, v = np.linalg.eigh(m0)
            m0 = (v * np.clip(w, 0.0, 1.0)) @ v.conj().T
            best = SeesawResult(e1, (states[0], states[1]), Povm.two_outcome(m0), d, it, tuple(history))
        if best is not None and best.value >= 1.0 - 1e-12:
            break  # nothing exceeds the algebraic maximum
    if best is None:
        raise NumericalFailure(f"every correlator seesaw restart failed at e0 = {e0}")
    return best


def seesaw_correlator_boundary(
    omega: float, e0_target: float, local_dim: int, cfg: SeesawConfig | None = None, sense: str = "max"
) -> float:
    """Extremal E1 reachable with E0 fixed to ``e0_target`` (``sense`` = "max" or "min").

    Restart 0 starts from the unentangled pair of :func:`qc_warm_start`, whose
    optimal measurement already reaches the PM boundary. The minimum uses the
    outcome-relabelling symmetry ``min E1(e0) = -max E1(-e0)``.
    """
    if sense not in ("max", "min"):
        raise InvalidParams(f"sense must be 'max' or 'min', got {sense!r}")
    if sense == "min":
        return -seesaw_correlator_boundary(omega, -float(e0_target), local_dim, cfg, "max")
    return float(np.clip(correlator_boundary_model(omega, e0_target, local_dim, cfg).value, -1.0, 1.0))


def correlator_boundary_model(
    omega: float, e0_target: float, local_dim: int, cfg: SeesawConfig | None = None
) -> SeesawResult:
    """Model attaining the largest E1 found at fixed E0 (``value`` holds E1)."""
    cfg = cfg or SeesawConfig()
    omega = check_omega(omega)
    d = _check_dim(local_dim)
    e0 = float(e0_target)
    if not -1.0 <= e0 <= 1.0:
        raise Infeasible(f"correlator target {e0} lies outside [-1, 1]")
    return _max_e1(omega, e0, d, cfg)


def pure_state_w2(psi0: np.ndarray, psi1: np.ndarray) -> float:
    ov = abs(np.vdot(psi0, psi1)) ** 2
    return 0.5 + 0.5 * np.sqrt(max(0.0, 1.0 - ov))


def _random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _message_vacuum(psi: np.ndarray, d: int) -> float:
    return float(np.sum(np.abs(psi.reshape(d, d)[0]) ** 2))


def random_energy_pure_state(omega: float, d: int, rng: np.random.Generator) -> np.ndarray:
    """Random pure state on C (x) B with vacuum weight of C at least 1 - omega."""
    w = omega * rng.uniform() ** rng.choice([0.25, 1.0, 4.0])
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    m[0] *= np.sqrt((1 - w) / np.sum(np.abs(m[0]) ** 2))
    rest = np.sum(np.abs(m[1:]) ** 2)
    m[1:] *= np.sqrt(w / rest)
    return m.reshape(-1)


def _propose_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Block unitary (phase on |0>, Haar on the rest) times exp(i t H)."""
    u = np.zeros((d, d), dtype=complex)
    u[0, 0] = np.exp(2j * np.pi * rng.uniform())
    u[1:, 1:] = _random_unitary(d - 1, rng)
    h = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = 0.5 * (h + h.conj().T)
    t = rng.exponential(0.3)
    return u @ scipy.linalg.expm(1j * t * h)


def unitary_nogo_check(
    omega: float, local_dim: int, trials: int, rng_seed: int, max_proposals: int = 2000
) -> float:
    """Largest W2 found over random unitary-encoding protocols.

    Each trial samples an energy-respecting pure shared state and two unitaries
    on the message system whose outputs still obey the energy bound (rejection
    sampling over structured proposals).
    """
    omega = check_omega(omega)
    if trials < 1:
        raise InvalidParams("trials must be at least 1")
    d = int(local_dim)
    if d < 2:
        raise InvalidParams("local dimension must be at least 2")
    rng = np.random.default_rng(rng_seed)
    need = 1.0 - omega - 1e-12
    best = 0.5
    for _ in range(trials):
        psi = random_energy_pure_state(omega, d, rng)
        outs = []
        for _x in range(2):
            for _k in range(max_proposals):
                u = _propose_unitary(d, rng)
                phi = np.kron(u, np.eye(d)) @ psi
                if _message_vacuum(phi, d) >= need:
                    outs.append(phi)
                    break
            else:
                raise SamplingExhausted(f"no energy-preserving unitary after {max_proposals} proposals")
        best = max(best, pure_state_w2(outs[0], outs[1]))
    return float(best)
