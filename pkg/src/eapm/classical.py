"""Classical-channel models: the no-signalling bound and explicit classical codes.

Alphabets are dense index ranges. Message symbol ``a = 0`` is the null
(vacuum) symbol; a strategy respects energy ``omega`` when
``sum_l q(l) p_A^l(0|x) >= 1 - omega`` for every input ``x``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import EnergyTooHigh, InvalidEnergy, ShapeMismatch
from .quantum import CorrelationTable, check_omega

ENERGY_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Functional:
    """Linear functional ``W = sum c[b, x, y] p(b|x, y)``."""

    coefficients: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coefficients, dtype=float)
        if c.ndim != 3:
            raise ShapeMismatch(f"coefficients must be indexed [b, x, y], got {c.ndim} axes")
        if not np.all(np.isfinite(c)):
            raise ShapeMismatch("coefficients must be finite")
        object.__setattr__(self, "coefficients", c)

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.coefficients.shape

    def value(self, table: CorrelationTable) -> float:
        if table.shape != self.shape:
            raise ShapeMismatch(f"table shape {table.shape} != functional shape {self.shape}")
        return float(np.sum(self.coefficients * table.probs))


def transmission_functional(n: int) -> Functional:
    """Average success of guessing ``x`` among ``n`` uniformly drawn values."""
    c = np.zeros((n, n, 1))
    for x in range(n):
        c[x, x, 0] = 1.0 / n
    return Functional(c)


def rac_inputs(m: int, d: int) -> list[tuple[int, ...]]:
    """All strings x_1...x_m over {0..d-1}, in lexicographic (base-d) order."""
    return list(itertools.product(range(d), repeat=m))


def rac_functional(m: int, d: int) -> Functional:
    """(m, d) random access code: ``c[b, x, y] = delta(b, x_y) / (m d^m)``."""
    xs = rac_inputs(m, d)
    c = np.zeros((d, len(xs), m))
    for xi, x in enumerate(xs):
        for y in range(m):
            c[x[y], xi, y] = 1.0 / (m * d**m)
    return Functional(c)


@dataclass(frozen=True, eq=False)
class ClassicalStrategy:
    """Shared-randomness classical code.

    ``q[l]`` is the branch distribution, ``encoders[l, x, a] = p_A^l(a|x)`` and
    ``decoders[l, y, a, b] = p_B^l(b|y, a)``.
    """

    q: np.ndarray
    encoders: np.ndarray
    decoders: np.ndarray

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=float)
        enc = np.array(self.encoders, dtype=float)
        dec = np.array(self.decoders, dtype=float)
        if q.ndim != 1 or enc.ndim != 3 or dec.ndim != 4:
            raise ShapeMismatch("expected q[l], encoders[l, x, a], decoders[l, y, a, b]")
        if enc.shape[0] != q.size or dec.shape[0] != q.size or dec.shape[2] != enc.shape[2]:
            raise ShapeMismatch("branch count or message alphabet inconsistent")
        for name, arr, axis in (("q", q, 0), ("encoders", enc, 2), ("decoders", dec, 3)):
            if np.any(arr < -1e-12):
                raise ShapeMismatch(f"{name} has negative entries")
            if np.max(np.abs(arr.sum(axis=axis) - 1.0)) > 1e-12:
                raise ShapeMismatch(f"{name} rows do not sum to one")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "encoders", enc)
        object.__setattr__(self, "decoders", dec)

    @property
    def n_inputs(self) -> int:
        return self.encoders.shape[1]

    @property
    def n_settings(self) -> int:
        return self.decoders.shape[1]

    @property
    def n_messages(self) -> int:
        return self.encoders.shape[2]

    @property
    def n_outcomes(self) -> int:
        return self.decoders.shape[3]

    def correlations(self) -> CorrelationTable:
        """p(b|x,y) = sum_a sum_l q(l) p_A^l(a|x) p_B^l(b|y,a)."""
        p = np.einsum("l,lxa,lyab->bxy", self.q, self.encoders, self.decoders)
        return CorrelationTable(np.clip(p, 0.0, 1.0))

    def null_probability(self) -> np.ndarray:
        """Averaged probability of the null symbol for every input x."""
        return np.einsum("l,lx->x", self.q, self.encoders[:, :, 0])

    def to_dict(self) -> dict:
        return {
            "q": self.q.tolist(),
            "encoders": self.encoders.tolist(),
            "decoders": self.decoders.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "ClassicalStrategy":
        return cls(np.asarray(data["q"]), np.asarray(data["encoders"]), np.asarray(data["decoders"]))


def result1_bound(f: Functional, omega: float) -> float:
    """Upper bound on ``f`` for classical communication with any no-signalling resource.

    ``sum_y max_b sum_x c[b,x,y] + omega * sum_{x,y} max_b c[b,x,y]``.
    """
    omega = check_omega(omega)
    c = f.coefficients
    first = float(np.sum(np.max(c.sum(axis=1), axis=0)))
    second = float(np.sum(np.max(c, axis=0)))
    return first + omega * second


def evaluate_strategy(s: ClassicalStrategy, f: Functional) -> float:
    nb, nx, ny = f.shape
    if (s.n_outcomes, s.n_inputs, s.n_settings) != (nb, nx, ny):
        raise ShapeMismatch(
            f"strategy alphabets (b={s.n_outcomes}, x={s.n_inputs}, y={s.n_settings}) "
            f"do not match functional {f.shape}"
        )
    return f.value(s.correlations())


def check_energy(s: ClassicalStrategy, omega: float) -> bool:
    omega = check_omega(omega)
    return bool(np.all(s.null_probability() >= 1.0 - omega - ENERGY_SLACK))


def transmission_strategy(n: int, omega: float) -> ClassicalStrategy:
    """Two-branch classical code reaching ``1/n + omega`` for n-ary transmission.

    Branch 0 (probability omega) relays ``x`` faithfully. Branch 1 sends the null
    symbol except on ``x = 0``, where it sends symbol 1 with probability
    ``1 - nu``; Bob swaps symbols 0 and 1. ``nu = (1 - 2 omega)/(1 - omega)``
    exhausts the energy budget at ``x = 0``.
    """
    omega = check_omega(omega)
    if n < 2:
        raise ShapeMismatch("transmission needs n >= 2")
    if omega > 0.5:
        raise InvalidEnergy(f"omega = {omega} > 1/2 makes nu negative")
    nu = (1.0 - 2.0 * omega) / (1.0 - omega)
    enc = np.zeros((2, n, n))
    dec = np.zeros((2, 1, n, n))
    for x in range(n):
        enc[0, x, x] = 1.0
        dec[0, 0, x, x] = 1.0
    enc[1, 0, 0] = nu
    enc[1, 0, 1] = 1.0 - nu
    enc[1, 1:, 0] = 1.0
    swap = list(range(n))
    swap[0], swap[1] = 1, 0
    for a in range(n):
        dec[1, 0, a, swap[a]] = 1.0
    return ClassicalStrategy(np.array([omega, 1.0 - omega]), enc, dec)


def rac_strategy(m: int, d: int, omega: float) -> ClassicalStrategy:
    """Classical (m, d) random access code at energy ``omega <= d**-m``.

    Branch "empty" (probability ``1 - d^m omega``) always sends the null string
    and Bob guesses uniformly. Branch ``s`` (probability omega per string) sends
    ``s`` when ``x == s`` and the null string otherwise; Bob outputs the y-th
    symbol of the received string. Messages are strings indexed like inputs.
    """
    omega = check_omega(omega)
    if omega > d ** (-m) + 1e-15:
        raise EnergyTooHigh(f"omega = {omega} exceeds d^-m = {d ** (-m)}")
    xs = rac_inputs(m, d)
    nx = len(xs)
    branches = nx + 1
    q = np.empty(branches)
    q[0] = max(0.0, 1.0 - nx * omega)
    q[1:] = omega
    q /= q.sum()
    enc = np.zeros((branches, nx, nx))
    dec = np.zeros((branches, m, nx, d))
    enc[0, :, 0] = 1.0
    dec[0] = 1.0 / d
    for si in range(nx):
        lam = si + 1
        enc[lam, :, 0] = 1.0
        enc[lam, si, 0] = 0.0
        enc[lam, si, si] = 1.0
        for ai, a in enumerate(xs):
            for y in range(m):
                dec[lam, y, ai, a[y]] = 1.0
    return ClassicalStrategy(q, enc, dec)
