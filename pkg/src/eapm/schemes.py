"""Closed-form bit-transmission schemes under an energy restriction.

Both entanglement-assisted schemes use subsystem order (A, B) for the shared
state and (C, B) after encoding, with the message C replacing A in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidInput, InvalidParams
from .linalg import ket, projector
from .quantum import DensityMatrix, KrausChannel, apply_channel, check_omega, vacuum_weight

SQRT2_MINUS_1 = float(np.sqrt(2.0) - 1.0)
ENDPOINT_CLIP = 1e-12


@dataclass(frozen=True)
class SchemeParams:
    omega: float
    r: float = 0.0


@dataclass(frozen=True, eq=False)
class Scheme:
    shared_state: DensityMatrix
    channels: tuple[KrausChannel, ...]
    post_states: tuple[DensityMatrix, ...]
    message_subsystem: int = 0


def _ratio(num: float, den: float) -> float:
    # sqrt(num)/sqrt(den) with the 0/0 limit taken as 1
    if den <= 0.0:
        return 1.0
    return float(np.sqrt(max(num, 0.0) / den))


def qc_optimal_w2(omega: float) -> float:
    """Best bit-transmission success without entanglement at energy omega."""
    omega = check_omega(omega)
    if omega >= 0.5:
        return 1.0
    return 0.5 * (np.sqrt(1.0 - omega) + np.sqrt(omega)) ** 2


def _validate_qubit(p: SchemeParams) -> tuple[float, float]:
    w, r = float(p.omega), float(p.r)
    if not (0.0 <= w < 1.0):
        raise InvalidParams(f"qubit scheme needs 0 <= omega < 1, got {w}")
    if not (0.0 <= r <= w) or r + w > 1.0:
        raise InvalidParams(f"qubit scheme needs 0 <= r <= omega and r + omega <= 1, got r={r}")
    return w, r


def _validate_qutrit(p: SchemeParams) -> tuple[float, float]:
    w, r = float(p.omega), float(p.r)
    if not (0.0 <= w <= 1.0):
        raise InvalidParams(f"qutrit scheme needs 0 <= omega <= 1, got {w}")
    if not (0.0 <= r <= w) or 1.0 - r - w < 0.0:
        raise InvalidParams(f"qutrit scheme needs 0 <= r <= omega and r + omega <= 1, got r={r}")
    return w, r


def _check_post_states(scheme: Scheme, expected: list[np.ndarray]) -> None:
    for tau, exp in zip(scheme.post_states, expected):
        if np.max(np.abs(tau.matrix - exp)) > 1e-9:
            raise InvalidParams("channel output disagrees with the closed-form post-encoding state")


def qubit_scheme(p: SchemeParams) -> Scheme:
    """Two-qubit scheme: identity encoding for x=0, a two-Kraus decohering map for x=1."""
    w, r = _validate_qubit(p)
    z = 1.0 - w
    psi = np.sqrt(z) * ket((2, 2), 0, 0) - np.sqrt((w - r) / 2) * ket((2, 2), 1, 0) + np.sqrt((w + r) / 2) * ket((2, 2), 1, 1)
    shared = DensityMatrix.from_ket(psi, (2, 2))

    e00 = np.array([[1, 0], [0, 0]], dtype=complex)
    e01 = np.array([[0, 1], [0, 0]], dtype=complex)
    e10 = e01.T.copy()
    e11 = np.array([[0, 0], [0, 1]], dtype=complex)
    wr = w + r
    k0 = (np.sqrt(r * (w - r) / (z * wr)) if wr > 0 else 0.0) * e00 + (np.sqrt(2 * r / wr) if wr > 0 else 0.0) * e01
    k1 = (
        np.sqrt((1 - r - w) / z) * e00
        + (np.sqrt(2) * r / np.sqrt(z * wr) if wr > 0 else 0.0) * e10
        - _ratio(w - r, wr) * e11
    )
    channels = (KrausChannel.identity(2), KrausChannel((k0, k1), 2, 2))
    post = tuple(apply_channel(ch, shared, 0) for ch in channels)
    scheme = Scheme(shared, channels, post)

    phi = (
        np.sqrt((1 - r - w) / (1 - r)) * ket((2, 2), 0, 0)
        + np.sqrt((w + r) / (2 * (1 - r))) * ket((2, 2), 1, 0)
        - np.sqrt((w - r) / (2 * (1 - r))) * ket((2, 2), 1, 1)
    )
    tau1 = r * projector(ket((2, 2), 0, 1)) + (1 - r) * projector(phi)
    _check_post_states(scheme, [shared.matrix, tau1])
    return scheme


def qubit_w2_closed_form(p: SchemeParams) -> float:
    w, r = _validate_qubit(p)
    z = 1.0 - w
    inner = 5 * r**2 - 4 * r * w + 8 * np.sqrt(z) * np.sqrt(w - r) * np.sqrt((z - r) * (r + w)) + 8 * z * w
    lam = 0.5 * (r + np.sqrt(max(inner, 0.0)))
    return float(0.5 + 0.5 * lam)


def _qutrit_coeffs(w: float, r: float, x: int) -> tuple[float, float]:
    s = (-1) ** x
    one_minus_a = r + w
    if one_minus_a <= 0.0:
        return s * np.sqrt(0.5), s * np.sqrt(0.5)
    b = s * np.sqrt((w - s * r) / (2 * one_minus_a))
    c = s * np.sqrt((w + s * r) / (2 * one_minus_a))
    return float(b), float(c)


def qutrit_scheme(p: SchemeParams) -> Scheme:
    """Two-qutrit scheme with input-dependent two-Kraus encodings."""
    w, r = _validate_qutrit(p)
    a = 1.0 - r - w
    d2 = (3, 3)
    psi = np.sqrt(a) * ket(d2, 0, 2) + np.sqrt(1 - a) / 2 * (
        ket(d2, 1, 0) - ket(d2, 2, 1) + ket(d2, 2, 0) + ket(d2, 1, 1)
    )
    shared = DensityMatrix.from_ket(psi, d2)

    def unit(i: int, j: int) -> np.ndarray:
        e = np.zeros((3, 3), dtype=complex)
        e[i, j] = 1.0
        return e

    channels = []
    expected = []
    for x in (0, 1):
        s = (-1) ** x
        b, c = _qutrit_coeffs(w, r, x)
        pre = np.sqrt(r / (1 - a)) if 1 - a > 0 else 0.0
        k0 = pre * (unit(0, 1) + s * unit(0, 2))
        k1 = unit(0, 0) - b * (unit(1, 1) + unit(1, 2)) + c * (unit(2, 1) - unit(2, 2))
        channels.append(KrausChannel((k0, k1), 3, 3))
        if r < 1.0:
            psi_x = (
                np.sqrt(a / (1 - r)) * ket(d2, 0, 2)
                - np.sqrt((1 - a) / (1 - r)) * b * ket(d2, 1, 0)
                + np.sqrt((1 - a) / (1 - r)) * c * ket(d2, 2, 1)
            )
            expected.append(r * projector(ket(d2, 0, x)) + (1 - r) * projector(psi_x))
        else:
            expected.append(projector(ket(d2, 0, x)))
    post = tuple(apply_channel(ch, shared, 0) for ch in channels)
    scheme = Scheme(shared, tuple(channels), post)
    _check_post_states(scheme, expected)
    return scheme


def qutrit_message_reduction(p: SchemeParams, x: int) -> np.ndarray:
    """Diagonal message state (1-w)|0><0| + (w - (-1)^x r)/2 |1><1| + (w + (-1)^x r)/2 |2><2|."""
    w, r = _validate_qutrit(p)
    s = (-1) ** x
    return np.diag([1 - w, (w - s * r) / 2, (w + s * r) / 2]).astype(complex)


def qutrit_w2_closed_form(p: SchemeParams) -> float:
    w, r = _validate_qutrit(p)
    a = 1.0 - r - w
    inner = 2 * a * np.sqrt(max(w * w - r * r, 0.0)) + r * r + 2 * w * a
    return float(0.5 * (1 + r + np.sqrt(max(inner, 0.0))))


def r_interval(kind: str, omega: float) -> tuple[float, float]:
    omega = check_omega(omega)
    if kind == "qubit":
        return 0.0, min(omega, 1.0 - omega)
    if kind == "qutrit":
        return 0.0, min(omega, 1.0 - omega)
    raise InvalidInput(f"unknown scheme kind {kind!r}")


def closed_form(kind: str, omega: float, r: float) -> float:
    if kind == "qubit":
        return qubit_w2_closed_form(SchemeParams(omega, r))
    if kind == "qutrit":
        return qutrit_w2_closed_form(SchemeParams(omega, r))
    raise InvalidInput(f"unknown scheme kind {kind!r}")


def build_scheme(kind: str, omega: float, r: float) -> Scheme:
    if kind == "qubit":
        return qubit_scheme(SchemeParams(omega, r))
    if kind == "qutrit":
        return qutrit_scheme(SchemeParams(omega, r))
    raise InvalidInput(f"unknown scheme kind {kind!r}")


def optimize_r(scheme_kind: Literal["qubit", "qutrit"], omega: float, grid: int = 201) -> tuple[float, float]:
    """Maximize the closed-form W2 over the noise parameter r.

    A coarse grid locates the best bracket, bounded Brent search (golden
    section with parabolic steps) refines it. The search stops 1e-12 short of
    r = omega, where sqrt(omega - r) has an infinite slope, and that endpoint
    is evaluated separately.
    """
    lo, hi = r_interval(scheme_kind, omega)
    if hi <= lo:
        return lo, closed_form(scheme_kind, omega, lo)
    f = lambda r: closed_form(scheme_kind, omega, r)  # noqa: E731
    hi_in = max(lo, hi - ENDPOINT_CLIP)
    rs = np.linspace(lo, hi_in, grid)
    vals = np.array([f(r) for r in rs])
    k = int(np.argmax(vals))
    a_br, b_br = rs[max(k - 1, 0)], rs[min(k + 1, grid - 1)]
    best_r, best_v = float(rs[k]), float(vals[k])
    if b_br > a_br:
        res = minimize_scalar(lambda r: -f(r), bounds=(a_br, b_br), method="bounded", options={"xatol": 1e-13})
        if -res.fun > best_v:
            best_r, best_v = float(res.x), float(-res.fun)
    for r in (lo, hi):
        v = f(r)
        if v > best_v:
            best_r, best_v = r, v
    return best_r, best_v


def scheme_vacuum_weights(scheme: Scheme) -> list[float]:
    return [vacuum_weight(t, scheme.message_subsystem) for t in scheme.post_states]


def pm_ellipse_max_correlator(omega: float, e0: float) -> tuple[float, float]:
    """Extreme E1 at fixed E0 over the energy-restricted region without entanglement.

    The region is the convex hull of (1, 1), (-1, -1) and the ellipse
    ``(E+/2g)^2 + (E-/(2 sqrt(1-g^2)))^2 = 1`` with ``E+- = E0 +- E1`` and
    ``g = 2 omega - 1``; for omega >= 1/2 it is the whole square.

    In (E+, E-) coordinates the ellipse is axis-aligned with semi-axes
    A = 2|g| and B = 2 sqrt(1 - g^2). The hull boundary is the ellipse arc with
    |E+| <= A^2/2 plus the four tangent segments to (+-2, 0). The vertical line
    E0 = e0 becomes E+ + E- = 2 e0; the extremes of E1 = (E+ - E-)/2 are its two
    boundary crossings.
    """
    omega = check_omega(omega)
    e0 = float(e0)
    if abs(e0) > 1.0 + 1e-12:
        raise InvalidInput(f"|e0| must not exceed 1, got {e0}")
    e0 = float(np.clip(e0, -1.0, 1.0))
    omega = min(omega, 0.5)
    g = 2.0 * omega - 1.0
    big_a = 2.0 * abs(g)
    big_b = 2.0 * np.sqrt(max(1.0 - g * g, 0.0))
    if big_b == 0.0:
        return e0, e0

    s = 2.0 * e0
    cands: list[tuple[float, float]] = []
    xt = big_a * big_a / 2.0
    yt = big_b * np.sqrt(max(1.0 - xt * xt / (big_a * big_a), 0.0)) if big_a > 0 else big_b

    # ellipse arc, parametrized as E0 = cos(t - phi), E1 = cos(t + phi) with
    # (cos phi, sin phi) = (g, sqrt(1 - g^2)); kept where |E+| <= xt
    phi = np.arctan2(np.sqrt(max(1.0 - g * g, 0.0)), g)
    alpha = np.arccos(e0)
    for sign in (1.0, -1.0):
        e1 = np.cos(2.0 * phi + sign * alpha)
        if abs(e0 + e1) <= xt + 1e-12:
            cands.append((e0 + e1, e0 - e1))

    # tangent segments from (+-2, 0) to (+-xt, +-yt)
    for px in (2.0, -2.0):
        for ty in (yt, -yt):
            p0 = np.array([px, 0.0])
            p1 = np.array([np.sign(px) * xt, ty])
            dv = p1 - p0
            den = dv[0] + dv[1]
            if abs(den) < 1e-15:
                if abs(p0[0] + p0[1] - s) < 1e-12:
                    cands.extend([tuple(p0), tuple(p1)])
                continue
            t = (s - p0[0] - p0[1]) / den
            if -1e-12 <= t <= 1 + 1e-12:
                pt = p0 + np.clip(t, 0.0, 1.0) * dv
                cands.append((pt[0], pt[1]))

    e1 = [(x - y) / 2.0 for x, y in cands]
    return float(min(max(e1), 1.0)), float(max(min(e1), -1.0))


def pm_hull_contains(omega: float, e0: float, e1: float, tol: float = 1e-9) -> bool:
    hi, lo = pm_ellipse_max_correlator(omega, e0)
    return lo - tol <= e1 <= hi + tol


def ellipse_point(omega: float, t: float) -> tuple[float, float]:
    """Point on the ellipse at angle t, in (E0, E1) coordinates."""
    g = 2.0 * min(check_omega(omega), 0.5) - 1.0
    beta = np.sqrt(max(1.0 - g * g, 0.0))
    return float(g * np.cos(t) + beta * np.sin(t)), float(g * np.cos(t) - beta * np.sin(t))
