import io
import json

import numpy as np
import pytest

from eapm import linalg, quantum
from eapm.errors import Infeasible, NonHermitian, ShapeMismatch
from eapm.sdp import SdpProblem, realify, sdp_solve, unrealify


def density_problem(n, objective):
    p = SdpProblem((n,))
    p.set_objective({0: objective})
    p.add_eq({0: np.eye(n)}, 1.0)
    return p


def random_state(n, rng):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_realify_round_trip():
    rng = np.random.default_rng(0)
    h = random_state(3, rng)
    np.testing.assert_allclose(unrealify(realify(h)), h)
    # realification preserves the spectrum (each eigenvalue doubled)
    np.testing.assert_allclose(np.linalg.eigvalsh(realify(h))[::2], np.linalg.eigvalsh(h), atol=1e-12)


def test_max_projector_overlap():
    sol = sdp_solve(density_problem(2, np.diag([1.0, 0.0])))
    assert sol.value == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(sol.optimizer[0], np.diag([1, 0]), atol=1e-6)


def test_max_pauli_x():
    sol = sdp_solve(density_problem(2, np.array([[0, 1], [1, 0]])))
    assert sol.value == pytest.approx(1.0, abs=1e-7)
    np.testing.assert_allclose(sol.optimizer[0], np.full((2, 2), 0.5), atol=1e-6)


def test_complex_objective():
    y = np.array([[0, -1j], [1j, 0]])
    sol = sdp_solve(density_problem(2, y))
    assert sol.value == pytest.approx(1.0, abs=1e-7)
    plus_i = np.array([1, 1j]) / np.sqrt(2)
    np.testing.assert_allclose(sol.optimizer[0], np.outer(plus_i, plus_i.conj()), atol=1e-6)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_helstrom_sdp_matches_eigendecomposition(seed):
    rng = np.random.default_rng(seed)
    t0, t1 = random_state(3, rng), random_state(3, rng)
    p = SdpProblem((3, 3))
    p.set_objective({0: t0 - t1})
    # M + N = 1 with both blocks PSD, imposed entrywise on a Hermitian basis
    for h in linalg.hermitian_basis(3):
        p.add_eq({0: h, 1: h}, np.trace(h).real)
    sol = sdp_solve(p)
    lam_plus = np.sum(np.clip(np.linalg.eigvalsh(t0 - t1), 0, None))
    assert sol.value == pytest.approx(lam_plus, abs=1e-7)
    w2, _ = quantum.helstrom(quantum.DensityMatrix(t0), quantum.DensityMatrix(t1))
    assert 0.5 + 0.5 * sol.value == pytest.approx(w2, abs=1e-7)
    np.testing.assert_allclose(sol.optimizer[0] + sol.optimizer[1], np.eye(3), atol=1e-7)


def test_inequality_constraint():
    p = density_problem(2, np.diag([1.0, -1.0]))
    p.add_le({0: np.diag([1.0, 0.0])}, 0.3)
    sol = sdp_solve(p)
    assert sol.value == pytest.approx(-0.4, abs=1e-7)
    p = density_problem(2, np.diag([-1.0, 1.0]))
    p.add_ge({0: np.diag([1.0, 0.0])}, 0.8)
    assert sdp_solve(p).value == pytest.approx(-0.6, abs=1e-7)


def test_redundant_equalities_are_dropped():
    p = density_problem(3, np.diag([0.0, 1.0, 2.0]))
    p.add_eq({0: 2 * np.eye(3)}, 2.0)
    p.add_eq({0: np.diag([1.0, 0, 0])}, 0.5)
    sol = sdp_solve(p)
    assert sol.value == pytest.approx(1.0, abs=1e-7)


def test_inconsistent_equalities_raise():
    p = density_problem(2, np.eye(2))
    p.add_eq({0: np.eye(2)}, 2.0)
    with pytest.raises(Infeasible):
        sdp_solve(p)


def test_infeasible_inequality_raises():
    p = density_problem(2, np.eye(2))
    p.add_ge({0: np.diag([1.0, 0.0])}, 1.5)
    with pytest.raises(Infeasible):
        sdp_solve(p)


def test_builder_validation():
    with pytest.raises(ShapeMismatch):
        SdpProblem((17,))
    p = SdpProblem((2,))
    with pytest.raises(NonHermitian):
        p.set_objective({0: np.array([[0, 1], [0, 0]])})
    with pytest.raises(ShapeMismatch):
        p.add_eq({0: np.eye(3)}, 1.0)
    p.set_objective({0: np.eye(2)})
    with pytest.raises(ShapeMismatch):
        sdp_solve(p)


def test_solution_certificate_fields():
    sol = sdp_solve(density_problem(3, np.diag([0.2, 0.5, -1.0])))
    assert sol.value == pytest.approx(0.5, abs=1e-7)
    assert abs(sol.gap) <= 1e-7
    assert sol.violation <= 1e-8
    assert sol.min_eig >= -1e-9
    assert sol.iterations > 0


def test_trace_lines_are_json():
    buf = io.StringIO()
    sdp_solve(density_problem(2, np.diag([1.0, 0.0])), trace=buf)
    records = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert records and records[-1]["event"] == "sdp"
    assert abs(records[-1]["gap"]) <= 1e-7


def test_solve_is_deterministic():
    rng = np.random.default_rng(9)
    c = random_state(4, rng)
    a = sdp_solve(density_problem(4, c))
    b = sdp_solve(density_problem(4, c))
    assert a.value == b.value
    np.testing.assert_array_equal(a.optimizer[0], b.optimizer[0])


def test_inequality_only_problem():
    p = SdpProblem((2,))
    p.set_objective({0: -np.eye(2)})
    p.add_le({0: np.eye(2)}, 1.0)
    assert sdp_solve(p).value == pytest.approx(0.0, abs=1e-7)
