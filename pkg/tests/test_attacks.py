import numpy as np
import pytest

from eapm import attacks, schemes
from eapm.attacks import AttackModel, ObservedStatistics, VnProblem
from eapm.errors import InfeasibleObservation, InvalidParams
from eapm.quantum import DensityMatrix, Povm
from eapm.seesaw import SeesawConfig

Z0 = np.diag([1.0, 0.0])
Z1 = np.diag([0.0, 1.0])
COMP = Povm((Z0, Z1))


def qq(omega):
    return schemes.optimize_r("qutrit", min(omega, 0.5))[1]


def test_entropy_helpers():
    assert attacks.binary_entropy(0.5) == pytest.approx(1.0)
    assert attacks.binary_entropy(0.0) == 0.0
    assert attacks.binary_entropy(1.0) == 0.0
    assert attacks.binary_entropy(0.11) == pytest.approx(-0.11 * np.log2(0.11) - 0.89 * np.log2(0.89))
    assert attacks.shannon_entropy([0.25] * 4) == pytest.approx(2.0)


def test_observed_statistics_validation():
    with pytest.raises(InvalidParams):
        ObservedStatistics(0.4, 0.2)
    with pytest.raises(InvalidParams):
        ObservedStatistics(0.8, 0.2, x_star=2)
    with pytest.raises(ValueError):
        ObservedStatistics(0.8, 1.5)


def test_guessing_probability_examples():
    states = (DensityMatrix(Z0), DensityMatrix(Z1))
    m = AttackModel(np.array([1.0]), (states,), COMP)
    assert attacks.guessing_probability(m) == 1.0
    assert attacks.min_entropy(m) == 0.0
    mixed = DensityMatrix(np.eye(2) / 2)
    m = AttackModel(np.array([1.0]), ((mixed, mixed),), COMP)
    assert attacks.guessing_probability(m) == pytest.approx(0.5)
    assert attacks.conditional_entropy(m) == pytest.approx(1.0)


def test_attack_model_validation():
    s = (DensityMatrix(Z0), DensityMatrix(Z1))
    with pytest.raises(ValueError):
        AttackModel(np.array([0.5, 0.6]), (s, s), COMP)
    with pytest.raises(ValueError):
        AttackModel(np.array([1.0]), (s,), Povm((np.eye(3), np.zeros((3, 3)))))


def test_classical_entropies_examples():
    det = [[np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]]
    assert attacks.classical_entropies(det, [[COMP]], [1.0]) == pytest.approx((0.0, 0.0))
    uni = [[np.eye(2) / 2, np.eye(2) / 2]]
    assert attacks.classical_entropies(uni, [[COMP]], [1.0]) == pytest.approx((1.0, 1.0))
    # two guessable branches with opposite outputs: the averaged outcome is uniform
    opp = [[Z0, Z1], [Z1, Z0]]
    h_min, h = attacks.classical_entropies(opp, [[COMP], [COMP]], [0.5, 0.5])
    assert h_min == pytest.approx(0.0, abs=1e-15)
    assert h == pytest.approx(0.0, abs=1e-15)


def test_explicit_attack_examples():
    w = qq(0.2)
    m = attacks.explicit_two_branch_attack(ObservedStatistics(w, 0.2))
    assert m.q[0] == pytest.approx(1.0, abs=1e-9)
    m = attacks.explicit_two_branch_attack(ObservedStatistics(0.5, 0.2))
    assert m.q[0] == pytest.approx(0.5, abs=1e-12)
    m = attacks.explicit_two_branch_attack(ObservedStatistics(0.9, 0.2))
    assert m.q[0] == pytest.approx((0.9 - (1 - w)) / (2 * w - 1), abs=1e-12)
    assert m.visible_w2() == pytest.approx(0.9, abs=1e-12)
    assert m.violations(0.2) == []


@pytest.mark.parametrize("omega", [0.05, 0.2, 0.35])
def test_explicit_attack_algebra(omega):
    w = qq(omega)
    for w2_obs in np.linspace(0.5, w, 6):
        m = attacks.explicit_two_branch_attack(ObservedStatistics(w2_obs, omega))
        assert m.visible_w2() == pytest.approx(w2_obs, abs=1e-9)
        assert attacks.guessing_probability(m) == pytest.approx(w, abs=1e-9)
        assert attacks.conditional_entropy(m) == pytest.approx(attacks.binary_entropy(w), abs=1e-9)


def test_explicit_attack_rejects_unreachable_statistics():
    with pytest.raises(InfeasibleObservation):
        attacks.explicit_two_branch_attack(ObservedStatistics(0.99, 0.01))


def test_min_entropy_attack_floor():
    h, m = attacks.min_entropy_attack(ObservedStatistics(0.5, 0.1), SeesawConfig(restarts=2))
    assert 0.0 <= h <= 1.0
    assert attacks.guessing_probability(m) >= 0.5 - 1e-9
    assert m.visible_w2() == pytest.approx(0.5, abs=1e-7)


def test_min_entropy_attack_is_valid_and_beats_explicit():
    obs = ObservedStatistics(schemes.qc_optimal_w2(0.1), 0.1)
    h, m = attacks.min_entropy_attack(obs, SeesawConfig(restarts=2))
    assert m.violations(0.1) == []
    assert m.visible_w2() == pytest.approx(obs.w2_obs, abs=1e-7)
    assert h == pytest.approx(attacks.min_entropy(m), abs=1e-12)
    assert h <= -np.log2(qq(0.1)) + 1e-9


def test_min_entropy_attack_three_branches_not_worse():
    obs = ObservedStatistics(schemes.qc_optimal_w2(0.2), 0.2)
    cfg = SeesawConfig(restarts=2)
    h2, _ = attacks.min_entropy_attack(obs, cfg)
    h3, m3 = attacks.min_entropy_attack(obs, cfg, n_branches=3)
    assert m3.violations(0.2) == []
    assert h3 <= h2 + 1e-4


def test_min_entropy_attack_zero_above_threshold():
    for omega in (np.sqrt(2) - 1, 0.45):
        h, _ = attacks.min_entropy_attack(ObservedStatistics(schemes.qc_optimal_w2(omega), omega))
        assert h == pytest.approx(0.0, abs=1e-6)


def test_min_entropy_attack_infeasible_statistics():
    with pytest.raises(InfeasibleObservation):
        attacks.min_entropy_attack(ObservedStatistics(0.99, 0.01), SeesawConfig(restarts=2))


def test_vn_problem_gradients_match_finite_differences():
    obs = ObservedStatistics(0.8, 0.2)
    prob = VnProblem(obs, 2, 2, 2, min_w2=False)
    rng = np.random.default_rng(4)
    x = prob.random_point(rng)
    step = 1e-6

    def fd(fun):
        cols = []
        for i in range(x.size):
            e = np.zeros(x.size)
            e[i] = step
            cols.append((np.atleast_1d(fun(x + e)) - np.atleast_1d(fun(x - e))) / (2 * step))
        return np.array(cols).T

    np.testing.assert_allclose(prob.objective_grad(x), fd(prob.objective)[0], atol=1e-6)
    np.testing.assert_allclose(prob.w2(x)[1], fd(lambda v: prob.w2(v)[0])[0], atol=1e-6)
    np.testing.assert_allclose(prob.equalities(x)[1], fd(lambda v: prob.equalities(v)[0]), atol=1e-6)
    np.testing.assert_allclose(prob.inequalities(x)[1], fd(lambda v: prob.inequalities(v)[0]), atol=1e-6)


def test_vn_problem_round_trip():
    obs = ObservedStatistics(0.9, 0.2)
    m = attacks.explicit_two_branch_attack(obs)
    prob = VnProblem(obs, 2, 3, 3, min_w2=False)
    x = prob.from_model(m)
    back = prob.to_model(x)
    assert back.visible_w2() == pytest.approx(0.9, abs=1e-6)
    assert prob.objective(x) == pytest.approx(attacks.conditional_entropy(m), abs=1e-6)


def test_vn_attack_is_valid_and_beats_explicit():
    obs = ObservedStatistics(schemes.qc_optimal_w2(0.2), 0.2)
    h, m = attacks.vn_entropy_attack(obs, SeesawConfig(restarts=1), maxiter=100)
    assert m.violations(0.2) == []
    assert m.visible_w2() == pytest.approx(obs.w2_obs, abs=1e-7)
    assert h == pytest.approx(attacks.conditional_entropy(m), abs=1e-9)
    assert h <= attacks.binary_entropy(qq(0.2)) + 1e-9


def test_vn_attack_deterministic_limit():
    h, _ = attacks.vn_entropy_attack(ObservedStatistics(1.0, 1.0), SeesawConfig(restarts=1))
    assert h == pytest.approx(0.0, abs=1e-4)
    for omega in (np.sqrt(2) - 1, 0.45):
        h, _ = attacks.vn_entropy_attack(ObservedStatistics(schemes.qc_optimal_w2(omega), omega))
        assert h == pytest.approx(0.0, abs=1e-4)


def test_attack_bounds_monotone_in_energy():
    cfg = SeesawConfig(restarts=2)
    grid = [0.05, 0.1, 0.2, 0.3, 0.45]
    hmin = [attacks.min_entropy_attack(ObservedStatistics(schemes.qc_optimal_w2(w), w), cfg)[0] for w in grid]
    assert np.all(np.diff(hmin) <= 1e-6)


def test_vn_bound_monotone_in_energy():
    cfg = SeesawConfig(restarts=1)
    grid = [0.1, 0.2, 0.45]
    hvn = [
        attacks.vn_entropy_attack(ObservedStatistics(schemes.qc_optimal_w2(w), w), cfg, maxiter=100)[0] for w in grid
    ]
    assert np.all(np.diff(hvn) <= 1e-4)
