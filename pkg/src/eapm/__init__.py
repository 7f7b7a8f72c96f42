"""Energy-restricted prepare-and-measure models with and without shared entanglement."""

from .attacks import (
    AttackModel,
    ObservedStatistics,
    binary_entropy,
    classical_entropies,
    conditional_entropy,
    explicit_two_branch_attack,
    guessing_probability,
    min_entropy_attack,
    vn_entropy_attack,
)
from .classical import (
    ClassicalStrategy,
    Functional,
    evaluate_strategy,
    rac_functional,
    rac_strategy,
    result1_bound,
    transmission_functional,
    transmission_strategy,
)
from .quantum import CorrelationTable, DensityMatrix, KrausChannel, Povm, apply_channel, helstrom, vacuum_weight
from .schemes import (
    Scheme,
    SchemeParams,
    closed_form,
    optimize_r,
    pm_ellipse_max_correlator,
    qc_optimal_w2,
    qubit_scheme,
    qubit_w2_closed_form,
    qutrit_scheme,
    qutrit_w2_closed_form,
)
from .sdp import SdpProblem, sdp_solve
from .seesaw import SeesawConfig, seesaw_correlator_boundary, seesaw_w2, unitary_nogo_check

__version__ = "0.1.0"
