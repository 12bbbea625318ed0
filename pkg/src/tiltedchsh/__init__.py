"""Maximal loophole-free CHSH nonlocality with inefficient detectors.

Tilted Bell functionals, their exact quantum values and self-tested
two-qubit strategies, a brute-force oracle and NPA upper bounds.
"""

__version__ = "0.1.0"

from ._validation import NS_TOL, PROB_TOL, BellError  # noqa: E402
from .bell import (  # noqa: E402
    Behavior,
    BellFunctional,
    CorrelatorSet,
    Scenario,
    behavior_from_correlators,
    chsh_functional,
    correlators_from_behavior,
    effective_behavior,
    evaluate_functional,
    local_bound,
    tilted_chsh_functional,
)
from .closed_form import alt_quantum_value, gen_poly, optimal_cosines, quantum_value, sym_poly  # noqa: E402
from .npa import min_tight_level, npa_bound  # noqa: E402
from .qubit import oracle_max, optimal_state  # noqa: E402
from .selftest import self_test_strategy  # noqa: E402
from .tilting import (  # noqa: E402
    assignment_gap,
    assignment_tilted_chsh,
    critical_efficiency_bob,
    doubly_tilted_chsh,
    enumerate_assignments,
    tilt_functional,
)

__all__ = [
    "NS_TOL",
    "PROB_TOL",
    "BellError",
    "Behavior",
    "BellFunctional",
    "CorrelatorSet",
    "Scenario",
    "alt_quantum_value",
    "assignment_gap",
    "assignment_tilted_chsh",
    "behavior_from_correlators",
    "chsh_functional",
    "correlators_from_behavior",
    "critical_efficiency_bob",
    "doubly_tilted_chsh",
    "effective_behavior",
    "enumerate_assignments",
    "evaluate_functional",
    "gen_poly",
    "local_bound",
    "min_tight_level",
    "npa_bound",
    "optimal_cosines",
    "optimal_state",
    "oracle_max",
    "quantum_value",
    "self_test_strategy",
    "sym_poly",
    "tilt_functional",
    "tilted_chsh_functional",
]
