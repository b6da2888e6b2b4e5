"""Optimal quantum state discrimination with a fixed rate of inconclusive results.

The package solves, certifies, and cross-checks measurements that maximize
the probability of correct results while the probability Q of inconclusive
outcomes is held at a prescribed value:

* `ensemble` — problem instances (states, priors, special families, file I/O);
* `operators` — small dense Hermitian eigen machinery;
* `certifier` — feasibility checks and the duality-based optimality test;
* `confidence` — per-state maximum confidence and the saturated regime;
* `analytic` — closed-form solvers for the families with known solutions;
* `qubit_solver` — the general fixed-Q solver for arbitrary qubit ensembles;
* `oracle` — independent brute-force lower bound for verification.
"""

from .analytic import (
    PiecewiseSolution,
    SymmetricInternals,
    mirror_value,
    piecewise_mirror_symmetric,
    piecewise_partially_symmetric,
    piecewise_umix,
    solve_equiprobable,
    solve_mirror_symmetric,
    solve_partially_symmetric,
    solve_umix,
    umix_value,
)
from .certifier import (
    DualCertificate,
    FeasibilityError,
    Povm,
    Scorecard,
    Solution,
    certify,
    measure_rates,
    pairwise_relation_check,
)
from .confidence import ConfidenceReport, QuRegime, find_Qu, large_Q_value, max_confidence
from .ensemble import (
    DensityOperator,
    Ensemble,
    EnsembleError,
    PartialSymmetrySpec,
    QubitStateSpec,
    average_state,
    build_partially_symmetric,
    load_ensemble,
    symmetry_check,
    uniform_plus_pure,
)
from .oracle import SearchConfig, brute_force
from .qubit_solver import SolverCase, a_from_z, solve, sweep, two_state_reference

__all__ = [
    "ConfidenceReport",
    "DensityOperator",
    "DualCertificate",
    "Ensemble",
    "EnsembleError",
    "FeasibilityError",
    "PartialSymmetrySpec",
    "PiecewiseSolution",
    "Povm",
    "QubitStateSpec",
    "QuRegime",
    "Scorecard",
    "SearchConfig",
    "Solution",
    "SolverCase",
    "SymmetricInternals",
    "a_from_z",
    "average_state",
    "brute_force",
    "build_partially_symmetric",
    "certify",
    "find_Qu",
    "large_Q_value",
    "load_ensemble",
    "max_confidence",
    "measure_rates",
    "mirror_value",
    "pairwise_relation_check",
    "piecewise_mirror_symmetric",
    "piecewise_partially_symmetric",
    "piecewise_umix",
    "solve",
    "solve_equiprobable",
    "solve_mirror_symmetric",
    "solve_partially_symmetric",
    "solve_umix",
    "sweep",
    "symmetry_check",
    "two_state_reference",
    "umix_value",
    "uniform_plus_pure",
]

__version__ = "0.1.0"
