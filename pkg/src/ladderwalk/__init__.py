"""ladderwalk: ladder epochs of (2-2) bounded-jump walks on Z.

Exit probabilities, ladder-time laws and limiting velocity of random walks
with jumps in {-2, -1, +1, +2}, computed through the intrinsic 9-type
branching structure of the first strict ascent, cross-checked against an
exact finite-chain linear solver and seeded Monte Carlo simulation.
"""

__version__ = "0.1.0"

from .branching import (ExcursionIndices, ExcursionTally, ImmigrationLaw,
                        MeanMatrix, OffspringScalars, T1Result, TIME_WEIGHTS,
                        excursion_indices, expected_t1, expected_tally,
                        immigration_law, level_mean_matrix, mean_matrix,
                        offspring_distribution, offspring_pmf,
                        offspring_sample, offspring_scalars)
from .decomposer import (Decomposition, IdentityReport, decompose,
                         decompose_ensemble, verify_identity)
from .environment import (EnvLaw, Environment, SiteLaw, local_drift,
                          sample_environment, shift)
from .errors import (CapReached, DegenerateDenominator, DegenerateSystem,
                     Diverging, DriftNegative, InvalidLaw, LadderWalkError,
                     MalformedPath, NotAdmissible, NotConverged,
                     SingularSystem)
from .hitting import (ExitProbTable, HitProfile, exit_probabilities,
                      hit_from_below, homogeneous_root)
from .oracle import (solve_exit, solve_exit_table, solve_expected_exit_time,
                     solve_expected_exit_times)
from .rwre import (DensityReport, VelocityReport, invariant_density,
                   normalizer, velocity)
from .simulator import (EnsembleStats, HorizonResult, WalkPath, replica_seed,
                        run_ensemble, run_horizon, run_to_ladder, splitmix64)

__all__ = [
    "__version__",
    "CapReached", "DegenerateDenominator", "DegenerateSystem",
    "DensityReport", "Decomposition", "Diverging", "DriftNegative",
    "EnsembleStats", "EnvLaw", "Environment", "ExcursionIndices",
    "ExcursionTally", "ExitProbTable", "HitProfile", "HorizonResult",
    "IdentityReport", "ImmigrationLaw", "InvalidLaw", "LadderWalkError",
    "MalformedPath", "MeanMatrix", "NotAdmissible", "NotConverged",
    "OffspringScalars", "SingularSystem", "SiteLaw", "T1Result",
    "TIME_WEIGHTS", "VelocityReport", "WalkPath",
    "decompose", "decompose_ensemble", "excursion_indices",
    "exit_probabilities", "expected_t1", "expected_tally",
    "hit_from_below", "homogeneous_root", "immigration_law",
    "invariant_density", "level_mean_matrix", "local_drift", "mean_matrix",
    "normalizer", "offspring_distribution", "offspring_pmf",
    "offspring_sample", "offspring_scalars", "replica_seed", "run_ensemble",
    "run_horizon", "run_to_ladder", "sample_environment", "shift",
    "solve_exit", "solve_exit_table", "solve_expected_exit_time",
    "solve_expected_exit_times", "splitmix64", "velocity",
    "verify_identity",
]
