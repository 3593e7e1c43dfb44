"""Three-player hybrid differential game of pollution control.

Players emit pollution whose stock decays at a rate that switches
periodically between two regimes.  The package builds open-loop strategies
under every coalition structure, the hybrid limit cycles they induce,
discounted payoffs, the non-emptiness check of the sustainably-cooperative
optimality principle and time-consistent payment schedules, together with a
brute-force oracle for each closed form.
"""

from ._kernels import BACKEND
from .adjoint import NotSustainable, check_sustainable, require_sustainable, shadow_cycle
from .allocation import (
    AllocationWeights,
    EmptyPrinciple,
    idp,
    strong_tc_counterexample,
    verify_time_consistency,
    zeta,
)
from .cycle import PhaseCycle, combine
from .dynamics import limit_cycle_state, steady_state_cycle, trajectory
from .model import (
    GameParams,
    ParameterError,
    PlayerParams,
    Structure,
    reference_params,
    shadow_weights,
    validate,
)
from .payoffs import (
    SubgameContext,
    characteristic_value,
    cooperation_surplus,
    discount_kernel_h,
    payoff,
)
from .stability import mbar_cycle, prop1_check, zset_bounds
from .strategies import build_profile

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AllocationWeights",
    "EmptyPrinciple",
    "GameParams",
    "NotSustainable",
    "ParameterError",
    "PhaseCycle",
    "PlayerParams",
    "Structure",
    "SubgameContext",
    "build_profile",
    "characteristic_value",
    "check_sustainable",
    "combine",
    "cooperation_surplus",
    "discount_kernel_h",
    "idp",
    "limit_cycle_state",
    "mbar_cycle",
    "reference_params",
    "payoff",
    "prop1_check",
    "require_sustainable",
    "shadow_cycle",
    "shadow_weights",
    "steady_state_cycle",
    "strong_tc_counterexample",
    "trajectory",
    "validate",
    "verify_time_consistency",
    "zeta",
    "zset_bounds",
]
