"""Discounted payoffs, characteristic values and the cooperation surplus.

All payoffs are taken in a subgame that starts at time ``eps`` with stock
``z_eps`` and are discounted back to ``eps``:

    K_i = int_eps^inf e^{-rho (t - eps)} [a_i v_i (b_i - v_i/2) - q_i z(t)] dt.

Because ``z(t) = (z_eps - zbar(eps)) e^{-int_eps^t delta} + zbar(t)``, every
payoff splits into closed-form tail integrals of cycles plus one transient
term weighted by the kernel ``h(eps)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjoint import require_sustainable, shadow_cycle
from .dynamics import cooperative_state, cycle_for_inflow, limit_cycle_state
from .model import DEVIATION, GameParams, Structure
from .strategies import StrategyProfile, build_profile, punishment_profile


@dataclass(frozen=True)
class SubgameContext:
    """Start time and stock of a subgame."""

    eps: float
    z_eps: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be >= 0")
        if self.z_eps < 0:
            raise ValueError("z_eps must be >= 0")

    @classmethod
    def on_cooperative_path(cls, params: GameParams, eps: float) -> "SubgameContext":
        return cls(float(eps), cooperative_state(params, eps))


def discount_kernel_h(params: GameParams, eps):
    """``h(eps) = int_eps^inf exp(-rho (t-eps) - int_eps^t delta) dt``.

    Closed form by subperiod of ``eps``; T-periodic in ``eps``.  Accepts
    scalars or arrays.
    """
    s1, s2, T, split = params.s1, params.s2, params.T, params.split
    S = (s1 * params.tau + s2 * (1.0 - params.tau)) * T
    o = (1.0 - np.exp(-s1 * split)) / s1 - np.exp((s2 - s1) * split) * (np.exp(-s2 * T) - np.exp(-s2 * split)) / s2
    growth = 1.0 / (-np.expm1(-S))  # e^S / (e^S - 1)
    e = np.asarray(eps, dtype=float)
    x = e - np.floor(e / T) * T
    y = np.maximum(x - split, 0.0)
    h1 = np.exp(s1 * x) * growth * o - np.expm1(s1 * x) / s1
    h2 = (
        np.exp(s1 * split + s2 * y) * growth * o
        - (np.exp(s1 * split + s2 * y) - np.exp(s2 * y)) / s1
        - np.expm1(s2 * y) / s2
    )
    out = np.where(x < split, h1, h2)
    return float(out) if out.ndim == 0 else out


def _production_tail(params: GameParams, profile: StrategyProfile, i: int, eps: float) -> float:
    return profile.production(params, i).discounted_tail_integral(params.rho, eps)


def profile_payoff(params: GameParams, profile: StrategyProfile, i: int, ctx: SubgameContext,
                   zbar=None) -> float:
    """Payoff of player ``i`` when everyone follows ``profile`` from ``ctx``."""
    rho, eps = params.rho, ctx.eps
    value = _production_tail(params, profile, i, eps)
    qi = params.players[i].q
    if qi != 0.0:
        if zbar is None:
            zbar = cycle_for_inflow(params, profile.inflow)
        transient = (ctx.z_eps - zbar(eps)) * discount_kernel_h(params, eps)
        value -= qi * (transient + zbar.discounted_tail_integral(rho, eps))
    return float(value)


def payoff(params: GameParams, structure: Structure, i: int, ctx: SubgameContext) -> float:
    """Payoff of player ``i`` (0-based) under ``structure`` in subgame ``ctx``.

    Raises
    ------
    NotSustainable
        If the structure's strategies are not interior.
    """
    prof = build_profile(params, structure)
    zbar, _ = limit_cycle_state(params, structure)
    return profile_payoff(params, prof, i, ctx, zbar)


def coalition_payoff(params: GameParams, structure: Structure, ctx: SubgameContext) -> float:
    return sum(payoff(params, structure, i, ctx) for i in range(3))


def deviation_payoff(params: GameParams, i: int, ctx: SubgameContext) -> float:
    """Payoff of player ``i`` after it alone leaves the grand coalition."""
    return payoff(params, DEVIATION[i], i, ctx)


def characteristic_value(params: GameParams, coalition, ctx: SubgameContext) -> float:
    """Max-min value of ``coalition`` (empty, a singleton, or all players).

    Singleton values are attained with the player at its Nash strategy and
    both opponents at maximum emission.  Two-player coalitions are not
    supported.
    """
    S = frozenset(coalition)
    if not S:
        return 0.0
    if S == frozenset({0, 1, 2}):
        return coalition_payoff(params, Structure.PI1, ctx)
    if len(S) == 1:
        (i,) = S
        return profile_payoff(params, punishment_profile(params, i), i, ctx)
    raise ValueError("two-player characteristic values are not supported")


def cooperation_surplus(params: GameParams, eps: float, ctx: SubgameContext | None = None) -> float:
    """``SC(eps) = v(N) - K_1^{pi42} - K_2^{pi41} - K_3^{pi3}`` on the cooperative path."""
    require_sustainable(params, Structure.PI1, Structure.PI3, Structure.PI41, Structure.PI42)
    if ctx is None:
        ctx = SubgameContext.on_cooperative_path(params, eps)
    total = coalition_payoff(params, Structure.PI1, ctx)
    return float(total - sum(deviation_payoff(params, i, ctx) for i in range(3)))


def shifted_square_integral(params: GameParams, eps: float) -> float:
    """``int_eps^inf e^{-rho (t-eps)} L(t)^2 dt``."""
    L = shadow_cycle(params).L
    return (L * L).discounted_tail_integral(params.rho, eps)
