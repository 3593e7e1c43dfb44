"""Non-emptiness of the sustainably-cooperative optimality principle.

The principle at a subgame ``eps`` is the set of allocations of ``v(N)``
that give every player at least its unilateral-deviation payoff.  It is
non-empty iff the surplus

    SC(eps) = int_eps^inf e^{-rho (t-eps)} [-Y L(t)^2 + M_eps(t)] dt

is non-negative, where ``M_eps = q1 (z^{pi42} - z^{pi1}) + q2 (z^{pi41} - z^{pi1})``
restarted from zero at ``eps``.  Its periodic part ``Mbar`` solves
``Mbar' = o_m L - delta Mbar``.
"""

from __future__ import annotations

import functools
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .adjoint import require_sustainable, shadow_cycle
from .cycle import PhaseCycle, periodic_linear_solution
from .dynamics import limit_cycle_state
from .model import GameParams, Structure, shadow_weights
from .payoffs import (
    SubgameContext,
    characteristic_value,
    coalition_payoff,
    deviation_payoff,
    discount_kernel_h,
    shifted_square_integral,
)

PARTIAL = (Structure.PI1, Structure.PI3, Structure.PI41, Structure.PI42)


def deviation_gap(params: GameParams) -> float:
    """``Y = k3 q^2 + k1 (q^2 - q1^2) + k2 (q^2 - q2^2)``.

    Loss in instantaneous production, per unit ``L^2``, of the grand
    coalition relative to the three deviation scenarios.
    """
    q = params.q
    q1, q2 = params.players[0].q, params.players[1].q
    k1, k2, k3 = (params.k(i) for i in range(3))
    return k3 * q * q + k1 * (q * q - q1 * q1) + k2 * (q * q - q2 * q2)


def mbar_driver(params: GameParams) -> float:
    """Coefficient ``o_m`` with ``q1 (in^{pi42} - in^{pi1}) + q2 (in^{pi41} - in^{pi1}) = o_m L``.

    Each inflow is ``sum_i xi_i b_i + 2 sum_i k_i mu_i L``, so the
    coefficient is read off the shadow-cost weights.
    """
    q1, q2 = params.players[0].q, params.players[1].q
    w1 = shadow_weights(Structure.PI1, params)
    w41 = shadow_weights(Structure.PI41, params)
    w42 = shadow_weights(Structure.PI42, params)
    return 2.0 * sum(
        params.k(i) * (q1 * (w42[i] - w1[i]) + q2 * (w41[i] - w1[i])) for i in range(3)
    )


@dataclass(frozen=True)
class MbarCycle:
    """Periodic tax differential ``Mbar`` and its coefficient record.

    On subperiod ``p`` (local time ``u``)
    ``Mbar = A_p + B_p e^{-delta_p u} + C_p e^{s_p u}``.
    """

    Mbar: PhaseCycle
    M0: float
    om: float
    A1: float
    B1: float
    C1: float
    A2: float
    B2: float
    C2: float


@functools.lru_cache(maxsize=128)
def mbar_cycle(params: GameParams) -> MbarCycle:
    require_sustainable(params, Structure.PI1, Structure.PI41, Structure.PI42)
    adj = shadow_cycle(params)
    om = mbar_driver(params)
    d1, d2, s1, s2 = params.delta1, params.delta2, params.s1, params.s2
    split, T = params.split, params.T
    am1, am2 = om * adj.m1, om * adj.m2
    bm1, bm2 = om / s1, om / s2
    A1, C1 = -bm1 / d1, am1 / (s1 + d1)
    A2, C2 = -bm2 / d2, am2 / (s2 + d2)
    # B1 and B2 are affine in M0; continuity at tau*T fixes M0.
    def b1(M0):
        return (d1 * (bm1 - am1 + s1 * M0) + bm1 * s1 + M0 * d1 * d1) / (d1 * (s1 + d1))

    def b2(M0):
        return np.exp(d2 * T) * (d2 * (bm2 - am2 * np.exp(s2 * T) + s2 * M0) + bm2 * s2 + M0 * d2 * d2) / (d2 * (s2 + d2))

    def jump(M0):
        left = A1 + b1(M0) * np.exp(-d1 * split) + C1 * np.exp(s1 * split)
        right = A2 + b2(M0) * np.exp(-d2 * split) + C2 * np.exp(s2 * split)
        return left - right

    j0, j1 = jump(0.0), jump(1.0)
    M0 = -j0 / (j1 - j0)
    B1, B2 = b1(M0), b2(M0)
    Mbar = PhaseCycle.from_terms(
        T, params.tau,
        [(A1, 0.0), (B1, -d1), (C1, s1)],
        [(A2, 0.0), (B2, -d2), (C2, s2)],
    )
    return MbarCycle(Mbar=Mbar, M0=float(M0), om=float(om), A1=float(A1), B1=float(B1), C1=float(C1),
                     A2=float(A2), B2=float(B2), C2=float(C2))


def mbar_from_solver(params: GameParams) -> PhaseCycle:
    """``Mbar`` as the generic periodic solution of ``M' = o_m L - delta M``."""
    return periodic_linear_solution(shadow_cycle(params).L.scale(mbar_driver(params)), -params.delta1, -params.delta2)


def mbar_from_dynamics(params: GameParams) -> PhaseCycle:
    """``q1 (zbar^{pi42} - zbar^{pi1}) + q2 (zbar^{pi41} - zbar^{pi1})``."""
    q1, q2 = params.players[0].q, params.players[1].q
    z1, _ = limit_cycle_state(params, Structure.PI1)
    z41, _ = limit_cycle_state(params, Structure.PI41)
    z42, _ = limit_cycle_state(params, Structure.PI42)
    return (z42 - z1).scale(q1) + (z41 - z1).scale(q2)


def surplus_integral_form(params: GameParams, eps: float) -> float:
    """Surplus via ``-Y int e^{-rho(t-eps)} L^2 + int e^{-rho(t-eps)} M_eps``.

    ``M_eps(t) = Mbar(t) - Mbar(eps) e^{-int_eps^t delta}``.
    """
    mb = mbar_cycle(params).Mbar
    rho = params.rho
    m_part = mb.discounted_tail_integral(rho, eps) - mb(eps) * discount_kernel_h(params, eps)
    return float(-deviation_gap(params) * shifted_square_integral(params, eps) + m_part)


def deviation_ratio(params: GameParams, eps: float) -> float:
    """Surplus-free bound ``int e^{-rho(t-eps)} M_eps / int e^{-rho(t-eps)} L^2`` at ``eps``.

    The principle is non-empty at ``eps`` iff ``Y`` does not exceed this.
    """
    mb = mbar_cycle(params).Mbar
    rho = params.rho
    num = -mb(eps) * discount_kernel_h(params, eps) + mb.discounted_tail_integral(rho, eps)
    return float(num / shifted_square_integral(params, eps))


def reduced_ratio(params: GameParams, eps: float) -> float:
    """``[-Mbar(eps) h(eps) + int_0^inf e^{-rho t} Mbar] / int_0^inf e^{-rho t} L^2``.

    This mixes a subgame-dependent numerator term with integrals anchored at
    0; it coincides with :func:`deviation_ratio` only at ``eps = kT``.
    """
    mb = mbar_cycle(params).Mbar
    L = shadow_cycle(params).L
    rho = params.rho
    E0 = mb.discounted_tail_integral(rho, 0.0)
    G0 = (L * L).discounted_tail_integral(rho, 0.0)
    return float((-mb(eps) * discount_kernel_h(params, eps) + E0) / G0)


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the non-emptiness check.

    ``rhs`` is the deviation ratio at the critical subgame start
    ``eps_star`` (``tau T`` when ``s1 > s2``, ``0`` when ``s1 < s2``; both
    are evaluated and the smaller kept when ``s1 == s2``).  ``I``, ``E`` and
    ``G`` are its components at ``eps_star``; ``E0`` and ``G0`` are the
    integrals anchored at 0 and ``rhs_reduced`` the ratio built from them.
    """

    Y: float
    rhs: float
    branch: str
    satisfied: bool
    eps_star: float
    I: float
    E: float
    G: float
    E0: float
    G0: float
    rhs_reduced: float
    om: float
    candidates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _components(params: GameParams, eps: float) -> tuple[float, float, float]:
    mb = mbar_cycle(params).Mbar
    I = -mb(eps) * discount_kernel_h(params, eps)
    E = mb.discounted_tail_integral(params.rho, eps)
    G = shifted_square_integral(params, eps)
    return float(I), float(E), float(G)


def prop1_check(params: GameParams) -> StabilityReport:
    """Evaluate the non-emptiness condition ``Y <= rhs``."""
    require_sustainable(params, *PARTIAL)
    Y = deviation_gap(params)
    s1, s2 = params.s1, params.s2
    if s1 > s2:
        branch, eps_list = "s1_gt_s2", [params.split]
    elif s1 < s2:
        branch, eps_list = "s1_lt_s2", [0.0]
    else:
        branch, eps_list = "equal", [0.0, params.split]
    candidates = {}
    best = None
    for e in eps_list:
        I, E, G = _components(params, e)
        ratio = (I + E) / G
        candidates[f"{e:.17g}"] = ratio
        if best is None or ratio < best[0]:
            best = (ratio, e, I, E, G)
    rhs, eps_star, I, E, G = best
    _, E0, G0 = _components(params, 0.0)
    return StabilityReport(
        Y=float(Y),
        rhs=float(rhs),
        branch=branch,
        satisfied=bool(Y <= rhs),
        eps_star=float(eps_star),
        I=I,
        E=E,
        G=G,
        E0=E0,
        G0=G0,
        rhs_reduced=float((I + E0) / G0),
        om=mbar_cycle(params).om,
        candidates=candidates,
    )


@dataclass(frozen=True)
class ZSetBounds:
    eps: float
    z_eps: float
    lower: tuple[float, float, float]
    total: float
    singleton: tuple[float, float, float]

    @property
    def surplus(self) -> float:
        return self.total - sum(self.lower)

    @property
    def nonempty(self) -> bool:
        return self.surplus >= 0.0

    @property
    def imputation_margins(self) -> tuple[float, float, float]:
        """``lower_i - v({i})``; non-negative when the set lies in the imputations."""
        return tuple(b - v for b, v in zip(self.lower, self.singleton))


def zset_bounds(params: GameParams, eps: float) -> ZSetBounds:
    """Lower bounds of the principle at ``eps`` on the cooperative path."""
    require_sustainable(params, *PARTIAL)
    ctx = SubgameContext.on_cooperative_path(params, eps)
    lower = tuple(deviation_payoff(params, i, ctx) for i in range(3))
    total = coalition_payoff(params, Structure.PI1, ctx)
    singles = tuple(characteristic_value(params, {i}, ctx) for i in range(3))
    return ZSetBounds(eps=float(eps), z_eps=ctx.z_eps, lower=lower, total=total, singleton=singles)
