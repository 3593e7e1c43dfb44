"""Allocations inside the optimality principle and their payment schedules.

An allocation gives each player its deviation payoff plus a fixed share
``alpha_i`` of the cooperation surplus.  The payment schedule (IDP) pays,
at each instant, ``w_i = rho zeta_i - d zeta_i / d eps`` along the cooperative
path, which makes the allocation time-consistent by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .adjoint import require_sustainable
from .dynamics import trajectory
from .model import DEVIATION, GameParams, Structure
from .payoffs import (
    SubgameContext,
    cooperation_surplus,
    deviation_payoff,
    discount_kernel_h,
)
from .stability import PARTIAL
from .strategies import build_profile


class EmptyPrinciple(RuntimeError):
    """The cooperation surplus is negative at ``eps``."""

    def __init__(self, eps: float, surplus: float):
        self.eps = eps
        self.surplus = surplus
        super().__init__(f"optimality principle is empty at eps={eps:.6g} (surplus {surplus:.6g})")


@dataclass(frozen=True)
class AllocationWeights:
    """Surplus shares; non-negative and summing to one."""

    alpha: tuple[float, float, float]

    def __post_init__(self):
        a = tuple(float(x) for x in self.alpha)
        if len(a) != 3:
            raise ValueError("alpha needs three components")
        if any(x < 0.0 or x > 1.0 for x in a):
            raise ValueError("alpha components must lie in [0, 1]")
        if abs(sum(a) - 1.0) > 1e-12:
            raise ValueError(f"alpha must sum to 1 (got {sum(a):.15g})")
        object.__setattr__(self, "alpha", a)

    @classmethod
    def parse(cls, text: str) -> "AllocationWeights":
        parts = [p for p in text.replace(" ", "").split(",") if p]
        return cls(tuple(float(eval_fraction(p)) for p in parts))

    @classmethod
    def equal(cls) -> "AllocationWeights":
        return cls((1 / 3, 1 / 3, 1 - 2 / 3))


def eval_fraction(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _as_weights(alpha) -> AllocationWeights:
    return alpha if isinstance(alpha, AllocationWeights) else AllocationWeights(tuple(alpha))


def zeta(params: GameParams, alpha, eps: float) -> np.ndarray:
    """Allocation ``zeta_i = K_i^{dev} + alpha_i SC`` in the subgame at ``eps``.

    Raises
    ------
    EmptyPrinciple
        If the surplus is negative at ``eps``.
    """
    w = _as_weights(alpha)
    ctx = SubgameContext.on_cooperative_path(params, eps)
    sc = cooperation_surplus(params, eps, ctx)
    if sc < 0:
        raise EmptyPrinciple(eps, sc)
    dev = np.array([deviation_payoff(params, i, ctx) for i in range(3)])
    return dev + np.asarray(w.alpha) * sc


def _flows(params: GameParams, eps) -> dict:
    """Instantaneous quantities along the cooperative path at ``eps`` (arrays)."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    z1 = trajectory(params, Structure.PI1, params.z0, 0.0)(eps)
    h = discount_kernel_h(params, eps)
    co = build_profile(params, Structure.PI1)
    in_co = co.inflow(eps)
    flow_co = sum(co.production(params, i)(eps) for i in range(3)) - params.q * z1
    dev_flow = np.empty((eps.size, 3))
    for i in range(3):
        prof = build_profile(params, DEVIATION[i])
        qi = params.players[i].q
        own = prof.production(params, i)(eps) - qi * z1
        # sensitivity of the deviation payoff to the shared start state
        correction = qi * h * (in_co - prof.inflow(eps))
        dev_flow[:, i] = own + correction
    return {"eps": eps, "z": z1, "flow_co": flow_co, "dev_flow": dev_flow}


def surplus_flow(params: GameParams, eps):
    """``rho SC(eps) - SC'(eps)`` along the cooperative path."""
    f = _flows(params, eps)
    out = f["flow_co"] - f["dev_flow"].sum(axis=1)
    return float(out[0]) if np.ndim(eps) == 0 else out


def idp(params: GameParams, alpha, eps) -> np.ndarray:
    """Time-consistent payment rates ``w(eps)``; shape ``(3,)`` or ``(n, 3)``.

    ``w_i = f_i + alpha_i (g - sum_j f_j)`` where ``g`` is the instantaneous
    grand-coalition payoff and ``f_i = rho K_i^{dev} - dK_i^{dev}/d eps``:
    the deviation scenario's own flow at ``eps`` plus
    ``q_i h(eps) (in^{pi1}(eps) - in^{dev}(eps))``, the price of starting the
    deviation subgame from the cooperative stock.
    """
    require_sustainable(params, *PARTIAL)
    w = np.asarray(_as_weights(alpha).alpha)
    f = _flows(params, eps)
    surplus = f["flow_co"] - f["dev_flow"].sum(axis=1)
    out = f["dev_flow"] + surplus[:, None] * w[None, :]
    return out[0] if np.ndim(eps) == 0 else out


def cooperative_flow(params: GameParams, eps):
    """Instantaneous grand-coalition payoff ``sum_i a_i v_i (b_i - v_i/2) - q z^{pi1}``."""
    out = _flows(params, eps)["flow_co"]
    return float(out[0]) if np.ndim(eps) == 0 else out


@dataclass(frozen=True)
class TimeConsistencyReport:
    grid: tuple[float, ...]
    residuals: np.ndarray  # (len(grid), 3)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residuals))) if self.residuals.size else 0.0


def verify_time_consistency(params: GameParams, alpha, grid: Sequence[float], config=None) -> TimeConsistencyReport:
    """Residuals of ``int_0^eps e^{-rho s} w ds + e^{-rho eps} zeta(eps) - zeta(0)``.

    The accumulated payments are integrated by composite Simpson on a
    switch-aligned mesh (see :mod:`hybridgame.oracle`).
    """
    from .oracle import OracleConfig, discounted_integral_finite

    config = config or OracleConfig(quad_nodes_per_subperiod=2000)
    weights = _as_weights(alpha)
    z0 = zeta(params, weights, 0.0)
    rows = []
    for e in grid:
        e = float(e)
        if e == 0.0:
            rows.append(np.zeros(3))
            continue
        acc = discounted_integral_finite(
            params, lambda s: idp(params, weights, s), 0.0, e, config, ncols=3
        )
        rows.append(acc + np.exp(-params.rho * e) * zeta(params, weights, e) - z0)
    return TimeConsistencyReport(grid=tuple(float(g) for g in grid), residuals=np.array(rows))


@dataclass(frozen=True)
class StrongTCResult:
    """A switching time at which the accumulated surplus share turns negative.

    ``gap = SC(0) - e^{-rho t'} SC(t')``; ``margins[i]`` is
    ``alpha_i gap + alpha'_i e^{-rho t'} SC(t')``, the amount by which player
    ``i``'s combined total exceeds its deviation bound.
    """

    t_prime: float
    gap: float
    margins: tuple[float, float, float]

    @property
    def violated(self) -> tuple[int, ...]:
        return tuple(i for i, m in enumerate(self.margins) if m < 0)


def surplus_gap(params: GameParams, t_prime: float, sc0: float | None = None) -> float:
    """``SC(0) - e^{-rho t'} SC(t')``."""
    if sc0 is None:
        sc0 = cooperation_surplus(params, 0.0)
    return float(sc0 - np.exp(-params.rho * t_prime) * cooperation_surplus(params, t_prime))


def combined_margins(params: GameParams, alpha, alpha_prime, t_switch: float) -> np.ndarray:
    """Switched total minus deviation bound, per player.

    Payments follow ``alpha`` up to ``t_switch`` and the subgame allocation
    with ``alpha_prime`` afterwards.
    """
    a = np.asarray(_as_weights(alpha).alpha)
    ap = np.asarray(_as_weights(alpha_prime).alpha)
    sc0 = cooperation_surplus(params, 0.0)
    disc = np.exp(-params.rho * t_switch) * cooperation_surplus(params, t_switch)
    return a * (sc0 - disc) + ap * disc


def strong_tc_counterexample(params: GameParams, alpha, alpha_prime, n_grid: int = 256,
                             tol: float = 1e-8) -> StrongTCResult | None:
    """Search ``t' in (0, T]`` with ``SC(0) - e^{-rho t'} SC(t') < 0``.

    A uniform grid is scanned; the first sign change is refined by bisection
    until the bracket is shorter than ``tol``.  Returns ``None`` when the gap
    is non-negative on the whole grid.
    """
    require_sustainable(params, *PARTIAL)
    sc0 = cooperation_surplus(params, 0.0)
    grid = params.T * np.arange(1, n_grid + 1) / n_grid
    gaps = np.array([surplus_gap(params, t, sc0) for t in grid])
    neg = np.flatnonzero(gaps < 0)
    if neg.size == 0:
        return None
    j = int(neg[0])
    lo = 0.0 if j == 0 else float(grid[j - 1])
    hi = float(grid[j])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if surplus_gap(params, mid, sc0) < 0:
            hi = mid
        else:
            lo = mid
    gap = surplus_gap(params, hi, sc0)
    margins = combined_margins(params, alpha, alpha_prime, hi)
    return StrongTCResult(t_prime=hi, gap=gap, margins=tuple(float(m) for m in margins))
