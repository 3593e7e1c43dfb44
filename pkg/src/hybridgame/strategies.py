"""Open-loop emission strategies under each coalition structure."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .adjoint import require_sustainable, shadow_cycle
from .cycle import PhaseCycle
from .model import GameParams, Structure, shadow_weights


@dataclass(frozen=True)
class StrategyProfile:
    """Emission paths of the three players and the resulting stock inflow.

    ``structure`` is ``None`` for profiles that are not equilibria of a
    coalition structure (e.g. the punishment profiles behind singleton
    characteristic values).
    """

    structure: Structure | None
    v: tuple[PhaseCycle, PhaseCycle, PhaseCycle]
    inflow: PhaseCycle
    weights: tuple[float, float, float]

    def production(self, params: GameParams, i: int) -> PhaseCycle:
        """Instantaneous profit ``a_i v_i (b_i - v_i/2)`` as a cycle."""
        p = params.players[i]
        v = self.v[i]
        return (v * (p.b - 0.5 * v)).scale(p.a)

    def sample(self, t) -> np.ndarray:
        """Array of shape ``(len(t), 3)`` with the three emission rates."""
        return np.column_stack([vi(np.asarray(t, float)) for vi in self.v])


def _interior_strategy(params: GameParams, i: int, weight: float) -> PhaseCycle:
    p = params.players[i]
    L = shadow_cycle(params).L
    return L.scale(p.xi / p.a * weight) + p.b


def profile_from_weights(params: GameParams, weights, structure: Structure | None = None) -> StrategyProfile:
    """Interior strategies ``v_i = b_i + (xi_i/a_i) mu_i L`` for given weights.

    A weight of ``None`` pins that player at its maximum rate ``b_i``.
    """
    v = []
    for i, mu in enumerate(weights):
        if mu is None:
            v.append(PhaseCycle.constant(params.T, params.tau, params.players[i].b))
        else:
            v.append(_interior_strategy(params, i, mu))
    inflow = sum((vi.scale(p.xi) for vi, p in zip(v, params.players)), PhaseCycle.constant(params.T, params.tau, 0.0))
    w = tuple(0.0 if mu is None else float(mu) for mu in weights)
    return StrategyProfile(structure=structure, v=tuple(v), inflow=inflow, weights=w)


@functools.lru_cache(maxsize=512)
def build_profile(params: GameParams, structure: Structure) -> StrategyProfile:
    """Equilibrium profile of ``structure``.

    Raises
    ------
    NotSustainable
        If some player's shadow price leaves the interior band.
    """
    require_sustainable(params, structure)
    return profile_from_weights(params, shadow_weights(structure, params), structure)


@functools.lru_cache(maxsize=256)
def punishment_profile(params: GameParams, i: int) -> StrategyProfile:
    """Player ``i`` at its Nash strategy, both opponents at maximum emission."""
    require_sustainable(params, Structure.PI2)
    own = params.players[i].q
    weights = [None, None, None]
    weights[i] = own
    return profile_from_weights(params, weights)


def nash_strategy(params: GameParams, i: int) -> PhaseCycle:
    """Singleton (non-cooperative) strategy of player ``i``."""
    return build_profile(params, Structure.PI2).v[i]
