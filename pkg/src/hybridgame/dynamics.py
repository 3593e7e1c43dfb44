"""Pollution-stock trajectories and their hybrid limit cycles."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .cycle import PhaseCycle, exp_integral, periodic_linear_solution
from .model import GameParams, Structure
from .strategies import StrategyProfile, build_profile


def accumulated_decay(params: GameParams, t0, t1):
    """Exact ``int_{t0}^{t1} delta(s) ds`` (vectorised over either argument)."""
    return _cumulative_decay(params, t1) - _cumulative_decay(params, t0)


def _cumulative_decay(params: GameParams, t):
    t = np.asarray(t, dtype=float)
    T, split = params.T, params.split
    n = np.floor(t / T)
    u = t - n * T
    partial = np.where(u < split, params.delta1 * u, params.delta1 * split + params.delta2 * (u - split))
    out = n * params.decay_per_period + partial
    return float(out) if out.ndim == 0 else out


def cycle_for_inflow(params: GameParams, inflow: PhaseCycle) -> PhaseCycle:
    """Periodic stock ``zbar`` solving ``z' = inflow - delta(t) z``."""
    return periodic_linear_solution(inflow, -params.delta1, -params.delta2)


@functools.lru_cache(maxsize=512)
def limit_cycle_state(params: GameParams, structure: Structure) -> tuple[PhaseCycle, float]:
    """Hybrid limit cycle of the stock under ``structure`` and its value at 0.

    Returns
    -------
    zbar : PhaseCycle
    zbar_hlc : float
        Fixed point of the one-period state map.
    """
    prof = build_profile(params, structure)
    zbar = cycle_for_inflow(params, prof.inflow)
    return zbar, zbar(0.0)


def zbar_hlc_formula(params: GameParams, inflow: PhaseCycle) -> float:
    """Fixed point of the period map from the variation-of-constants formula.

    ``zbar_hlc = e^{-D} int_0^T inflow(s) e^{int_0^s delta} ds / (1 - e^{-D})``.
    The inner integral is evaluated term by term: on the first subperiod
    ``e^{int_0^s delta} = e^{delta1 s}``, on the second
    ``e^{delta1 tau T + delta2 (s - tau T)}``.
    """
    split, T = params.split, params.T
    d1, d2 = params.delta1, params.delta2
    first = sum(c * exp_integral(r + d1, 0.0, split) for c, r in inflow.phases[0])
    shift = np.exp((d1 - d2) * split)
    second = sum(c * shift * exp_integral(r + d2, split, T) for c, r in inflow.phases[1])
    D = params.decay_per_period
    return float(np.exp(-D) * (first + second) / (-np.expm1(-D)))


def steady_state_cycle(params: GameParams, structure: Structure) -> PhaseCycle:
    """Pointwise attractor ``inflow(t) / delta(t)``."""
    inflow = build_profile(params, structure).inflow
    return inflow.scale_phases(1.0 / params.delta1, 1.0 / params.delta2)


@dataclass(frozen=True)
class Trajectory:
    """Stock path ``(z_start - zbar(eps)) e^{-int_eps^t delta} + zbar(t)`` for ``t >= eps``."""

    params: GameParams
    structure: Structure | None
    z_start: float
    eps: float
    transient_coef: float
    cycle: PhaseCycle

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        decay = np.exp(-accumulated_decay(self.params, self.eps, t))
        out = self.transient_coef * decay + self.cycle(t)
        return float(out) if out.ndim == 0 else out

    value = __call__

    def transient(self, t):
        return self.transient_coef * np.exp(-accumulated_decay(self.params, self.eps, t))


def trajectory_for_cycle(params: GameParams, cycle: PhaseCycle, z_start: float, eps: float,
                         structure: Structure | None = None) -> Trajectory:
    return Trajectory(
        params=params,
        structure=structure,
        z_start=float(z_start),
        eps=float(eps),
        transient_coef=float(z_start) - cycle(float(eps)),
        cycle=cycle,
    )


def trajectory(params: GameParams, structure: Structure, z_start: float | None = None,
               eps: float = 0.0) -> Trajectory:
    """Stock trajectory under ``structure`` from ``(eps, z_start)``.

    ``z_start`` defaults to the initial stock ``params.z0``.
    """
    if z_start is None:
        z_start = params.z0
    if z_start < 0:
        raise ValueError("z_start must be >= 0")
    zbar, _ = limit_cycle_state(params, structure)
    return trajectory_for_cycle(params, zbar, z_start, eps, structure)


def profile_trajectory(params: GameParams, profile: StrategyProfile, z_start: float, eps: float) -> Trajectory:
    """Trajectory driven by an arbitrary profile's inflow."""
    zbar = cycle_for_inflow(params, profile.inflow)
    return trajectory_for_cycle(params, zbar, z_start, eps, profile.structure)


def cooperative_state(params: GameParams, eps: float) -> float:
    """Stock at ``eps`` on the grand-coalition path started from ``z0`` at 0."""
    return trajectory(params, Structure.PI1, params.z0, 0.0)(eps)
