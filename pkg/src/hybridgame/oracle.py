"""Brute-force reference computations.

Nothing here uses the closed forms of the other modules beyond evaluating
the emission strategies: stocks, shadow prices and tax differentials are
integrated with fixed-step RK4, discounted integrals with composite Simpson.
Every mesh has nodes at each switching instant, so both schemes keep their
order across the kinks of the switched dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .adjoint import shadow_cycle
from .cycle import PhaseCycle
from .model import GameParams, Structure
from .strategies import StrategyProfile, build_profile


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleConfig:
    """Resolution of the reference computations.

    Attributes
    ----------
    ode_steps_per_period : int
        RK4 steps per period, half of them in each subperiod.
    quad_nodes_per_subperiod : int
        Simpson intervals per subperiod.
    horizon_periods : int
        Number of periods integrated explicitly for infinite horizons.
    tail : bool
        Add the remainder past the horizon as a geometric series of the last
        period.
    """

    ode_steps_per_period: int = 10 ** 5
    quad_nodes_per_subperiod: int = 10 ** 4
    horizon_periods: int = 120
    tail: bool = True

    def __post_init__(self):
        if self.ode_steps_per_period < 100:
            raise ValueError("ode_steps_per_period must be >= 100")
        if self.quad_nodes_per_subperiod < 100:
            raise ValueError("quad_nodes_per_subperiod must be >= 100")
        if self.horizon_periods < 1:
            raise ValueError("horizon_periods must be >= 1")

    def check_horizon(self, rho: float, T: float) -> None:
        """Raise if ``exp(-rho K T)`` is not below ``1e-12``."""
        if math.exp(-rho * self.horizon_periods * T) >= 1e-12:
            raise ValueError(
                f"horizon of {self.horizon_periods} periods too short for rho={rho}, T={T}"
            )


# ---------------------------------------------------------------------------
# meshes

@dataclass(frozen=True)
class Mesh:
    """Segments of equal steps, each inside one subperiod."""

    seg_t0: np.ndarray
    seg_dt: np.ndarray
    seg_n: np.ndarray
    seg_base: np.ndarray
    seg_phase: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        parts = [np.array([self.seg_t0[0]])]
        for t0, dt, n in zip(self.seg_t0, self.seg_dt, self.seg_n):
            parts.append(t0 + dt * np.arange(1, n + 1))
        return np.concatenate(parts)

    def quad_points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Per-segment Simpson nodes.

        Returns ``(t, w, idx, seg)``: evaluation times, weights, the index of
        each point in :attr:`nodes` and its segment number.  The last point of
        a segment sits one ulp before the breakpoint, so integrands that jump
        at a switch are sampled from the correct side.
        """
        ts, ws, idx, seg = [], [], [], []
        pos = 0
        for s, (t0, dt, n) in enumerate(zip(self.seg_t0, self.seg_dt, self.seg_n)):
            t = t0 + dt * np.arange(n + 1)
            t[-1] = np.nextafter(t0 + dt * n, t0)
            w = np.ones(n + 1)
            w[1:-1:2] = 4.0
            w[2:-1:2] = 2.0
            ts.append(t)
            ws.append(w * dt / 3.0)
            idx.append(pos + np.arange(n + 1))
            seg.append(np.full(n + 1, s))
            pos += n
        return np.concatenate(ts), np.concatenate(ws), np.concatenate(idx), np.concatenate(seg)


def build_mesh(T: float, tau: float, t0: float, t1: float, per_subperiod: int,
               even: bool = True) -> Mesh:
    """Mesh on ``[t0, t1]`` with breakpoints at every switching instant.

    A full subperiod receives ``per_subperiod`` steps; partial subperiods
    proportionally fewer (at least 2).  Step counts are even when ``even``.
    """
    if t1 <= t0:
        raise ValueError("empty interval")
    split = tau * T
    k0, k1 = math.floor(t0 / T), math.ceil(t1 / T)
    cuts = [t0, t1]
    for k in range(k0, k1 + 1):
        for c in (k * T, k * T + split):
            if t0 < c < t1:
                cuts.append(c)
    cuts = np.unique(np.array(cuts))
    lens = (split, T - split)
    seg = {"t0": [], "dt": [], "n": [], "base": [], "phase": []}
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        base = math.floor(mid / T) * T
        phase = 1 if mid - base >= split else 0
        n = max(2, math.ceil((b - a) / lens[phase] * per_subperiod - 1e-9))
        if even and n % 2:
            n += 1
        seg["t0"].append(a)
        seg["dt"].append((b - a) / n)
        seg["n"].append(n)
        seg["base"].append(base)
        seg["phase"].append(phase)
    return Mesh(
        seg_t0=np.array(seg["t0"]),
        seg_dt=np.array(seg["dt"]),
        seg_n=np.array(seg["n"], dtype=np.int64),
        seg_base=np.array(seg["base"]),
        seg_phase=np.array(seg["phase"], dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# ODE fields

@dataclass(frozen=True)
class LinearField:
    """Right-hand side ``y' = forcing(t) + kappa(t) y`` with ``kappa`` piecewise constant."""

    name: str
    forcing: PhaseCycle
    kappa: tuple[float, float]


def state_field(params: GameParams, inflow: PhaseCycle) -> LinearField:
    """Stock dynamics ``z' = inflow - delta(t) z``."""
    return LinearField("state", inflow, (-params.delta1, -params.delta2))


def adjoint_field(params: GameParams, weight: float) -> LinearField:
    """Shadow price of a player with tax weight ``weight``: ``lam' = weight + (rho + delta) lam``."""
    c = PhaseCycle.constant(params.T, params.tau, weight)
    return LinearField("adjoint", c, (params.s1, params.s2))


def mbar_field(params: GameParams, om: float) -> LinearField:
    """Tax differential ``M' = om L - delta M``."""
    return LinearField("mbar", shadow_cycle(params).L.scale(om), (-params.delta1, -params.delta2))


def decay_field(params: GameParams) -> LinearField:
    """``y' = -delta(t) y``."""
    return LinearField("decay", PhaseCycle.constant(params.T, params.tau, 0.0), (-params.delta1, -params.delta2))


@dataclass(frozen=True)
class Path:
    t: np.ndarray
    y: np.ndarray
    mesh: Mesh

    @property
    def end(self) -> float:
        return float(self.y[-1])


def _run(field: LinearField, y0: float, mesh: Mesh) -> np.ndarray:
    coef, rate = field.forcing.arrays
    return _kernels.rk4_linear(mesh.seg_t0, mesh.seg_dt, mesh.seg_n, mesh.seg_base, mesh.seg_phase,
                               float(y0), coef, rate, np.asarray(field.kappa, dtype=float))


def integrate_ode(field: LinearField, y0: float, t0: float, t1: float,
                  config: OracleConfig | None = None, mesh: Mesh | None = None) -> Path:
    """Fixed-step RK4 from ``(t0, y0)`` to ``t1`` on a switch-aligned mesh."""
    config = config or OracleConfig()
    T, tau = field.forcing.T, field.forcing.tau
    if mesh is None:
        per_sub = max(2, config.ode_steps_per_period // 2)
        mesh = build_mesh(T, tau, t0, t1, per_sub, even=False)
    return Path(t=mesh.nodes, y=_run(field, y0, mesh), mesh=mesh)


# ---------------------------------------------------------------------------
# quadrature

def _simpson(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return np.tensordot(weights, values, axes=(0, 0))


def discounted_integral_finite(params: GameParams, f: Callable, a: float, b: float,
                               config: OracleConfig | None = None, ncols: int | None = None):
    """``int_a^b e^{-rho (s - a)} f(s) ds`` by composite Simpson."""
    config = config or OracleConfig()
    mesh = build_mesh(params.T, params.tau, a, b, config.quad_nodes_per_subperiod)
    t, w, _, _ = mesh.quad_points()
    vals = np.asarray(f(t), dtype=float)
    disc = np.exp(-params.rho * (t - a))
    vals = vals * (disc if vals.ndim == 1 else disc[:, None])
    out = _simpson(vals, w)
    return float(out) if np.ndim(out) == 0 else out


def _horizon_sum(params: GameParams, vals: np.ndarray, mesh: Mesh, eps: float,
                 config: OracleConfig, tail: bool | None = None):
    """Discounted Simpson sum over the mesh, plus the geometric tail.

    ``vals`` are sampled at ``mesh.quad_points()``.  The tail treats the last
    period of the mesh as repeating forever.
    """
    rho, T = params.rho, params.T
    t, w, _, seg = mesh.quad_points()
    disc = np.exp(-rho * (t - eps))
    weighted = vals * (disc if vals.ndim == 1 else disc[:, None])
    total = _simpson(weighted, w)
    if config.tail if tail is None else tail:
        t_end = mesh.seg_t0[-1] + mesh.seg_dt[-1] * mesh.seg_n[-1]
        last_segs = mesh.seg_t0 >= t_end - T - 1e-9 * T
        last_val = _simpson(weighted, np.where(last_segs[seg], w, 0.0))
        g = math.exp(-rho * T)
        total = total + last_val * g / (1.0 - g)
    return total


def discounted_integral_quad(params: GameParams, f: Callable, eps: float = 0.0,
                             config: OracleConfig | None = None):
    """``int_eps^inf e^{-rho (t - eps)} f(t) dt`` by Simpson plus geometric tail.

    ``f`` must be vectorised; it may return shape ``(n,)`` or ``(n, m)``.
    """
    config = config or OracleConfig()
    t_end = eps + config.horizon_periods * params.T
    mesh = build_mesh(params.T, params.tau, eps, t_end, config.quad_nodes_per_subperiod)
    t = mesh.quad_points()[0]
    vals = np.asarray(f(t), dtype=float)
    out = _horizon_sum(params, vals, mesh, eps, config)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# composite oracles

def state_path(params: GameParams, inflow: PhaseCycle, z_start: float, eps: float,
               config: OracleConfig) -> Path:
    """Stock path over the quadrature horizon, on the quadrature mesh."""
    t_end = eps + config.horizon_periods * params.T
    mesh = build_mesh(params.T, params.tau, eps, t_end, config.quad_nodes_per_subperiod)
    return integrate_ode(state_field(params, inflow), z_start, eps, t_end, mesh=mesh)


def oracle_payoffs(params: GameParams, profile: StrategyProfile, eps: float, z_eps: float,
                   config: OracleConfig | None = None) -> np.ndarray:
    """All three players' payoffs from ``(eps, z_eps)`` under ``profile``.

    The stock is integrated by RK4 and the discounted integrand by Simpson,
    both on the same mesh.
    """
    config = config or OracleConfig()
    path = state_path(params, profile.inflow, z_eps, eps, config)
    t, _, idx, _ = path.mesh.quad_points()
    z = path.y[idx]
    cols = []
    for i, p in enumerate(params.players):
        v = profile.v[i](t)
        cols.append(p.a * v * (p.b - 0.5 * v) - p.q * z)
    vals = np.column_stack(cols)
    return np.asarray(_horizon_sum(params, vals, path.mesh, eps, config))


def oracle_payoff(params: GameParams, structure: Structure, i: int, eps: float, z_eps: float,
                  config: OracleConfig | None = None) -> float:
    return float(oracle_payoffs(params, build_profile(params, structure), eps, z_eps, config)[i])


def oracle_h(params: GameParams, eps: float, config: OracleConfig | None = None) -> float:
    """``int_eps^inf e^{-rho (t-eps) - int_eps^t delta}`` with the decay integrated by RK4."""
    config = config or OracleConfig()
    t_end = eps + config.horizon_periods * params.T
    mesh = build_mesh(params.T, params.tau, eps, t_end, config.quad_nodes_per_subperiod)
    y = integrate_ode(decay_field(params), 1.0, eps, t_end, mesh=mesh).y
    # the integrand decays to zero, so no periodic tail is added
    return float(_horizon_sum(params, y[mesh.quad_points()[2]], mesh, eps, config, tail=False))


def period_map(params: GameParams, field: LinearField, config: OracleConfig | None = None,
               t0: float = 0.0) -> Callable[[float], float]:
    """One-period flow ``y(t0) -> y(t0 + T)`` of ``field``."""
    config = config or OracleConfig()
    mesh = build_mesh(params.T, params.tau, t0, t0 + params.T,
                      max(2, config.ode_steps_per_period // 2), even=False)

    def step(y: float) -> float:
        return float(_run(field, y, mesh)[-1])

    return step


def fixed_point_cycle(mapping: Callable[[float], float], seed: float, tol: float = 1e-12,
                      maxiter: int = 10 ** 4) -> float:
    """Iterate ``mapping`` from ``seed`` until successive iterates differ by less than ``tol``.

    Raises
    ------
    ConvergenceError
        After ``maxiter`` iterations without convergence.
    """
    x = float(seed)
    for _ in range(maxiter):
        nxt = float(mapping(x))
        if abs(nxt - x) < tol:
            return nxt
        x = nxt
    raise ConvergenceError(f"no fixed point within {maxiter} iterations (last {x!r})")


def state_fixed_point(params: GameParams, structure: Structure, seed: float = 0.0,
                      config: OracleConfig | None = None) -> float:
    """Stock at the start of the periodic regime, by iterating the period map."""
    inflow = build_profile(params, structure).inflow
    return fixed_point_cycle(period_map(params, state_field(params, inflow), config), seed)


# Closed-form operation -> oracle test that checks it.  The test suite fails
# if any entry points at a missing test.
ORACLE_PAIRS = {
    "adjoint.shadow_cycle": "test_oracle.py::test_adjoint_returns_after_one_period",
    "cycle.PhaseCycle.discounted_period_integral": "test_oracle.py::test_period_integral_of_square_matches_simpson",
    "cycle.PhaseCycle.discounted_tail_integral": "test_oracle.py::test_tail_integral_of_mbar_matches_quadrature",
    "dynamics.limit_cycle_state": "test_oracle.py::test_fixed_point_matches_closed_form",
    "dynamics.trajectory": "test_oracle.py::test_trajectory_matches_ode",
    "dynamics.zbar_hlc_formula": "test_dynamics.py::test_variation_of_constants_formula",
    "payoffs.discount_kernel_h": "test_oracle.py::test_kernel_h_matches_quadrature",
    "payoffs.payoff": "test_oracle.py::test_payoff_matches_oracle",
    "payoffs.characteristic_value": "test_oracle.py::test_singleton_value_matches_oracle",
    "payoffs.cooperation_surplus": "test_payoffs.py::test_surplus_direct_equals_integral_form",
    "stability.mbar_cycle": "test_oracle.py::test_mbar_matches_ode_fixed_point",
    "stability.prop1_check": "test_stability.py::test_rhs_matches_grid_minimum",
    "allocation.idp": "test_allocation.py::test_idp_matches_central_difference",
    "allocation.verify_time_consistency": "test_oracle.py::test_idp_integral_reconstructs_zeta",
}
