import ast
import importlib
import math
from pathlib import Path

import numpy as np
import pytest

from hybridgame import allocation as A
from hybridgame import oracle as O
from hybridgame.adjoint import shadow_cycle
from hybridgame.cycle import PhaseCycle
from hybridgame.dynamics import limit_cycle_state, trajectory
from hybridgame.model import Structure, shadow_weights
from hybridgame.payoffs import SubgameContext, characteristic_value, discount_kernel_h, payoff
from hybridgame.stability import mbar_cycle
from hybridgame.strategies import build_profile, punishment_profile

FAST = O.OracleConfig(ode_steps_per_period=20000, quad_nodes_per_subperiod=2000)
TESTS = Path(__file__).parent


def test_manifest_complete():
    for closed, ref in O.ORACLE_PAIRS.items():
        fname, func = ref.split("::")
        tree = ast.parse((TESTS / fname).read_text())
        names = {n.name for n in tree.body if isinstance(n, ast.FunctionDef)}
        assert func in names, f"{closed}: missing {ref}"
        mod, *attrs = closed.split(".")
        obj = importlib.import_module(f"hybridgame.{mod}")
        for a in attrs:
            obj = getattr(obj, a)


def test_config_validation():
    with pytest.raises(ValueError):
        O.OracleConfig(ode_steps_per_period=10)
    with pytest.raises(ValueError):
        O.OracleConfig(quad_nodes_per_subperiod=50)
    O.OracleConfig().check_horizon(0.3, 1.0)
    with pytest.raises(ValueError, match="too short"):
        O.OracleConfig().check_horizon(0.1, 1.0)


def test_mesh_aligned_with_switches():
    m = O.build_mesh(1.0, 0.3, 0.1, 2.45, 100)
    nodes = m.nodes
    for c in (0.3, 1.0, 1.3, 2.0, 2.3):
        assert np.min(np.abs(nodes - c)) < 1e-14
    assert np.all(m.seg_n % 2 == 0)
    t, w, idx, seg = m.quad_points()
    assert w.sum() == pytest.approx(2.35, rel=1e-14)
    assert np.allclose(t, nodes[idx], atol=1e-15)


def test_quadrature_trivial_cases(params):
    one = O.discounted_integral_quad(params, lambda t: np.ones_like(t), 0.0, FAST)
    assert one == pytest.approx(1 / 0.3, rel=1e-12)
    dec = O.discounted_integral_quad(params, lambda t: np.exp(-0.3 * t), 0.0,
                                     O.OracleConfig(quad_nodes_per_subperiod=2000, tail=False))
    assert dec == pytest.approx(1 / 0.6, rel=1e-12)


def test_constant_coefficient_ode():
    f = PhaseCycle.constant(1.0, 0.5, 2.0)
    field = O.LinearField("test", f, (-0.5, -0.5))
    path = O.integrate_ode(field, 1.0, 0.0, 3.0, O.OracleConfig(ode_steps_per_period=2000))
    exact = 4.0 + (1.0 - 4.0) * np.exp(-0.5 * path.t)
    assert np.allclose(path.y, exact, rtol=0, atol=1e-10)


def test_fixed_point_iteration():
    assert O.fixed_point_cycle(lambda z: 0.5 * z + 1, 0.0) == pytest.approx(2.0, abs=2e-12)
    with pytest.raises(O.ConvergenceError):
        O.fixed_point_cycle(lambda z: z + 1, 0.0, maxiter=50)


def test_adjoint_returns_after_one_period(params):
    for mu in set(shadow_weights(Structure.PI1, params) + shadow_weights(Structure.PI2, params)):
        lam0 = mu * shadow_cycle(params).L(0.0)
        assert O.period_map(params, O.adjoint_field(params, mu))(lam0) == pytest.approx(lam0, abs=1e-8)


def test_period_integral_of_square_matches_simpson(params):
    L2 = shadow_cycle(params).L * shadow_cycle(params).L
    ref = O.discounted_integral_finite(params, L2, 0.0, params.T, O.OracleConfig())
    assert L2.discounted_period_integral(params.rho) == pytest.approx(ref, rel=1e-9)


def test_tail_integral_of_mbar_matches_quadrature(params):
    mb = mbar_cycle(params).Mbar
    ref = O.discounted_integral_quad(params, mb, 0.0, FAST)
    assert mb.discounted_tail_integral(params.rho, 0.0) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("structure", list(Structure))
def test_fixed_point_matches_closed_form(params, structure):
    _, zh = limit_cycle_state(params, structure)
    for seed in (0.0, 100.0):
        assert O.state_fixed_point(params, structure, seed) == pytest.approx(zh, abs=1e-10)


def test_trajectory_matches_ode(params):
    prof = build_profile(params, Structure.PI1)
    path = O.integrate_ode(O.state_field(params, prof.inflow), 0.0, 0.0, 12.0, FAST)
    tr = trajectory(params, Structure.PI1, 0.0, 0.0)
    idx = np.linspace(1, path.t.size - 1, 40).astype(int)
    assert np.allclose(path.y[idx], tr(path.t[idx]), rtol=1e-8)


def test_kernel_h_matches_quadrature(params):
    for e in (0.0, 0.3, 0.5, 0.8):
        assert discount_kernel_h(params, e) == pytest.approx(O.oracle_h(params, e, FAST), rel=1e-8)


def test_payoff_matches_oracle(params):
    ctx = SubgameContext.on_cooperative_path(params, 0.7)
    for s in Structure:
        ref = O.oracle_payoffs(params, build_profile(params, s), ctx.eps, ctx.z_eps, FAST)
        for i in range(3):
            assert payoff(params, s, i, ctx) == pytest.approx(ref[i], rel=1e-6)


def test_singleton_value_matches_oracle(params):
    ctx = SubgameContext.on_cooperative_path(params, 0.25)
    for i in range(3):
        ref = O.oracle_payoffs(params, punishment_profile(params, i), ctx.eps, ctx.z_eps, FAST)[i]
        assert characteristic_value(params, {i}, ctx) == pytest.approx(ref, rel=1e-6)


def test_mbar_matches_ode_fixed_point(params):
    mb = mbar_cycle(params)
    step = O.period_map(params, O.mbar_field(params, mb.om))
    assert O.fixed_point_cycle(step, 0.0) == pytest.approx(mb.M0, abs=1e-9)
    path = O.integrate_ode(O.mbar_field(params, mb.om), mb.M0, 0.0, params.T, FAST)
    assert np.allclose(path.y, mb.Mbar(path.t), atol=1e-9)


def test_idp_integral_reconstructs_zeta(params):
    alpha = (1 / 3, 1 / 3, 1 / 3)
    acc = O.discounted_integral_quad(params, lambda s: A.idp(params, alpha, s), 0.0,
                                     O.OracleConfig(quad_nodes_per_subperiod=1000))
    assert np.allclose(acc, A.zeta(params, alpha, 0.0), rtol=0, atol=1e-5)
