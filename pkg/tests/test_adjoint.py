import numpy as np
import pytest

from hybridgame.adjoint import NotSustainable, adjoint_of, check_sustainable, require_sustainable, shadow_cycle
from hybridgame.model import Structure
from hybridgame.oracle import OracleConfig, adjoint_field, integrate_ode, period_map

# frozen from the closed form; the one-period ODE return below is the check
M1 = 0.24895080126417593
M2 = -0.0756145655644263
L0 = -1.0843825320691574


def test_reference_coefficients(params):
    adj = shadow_cycle(params)
    assert adj.m1 == pytest.approx(M1, rel=1e-13)
    assert adj.m2 == pytest.approx(M2, rel=1e-13)
    assert adj.L(0.0) == pytest.approx(L0, rel=1e-13)
    assert adj.lambda_hlc == pytest.approx(9 * L0, rel=1e-13)
    u = params.split
    assert adj.L(u) == pytest.approx(adj.m2 * np.exp(params.s2 * u) - 1 / params.s2, rel=1e-13)
    assert adj.L(u - 1e-12) == pytest.approx(adj.m1 * np.exp(params.s1 * u) - 1 / params.s1, rel=1e-10)


def test_periodic_and_continuous(params):
    adj = shadow_cycle(params)
    assert abs(adj.endpoint_gap()) < 1e-12
    assert abs(adj.continuity_gap()) < 1e-12


def test_ode_return(params):
    lam0 = shadow_cycle(params).lambda_hlc
    step = period_map(params, adjoint_field(params, params.q), OracleConfig())
    assert step(lam0) == pytest.approx(lam0, rel=1e-8)


def test_adjoint_solves_ode(params):
    L = shadow_cycle(params).L
    u = np.linspace(0.01, params.split - 0.01, 9)
    dL = sum(c * r * np.exp(r * u) for c, r in L.phases[0])
    assert np.allclose(dL, 1.0 + params.s1 * L.eval_local(0, u), atol=1e-13)


def test_off_cycle_start_diverges(params):
    lam0 = shadow_cycle(params).lambda_hlc
    path = integrate_ode(adjoint_field(params, params.q), lam0 + 0.1, 0.0, 20 * params.T,
                         OracleConfig(ode_steps_per_period=2000))
    assert abs(path.end) > 10 * abs(lam0)


def test_equal_rates_give_constant(params):
    p = params.updated(delta2=params.delta1)
    adj = shadow_cycle(p)
    assert adj.m1 == 0.0
    assert adj.L.is_constant()
    assert adj.L(0.3) == pytest.approx(-1 / 0.75, rel=1e-15)


def test_monotone_per_phase_and_negative(params, random_sets):
    for p in [params, *random_sets]:
        L = shadow_cycle(p).L
        for phase, (a, b) in enumerate(L.bounds):
            u = np.linspace(a, b, 200)
            d = np.diff(L.eval_local(phase, u))
            assert np.all(d > 0) or np.all(d < 0)
        assert L.period_extrema()[1] < 0
        # s1 > s2 means L decreases on the first subperiod
        if p.s1 > p.s2:
            assert shadow_cycle(p).m1 < 0


def test_sustainability_gate(params):
    rep = check_sustainable(params, Structure.PI1)
    assert rep.sustainable
    assert min(rep.margins) == pytest.approx(8.740008493484718, rel=1e-12)
    assert check_sustainable(params, Structure.PI2).ok[2]
    assert check_sustainable(params, Structure.PI2).margins[2] == 0.0
    bad = params.updated(q1=params.players[0].q * 50)
    rep = check_sustainable(bad, Structure.PI1)
    assert not rep.sustainable
    with pytest.raises(NotSustainable) as info:
        require_sustainable(bad, Structure.PI1)
    assert info.value.player == rep.worst_player
    assert info.value.margin < 0


def test_adjoint_of_scales(params):
    assert adjoint_of(params, 4.0)(0.2) == pytest.approx(4.0 * shadow_cycle(params).L(0.2))
