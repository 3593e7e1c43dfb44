import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from hybridgame.adjoint import NotSustainable, shadow_cycle
from hybridgame.model import Structure
from hybridgame.strategies import build_profile, nash_strategy, punishment_profile

GRID = np.linspace(0.0, 3.0, 601)


def test_myopic_at_max_when_alone(params):
    for s in (Structure.PI2, Structure.PI3):
        prof = build_profile(params, s)
        assert prof.v[2].is_constant()
        assert np.all(prof.v[2](GRID) == 10.0)


def test_hamiltonian_argmax(params):
    # interior maximiser of a v (b - v/2) + lam xi v at t = 0
    lam = shadow_cycle(params).lambda_hlc
    p = params.players[0]
    res = minimize_scalar(lambda v: -(p.a * v * (p.b - v / 2) + lam * p.xi * v), bounds=(0, p.b),
                          method="bounded", options={"xatol": 1e-12})
    v10 = build_profile(params, Structure.PI1).v[0](0.0)
    assert v10 == pytest.approx(res.x, abs=1e-6)
    assert v10 == pytest.approx(10 + 0.06 * lam, rel=1e-14)
    assert v10 == pytest.approx(9.41444, abs=1e-5)


def test_pi3_matches_grand_coalition_for_farsighted(params):
    p3 = build_profile(params, Structure.PI3)
    p1 = build_profile(params, Structure.PI1)
    assert p3.v[0] == p1.v[0] and p3.v[1] == p1.v[1]


def test_myopic_transformed_in_mixed_coalitions(params):
    for s in (Structure.PI41, Structure.PI42):
        assert not build_profile(params, s).v[2].is_constant()


def test_bounds_and_form(params, random_sets):
    for p in [params, *random_sets]:
        L = shadow_cycle(p).L
        for s in Structure:
            prof = build_profile(p, s)
            v = prof.sample(GRID * p.T)
            b = np.array([pl.b for pl in p.players])
            assert np.all(v >= 0) and np.all(v <= b + 1e-12)
            expected = b + np.array([pl.xi / pl.a * mu for pl, mu in zip(p.players, prof.weights)]) * L(GRID * p.T)[:, None]
            assert np.allclose(v, expected, rtol=1e-13, atol=1e-12)
            inflow = sum(pl.xi * v[:, i] for i, pl in enumerate(p.players))
            assert np.allclose(prof.inflow(GRID * p.T), inflow, rtol=1e-13)


def test_grand_coalition_most_conservative(params, random_sets):
    for p in [params, *random_sets]:
        t = GRID * p.T
        co = build_profile(p, Structure.PI1)
        for s in Structure:
            prof = build_profile(p, s)
            assert np.all(co.sample(t) <= prof.sample(t) + 1e-12)
            assert np.all(co.inflow(t) <= prof.inflow(t) + 1e-12)


def test_inflow_structure(params):
    # constant part sum xi b, L-part 2 sum k mu
    co = build_profile(params, Structure.PI1)
    L = shadow_cycle(params).L
    const = sum(p.xi * p.b for p in params.players)
    coef = 2 * sum(params.k(i) * mu for i, mu in enumerate(co.weights))
    assert np.allclose(co.inflow(GRID), const + coef * L(GRID), rtol=1e-13)


def test_punishment_and_nash(params):
    for i in range(3):
        prof = punishment_profile(params, i)
        assert prof.v[i] == nash_strategy(params, i)
        for j in range(3):
            if j != i:
                assert prof.v[j].is_constant() and prof.v[j](0.0) == params.players[j].b


def test_gate_refuses(params):
    with pytest.raises(NotSustainable):
        build_profile(params.updated(q1=200.0), Structure.PI1)
