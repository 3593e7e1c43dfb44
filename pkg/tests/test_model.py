import math

import pytest

from hybridgame.model import (
    DEVIATION,
    PARAM_KEYS,
    GameParams,
    ParameterError,
    Structure,
    load_config,
    reference_params,
    shadow_weights,
    validate,
)


def test_reference_set_is_valid(params):
    assert validate(params) is params
    assert params.s1 == pytest.approx(0.75)
    assert params.s2 == pytest.approx(1.2)
    assert params.q == 9.0
    assert [params.k(i) for i in range(3)] == pytest.approx([0.009, 0.02, 0.06])


@pytest.mark.parametrize(
    "change, message",
    [
        ({"tau": 1.0}, "tau out of (0,1)"),
        ({"tau": 0.0}, "tau out of (0,1)"),
        ({"q3": 1.0}, "myopic player must have q=0"),
        ({"delta1": 0.0}, "delta1 must be > 0"),
        ({"rho": -0.1}, "rho must be > 0"),
        ({"a2": 0.0}, "a2 must be > 0"),
        ({"xi3": -1.0}, "xi3 must be > 0"),
        ({"q1": 0.0}, "farsighted player 1 must have q > 0"),
        ({"z0": -1.0}, "z0 must be >= 0"),
    ],
)
def test_validate_names_violation(params, change, message):
    with pytest.raises(ParameterError, match=message.replace("(", r"\(").replace(")", r"\)")):
        validate(params.updated(**change))


def test_mapping_round_trip(params):
    flat = params.to_mapping()
    assert set(flat) == set(PARAM_KEYS)
    assert GameParams.from_mapping(flat) == params


def test_from_mapping_rejects_unknown_and_missing(params):
    flat = params.to_mapping()
    with pytest.raises(ParameterError, match="unknown"):
        GameParams.from_mapping({**flat, "gamma": 1.0})
    del flat["rho"]
    with pytest.raises(ParameterError, match="missing.*rho"):
        GameParams.from_mapping(flat)


def test_load_config(tmp_path):
    cfg = tmp_path / "p.cfg"
    cfg.write_text("# comment\ndelta1 = 0.5  # inline\n\nq2=3\n")
    assert load_config(cfg) == {"delta1": 0.5, "q2": 3.0}
    cfg.write_text("delta1 0.5\n")
    with pytest.raises(ParameterError, match="key=value"):
        load_config(cfg)
    cfg.write_text("delta1 = fast\n")
    with pytest.raises(ParameterError, match="not a number"):
        load_config(cfg)


@pytest.mark.parametrize(
    "structure, expected",
    [
        (Structure.PI1, (9, 9, 9)),
        (Structure.PI2, (4, 5, 0)),
        (Structure.PI3, (9, 9, 0)),
        (Structure.PI41, (4, 5, 4)),
        (Structure.PI42, (4, 5, 5)),
    ],
)
def test_shadow_weights(params, structure, expected):
    assert shadow_weights(structure, params) == expected


def test_weight_properties(params):
    q1, q2 = params.players[0].q, params.players[1].q
    for s in Structure:
        w = shadow_weights(s, params)
        assert (w[2] == 0) == (frozenset({2}) in s.blocks)
        assert w[0] in (q1, q2, q1 + q2) and w[1] in (q1, q2, q1 + q2)
        for i in (0, 1):
            if frozenset({i}) in s.blocks:
                assert w[i] == params.players[i].q


def test_structures_are_partitions():
    assert len(Structure) == 5
    for s in Structure:
        assert sorted(j for blk in s.blocks for j in blk) == [0, 1, 2]
        assert sum(len(b) > 1 for b in s.blocks) <= 1
    assert Structure.parse(" PI41 ") is Structure.PI41
    with pytest.raises(ParameterError):
        Structure.parse("pi5")


def test_deviation_map():
    # the deviator ends up alone
    for i, s in DEVIATION.items():
        assert frozenset({i}) in s.blocks


def test_derived_quantities_follow_updates(params):
    p = params.updated(delta1=0.6, rho=0.2)
    assert p.s1 == pytest.approx(0.8)
    assert p.decay_per_period == pytest.approx(0.6 * 0.5 + 0.9 * 0.5)
    assert p.delta_min == 0.6
    assert math.isclose(p.players[0].bound, -5 * 10 / 0.3)
