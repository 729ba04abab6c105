import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from adiabatic_eta.errors import ConfigError, DomainError
from adiabatic_eta.surface import (HyperbolicClass, SpinStructure, SurfaceData, adiabatic_limit,
                                   classes_from_lengths, count_spin_structures,
                                   enumerate_spin_structures, kappa_trivial, load_config,
                                   parse_config, totally_nontrivial_exists, volume)


def test_kappa_trivial_counts():
    s = SurfaceData(1, 4, SpinStructure((1,), (1,), (1, -1, 1, -1)))
    assert kappa_trivial(s) == 2
    assert kappa_trivial(SurfaceData(1, 2, SpinStructure((1,), (1,), (-1, -1)))) == 0
    assert kappa_trivial(SurfaceData(2, 0)) == 0


@pytest.mark.parametrize("g, kappa, expected", [(2, 0, 4 * math.pi), (0, 3, 2 * math.pi),
                                                (1, 1, 2 * math.pi)])
def test_volume(g, kappa, expected):
    assert volume(SurfaceData(g, kappa)) == pytest.approx(expected, rel=1e-15)


def test_count_examples():
    assert count_spin_structures(1, 2) == 16
    assert count_spin_structures(0, 0) == 1
    assert count_spin_structures(2, 1) == 32


def test_totally_nontrivial():
    assert totally_nontrivial_exists(2)
    assert not totally_nontrivial_exists(3)
    assert totally_nontrivial_exists(4)


def test_enumeration_examples():
    got = list(enumerate_spin_structures(0, 2))
    assert len(got) == 4
    assert {s.eps_h for s in got} == {(1, 1), (-1, -1)}
    assert {s.eps_k for s in got} == {1, -1}
    assert len(list(enumerate_spin_structures(1, 0))) == 8
    assert {s.eps_h for s in enumerate_spin_structures(0, 1)} == {(1,)}


@pytest.mark.parametrize("g", [0, 1, 2])
@pytest.mark.parametrize("kappa", [0, 1, 2, 3, 4])
def test_enumeration_complete_and_constrained(g, kappa):
    got = list(enumerate_spin_structures(g, kappa))
    assert len(set(got)) == len(got)
    assert all(math.prod(s.eps_h) == 1 for s in got)
    expected = count_spin_structures(g, kappa) if kappa else 2 ** (2 * g + 1)
    assert len(got) == expected


@given(st.integers(0, 6), st.integers(0, 8))
def test_limit_is_minus_volume_over_12pi(g, kappa):
    if 2 * g - 2 + kappa <= 0:
        with pytest.raises(DomainError):
            SurfaceData(g, kappa)
        return
    s = SurfaceData(g, kappa)
    assert adiabatic_limit(s) == pytest.approx((2 - 2 * g - kappa) / 6, rel=1e-14, abs=1e-15)


def test_spin_product_constraint_rejected():
    with pytest.raises(DomainError):
        SpinStructure((), (), (1, -1))
    with pytest.raises(DomainError):
        SpinStructure((1,), (), ())
    with pytest.raises(DomainError):
        SurfaceData(0, 2)


def test_with_kappa_t_parity():
    assert kappa_trivial(SurfaceData(0, 4).with_kappa_t(2)) == 2
    with pytest.raises(DomainError):
        SurfaceData(1, 2).with_kappa_t(1)


def test_hyperbolic_class_validation():
    assert classes_from_lengths([1.0, 2.0])[1] == HyperbolicClass(2.0, 2.0, 1)
    with pytest.raises(DomainError):
        HyperbolicClass(-1.0)
    with pytest.raises(DomainError):
        HyperbolicClass(1.0, 2.0, 0)


def test_config_roundtrip(tmp_path):
    data = {"genus": 0, "cusps": 4, "spin": {"x": [], "y": [], "h": [1, 1, -1, -1], "k": 1},
            "hyperbolic_classes": [{"u": 1.5}]}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(data))
    cfg = load_config(path)
    assert kappa_trivial(cfg.surface) == 2
    assert cfg.classes == (HyperbolicClass(1.5),)
    assert parse_config(cfg.to_dict()) == cfg


@pytest.mark.parametrize("data, field", [
    ({"genus": 2}, "cusps"),
    ({"genus": "2", "cusps": 0}, "genus"),
    ({"genus": 2, "cusps": 0, "colour": 1}, "colour"),
    ({"genus": 0, "cusps": 2, "spin": {"x": [], "y": [], "h": [1, -1], "k": 1}}, "spin.h"),
    ({"genus": 0, "cusps": 2, "spin": {"x": [], "y": [], "h": [1, 2], "k": 1}}, "spin.h[1]"),
    ({"genus": 2, "cusps": 0, "hyperbolic_classes": [{"u": -1}]}, "hyperbolic_classes[0].u"),
])
def test_config_errors_name_field(data, field):
    with pytest.raises(ConfigError) as info:
        parse_config(data)
    assert info.value.field == field


def test_config_syntax_error_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"genus": 2,\n "cusps": }')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.field == "line 2"
