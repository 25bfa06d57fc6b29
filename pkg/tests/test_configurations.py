import math

import pytest
from hypothesis import given, strategies as st

from spinsys.configurations import (
    Configuration,
    LocalView,
    all_one,
    all_zero,
    indicator,
    parse_configuration,
    periodic,
    q_weight,
)
from spinsys.lattice import Box, complement_in
from spinsys.rate_models import WeightFamily


def test_eval_basics():
    assert all_zero().eval((0,)) == 0
    assert indicator([(0,)]).eval((0,)) == 1
    assert periodic("10").eval((3,)) == 0
    assert periodic("10").eval((-2,)) == 1


def test_flip():
    c = all_zero().flip((0,))
    assert c.deviations == frozenset({(0,)})
    assert c.flip((0,)) == all_zero()
    one = all_one().flip((5,))
    assert one[(5,)] == 0 and one[(4,)] == 1


def test_indicator():
    assert indicator([], 1) == all_zero()
    ring = indicator(complement_in(Box(2), Box(1)))
    assert [ring[(x,)] for x in range(-3, 4)] == [0, 1, 0, 0, 0, 1, 0]


def test_q_weight():
    assert q_weight(all_zero()) == 0
    assert q_weight(indicator([(0,), (3,)])) == 2
    assert q_weight(all_one()) == math.inf
    w = WeightFamily("polynomial", 1.0)
    assert q_weight(indicator([(0,), (3,)]), w) == pytest.approx(1 + 4)


def test_constant_period_is_canonical():
    assert periodic("11") == all_one()
    assert periodic("1010") == periodic("10")


def test_periodic_2d():
    c = periodic("10/01", dim=2)
    assert c[(0, 0)] == 1 and c[(1, 0)] == 0 and c[(1, 1)] == 1


def test_parse_errors():
    with pytest.raises(ValueError):
        parse_configuration("bg=two; dev=", 1)


def test_local_view_reads_through():
    base = periodic("10")
    view = LocalView(base)
    assert view[(2,)] == 1
    view[(2,)] = 0
    assert view.freeze() == base.flip((2,))


sites_1d = st.sets(st.integers(-20, 20), max_size=8)


@given(sites_1d, st.sampled_from(["zero", "one", "period:10", "period:110"]))
def test_text_round_trip(devs, bg):
    base = parse_configuration(f"bg={bg}; dev=", 1)
    cfg = base
    for x in devs:
        cfg = cfg.flip((x,))
    assert parse_configuration(cfg.to_text(), 1) == cfg


@given(st.sets(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), max_size=6))
def test_text_round_trip_2d(devs):
    cfg = Configuration(2, deviations=frozenset(devs))
    assert parse_configuration(cfg.to_text(), 2) == cfg


@given(sites_1d, st.integers(-20, 20))
def test_flip_is_involution(devs, x):
    cfg = indicator([(d,) for d in devs])
    assert cfg.flip((x,)).flip((x,)) == cfg
    assert cfg.flip((x,))[(x,)] != cfg[(x,)]
