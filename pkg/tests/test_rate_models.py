import math

import pytest

from spinsys.configurations import all_one, all_zero, indicator, periodic
from spinsys.errors import HypothesisViolation
from spinsys.lattice import Box
from spinsys.rate_models import (
    UNIFORM,
    Contact,
    Glauber,
    Independent,
    LongRangeGeometric,
    Tabulated,
    Voter,
    WeightFamily,
    brute_force_influence,
    build_model,
    check_lipschitz,
    constant_A,
    constant_C,
    g_total,
    gamma,
    rate,
)


def test_rates(contact):
    assert rate(contact, (0,), indicator([(1,)])) == 1.5
    assert rate(contact, (0,), indicator([(0,)])) == 1.0
    assert rate(Independent(2, 3), (0,), indicator([(0,)])) == 3
    assert rate(Voter(), (4,), all_zero()) == 0
    assert rate(Voter(), (0,), indicator([(1,)])) == 0.5


def test_influence_closed_forms(contact):
    a = contact.influence()
    assert a.a_of((1,), (0,)) == 1.5
    assert a.a_of((-1,), (0,)) == 1.5
    assert a.a_of((2,), (0,)) == 0
    assert Voter().influence().a_of((1,), (0,)) == 0.5
    assert Independent(1, 1).influence().is_zero


@pytest.mark.parametrize("model", [Contact(1.5), Voter(), Glauber(0.7), Independent(2, 3),
                                   Contact(0.6, dim=2), Glauber(0.3, dim=2)])
def test_brute_force_matches_declared(model):
    radius = 2 if model.dim == 1 else 1
    found = brute_force_influence(model, radius)
    origin = (0,) * model.dim
    for o, a in found.items():
        assert a == pytest.approx(model.influence().a_of(o, origin), abs=1e-12)


def test_constants(contact):
    assert constant_C(contact) == 3
    assert constant_C(Voter()) == 1
    assert constant_C(Independent(2, 3)) == 3
    assert constant_A(contact) == 3
    assert constant_A(Independent(1, 1)) == 0
    assert constant_A(LongRangeGeometric(0.5, 1.0)) == pytest.approx(2.0, abs=1e-9)


def test_long_range_exponential_weights_diverge():
    with pytest.raises(HypothesisViolation):
        constant_A(LongRangeGeometric(0.5, 1.0), WeightFamily("exponential", 1.0))
    # theta e^k < 1 is fine and exceeds the uniform value
    a = constant_A(LongRangeGeometric(0.5, 1.0), WeightFamily("exponential", 0.2))
    assert 2.0 < a < math.inf


def test_long_range_truncation_is_minimal():
    m = LongRangeGeometric(0.5, 1.0)
    r = m.truncation_radius(1e-6)
    assert m.tail_beyond(r) <= 1e-6 < m.tail_beyond(r - 1)


def test_gamma_and_total(contact):
    a = contact.influence()
    assert gamma(a, (0,), indicator([(0,)])) == 0
    assert gamma(a, (0,), indicator([(1,)])) == 1.5
    assert gamma(a, (0,), all_zero()) == 0
    abar = a.transpose()
    assert g_total(abar, UNIFORM, indicator([(0,)])) == 3
    assert g_total(a, UNIFORM, all_zero()) == 0
    assert g_total(Independent(1, 1).influence(), UNIFORM, indicator([(0,), (3,)])) == 0


def test_gamma_bounded_by_total(contact):
    a = contact.influence()
    for cfg in (periodic("10"), periodic("110"), indicator([(-1,), (1,)])):
        for x in range(-3, 4):
            assert gamma(a, (x,), cfg) <= a.total()


def test_lipschitz_passes():
    rep = check_lipschitz(Independent(1, 1), Box(2))
    assert rep.passed and rep.worst_slack == 0
    assert check_lipschitz(Contact(1.5), Box(2)).passed
    assert check_lipschitz(Glauber(0.9), Box(2)).passed


def test_lipschitz_fails_with_witness():
    # majority-like rule whose declared influence omits the left neighbour
    table = {format(k, "03b"): float(bin(k).count("1")) for k in range(8)}
    bad = Tabulated(1, table, declared_influence={(1,): 1.0})
    rep = check_lipschitz(bad, Box(1))
    assert not rep.passed
    eta1, eta2, diff, bound = rep.witness
    assert eta1[(-1,)] != eta2[(-1,)]
    assert diff > bound


def test_build_model():
    assert build_model("contact", 1, lambda_c=2.0) == Contact(2.0)
    with pytest.raises(ValueError):
        build_model("ising", 1)


def test_tabulated_influence_by_enumeration():
    table = {format(k, "03b"): (1.0 if k & 0b100 else 0.0) + 0.5 * (k & 1) for k in range(8)}
    m = Tabulated(1, table)
    a = m.influence()
    assert a.a_of((-1,), (0,)) == 1.0
    assert a.a_of((1,), (0,)) == 0.5
    assert rate(m, (0,), all_one()) == 1.5
