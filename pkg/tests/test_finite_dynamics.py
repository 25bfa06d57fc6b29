import math

import numpy as np
import pytest

from spinsys.configurations import all_one, all_zero, indicator
from spinsys.finite_dynamics import (
    FiniteGenerator,
    FiniteSystemSpec,
    empirical_distribution,
    exact_distribution,
    semigroup_exact,
    simulate_finite,
    total_variation,
)
from spinsys.lattice import Box
from spinsys.rate_models import Contact, Independent, Voter


def test_independent_closed_form(independent):
    spec = FiniteSystemSpec(all_zero(), [(0,)], independent, 0.5)
    p = exact_distribution(spec, 0.5).probs
    e = math.exp(-1.0)
    assert p == pytest.approx([(1 + e) / 2, (1 - e) / 2], abs=1e-12)
    assert p[1] == pytest.approx(0.3161, abs=1e-4)


def test_independent_mc_matches_closed_form(independent):
    spec = FiniteSystemSpec(all_zero(), [(0,)], independent, 0.5)
    n = 20_000
    hits = sum(simulate_finite(spec, s).final[(0,)] for s in range(n))
    p = hits / n
    target = (1 - math.exp(-1)) / 2
    assert abs(p - target) <= 3 * math.sqrt(target * (1 - target) / n)


def test_absorbing_states(contact):
    for seed in range(20):
        assert simulate_finite(FiniteSystemSpec(all_zero(), Box(2), contact, 3.0), seed).events == []
        assert simulate_finite(FiniteSystemSpec(all_one(), Box(2), Voter(), 3.0), seed).events == []


def test_time_zero_is_point_mass(contact):
    spec = FiniteSystemSpec(indicator([(0,)]), Box(1), contact, 0.0)
    d = exact_distribution(spec, 0.0)
    assert d.prob_of(indicator([(0,)])) == 1.0


def test_kernel_is_stochastic_and_a_semigroup(contact):
    gen = FiniteGenerator(FiniteSystemSpec(indicator([(0,)]), Box(1), contact))
    k1 = gen.kernel(0.4)
    k2 = gen.kernel(0.8)
    assert k1.sum(axis=1) == pytest.approx(np.ones(gen.n_states), abs=1e-12)
    assert np.abs(k1 @ k1 - k2).max() <= 1e-9


def test_derivative_at_zero_is_generator(contact):
    gen = FiniteGenerator(FiniteSystemSpec(indicator([(0,)]), Box(1), contact))
    h = 1e-3
    # Richardson-extrapolated central difference of exp(tQ) at t = 0 is O(h^4)
    d1 = (gen.kernel(h) - np.eye(gen.n_states)) / h
    d2 = (gen.kernel(h / 2) - np.eye(gen.n_states)) / (h / 2)
    assert np.abs(2 * d2 - d1 - gen.Q.toarray()).max() <= 1e-4


def test_oracle_matches_simulation(contact):
    spec = FiniteSystemSpec(indicator([(0,)]), Box(1), contact, 1.0)
    emp = empirical_distribution(spec, 20_000, 11)
    assert total_variation(emp, exact_distribution(spec, 1.0).probs) <= 0.03


def test_semigroup_exact(independent):
    spec = FiniteSystemSpec(all_zero(), [(0,)], independent, 0.7)
    assert semigroup_exact(spec, 0.7, lambda c: 1.0) == pytest.approx(1.0, abs=1e-12)
    assert semigroup_exact(spec, 0.7, lambda c: c[(0,)]) == pytest.approx(
        (1 - math.exp(-1.4)) / 2, abs=1e-12)


def test_exterior_stays_frozen(contact):
    eta = indicator([(3,)])
    spec = FiniteSystemSpec(eta, Box(1), contact, 2.0)
    for seed in range(10):
        assert simulate_finite(spec, seed).final[(3,)] == 1


def test_oracle_size_limit(contact):
    with pytest.raises(ValueError):
        FiniteGenerator(FiniteSystemSpec(all_zero(), Box(8), contact))


def test_total_variation():
    assert total_variation([1, 0], [0, 1]) == 1
    assert total_variation([0.5, 0.5], [0.5, 0.5]) == 0
