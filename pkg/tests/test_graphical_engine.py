import math

import numpy as np
import pytest

from spinsys.configurations import all_zero, indicator, periodic
from spinsys.errors import InvariantViolation
from spinsys.finite_dynamics import FiniteSystemSpec, simulate_finite
from spinsys.graphical_engine import (
    build_timeline,
    limit_estimate,
    run_coupled,
    run_two_config,
    stabilization_index,
)
from spinsys.lattice import Box
from spinsys.rate_models import Contact, Independent


def test_timeline_intensities(contact):
    tl = build_timeline(Box(1), 1.0, contact, seed=3)
    assert tl.rate_of((0,)) == 6
    assert build_timeline(Box(1), 0.0, contact).times.size == 0
    counts = [len(build_timeline(Box(1), 1.0, contact, seed=s)) for s in range(400)]
    assert abs(np.mean(counts) - 18) <= 3 * math.sqrt(18 / 400)


def test_timeline_is_deterministic(contact):
    a = build_timeline(Box(3), 1.0, contact, seed=5)
    b = build_timeline(Box(3), 1.0, contact, seed=5)
    assert np.array_equal(a.times, b.times) and np.array_equal(a.marks, b.marks)


def test_single_box_equals_finite_system(contact):
    eta = periodic("10")
    for seed in range(30):
        tl = build_timeline(Box(3), 1.0, contact, seed=seed)
        bundle = run_coupled(tl, eta, [3], track_zeta=False)
        traj = simulate_finite(FiniteSystemSpec(eta, Box(3), contact, 1.0), seed, timeline=tl)
        assert bundle.xi[0].events == traj.events


def test_containment(contact):
    for seed in range(300):
        tl = build_timeline(Box(4), 1.0, contact, seed=seed)
        assert run_coupled(tl, indicator([(0,)]), [1, 2, 3], strict=True).violations == []


def test_independent_has_no_discrepancy():
    m = Independent(1.0, 2.0)
    for seed in range(50):
        tl = build_timeline(Box(3), 1.0, m, seed=seed)
        b = run_coupled(tl, periodic("10"), [1, 2, 3])
        assert all(z.events == [] for z in b.zeta)
        for v in Box(1):
            assert len(set(b.values_at(v))) == 1


def test_misdeclared_influence_is_caught():
    # declaring a = 0 makes zeta^n frozen while the copies still disagree
    m = Contact(1.5, declared_influence={})
    with pytest.raises(InvariantViolation):
        for seed in range(200):
            tl = build_timeline(Box(4), 1.0, m, seed=seed)
            run_coupled(tl, indicator([(0,)]), [1, 2, 3], strict=True)


def test_two_config(contact):
    for seed in range(300):
        tl = build_timeline(Box(4), 1.0, contact, seed=seed)
        for n in (1, 2, 3):
            run = run_two_config(tl, indicator([(0,)]), (0,), n, strict=True)
            assert run.violations == []
        run_two_config(tl, all_zero(), (4,), 2, strict=True)


def test_two_config_independent_stays_at_w():
    m = Independent(1.0, 1.0)
    for seed in range(50):
        tl = build_timeline(Box(2), 2.0, m, seed=seed)
        xi1, xi2, gam = run_two_config(tl, all_zero(), (0,), 2)
        assert gam.events == []
        for v in Box(2):
            if v != (0,):
                assert xi1.final[v] == xi2.final[v]


def test_two_config_rejects_outside_window(contact):
    tl = build_timeline(Box(2), 1.0, contact, seed=0)
    with pytest.raises(ValueError):
        run_two_config(tl, all_zero(), (5,), 1)


def test_stabilization_index():
    assert stabilization_index([0, 1, 1, 1]) == 2
    assert stabilization_index([1, 1]) == 1
    assert stabilization_index([0, 0, 1]) == 3


def test_limit_estimate(contact):
    est = limit_estimate(contact, indicator([(0,)]), (0,), 0.0, [1, 2, 3], seed=0)
    assert (est.value, est.stabilization_index) == (1, 1)
    for seed in range(20):
        est = limit_estimate(Independent(1, 1), periodic("10"), (0,), 1.0, [1, 2, 3], seed)
        assert est.stabilization_index == 1
