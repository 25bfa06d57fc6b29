import math
import warnings

import pytest

from spinsys.errors import BoundaryTouchWarning, InvariantViolation
from spinsys.invasion import (
    ArrowGraph,
    duality_check,
    escape_probability,
    growth_curve,
    invade,
    monotone_pair,
    reachability_oracle,
    reachable_set,
    sample_arrow_graph,
    simulate_invasion,
)
from spinsys.lattice import Box
from spinsys.rate_models import UNIFORM, Contact, Independent, WeightFamily, scaled


def test_reachability_by_hand():
    g = ArrowGraph(Box(2), 1.0, [(0.4, (0,), (1,))])
    assert reachability_oracle(g, [(0,)], (1,), 1.0) == 1
    assert reachability_oracle(g, [(0,)], (1,), 0.3) == 0
    assert reachability_oracle(ArrowGraph(Box(2), 1.0, []), [(0,)], (1,), 1.0) == 0
    assert reachability_oracle(ArrowGraph(Box(2), 1.0, []), [(0,)], (0,), 1.0) == 1


def test_time_order_matters():
    g = ArrowGraph(Box(2), 1.0, [(0.2, (1,), (2,)), (0.5, (0,), (1,))])
    assert reachable_set(g, [(0,)]) == {(0,), (1,)}
    rev = g.reversed()
    assert rev.arrows == [(0.5, (1,), (0,)), (0.8, (2,), (1,))]


def test_trivial_invasions(contact):
    assert simulate_invasion([(0,)], contact.influence(), 0.0, Box(3), 1).support() == [(0,)]
    zero = Independent(1, 1).influence()
    assert simulate_invasion([(0,), (2,)], zero, 5.0, Box(3), 1).support() == [(0,), (2,)]


def test_first_arrow_is_exponential(contact):
    abar = contact.influence().transpose()
    n = 4000
    hits = sum((1,) in invade([(0,)], abar, 1.0, Box(6), s).occupied_at for s in range(n))
    p = 1 - math.exp(-1.5)
    assert p == pytest.approx(0.7769, abs=1e-4)
    # (1) can also be reached through (2) first, so only a lower bound is exact
    assert hits / n >= p - 3 * math.sqrt(p * (1 - p) / n)


def test_first_arrival_distribution():
    # a lone pair: the only way to reach (1) is the direct arrow
    from spinsys.rate_models import Influence

    a = Influence(1, {(-1,): 1.5})
    n = 4000
    hits = sum((1,) in invade([(0,)], a, 1.0, Box(1), s).occupied_at for s in range(n))
    p = 1 - math.exp(-1.5)
    assert abs(hits / n - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_frontier_equals_full_graph(contact):
    a = contact.influence()
    for seed in range(200):
        run = invade([(0,)], a, 1.0, Box(6), seed)
        graph = sample_arrow_graph(a, Box(6), 1.0, seed)
        assert set(run.occupied()) == reachable_set(graph, [(0,)])
        for t in (0.25, 0.5):
            assert set(run.occupied(t)) == reachable_set(graph, [(0,)], t)


def test_duality(contact):
    W = [(-2,), (2,)]
    rep = duality_check((0,), W, 1.0, contact.influence(), Box(10), range(500))
    assert rep.exact_ok and rep.statistical_ok
    rep = duality_check((0,), [(0,)], 1.0, contact.influence(), Box(10), range(20),
                        statistical=False)
    assert rep.forward_hits == 20


def test_growth(contact):
    rows = growth_curve((0,), contact.influence().transpose(), UNIFORM, (0.0, 0.5, 1.0), 1000,
                        Box(12), 0)
    assert rows[0].mean_q == 1.0 and rows[0].sem == 0
    assert all(r.within_bound for r in rows)
    assert rows[-1].bound == pytest.approx(math.exp(3))
    zero = growth_curve((0,), Independent(1, 1).influence(), UNIFORM, (1.0,), 50, Box(3), 0)
    assert zero[0].mean_q == 1.0


def test_growth_weighted(contact):
    w = WeightFamily("polynomial", 1.0)
    rows = growth_curve((0,), contact.influence().transpose(), w, (0.5,), 1000, Box(12), 0)
    assert rows[0].within_bound


def test_monotone(contact):
    a = contact.influence().transpose()
    small = scaled(a, 2 / 3)
    for seed in range(200):
        lo, hi = monotone_pair(small, a, [(0,)], 1.0, seed, Box(6))
        assert set(lo.support()) <= set(hi.support())
        same_lo, same_hi = monotone_pair(a, a, [(0,)], 1.0, seed, Box(6))
        assert same_lo == same_hi
    zero = Independent(1, 1).influence()
    lo, hi = monotone_pair(zero, a, [(0,)], 1.0, 0, Box(6))
    assert lo.support() == [(0,)]
    with pytest.raises(ValueError):
        monotone_pair(a, small, [(0,)], 1.0, 0, Box(6))


def test_boundary_warning(contact):
    with pytest.warns(BoundaryTouchWarning):
        for seed in range(50):
            simulate_invasion([(0,)], contact.influence(), 3.0, Box(2), seed)


def test_escape_probability(contact):
    p, sem = escape_probability((0,), contact.influence().transpose(), 0.5, Box(3), 2000, 0)
    assert 0 < p < 0.1 and sem > 0


def test_non_explosion_proxy(contact):
    # occupied sets at t = 1 stay far from a large window
    abar = contact.influence().transpose()
    sizes = [len(invade([(0,)], abar, 1.0, Box(30), s).occupied_at) for s in range(300)]
    assert max(sizes) < 40
