import pytest

from spinsys.lattice import Box, complement_in, index_map, max_norm, sites_in


def test_box_sites():
    assert sites_in(Box(0)) == [(0,)]
    assert sites_in(Box(1)) == [(-1,), (0,), (1,)]
    assert len(sites_in(Box(1, 2))) == 9


def test_sites_are_lexicographic():
    sites = sites_in(Box(2, 2))
    assert sites == sorted(sites)
    assert len(set(sites)) == 25


def test_complement():
    assert complement_in(Box(2), Box(1)) == [(-2,), (2,)]
    assert complement_in(Box(1), Box(1)) == []
    assert len(complement_in(Box(2, 2), Box(1, 2))) == 16


def test_complement_rejects_larger_inner():
    with pytest.raises(ValueError):
        complement_in(Box(1), Box(2))


def test_membership_and_boundary():
    b = Box(2, 2)
    assert (2, -2) in b and (3, 0) not in b
    assert b.on_boundary((2, 0)) and not b.on_boundary((1, 1))
    assert b.grow(1) == Box(3, 2)
    assert len(b) == 25


def test_index_map_matches_order():
    b = Box(1, 2)
    idx = index_map(b)
    assert [idx[v] for v in sites_in(b)] == list(range(9))
    assert max_norm((3, -5)) == 5
