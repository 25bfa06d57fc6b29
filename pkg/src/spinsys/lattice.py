"""Sites of Z^d and the centred max-norm boxes exhausting it."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

Site = tuple[int, ...]


def site(*coords: int) -> Site:
    return tuple(int(c) for c in coords)


def max_norm(v: Site) -> int:
    return max((abs(c) for c in v), default=0)


def l1_norm(v: Site) -> int:
    return sum(abs(c) for c in v)


def add(v: Site, w: Site) -> Site:
    return tuple(a + b for a, b in zip(v, w))


def sub(v: Site, w: Site) -> Site:
    return tuple(a - b for a, b in zip(v, w))


def neg(v: Site) -> Site:
    return tuple(-a for a in v)


@dataclass(frozen=True, order=True)
class Box:
    """Sites of Z^d with max-norm at most ``radius``."""

    radius: int
    dim: int = 1

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError(f"box radius must be nonnegative, got {self.radius}")
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")

    def __contains__(self, v) -> bool:
        return len(v) == self.dim and max_norm(v) <= self.radius

    def __len__(self) -> int:
        return (2 * self.radius + 1) ** self.dim

    def __iter__(self):
        return iter(sites_in(self))

    def on_boundary(self, v: Site) -> bool:
        return max_norm(v) == self.radius

    def grow(self, k: int) -> "Box":
        return Box(self.radius + k, self.dim)


@lru_cache(maxsize=256)
def _sites(radius: int, dim: int) -> tuple[Site, ...]:
    span = range(-radius, radius + 1)
    return tuple(itertools.product(span, repeat=dim))


def sites_in(box: Box) -> list[Site]:
    """Sites of ``box`` in lexicographic order."""
    return list(_sites(box.radius, box.dim))


def complement_in(box_outer: Box, box_inner: Box) -> list[Site]:
    """Sites of ``box_outer`` that are not in ``box_inner``, lexicographic."""
    if box_outer.dim != box_inner.dim:
        raise ValueError("boxes have different dimensions")
    if box_inner.radius > box_outer.radius:
        raise ValueError(
            f"inner box radius {box_inner.radius} exceeds outer radius {box_outer.radius}"
        )
    r = box_inner.radius
    return [v for v in _sites(box_outer.radius, box_outer.dim) if max_norm(v) > r]


def smallest_box_containing(v: Site) -> Box:
    return Box(max_norm(v), len(v))


def index_map(sites) -> dict[Site, int]:
    return {v: i for i, v in enumerate(sites)}
