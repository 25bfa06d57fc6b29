"""Configurations of {0,1}^V as a background plus finitely many deviations.

The background is all zeros, all ones, or a periodic pattern; ``deviations``
lists the sites where the configuration disagrees with it.  Every dynamics in
the package only ever touches finitely many sites, so this class is closed
under all of them.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from spinsys.lattice import Site, max_norm

ZERO = "zero"
ONE = "one"
PERIOD = "period"


def _reduce_axis(pattern, shape, axis):
    """Shrink the period along ``axis`` to the smallest one that still tiles."""
    p = shape[axis]
    for q in range(1, p + 1):
        if p % q:
            continue
        ok = all(
            pattern[idx] == pattern[_wrap(idx, shape, axis, q)] for idx in pattern
        )
        if ok:
            if q == p:
                return pattern, shape
            new_shape = shape[:axis] + (q,) + shape[axis + 1:]
            new = {idx: val for idx, val in pattern.items() if idx[axis] < q}
            return new, new_shape
    return pattern, shape


def _wrap(idx, shape, axis, q):
    return idx[:axis] + (idx[axis] % q,) + idx[axis + 1:]


@dataclass(frozen=True)
class Configuration:
    """An element of {0,1}^(Z^d).

    Build instances with :func:`all_zero`, :func:`all_one`, :func:`periodic`
    or :func:`indicator`; the constructor canonicalises its arguments so that
    equal configurations compare equal.
    """

    dim: int = 1
    background: str = ZERO
    period: tuple[int, ...] = ()
    pattern: tuple[int, ...] = ()
    deviations: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.background not in (ZERO, ONE, PERIOD):
            raise ValueError(f"unknown background {self.background!r}")
        devs = frozenset(tuple(int(c) for c in v) for v in self.deviations)
        for v in devs:
            if len(v) != self.dim:
                raise ValueError(f"site {v} does not have dimension {self.dim}")
        object.__setattr__(self, "deviations", devs)
        if self.background == PERIOD:
            self._canonicalize_period()
        else:
            object.__setattr__(self, "period", ())
            object.__setattr__(self, "pattern", ())

    def _canonicalize_period(self):
        shape = tuple(int(p) for p in self.period)
        if len(shape) != self.dim or any(p < 1 for p in shape):
            raise ValueError(f"period {shape} invalid for dimension {self.dim}")
        flat = tuple(int(b) for b in self.pattern)
        if len(flat) != math.prod(shape) or any(b not in (0, 1) for b in flat):
            raise ValueError("pattern must hold one bit per cell of the period box")
        cells = _cells(shape)
        pattern = dict(zip(cells, flat))
        for axis in range(self.dim):
            pattern, shape = _reduce_axis(pattern, shape, axis)
        values = tuple(pattern[c] for c in _cells(shape))
        if all(b == 0 for b in values) or all(b == 1 for b in values):
            object.__setattr__(self, "background", ONE if values[0] else ZERO)
            shape, values = (), ()
        object.__setattr__(self, "period", shape)
        object.__setattr__(self, "pattern", values)

    def background_value(self, v: Site) -> int:
        if self.background == ZERO:
            return 0
        if self.background == ONE:
            return 1
        idx = 0
        for c, p in zip(v, self.period):
            idx = idx * p + c % p
        return self.pattern[idx]

    def eval(self, v: Site) -> int:
        bit = self.background_value(v)
        return bit ^ 1 if v in self.deviations else bit

    __getitem__ = eval

    def flip(self, v: Site) -> "Configuration":
        v = tuple(v)
        return self._with_deviations(self.deviations ^ {v})

    def set_values(self, values: Mapping[Site, int]) -> "Configuration":
        """Return a copy with the given sites set to the given bits."""
        devs = set(self.deviations)
        for v, bit in values.items():
            v = tuple(v)
            if bit != self.background_value(v):
                devs.add(v)
            else:
                devs.discard(v)
        return self._with_deviations(frozenset(devs))

    def _with_deviations(self, devs) -> "Configuration":
        return Configuration(self.dim, self.background, self.period, self.pattern, devs)

    def restrict(self, sites: Iterable[Site]) -> tuple[int, ...]:
        return tuple(self.eval(v) for v in sites)

    def agree_on(self, other: "Configuration", sites: Iterable[Site]) -> bool:
        return all(self.eval(v) == other.eval(v) for v in sites)

    @property
    def is_finite(self) -> bool:
        """True when the set of ones is finite."""
        return self.background == ZERO

    def support(self) -> list[Site]:
        """Sorted list of sites holding a one; only for finite configurations."""
        if not self.is_finite:
            raise ValueError("configuration has infinitely many ones")
        return sorted(self.deviations)

    def extent(self) -> int:
        """Max-norm radius of the smallest box containing every deviation."""
        return max((max_norm(v) for v in self.deviations), default=0)

    def to_text(self) -> str:
        if self.background == PERIOD:
            bg = "period:" + _pattern_text(self.pattern, self.period)
        else:
            bg = self.background
        return f"bg={bg}; dev={_sites_text(sorted(self.deviations), self.dim)}"

    def __str__(self) -> str:
        return self.to_text()


def _cells(shape):
    import itertools

    return list(itertools.product(*(range(p) for p in shape)))


def all_zero(dim: int = 1) -> Configuration:
    return Configuration(dim, ZERO)


def all_one(dim: int = 1) -> Configuration:
    return Configuration(dim, ONE)


def periodic(pattern, dim: int = 1) -> Configuration:
    """Periodic background from a bit string (d=1) or a list of row strings (d=2)."""
    if isinstance(pattern, str):
        rows = pattern.split("/")
    else:
        rows = list(pattern)
    if dim == 1:
        if len(rows) != 1:
            raise ValueError("a one-dimensional pattern is a single bit string")
        bits = [int(b) for b in rows[0]]
        return Configuration(1, PERIOD, (len(bits),), tuple(bits))
    if dim == 2:
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("pattern rows must have equal length")
        bits = [int(b) for r in rows for b in r]
        return Configuration(2, PERIOD, (len(rows), width), tuple(bits))
    raise ValueError("periodic text patterns are supported for d <= 2")


def indicator(sites: Iterable[Site], dim: int | None = None) -> Configuration:
    """The configuration equal to one exactly on ``sites``."""
    sites = [tuple(v) for v in sites]
    if dim is None:
        dim = len(sites[0]) if sites else 1
    return Configuration(dim, ZERO, deviations=frozenset(sites))


def q_weight(cfg: Configuration, weights=None) -> float:
    """Weighted count sum_v lambda_v * cfg(v); ``math.inf`` flags infinite support."""
    if not cfg.is_finite:
        return math.inf
    if weights is None:
        return float(len(cfg.deviations))
    return math.fsum(weights.lambda_of(v) for v in cfg.deviations)


def _pattern_text(pattern, period):
    bits = "".join(str(b) for b in pattern)
    if len(period) == 1:
        return bits
    width = period[1]
    return "/".join(bits[i:i + width] for i in range(0, len(bits), width))


def _sites_text(sites, dim):
    if dim == 1:
        return ",".join(str(v[0]) for v in sites)
    return ",".join("(" + ",".join(str(c) for c in v) + ")" for v in sites)


_TUPLE = re.compile(r"\(([^()]*)\)")


def parse_sites(text: str, dim: int = 1) -> list[Site]:
    """Parse ``0,3,-2`` (d=1) or ``(0,1),(2,-1)`` (any d) into sites."""
    text = text.strip().strip("[]").strip()
    if not text:
        return []
    if "(" in text:
        out = []
        for m in _TUPLE.finditer(text):
            coords = tuple(int(c) for c in m.group(1).split(","))
            if len(coords) != dim:
                raise ValueError(f"site {coords} does not have dimension {dim}")
            out.append(coords)
        return out
    if dim != 1:
        raise ValueError("sites in dimension > 1 must be written as tuples")
    return [(int(tok),) for tok in text.split(",") if tok.strip()]


def parse_configuration(text: str, dim: int = 1) -> Configuration:
    """Inverse of :meth:`Configuration.to_text`."""
    fields = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        key, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected key=value in {part!r}")
        fields[key.strip()] = value.strip()
    if set(fields) - {"bg", "dev"}:
        raise ValueError(f"unknown configuration keys {sorted(set(fields) - {'bg', 'dev'})}")
    bg = fields.get("bg", ZERO)
    if bg == ZERO:
        base = all_zero(dim)
    elif bg == ONE:
        base = all_one(dim)
    elif bg.startswith("period:"):
        base = periodic(bg[len("period:"):], dim)
    else:
        raise ValueError(f"unknown background {bg!r}")
    devs = parse_sites(fields.get("dev", ""), dim)
    cfg = base
    for v in devs:
        if v in cfg.deviations:
            raise ValueError(f"site {v} listed twice")
        cfg = cfg.flip(v)
    return cfg


class LocalView(dict):
    """Mutable site lookup used by the simulators.

    Explicitly stored sites shadow ``base``; any other site falls back to the
    base configuration.
    """

    def __init__(self, base: Configuration, values=None):
        super().__init__(values or {})
        self.base = base

    def __missing__(self, v):
        return self.base.eval(v)

    def freeze(self) -> Configuration:
        return self.base.set_values(self)
