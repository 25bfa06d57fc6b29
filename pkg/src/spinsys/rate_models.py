"""Flip-rate families, influence coefficients and the constants C and A.

Every built-in family is translation invariant.  Its influence coefficients
``a(w, v) = sup_eta |c_v(eta) - c_v(eta^w)|`` are closed forms; the tests
cross-check them against :func:`brute_force_influence`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from spinsys.configurations import Configuration, LocalView, all_zero
from spinsys.errors import HypothesisViolation
from spinsys.lattice import Box, Site, add, l1_norm, max_norm, neg, sites_in, sub

DEFAULT_TOL = 1e-12


# --------------------------------------------------------------------------
# weights


@dataclass(frozen=True)
class WeightFamily:
    """Site weights lambda_v >= lambda_inf > 0.

    ``uniform`` is lambda_v = 1, ``polynomial`` is (1 + |v|)^p and
    ``exponential`` is exp(k |v|), with |.| the max-norm and p, k >= 0.
    All three are radial and nondecreasing with lambda_inf = 1 attained at
    the origin.
    """

    kind: str = "uniform"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "polynomial", "exponential"):
            raise ValueError(f"unknown weight family {self.kind!r}")
        if self.param < 0:
            raise ValueError("weight parameter must be nonnegative")

    @property
    def is_uniform(self) -> bool:
        return self.kind == "uniform" or self.param == 0

    @property
    def lambda_inf(self) -> float:
        return 1.0

    def lambda_of(self, v: Site) -> float:
        if self.is_uniform:
            return 1.0
        r = max_norm(v)
        if self.kind == "polynomial":
            return float((1 + r) ** self.param)
        return math.exp(self.param * r)

    def ratio(self, w: Site, v: Site) -> float:
        """lambda_w / lambda_v."""
        if self.is_uniform:
            return 1.0
        rw, rv = max_norm(w), max_norm(v)
        if self.kind == "polynomial":
            return ((1 + rw) / (1 + rv)) ** self.param
        return math.exp(self.param * (rw - rv))

    def describe(self) -> str:
        return self.kind if self.is_uniform else f"{self.kind}({self.param:g})"


UNIFORM = WeightFamily()


# --------------------------------------------------------------------------
# influence


@dataclass(frozen=True)
class Influence:
    """Translation-invariant influence coefficients, optionally truncated.

    ``kernel`` maps an offset ``w - v`` to a(w, v) for the finitely many
    offsets kept; ``tail`` bounds sum_w a(w, v) over the offsets left out and
    ``formula`` (when given) evaluates any offset exactly.  ``transposed``
    turns a into its transpose a_bar(w, v) = a(v, w).  ``region`` zeroes every
    coefficient with an endpoint outside the box, ``target_region`` those
    whose target ``v`` lies outside it.
    """

    dim: int
    kernel: Mapping[Site, float]
    tail: float = 0.0
    formula: Callable[[Site], float] | None = None
    transposed: bool = False
    region: Box | None = None
    target_region: Box | None = None

    def _raw(self, offset: Site) -> float:
        if offset in self.kernel:
            return self.kernel[offset]
        if self.formula is not None and any(offset):
            return self.formula(offset)
        return 0.0

    def a_of(self, w: Site, v: Site) -> float:
        if w == v:
            return 0.0
        if self.region is not None and (w not in self.region or v not in self.region):
            return 0.0
        if self.target_region is not None and v not in self.target_region:
            return 0.0
        off = sub(v, w) if self.transposed else sub(w, v)
        return self._raw(off)

    __call__ = a_of

    def sources(self, v: Site) -> list[tuple[Site, float]]:
        """Sites w with a(w, v) > 0 among the kept offsets, with the coefficient."""
        out = []
        for off, val in self.kernel.items():
            if val <= 0:
                continue
            w = sub(v, off) if self.transposed else add(v, off)
            if self.a_of(w, v) > 0:
                out.append((w, val))
        return out

    def targets(self, w: Site) -> list[tuple[Site, float]]:
        """Sites v with a(w, v) > 0 among the kept offsets, with the coefficient."""
        out = []
        for off, val in self.kernel.items():
            if val <= 0:
                continue
            v = add(w, off) if self.transposed else sub(w, off)
            if self.a_of(w, v) > 0:
                out.append((v, val))
        return out

    def transpose(self) -> "Influence":
        return _replace(self, transposed=not self.transposed)

    def restrict(self, box: Box) -> "Influence":
        """The truncation a_n: zero unless both endpoints lie in ``box``."""
        return _replace(self, region=box)

    def restrict_targets(self, box: Box) -> "Influence":
        return _replace(self, target_region=box)

    @property
    def is_zero(self) -> bool:
        return self.tail == 0 and all(val == 0 for val in self.kernel.values())

    def total(self) -> float:
        """sum_w a(w, v) for an unrestricted influence (same for every v)."""
        return math.fsum(self.kernel.values()) + self.tail

    def dominated_by(self, other: "Influence", sites: Iterable[Site]) -> bool:
        sites = list(sites)
        return all(
            self.a_of(x, y) <= other.a_of(x, y)
            for x in sites
            for y in sites
            if x != y
        )


def _replace(infl: Influence, **changes) -> Influence:
    import dataclasses

    return dataclasses.replace(infl, **changes)


def scaled(infl: Influence, factor: float) -> Influence:
    formula = None
    if infl.formula is not None:
        base = infl.formula
        formula = _Scaled(base, factor)
    return _replace(
        infl,
        kernel={k: factor * v for k, v in infl.kernel.items()},
        tail=factor * infl.tail,
        formula=formula,
    )


@dataclass(frozen=True)
class _Scaled:
    base: Callable
    factor: float

    def __call__(self, offset):
        return self.factor * self.base(offset)


def gamma(alpha: Influence, v: Site, chi: Configuration) -> float:
    """Rate at which vacant ``v`` is invaded from the ones of ``chi``.

    Exact when ``chi`` has finite support; otherwise the sum runs over the
    kept offsets of ``alpha`` (exact for finite-range kinds).
    """
    if chi.eval(v):
        return 0.0
    if chi.is_finite:
        return math.fsum(alpha.a_of(w, v) for w in chi.deviations if w != v)
    return math.fsum(a for w, a in alpha.sources(v) if chi.eval(w))


def g_total(alpha: Influence, weights: WeightFamily, chi: Configuration) -> float:
    """sum_v lambda_v * gamma(alpha, v, chi) for finite ``chi``."""
    if not chi.is_finite:
        raise ValueError("g_total needs a configuration with finite support")
    candidates = set()
    for w in chi.deviations:
        for v, _ in alpha.targets(w):
            if not chi.eval(v):
                candidates.add(v)
    return math.fsum(weights.lambda_of(v) * gamma(alpha, v, chi) for v in sorted(candidates))


# --------------------------------------------------------------------------
# rate families


@lru_cache(maxsize=None)
def _unit_offsets(dim: int) -> tuple[Site, ...]:
    out = []
    for axis in range(dim):
        for sign in (-1, 1):
            e = [0] * dim
            e[axis] = sign
            out.append(tuple(e))
    return tuple(out)


@lru_cache(maxsize=1 << 16)
def _neighbors(v: Site) -> tuple[Site, ...]:
    if len(v) == 1:
        x = v[0]
        return ((x - 1,), (x + 1,))
    return tuple(add(v, o) for o in _unit_offsets(len(v)))


class RateFamily:
    """Base class for flip-rate families c_v(eta).

    Subclasses implement :meth:`rate`, :meth:`sup_rate` and
    :meth:`analytic_influence`.  ``eta`` passed to :meth:`rate` is anything
    indexable by site, such as a :class:`Configuration`.
    """

    name = "abstract"
    dim: int
    declared_influence: tuple | None
    range_radius: int | None = 0

    def rate(self, v: Site, eta, tol: float | None = None) -> float:
        raise NotImplementedError

    def sup_rate(self) -> float:
        raise NotImplementedError

    def analytic_influence(self) -> Influence:
        raise NotImplementedError

    def influence(self) -> Influence:
        """Declared coefficients when the config overrides them, else the closed form."""
        if self.declared_influence is not None:
            return Influence(self.dim, dict(self.declared_influence))
        return self.analytic_influence()

    def dependence_radius(self, tol: float | None = None) -> int:
        """Max-norm radius around v outside which c_v is ignored at tolerance ``tol``."""
        return self.range_radius

    def params(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        inner = ", ".join(f"{k}={v:g}" if isinstance(v, float) else f"{k}={v}"
                          for k, v in self.params().items())
        return f"{self.name}({inner})"


def _declared(decl):
    if decl is None:
        return None
    if isinstance(decl, Mapping):
        decl = decl.items()
    return tuple(sorted((tuple(k), float(v)) for k, v in decl))


@dataclass(frozen=True)
class Contact(RateFamily):
    """Contact process: recovery at rate 1, infection at lambda_c per occupied neighbour."""

    lambda_c: float
    dim: int = 1
    declared_influence: tuple | None = None
    name = "contact"
    range_radius = 1

    def __post_init__(self):
        if self.lambda_c <= 0:
            raise ValueError("lambda_c must be positive")
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    def rate(self, v, eta, tol=None):
        if eta[v]:
            return 1.0
        n = 0
        for w in _neighbors(v):
            n += eta[w]
        return self.lambda_c * n

    def sup_rate(self):
        return max(1.0, 2 * self.dim * self.lambda_c)

    def analytic_influence(self):
        return Influence(self.dim, {o: self.lambda_c for o in _unit_offsets(self.dim)})

    def params(self):
        return {"lambda_c": self.lambda_c, "dim": self.dim}


@dataclass(frozen=True)
class Voter(RateFamily):
    """Nearest-neighbour voter model: adopt a uniformly chosen neighbour's opinion at rate 1."""

    dim: int = 1
    declared_influence: tuple | None = None
    name = "voter"
    range_radius = 1

    def __post_init__(self):
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    def rate(self, v, eta, tol=None):
        own = eta[v]
        n = 0
        for w in _neighbors(v):
            n += eta[w] != own
        return n / (2 * self.dim)

    def sup_rate(self):
        return 1.0

    def analytic_influence(self):
        p = 1 / (2 * self.dim)
        return Influence(self.dim, {o: p for o in _unit_offsets(self.dim)})

    def params(self):
        return {"dim": self.dim}


def _heat_bath(beta: float, s: int) -> float:
    x = 2.0 * beta * s
    if x > 700:
        return 0.0
    return 1.0 / (1.0 + math.exp(x))


@dataclass(frozen=True)
class Glauber(RateFamily):
    """Heat-bath Glauber dynamics of the nearest-neighbour Ising model.

    With spins sigma = 2 eta - 1 and local field h_v = sum over neighbours,
    c_v = 1 / (1 + exp(2 beta sigma_v h_v)).
    """

    beta: float
    dim: int = 1
    declared_influence: tuple | None = None
    name = "glauber"
    range_radius = 1

    def __post_init__(self):
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    def _levels(self):
        return range(-2 * self.dim, 2 * self.dim + 1, 2)

    def rate(self, v, eta, tol=None):
        h = 0
        for w in _neighbors(v):
            h += 2 * eta[w] - 1
        return _heat_bath(self.beta, (2 * eta[v] - 1) * h)

    def sup_rate(self):
        return max(_heat_bath(self.beta, s) for s in self._levels())

    def analytic_influence(self):
        # flipping one neighbour moves sigma_v h_v to an adjacent level
        lv = list(self._levels())
        a = max(abs(_heat_bath(self.beta, s) - _heat_bath(self.beta, s + 2)) for s in lv[:-1])
        return Influence(self.dim, {o: a for o in _unit_offsets(self.dim)})

    def params(self):
        return {"beta": self.beta, "dim": self.dim}


@dataclass(frozen=True)
class Independent(RateFamily):
    """Independent flips: 0 -> 1 at ``birth``, 1 -> 0 at ``death``."""

    birth: float
    death: float
    dim: int = 1
    declared_influence: tuple | None = None
    name = "independent"
    range_radius = 0

    def __post_init__(self):
        if self.birth <= 0 or self.death <= 0:
            raise ValueError("birth and death rates must be positive")
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    def rate(self, v, eta, tol=None):
        return self.death if eta[v] else self.birth

    def sup_rate(self):
        return max(self.birth, self.death)

    def analytic_influence(self):
        return Influence(self.dim, {})

    def params(self):
        return {"birth": self.birth, "death": self.death, "dim": self.dim}


@dataclass(frozen=True)
class _GeometricKernel:
    theta: float
    scale: float

    def __call__(self, offset):
        return self.scale * self.theta ** l1_norm(offset)


def _geometric_sum_1d(theta: float, radius: int) -> float:
    """sum_{|k| <= radius} theta^|k|."""
    return 1.0 + 2.0 * theta * (1.0 - theta ** radius) / (1.0 - theta)


@dataclass(frozen=True)
class LongRangeGeometric(RateFamily):
    """Contact-like spread with infinite range.

    A vacant site is filled at rate ``scale * sum_w theta^|w - v|_1 eta(w)``;
    an occupied one empties at rate 1.  Rates are evaluated on the box of
    radius R(tol) around v, the smallest radius whose left-out kernel mass is
    at most ``tol``.
    """

    theta: float
    scale: float = 1.0
    dim: int = 1
    declared_influence: tuple | None = None
    default_tol: float = 1e-9
    name = "long_range_geometric"
    range_radius = None

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    def kernel_mass(self) -> float:
        """sum_{w != v} scale * theta^|w - v|_1."""
        full = ((1 + self.theta) / (1 - self.theta)) ** self.dim
        return self.scale * (full - 1.0)

    def tail_beyond(self, radius: int) -> float:
        """Kernel mass carried by offsets outside Box(radius)."""
        full = ((1 + self.theta) / (1 - self.theta)) ** self.dim
        inside = _geometric_sum_1d(self.theta, radius) ** self.dim
        return self.scale * max(full - inside, 0.0)

    def truncation_radius(self, tol: float) -> int:
        if tol <= 0:
            raise ValueError("long-range rates need a positive tolerance")
        r = 0
        while self.tail_beyond(r) > tol:
            r += 1
        return r

    def dependence_radius(self, tol=None):
        return self.truncation_radius(self.default_tol if tol is None else tol)

    @lru_cache(maxsize=64)
    def _offsets(self, radius):
        box = Box(radius, self.dim)
        k = _GeometricKernel(self.theta, self.scale)
        return tuple((o, k(o)) for o in sites_in(box) if any(o))

    def rate(self, v, eta, tol=None):
        if eta[v]:
            return 1.0
        if isinstance(eta, Configuration) and eta.is_finite and not tol:
            k = _GeometricKernel(self.theta, self.scale)
            return math.fsum(k(sub(w, v)) for w in eta.deviations if w != v)
        r = self.truncation_radius(self.default_tol if not tol else tol)
        total = 0.0
        for o, a in self._offsets(r):
            if eta[add(v, o)]:
                total += a
        return total

    def sup_rate(self):
        return max(1.0, self.kernel_mass())

    def analytic_influence(self, tol=None):
        r = self.truncation_radius(self.default_tol if tol is None else tol)
        return Influence(
            self.dim,
            dict(self._offsets(r)),
            tail=self.tail_beyond(r),
            formula=_GeometricKernel(self.theta, self.scale),
        )

    def params(self):
        return {"theta": self.theta, "scale": self.scale, "dim": self.dim}


@dataclass(frozen=True)
class Tabulated(RateFamily):
    """Finite-range rates read from a table over the local pattern.

    ``table[k]`` is the rate when the pattern on Box(radius) around v, read in
    lexicographic site order as a bit string (first site most significant),
    spells the integer k.
    """

    radius: int
    table: tuple
    dim: int = 1
    declared_influence: tuple | None = None
    name = "tabulated"

    def __post_init__(self):
        table = self.table
        size = (2 * self.radius + 1) ** self.dim
        if isinstance(table, Mapping):
            if any(len(k) != size for k in table):
                raise ValueError(f"table patterns must have {size} bits")
            missing = 2 ** size - len(table)
            if missing:
                raise ValueError(f"table is missing {missing} patterns")
            table = tuple(float(table[format(i, f"0{size}b")]) for i in range(2 ** size))
        table = tuple(float(x) for x in table)
        if len(table) != 2 ** size:
            raise ValueError(f"table needs {2 ** size} entries, got {len(table)}")
        if any(x < 0 or not math.isfinite(x) for x in table):
            raise ValueError("table rates must be finite and nonnegative")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "declared_influence", _declared(self.declared_influence))

    @property
    def range_radius(self):
        return self.radius

    def offsets(self):
        return sites_in(Box(self.radius, self.dim))

    def rate(self, v, eta, tol=None):
        k = 0
        for o in self.offsets():
            k = (k << 1) | eta[add(v, o)]
        return self.table[k]

    def sup_rate(self):
        return max(self.table)

    def analytic_influence(self):
        origin = (0,) * self.dim
        found = brute_force_influence(self, self.radius, origin)
        return Influence(self.dim, {o: a for o, a in found.items() if a > 0})

    def params(self):
        return {"radius": self.radius, "dim": self.dim}


def rate(fam: RateFamily, v: Site, cfg: Configuration, tol: float = 0.0) -> float:
    """Flip rate of ``fam`` at ``v`` in ``cfg``; ``tol`` only matters for long-range kinds."""
    return fam.rate(tuple(v), cfg, tol or None)


def influence(fam: RateFamily) -> Influence:
    return fam.influence()


# --------------------------------------------------------------------------
# hypothesis constants


def constant_C(fam: RateFamily) -> float:
    """sup over v and eta of c_v(eta)."""
    c = fam.sup_rate()
    if not math.isfinite(c):
        raise HypothesisViolation(f"flip rates of {fam.describe()} are unbounded")
    return float(c)


def weighted_row_sum(infl: Influence, weights: WeightFamily, v: Site) -> float:
    """sum_{w != v} (lambda_w / lambda_v) a(w, v) over the kept offsets plus tail."""
    terms = [weights.ratio(w, v) * a for w, a in infl.sources(v)]
    return math.fsum(terms) + infl.tail


def constant_A(fam: RateFamily, weights: WeightFamily = UNIFORM) -> float:
    """sup_v sum_{w != v} (lambda_w / lambda_v) a(w, v).

    Built-in weights are radial and nondecreasing while built-in influences
    are translation invariant, so lambda_w / lambda_v <= lambda_{w-v} /
    lambda_0 and the supremum is attained at the origin.
    """
    infl = fam.influence()
    origin = (0,) * fam.dim
    if weights.is_uniform:
        value = infl.total()
    elif isinstance(fam, LongRangeGeometric) and fam.declared_influence is None:
        value = _long_range_weighted_sum(fam, weights)
    else:
        value = weighted_row_sum(infl, weights, origin)
    if not math.isfinite(value):
        raise HypothesisViolation(f"weighted influence sum diverges for {fam.describe()}")
    return float(value)


def _long_range_weighted_sum(fam: LongRangeGeometric, weights: WeightFamily) -> float:
    # along an axis the terms behave like theta^k * lambda_k
    if weights.kind == "exponential" and fam.theta * math.exp(weights.param) >= 1:
        raise HypothesisViolation(
            f"sum of lambda_w a(w, 0) diverges: theta * exp(k) = "
            f"{fam.theta * math.exp(weights.param):.4g} >= 1"
        )
    origin = (0,) * fam.dim
    k = _GeometricKernel(fam.theta, fam.scale)
    total, r = 0.0, 0
    while True:
        r += 1
        shell = [o for o in sites_in(Box(r, fam.dim)) if max_norm(o) == r]
        contrib = math.fsum(weights.ratio(o, origin) * k(o) for o in shell)
        total += contrib
        if contrib < 1e-15 * max(total, 1e-300) or r > 100_000:
            break
    if r > 100_000:
        raise HypothesisViolation("weighted influence sum does not converge")
    return total


# --------------------------------------------------------------------------
# brute-force checks


def _patterns(m: int) -> np.ndarray:
    """All 2^m bit patterns as rows, first column most significant."""
    idx = np.arange(2 ** m, dtype=np.int64)
    return ((idx[:, None] >> np.arange(m - 1, -1, -1)) & 1).astype(np.int8)


def _window_rates(fam, window_sites, v, exterior, tol):
    base = {}
    rates = np.empty(2 ** len(window_sites))
    for i, bits in enumerate(_patterns(len(window_sites))):
        values = dict(zip(window_sites, (int(b) for b in bits)))
        view = LocalView(exterior, values)
        rates[i] = fam.rate(v, view, tol)
    return rates


def brute_force_influence(
    fam: RateFamily, radius: int, v: Site | None = None, exterior: Configuration | None = None,
    tol: float | None = None,
) -> dict[Site, float]:
    """max |c_v(eta) - c_v(eta^w)| over all patterns on Box(radius) around ``v``.

    Returns one entry per offset ``w - v`` of the window (the centre excluded).
    """
    v = (0,) * fam.dim if v is None else tuple(v)
    exterior = all_zero(fam.dim) if exterior is None else exterior
    offsets = sites_in(Box(radius, fam.dim))
    window = [add(v, o) for o in offsets]
    if len(window) > 20:
        raise ValueError("window too large to enumerate")
    rates = _window_rates(fam, window, v, exterior, tol)
    m = len(window)
    idx = np.arange(2 ** m)
    out = {}
    for k, o in enumerate(offsets):
        if not any(o):
            continue
        bit = 1 << (m - 1 - k)
        out[o] = float(np.max(np.abs(rates - rates[idx ^ bit])))
    return out


@dataclass
class LipschitzReport:
    passed: bool
    worst_slack: float
    pairs_checked: int
    witness: tuple | None = None

    def __str__(self):
        status = "pass" if self.passed else "FAIL"
        text = f"{status}: worst slack {self.worst_slack:.3g} over {self.pairs_checked} pairs"
        if self.witness:
            eta1, eta2, diff, bound = self.witness
            text += f"; witness {eta1} vs {eta2}: |dc|={diff:.6g} > {bound:.6g}"
        return text


def check_lipschitz(
    fam: RateFamily,
    window: Box,
    v: Site | None = None,
    exterior: Configuration | None = None,
    tol: float | None = None,
) -> LipschitzReport:
    """Check |c_v(eta1) - c_v(eta2)| <= sum over disagreeing sites of a(w, v).

    The bound only applies to pairs that agree at ``v`` itself, since
    a(v, v) = 0.  All such pairs of patterns on ``window`` (centred at ``v``) are compared with
    the exterior frozen to ``exterior``.  Long-range kinds get twice their
    rate-evaluation tolerance as slack.
    """
    v = (0,) * fam.dim if v is None else tuple(v)
    exterior = all_zero(fam.dim) if exterior is None else exterior
    sites = [add(v, o) for o in sites_in(window)]
    m = len(sites)
    if m > 14:
        raise ValueError(f"window has {m} sites; at most 14 can be enumerated pairwise")
    infl = fam.influence()
    eval_tol = None
    allowance = 0.0
    if fam.range_radius is None:
        eval_tol = fam.default_tol if tol is None else tol
        allowance = 2 * eval_tol
    rates = _window_rates(fam, sites, v, exterior, eval_tol)
    a = np.array([infl.a_of(w, v) for w in sites])
    n = 2 ** m
    # bound[mask] = sum of a over the sites whose bit is set in mask
    bound = _patterns(m) @ a
    idx = np.arange(n)
    centre_bit = 1 << (m - 1 - sites.index(v))
    worst = math.inf
    witness = None
    checked = 0
    for mask in range(1, n):
        if mask & centre_bit:
            continue
        checked += n
        other = idx ^ mask
        slack = bound[mask] + allowance - np.abs(rates - rates[other])
        i = int(np.argmin(slack))
        if slack[i] < worst:
            worst = float(slack[i])
            if worst < -1e-12:
                witness = (i, int(other[i]), float(abs(rates[i] - rates[other[i]])),
                           float(bound[mask] + allowance))
    passed = worst >= -1e-12
    wit = None
    if witness is not None and not passed:
        i, j, diff, bnd = witness
        bits = _patterns(m)
        eta1 = exterior.set_values(dict(zip(sites, (int(b) for b in bits[i]))))
        eta2 = exterior.set_values(dict(zip(sites, (int(b) for b in bits[j]))))
        wit = (eta1, eta2, diff, bnd)
    return LipschitzReport(passed, worst, checked, wit)


def build_model(kind: str, dim: int = 1, **params) -> RateFamily:
    """Construct a built-in family from its config name and parameters."""
    kinds = {
        "contact": Contact,
        "voter": Voter,
        "glauber": Glauber,
        "independent": Independent,
        "long_range_geometric": LongRangeGeometric,
        "tabulated": Tabulated,
    }
    if kind not in kinds:
        raise ValueError(f"unknown model {kind!r}; expected one of {sorted(kinds)}")
    return kinds[kind](dim=dim, **params)
