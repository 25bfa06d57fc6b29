"""Local functions, the pregenerator and checks of the semigroup it generates.

Local functions are tabulated over their support, so the maximal
single-site influence Delta_f and the pregenerator
Omega f(eta) = sum_v c_v(eta) [f(eta^v) - f(eta)] are exact finite sums.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from spinsys.configurations import Configuration, LocalView, all_zero
from spinsys.finite_dynamics import (
    FiniteGenerator,
    FiniteSystemSpec,
    drive,
    poisson_events,
    prefilled_view,
)
from spinsys.graphical_engine import build_timeline, run_two_config
from spinsys.lattice import Box, Site, add, max_norm, sites_in
from spinsys.rate_models import UNIFORM, RateFamily, WeightFamily, constant_A, constant_C


@dataclass(frozen=True)
class LocalFunction:
    """f(eta) = table[k], k the bits of eta on ``support`` read as an integer.

    The first support site is the most significant bit.
    """

    support: tuple
    table: tuple
    dim: int = 1

    def __post_init__(self):
        support = tuple(tuple(v) for v in self.support)
        if len(set(support)) != len(support):
            raise ValueError("support sites must be distinct")
        table = tuple(float(x) for x in self.table)
        if len(table) != 2 ** len(support):
            raise ValueError(f"table needs {2 ** len(support)} values, got {len(table)}")
        if support:
            object.__setattr__(self, "dim", len(support[0]))
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "table", table)

    def __call__(self, eta) -> float:
        k = 0
        for v in self.support:
            k = (k << 1) | eta[v]
        return self.table[k]

    @classmethod
    def from_mapping(cls, support, values: Mapping[str, float], default: float | None = None):
        """Build from ``{"01": 2.0, ...}``; bit strings follow the support order."""
        support = [tuple(v) for v in support]
        m = len(support)
        table = []
        for k in range(2 ** m):
            key = format(k, f"0{m}b") if m else ""
            if key in values:
                table.append(values[key])
            elif default is not None:
                table.append(default)
            else:
                raise ValueError(f"no value for pattern {key!r}")
        return cls(tuple(support), tuple(table), len(support[0]) if support else 1)

    @classmethod
    def from_callable(cls, support, fn: Callable[[tuple], float], dim: int | None = None):
        """Tabulate ``fn`` applied to each bit tuple on ``support``."""
        support = [tuple(v) for v in support]
        m = len(support)
        table = [fn(bits) for bits in itertools.product((0, 1), repeat=m)]
        return cls(tuple(support), tuple(table), dim or (len(support[0]) if support else 1))

    @classmethod
    def coordinate(cls, v: Site):
        return cls((tuple(v),), (0.0, 1.0))

    @classmethod
    def product(cls, sites):
        return cls.from_callable(sites, lambda bits: float(all(bits)))

    @classmethod
    def constant(cls, value: float, dim: int = 1):
        return cls((), (value,), dim)

    def delta(self, v: Site) -> float:
        """max over eta of |f(eta) - f(eta^v)|; zero off the support."""
        v = tuple(v)
        if v not in self.support:
            return 0.0
        bit = 1 << (len(self.support) - 1 - self.support.index(v))
        return max(abs(self.table[k] - self.table[k ^ bit]) for k in range(len(self.table)))

    def triple_norm(self, weights: WeightFamily = UNIFORM) -> float:
        """sum_v lambda_v Delta_f(v)."""
        return math.fsum(weights.lambda_of(v) * self.delta(v) for v in self.support)

    def sup_norm(self) -> float:
        return max(abs(x) for x in self.table)

    def to_text(self) -> str:
        m = len(self.support)
        sites = ",".join(
            str(v[0]) if self.dim == 1 else "(" + ",".join(map(str, v)) + ")" for v in self.support
        )
        pairs = ", ".join(f"{format(k, f'0{m}b') if m else '-'}: {x:g}" for k, x in enumerate(self.table))
        return f"support = [{sites}]; table = {{{pairs}}}"


# --------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class ProductBernoulli:
    """Independent coordinates with P(eta(v) = 1) = p (or ``p_of[v]`` when given)."""

    p: float
    p_of: tuple = ()

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        object.__setattr__(self, "p_of", tuple(sorted((tuple(k), float(x)) for k, x in dict(self.p_of).items())))

    def prob(self, v: Site) -> float:
        return dict(self.p_of).get(tuple(v), self.p)


@dataclass(frozen=True)
class PointMass:
    cfg: Configuration


@dataclass(frozen=True)
class Empirical:
    samples: tuple


MeasureSpec = ProductBernoulli | PointMass | Empirical


# --------------------------------------------------------------------------
# pregenerator


def omega(f: LocalFunction, eta, model: RateFamily, tol: float | None = None) -> float:
    """sum over v in the support of c_v(eta) [f(eta^v) - f(eta)]."""
    return _omega_over(f, eta, model, f.support, tol)


def omega_n(f: LocalFunction, eta, model: RateFamily, n: int, tol: float | None = None) -> float:
    """Same sum restricted to v in Box(n)."""
    return _omega_over(f, eta, model, [v for v in f.support if max_norm(v) <= n], tol)


def _omega_over(f, eta, model, sites, tol):
    view = eta if isinstance(eta, LocalView) else LocalView(eta)
    base = f(view)
    terms = []
    for v in sites:
        c = model.rate(v, view, tol)
        if c == 0:
            continue
        old = view[v]
        view[v] = old ^ 1
        flipped = f(view)
        view[v] = old
        terms.append(c * (flipped - base))
    return math.fsum(terms)


# --------------------------------------------------------------------------
# Monte Carlo semigroup


@dataclass
class MCEstimate:
    estimate: float
    sem: float
    replicas: int
    method: str


def _replica_values(f, eta, t, box, model, replicas, seed, method, weights):
    sites = sites_in(box)
    template = prefilled_view(eta, sites, model)
    out = np.empty(replicas)
    if method == "thinning":
        intens = np.full(len(sites), constant_C(model))
    for i in range(replicas):
        if method == "thinning":
            rng = np.random.default_rng(seed + i)
            times, idx, marks = poisson_events(rng, intens, t)
        else:
            tl = build_timeline(box, t, model, weights, seed + i)
            times, idx, marks = tl.times, tl.site_idx, tl.marks
        view = LocalView(eta, template)
        drive(eta, sites, model, times, idx, marks, view=view)
        out[i] = f(view)
    return out


def semigroup_mc(
    f: LocalFunction,
    eta: Configuration,
    t: float,
    box_n: int,
    model: RateFamily,
    replicas: int,
    seed: int,
    method: str = "thinning",
    weights: WeightFamily = UNIFORM,
) -> MCEstimate:
    """Monte Carlo estimate of E_{eta, Box(n)}[f(xi_t)] with its standard error.

    ``method`` selects the sampler: ``thinning`` (rate-C clocks) or
    ``graphical`` (the shared-timeline construction).  Both have the same law.
    """
    if method not in ("thinning", "graphical"):
        raise ValueError(f"unknown method {method!r}")
    box = Box(box_n, model.dim)
    if any(v not in box for v in f.support):
        raise ValueError(f"support of f is not inside Box({box_n})")
    if replicas < 1:
        raise ValueError("need at least one replica")
    vals = _replica_values(f, eta, t, box, model, replicas, seed, method, weights)
    est = float(np.sum(vals) / replicas)
    sem = float(np.std(vals, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return MCEstimate(est, sem, replicas, method)


@dataclass
class GeneratorRow:
    t: float
    replicas: int
    estimate: float
    sem: float
    quotient: float
    omega: float
    residual: float
    bound: float = math.nan

    @property
    def within_bound(self) -> bool:
        return self.residual <= self.bound


@dataclass
class GeneratorReport:
    rows: list
    K: float
    decreasing: bool
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.decreasing and all(r.within_bound for r in self.rows)


def generator_check(
    f: LocalFunction,
    eta: Configuration,
    model: RateFamily,
    t_list: Sequence[float],
    box_n: int,
    replicas: int,
    seed: int = 0,
    method: str = "thinning",
) -> GeneratorReport:
    """Residuals |(S(t)f - f)/t - Omega f| for decreasing t.

    ``replicas`` is used at the first (largest) time and scaled by
    (t_0 / t)^2 elsewhere so the noise on the quotient does not grow.  The
    constant K of the O(t) bias is calibrated on the largest time; each row
    must satisfy residual <= K t + 3 SEM / t, and residuals must decrease.
    """
    t_list = list(t_list)
    if any(b >= a for a, b in zip(t_list, t_list[1:])):
        raise ValueError("t_list must be strictly decreasing")
    f0 = f(eta)
    om = omega(f, eta, model)
    rows = []
    for j, t in enumerate(t_list):
        n = int(round(replicas * (t_list[0] / t) ** 2))
        mc = semigroup_mc(f, eta, t, box_n, model, n, seed + j * 10_000_000, method)
        quotient = (mc.estimate - f0) / t
        rows.append(GeneratorRow(t, n, mc.estimate, mc.sem, quotient, om, abs(quotient - om)))
    K = rows[0].residual / rows[0].t if rows else 0.0
    for r in rows:
        r.bound = K * r.t + 3 * r.sem / r.t
    res = [r.residual for r in rows]
    decreasing = all(b < a for a, b in zip(res, res[1:])) or all(x == 0 for x in res)
    flags = [] if decreasing else ["residuals do not decrease with t"]
    return GeneratorReport(rows, K, decreasing, flags)


# --------------------------------------------------------------------------
# integral identity on the exact oracle


@dataclass
class IntegralReport:
    lhs: float
    integral: float
    residual: float
    quadrature_bound: float
    truncation_bound: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.quadrature_bound + self.truncation_bound


def integral_identity_check(
    f: LocalFunction,
    eta: Configuration,
    model: RateFamily,
    t: float,
    box_n: int,
    quad_points: int = 65,
) -> IntegralReport:
    """Compare S_n(t)f(eta) - f(eta) with the integral of Omega_n S_n(s) f(eta) over [0, t].

    Everything comes from the exact finite-volume generator Q; the integral is
    composite Simpson on ``quad_points`` nodes.  Its error is at most
    t h^4 / 180 * ||Q||^5 ||f|| since the fourth derivative of the integrand
    is (Q^5 exp(sQ) f)(eta).
    """
    if quad_points < 3 or quad_points % 2 == 0:
        raise ValueError("Simpson's rule needs an odd number of at least 3 points")
    spec = FiniteSystemSpec(eta, Box(box_n, model.dim), model, t)
    gen = FiniteGenerator(spec)
    fvec = gen.function_vector(f)
    i0 = gen.initial_index
    lhs = gen.apply_semigroup(fvec, t)[i0] - fvec[i0]
    if t == 0:
        return IntegralReport(0.0, 0.0, 0.0, 0.0, 0.0)
    nodes = np.linspace(0.0, t, quad_points)
    h = nodes[1] - nodes[0]
    g = np.array([(gen.Q @ gen.apply_semigroup(fvec, s))[i0] for s in nodes])
    w = np.ones(quad_points)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    integral = float(h / 3 * math.fsum(w * g))
    qnorm = float(abs(gen.Q).sum(axis=1).max())
    fnorm = float(np.max(np.abs(fvec)))
    quad_bound = t * h ** 4 / 180 * qnorm ** 5 * fnorm
    trunc = 2 * fnorm * max(gen.truncation_error(s) for s in nodes) * (1 + qnorm * t)
    return IntegralReport(float(lhs), integral, abs(float(lhs) - integral), quad_bound, trunc)


# --------------------------------------------------------------------------
# growth of the triple norm


@dataclass
class NormGrowthReport:
    t: float
    per_site: dict
    total: float
    sigma: float
    bound: float
    norm_f: float
    A: float

    @property
    def passed(self) -> bool:
        return self.total <= self.bound + 3 * self.sigma


def _base_configs(f: LocalFunction, dim: int):
    if len(f.support) <= 3:
        zero = all_zero(dim)
        return [zero.set_values(dict(zip(f.support, bits)))
                for bits in itertools.product((0, 1), repeat=len(f.support))]
    from spinsys.configurations import all_one

    return [all_zero(dim), all_one(dim)]


def triple_norm_growth(
    f: LocalFunction,
    model: RateFamily,
    weights: WeightFamily,
    t: float,
    box_n: int,
    replicas: int,
    seed: int = 0,
    base_configs=None,
) -> NormGrowthReport:
    """Estimate sum_w lambda_w Delta_{S_n(t) f}(w) and compare with e^{At} |||f|||.

    For each w and each base configuration eta, copies from eta and eta^w are
    coupled (:func:`run_two_config`) and E|f(xi^eta_t) - f(xi^{eta^w}_t)| is
    averaged; the largest average over base configurations is kept.  Sites w
    range over Box(n) enlarged by the interaction range.
    """
    dim = model.dim
    A = constant_A(model, weights)
    r = model.range_radius if model.range_radius is not None else model.dependence_radius()
    w_box = Box(box_n + r, dim)
    bases = base_configs or _base_configs(f, dim)
    per_site = {}
    var = 0.0
    terms = []
    for k, w in enumerate(sites_in(w_box)):
        best = (0.0, 0.0)
        for b, eta in enumerate(bases):
            diffs = np.empty(replicas)
            for i in range(replicas):
                s = seed + ((k * len(bases) + b) * replicas + i)
                tl = build_timeline(w_box, t, model, weights, s)
                run = run_two_config(tl, eta, w, box_n)
                diffs[i] = abs(f(run.xi1.final) - f(run.xi2.final))
            mean = float(np.sum(diffs) / replicas)
            sem = float(np.std(diffs, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
            if mean > best[0]:
                best = (mean, sem)
        per_site[w] = best
        lam = weights.lambda_of(w)
        terms.append(lam * best[0])
        var += (lam * best[1]) ** 2
    norm_f = f.triple_norm(weights)
    return NormGrowthReport(t, per_site, math.fsum(terms), math.sqrt(var),
                            math.exp(A * t) * norm_f, norm_f, A)


# --------------------------------------------------------------------------
# invariance criterion


@dataclass
class InvarianceResult:
    value: float
    error: float
    mode: str


def _dependence_region(f: LocalFunction, model: RateFamily) -> list[Site]:
    r = model.range_radius
    region = set(f.support)
    for v in f.support:
        for o in sites_in(Box(r, model.dim)):
            region.add(add(v, o))
    return sorted(region)


def invariance_check(
    mu,
    f: LocalFunction,
    model: RateFamily,
    mode: str = "exact",
    replicas: int = 10_000,
    seed: int = 0,
) -> InvarianceResult:
    """The integral of Omega f against ``mu``.

    ``exact`` enumerates every pattern on the support of f and its
    interaction neighbourhood, weighted by a product or point-mass ``mu``;
    ``mc`` averages Omega f over samples of ``mu`` and reports the SEM.
    """
    if mode == "exact":
        if model.range_radius is None:
            raise ValueError("exact invariance check needs a finite-range model")
        if isinstance(mu, PointMass):
            return InvarianceResult(omega(f, mu.cfg, model), 0.0, mode)
        if not isinstance(mu, ProductBernoulli):
            raise ValueError("exact invariance check needs a product or point-mass measure")
        region = _dependence_region(f, model)
        probs = [mu.prob(v) for v in region]
        base = all_zero(model.dim)
        terms = []
        view = LocalView(base)
        for bits in itertools.product((0, 1), repeat=len(region)):
            weight = math.prod(p if b else 1 - p for p, b in zip(probs, bits))
            if weight == 0:
                continue
            for v, b in zip(region, bits):
                view[v] = b
            terms.append(weight * omega(f, view, model))
        return InvarianceResult(math.fsum(terms), 0.0, mode)
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    vals = np.empty(replicas)
    if isinstance(mu, ProductBernoulli):
        region = _dependence_region(f, model) if model.range_radius is not None else None
        if region is None:
            r = model.dependence_radius()
            region = sorted({add(v, o) for v in f.support for o in sites_in(Box(r, model.dim))})
        probs = np.array([mu.prob(v) for v in region])
        base = all_zero(model.dim)
        for i in range(replicas):
            bits = (rng.random(len(region)) < probs).astype(int)
            vals[i] = omega(f, LocalView(base, dict(zip(region, bits.tolist()))), model)
    elif isinstance(mu, PointMass):
        vals[:] = omega(f, mu.cfg, model)
    elif isinstance(mu, Empirical):
        picks = rng.integers(0, len(mu.samples), replicas)
        cache = {}
        for i, k in enumerate(picks.tolist()):
            if k not in cache:
                cache[k] = omega(f, mu.samples[k], model)
            vals[i] = cache[k]
    else:
        raise ValueError(f"unsupported measure {mu!r}")
    mean = float(np.sum(vals) / replicas)
    sem = float(np.std(vals, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
    return InvarianceResult(mean, sem, mode)
