"""Finite spin systems: only the sites of a finite set W move, the rest stay frozen.

Two independent routes are provided.  :func:`simulate_finite` samples paths
by thinning a Poisson clock of intensity C at every active site, accepting a
flip at v when the uniform mark falls below c_v.  :func:`exact_distribution`
computes the law at time t by uniformizing the generator of the chain on the
2^|W| configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import sparse, stats

from spinsys.configurations import Configuration, LocalView
from spinsys.lattice import Box, Site, add, sites_in
from spinsys.rate_models import RateFamily, constant_C

MAX_ORACLE_SITES = 14
UNIFORMIZATION_TAIL = 1e-13


def active_sites(active) -> tuple[Site, ...]:
    if isinstance(active, Box):
        return tuple(sites_in(active))
    return tuple(sorted({tuple(v) for v in active}))


@dataclass(frozen=True)
class FiniteSystemSpec:
    """Initial (and boundary) configuration, active sites, rates and horizon."""

    eta: Configuration
    active: tuple
    model: RateFamily
    horizon: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "active", active_sites(self.active))
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        if not self.active:
            raise ValueError("the active set is empty")


@dataclass
class Trajectory:
    """Piecewise-constant path: ``initial`` plus time-ordered single-site flips."""

    initial: Configuration
    events: list = field(default_factory=list)
    horizon: float = 0.0

    def state_at(self, t: float) -> Configuration:
        """Right-continuous state at time ``t``."""
        cfg = self.initial
        for s, v in self.events:
            if s > t:
                break
            cfg = cfg.flip(v)
        return cfg

    @property
    def final(self) -> Configuration:
        return self.state_at(math.inf)

    def value_at(self, v: Site, t: float) -> int:
        bit = self.initial.eval(v)
        for s, w in self.events:
            if s > t:
                break
            if w == v:
                bit ^= 1
        return bit

    def flip_times(self) -> list[float]:
        return [s for s, _ in self.events]


# --------------------------------------------------------------------------
# sampling


def poisson_events(rng: np.random.Generator, intensities: np.ndarray, horizon: float):
    """Superposed independent Poisson clocks with uniform marks.

    Returns ``(times, site_index, marks)``; clock k has intensity
    ``intensities[k]`` and its marks are uniform on [0, intensities[k]].
    """
    total = float(np.sum(intensities))
    if horizon <= 0 or total <= 0:
        return np.empty(0), np.empty(0, dtype=np.int64), np.empty(0)
    n = rng.poisson(total * horizon)
    times = np.sort(rng.uniform(0.0, horizon, n))
    if intensities.min() == intensities.max():
        idx = rng.integers(0, len(intensities), size=n)
        marks = rng.uniform(0.0, intensities[0], n)
    else:
        idx = rng.choice(len(intensities), size=n, p=intensities / total)
        marks = rng.uniform(0.0, 1.0, n) * intensities[idx]
    return times, idx, marks


def prefilled_view(eta: Configuration, sites: Iterable[Site], model: RateFamily) -> LocalView:
    """A view holding every site the rates of ``sites`` read, for fast lookups."""
    sites = list(sites)
    values = {v: eta.eval(v) for v in sites}
    r = model.range_radius
    if r:
        offsets = sites_in(Box(r, model.dim))
        for v in sites:
            for o in offsets:
                w = add(v, o)
                if w not in values:
                    values[w] = eta.eval(w)
    return LocalView(eta, values)


def drive(eta, sites, model, times, site_idx, marks, tol=None, view=None):
    """Apply the thinning rule: flip v_j whenever u_j < c_{v_j}(current state)."""
    if view is None:
        view = prefilled_view(eta, sites, model)
    rate = model.rate
    events = []
    for t, k, u in zip(times.tolist(), site_idx.tolist(), marks.tolist()):
        v = sites[k]
        if u < rate(v, view, tol):
            view[v] ^= 1
            events.append((t, v))
    return events, view


def simulate_finite(spec: FiniteSystemSpec, seed: int, timeline=None) -> Trajectory:
    """Sample a path of the finite spin system up to ``spec.horizon``.

    Without ``timeline`` every active site carries its own clock of intensity
    C.  With a :class:`~spinsys.graphical_engine.Timeline` the events of its
    active sites are used instead, which reproduces the graphical
    construction flip for flip.
    """
    sites = spec.active
    if timeline is None:
        c = constant_C(spec.model)
        rng = np.random.default_rng(seed)
        times, idx, marks = poisson_events(rng, np.full(len(sites), c), spec.horizon)
    else:
        times, idx, marks = timeline.restricted(sites, spec.horizon)
    events, _ = drive(spec.eta, sites, spec.model, times, idx, marks)
    return Trajectory(spec.eta, events, spec.horizon)


def final_state_bits(spec: FiniteSystemSpec, seed: int, _template=None) -> int:
    """Index of the end state in the oracle's state ordering."""
    sites = spec.active
    rng = np.random.default_rng(seed)
    rates = np.full(len(sites), constant_C(spec.model))
    times, idx, marks = poisson_events(rng, rates, spec.horizon)
    if _template is None:
        _template = prefilled_view(spec.eta, sites, spec.model)
    view = LocalView(spec.eta, _template)
    drive(spec.eta, sites, spec.model, times, idx, marks, view=view)
    return state_index([view[v] for v in sites])


def empirical_distribution(spec: FiniteSystemSpec, replicas: int, seed: int) -> np.ndarray:
    """End-state frequencies over ``replicas`` runs seeded ``seed + i``."""
    counts = np.zeros(2 ** len(spec.active))
    template = prefilled_view(spec.eta, spec.active, spec.model)
    for i in range(replicas):
        counts[final_state_bits(spec, seed + i, template)] += 1
    return counts / replicas


# --------------------------------------------------------------------------
# exact route


def state_index(bits: Sequence[int]) -> int:
    k = 0
    for b in bits:
        k = (k << 1) | int(b)
    return k


def state_bits(index: int, m: int) -> tuple[int, ...]:
    return tuple((index >> (m - 1 - k)) & 1 for k in range(m))


class FiniteGenerator:
    """Generator matrix of the finite spin system on X^W_eta.

    State k encodes the bits on the active sites in order, first site most
    significant.
    """

    def __init__(self, spec: FiniteSystemSpec, tol: float | None = None):
        m = len(spec.active)
        if m > MAX_ORACLE_SITES:
            raise ValueError(
                f"{m} active sites; the exact oracle handles at most {MAX_ORACLE_SITES}"
            )
        self.spec = spec
        self.sites = spec.active
        self.m = m
        self.n_states = 2 ** m
        rows, cols, vals = [], [], []
        exit_rate = np.zeros(self.n_states)
        view = prefilled_view(spec.eta, self.sites, spec.model)
        for i in range(self.n_states):
            bits = state_bits(i, m)
            for v, b in zip(self.sites, bits):
                view[v] = b
            for k, v in enumerate(self.sites):
                c = spec.model.rate(v, view, tol)
                if c > 0:
                    rows.append(i)
                    cols.append(i ^ (1 << (m - 1 - k)))
                    vals.append(c)
                    exit_rate[i] += c
        off = sparse.csr_matrix((vals, (rows, cols)), shape=(self.n_states, self.n_states))
        self.Q = (off - sparse.diags(exit_rate)).tocsr()
        self.exit_rate = exit_rate
        self.unif_rate = float(exit_rate.max()) if self.n_states else 0.0
        self.initial_index = state_index(spec.eta.restrict(self.sites))

    def config(self, index: int) -> Configuration:
        return self.spec.eta.set_values(dict(zip(self.sites, state_bits(index, self.m))))

    def configs(self) -> list[Configuration]:
        return [self.config(i) for i in range(self.n_states)]

    def _weights(self, t: float):
        lam = self.unif_rate * t
        if lam == 0:
            return np.array([1.0]), 0.0
        k_max = int(stats.poisson.isf(UNIFORMIZATION_TAIL, lam)) + 1
        w = stats.poisson.pmf(np.arange(k_max + 1), lam)
        tail = float(stats.poisson.sf(k_max, lam))
        return w, tail

    def _uniformized(self):
        return sparse.identity(self.n_states, format="csr") + self.Q / self.unif_rate

    def propagate(self, p0: np.ndarray, t: float) -> np.ndarray:
        """Row vector p0 evolved for time t: p0 exp(tQ)."""
        if t < 0:
            raise ValueError("time must be nonnegative")
        w, _ = self._weights(t)
        if len(w) == 1:
            return np.array(p0, dtype=float)
        pt = self._uniformized().T.tocsr()
        term = np.array(p0, dtype=float)
        out = w[0] * term
        for wk in w[1:]:
            term = pt @ term
            out += wk * term
        return out

    def apply_semigroup(self, fvec: np.ndarray, t: float) -> np.ndarray:
        """Column vector exp(tQ) f, i.e. S_W(t) f at every state."""
        w, _ = self._weights(t)
        if len(w) == 1:
            return np.array(fvec, dtype=float)
        p = self._uniformized()
        term = np.array(fvec, dtype=float)
        out = w[0] * term
        for wk in w[1:]:
            term = p @ term
            out += wk * term
        return out

    def kernel(self, t: float) -> np.ndarray:
        """Dense transition matrix exp(tQ)."""
        eye = np.eye(self.n_states)
        return np.column_stack([self.apply_semigroup(eye[:, j], t) for j in range(self.n_states)])

    def truncation_error(self, t: float) -> float:
        """Poisson tail mass dropped by the uniformization sum at time t."""
        return self._weights(t)[1]

    def function_vector(self, f: Callable[[Configuration], float]) -> np.ndarray:
        return np.array([float(f(cfg)) for cfg in self.configs()])


@dataclass
class FiniteDistribution:
    generator: FiniteGenerator
    probs: np.ndarray
    t: float

    @property
    def sites(self):
        return self.generator.sites

    def prob_of(self, cfg: Configuration) -> float:
        return float(self.probs[state_index(cfg.restrict(self.sites))])

    def configs(self):
        return self.generator.configs()


def exact_distribution(spec: FiniteSystemSpec, t: float, tol: float | None = None) -> FiniteDistribution:
    """Law of the state at time ``t``, started from ``spec.eta``."""
    gen = FiniteGenerator(spec, tol)
    p0 = np.zeros(gen.n_states)
    p0[gen.initial_index] = 1.0
    return FiniteDistribution(gen, gen.propagate(p0, t), t)


def semigroup_exact(spec: FiniteSystemSpec, t: float, f: Callable[[Configuration], float]) -> float:
    """E_{eta,W}[f(xi_t)] from the exact law."""
    dist = exact_distribution(spec, t)
    fvec = dist.generator.function_vector(f)
    return float(math.fsum(dist.probs * fvec))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
