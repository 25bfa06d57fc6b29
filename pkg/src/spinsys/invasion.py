"""Invasion processes: ones spread along Poisson arrows and never disappear.

Arrow times of every ordered pair (x, y) come from their own counter-based
stream keyed by (seed, x, y), so the full :class:`ArrowGraph` and the lazy
frontier simulation in :func:`simulate_invasion` see exactly the same arrows
for a given seed.  The frontier only draws arrows leaving occupied sites,
which makes it cheap; the graph is the literal object needed for the exact
time-reversal check.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np

from spinsys.configurations import Configuration, indicator
from spinsys.errors import BoundaryTouchWarning, InvariantViolation
from spinsys.lattice import Box, Site, max_norm, sites_in
from spinsys.rate_models import UNIFORM, Influence, WeightFamily, weighted_row_sum

_GAP, _MARK = 0, 1
_TWO64 = float(2 ** 64)


def _uniform(seed: int, x: Site, y: Site, k: int, tag: int) -> float:
    """k-th uniform in (0, 1) of the stream attached to the arrow pair (x, y)."""
    key = struct.pack(f"<{len(x) + len(y) + 3}q", seed, tag, k, *x, *y)
    h = hashlib.blake2b(key, digest_size=8).digest()
    return (int.from_bytes(h, "little") + 0.5) / _TWO64


class _PairStream:
    """Arrow times of one ordered pair, generated on demand."""

    __slots__ = ("seed", "x", "y", "rate", "times")

    def __init__(self, seed, x, y, rate):
        self.seed, self.x, self.y, self.rate = seed, x, y, rate
        self.times = []

    def _extend(self):
        k = len(self.times)
        last = self.times[-1] if self.times else 0.0
        gap = -math.log(_uniform(self.seed, self.x, self.y, k, _GAP)) / self.rate
        self.times.append(last + gap)

    def first_after(self, s: float) -> float:
        if not self.times:
            self._extend()
        while self.times[-1] <= s:
            self._extend()
        for t in self.times:
            if t > s:
                return t
        return math.inf  # pragma: no cover

    def up_to(self, horizon: float) -> list[float]:
        self.first_after(horizon)
        return [t for t in self.times if t <= horizon]

    def mark(self, k: int) -> float:
        return _uniform(self.seed, self.x, self.y, k, _MARK)


@dataclass
class ArrowGraph:
    """Arrows ``(s, x, y)`` sorted by time, sampled on ``window`` x [0, horizon]."""

    window: Box
    horizon: float
    arrows: list = field(default_factory=list)

    def reversed(self, t: float | None = None) -> "ArrowGraph":
        """Map every arrow (s, x, y) with s <= t to (t - s, y, x)."""
        t = self.horizon if t is None else t
        rev = [(t - s, y, x) for s, x, y in self.arrows if s <= t]
        rev.sort()
        return ArrowGraph(self.window, t, rev)

    def to_json(self) -> str:
        return json.dumps({
            "window": self.window.radius,
            "dim": self.window.dim,
            "horizon": self.horizon,
            "arrows": [[s, list(x), list(y)] for s, x, y in self.arrows],
        })


def sample_arrow_graph(alpha: Influence, window: Box, horizon: float, seed: int,
                       marks: bool = False) -> ArrowGraph:
    """Place arrows x -> y at rate alpha(x, y) for every ordered pair in ``window``.

    With ``marks`` each arrow carries a uniform mark as a fourth field.
    """
    arrows = []
    for x in sites_in(window):
        for y, a in alpha.targets(x):
            if y not in window or a <= 0:
                continue
            stream = _PairStream(seed, x, y, a)
            for k, s in enumerate(stream.up_to(horizon)):
                arrows.append((s, x, y, stream.mark(k)) if marks else (s, x, y))
    arrows.sort()
    return ArrowGraph(window, horizon, arrows)


def reachable_set(graph: ArrowGraph, sources, t: float | None = None) -> set:
    """Sites v with (w, 0) -> (v, t) for some source w, by one sweep over arrows."""
    t = graph.horizon if t is None else t
    reached = {tuple(w) for w in sources}
    for arrow in graph.arrows:
        s, x, y = arrow[0], arrow[1], arrow[2]
        if s > t:
            break
        if x in reached:
            reached.add(y)
    return reached


def reachability_oracle(graph: ArrowGraph, W, v: Site, t: float) -> int:
    """1 iff a time-increasing arrow path joins W x {0} to (v, t)."""
    return int(tuple(v) in reachable_set(graph, W, t))


# --------------------------------------------------------------------------
# frontier simulation


@dataclass
class InvasionRun:
    """Occupation times of every site reached by ``horizon`` (sources at 0)."""

    occupied_at: dict
    horizon: float
    window: Box
    dim: int

    def occupied(self, t: float | None = None) -> list[Site]:
        t = self.horizon if t is None else t
        return sorted(v for v, s in self.occupied_at.items() if s <= t)

    def state(self, t: float | None = None) -> Configuration:
        return indicator(self.occupied(t), self.dim)

    def touches_boundary(self, t: float | None = None) -> bool:
        t = self.horizon if t is None else t
        r = self.window.radius
        return any(max_norm(v) >= r for v, s in self.occupied_at.items() if s <= t)

    def q(self, t: float, weights: WeightFamily = UNIFORM) -> float:
        return math.fsum(weights.lambda_of(v) for v, s in self.occupied_at.items() if s <= t)


def invade(W, alpha: Influence, t: float, window: Box, seed: int) -> InvasionRun:
    """Earliest-arrival sweep from W: a vacant site is taken by the first arrow
    arriving from an already occupied site."""
    occ = {}
    heap = []
    for w in W:
        w = tuple(w)
        if w in window:
            occ[w] = 0.0
    for w in list(occ):
        _push_targets(heap, occ, w, 0.0, alpha, window, t, seed)
    while heap:
        s, y = heapq.heappop(heap)
        if y in occ:
            continue
        occ[y] = s
        _push_targets(heap, occ, y, s, alpha, window, t, seed)
    return InvasionRun(occ, t, window, window.dim)


def _push_targets(heap, occ, x, s, alpha, window, horizon, seed):
    for y, a in alpha.targets(x):
        if y in occ or y not in window or a <= 0:
            continue
        arrival = _PairStream(seed, x, y, a).first_after(s)
        if arrival <= horizon:
            heapq.heappush(heap, (arrival, y))


def simulate_invasion(W, alpha: Influence, t: float, window: Box, seed: int) -> Configuration:
    """Occupied set at time ``t`` of the (W, alpha)-invasion process, within ``window``.

    Warns with :class:`BoundaryTouchWarning` when the set reaches the window
    edge, since arrows leaving the window are not simulated.
    """
    run = invade(W, alpha, t, window, seed)
    if run.touches_boundary():
        warnings.warn(f"invasion reached the boundary of Box({window.radius})",
                      BoundaryTouchWarning, stacklevel=2)
    return run.state()


# --------------------------------------------------------------------------
# duality


@dataclass
class DualityReport:
    samples: int
    violations: int
    forward_hits: int
    boundary_touches: int
    p_forward: float | None = None
    p_backward: float | None = None
    sigma: float | None = None
    first_witness: str | None = None

    @property
    def exact_ok(self) -> bool:
        return self.violations == 0

    @property
    def statistical_ok(self) -> bool:
        if self.p_forward is None:
            return True
        diff = abs(self.p_forward - self.p_backward)
        return diff <= 3 * self.sigma or (self.sigma == 0 and diff == 0)


def duality_check(
    v: Site,
    W,
    t: float,
    alpha: Influence,
    window: Box,
    seeds,
    statistical: bool = True,
    strict: bool = True,
) -> DualityReport:
    """Check reachability W x {0} -> (v, t) against its time reversal, sample by sample.

    Each seed gives one arrow graph G; the reversed graph maps (s, x, y) to
    (t - s, y, x).  The two reachability events must coincide exactly.  With
    ``statistical`` the forward frequency is also compared with the
    frequency P_{v, alpha_bar}(zeta_t meets W) estimated on independent seeds.
    """
    v = tuple(v)
    W = [tuple(w) for w in W]
    seeds = list(seeds)
    violations = hits = touches = 0
    witness = None
    for seed in seeds:
        graph = sample_arrow_graph(alpha, window, t, seed)
        fwd_set = reachable_set(graph, W, t)
        forward = v in fwd_set
        back_set = reachable_set(graph.reversed(t), [v], t)
        backward = any(w in back_set for w in W)
        if any(max_norm(x) >= window.radius for x in fwd_set | back_set):
            touches += 1
        hits += forward
        if forward != backward:
            violations += 1
            if witness is None:
                witness = graph.to_json()
            if strict:
                raise InvariantViolation(
                    f"reversal mismatch at seed {seed}: forward={forward} backward={backward}",
                    witness=graph.to_json(),
                )
    if touches:
        warnings.warn(f"{touches} of {len(seeds)} samples reached the window boundary",
                      BoundaryTouchWarning, stacklevel=2)
    report = DualityReport(len(seeds), violations, hits, touches, first_witness=witness)
    if statistical and seeds:
        n = len(seeds)
        offset = max(seeds) + 1
        alpha_bar = alpha.transpose()
        Wset = set(W)
        back_hits = 0
        for i in range(n):
            run = invade([v], alpha_bar, t, window, offset + i)
            back_hits += any(x in Wset for x in run.occupied_at)
        p1, p2 = hits / n, back_hits / n
        report.p_forward, report.p_backward = p1, p2
        report.sigma = math.sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n)
    return report


# --------------------------------------------------------------------------
# growth bound


@dataclass
class GrowthRow:
    t: float
    mean_q: float
    sem: float
    bound: float
    boundary_touch_fraction: float

    @property
    def within_bound(self) -> bool:
        rel = self.sem / self.mean_q if self.mean_q else 0.0
        return self.mean_q <= self.bound * (1 + 3 * rel)


def growth_curve(
    w: Site,
    alpha_bar: Influence,
    weights: WeightFamily,
    t_grid,
    replicas: int,
    window: Box,
    seed: int,
    A: float | None = None,
) -> list[GrowthRow]:
    """Mean and standard error of q(zeta_t) for the invasion started at {w}.

    ``A`` defaults to the weighted row sum of the transpose of ``alpha_bar``
    at the origin, which is the supremum for the built-in weights.
    """
    w = tuple(w)
    t_grid = sorted(float(t) for t in t_grid)
    if A is None:
        A = weighted_row_sum(alpha_bar.transpose(), weights, (0,) * len(w))
    q = np.zeros((replicas, len(t_grid)))
    touched = np.zeros((replicas, len(t_grid)), dtype=bool)
    r = window.radius
    for i in range(replicas):
        run = invade([w], alpha_bar, t_grid[-1], window, seed + i)
        items = sorted(run.occupied_at.items(), key=lambda kv: kv[1])
        for j, t in enumerate(t_grid):
            q[i, j] = math.fsum(weights.lambda_of(v) for v, s in items if s <= t)
            touched[i, j] = any(max_norm(v) >= r for v, s in items if s <= t)
    rows = []
    lam_w = weights.lambda_of(w)
    for j, t in enumerate(t_grid):
        col = q[:, j]
        sem = float(np.std(col, ddof=1) / math.sqrt(replicas)) if replicas > 1 else 0.0
        rows.append(GrowthRow(t, float(np.sum(col) / replicas), sem,
                              lam_w * math.exp(A * t), float(np.mean(touched[:, j]))))
    return rows


def escape_probability(v: Site, alpha: Influence, t: float, box: Box, replicas: int,
                       seed: int, margin: int = 2) -> tuple[float, float]:
    """Frequency with which the invasion from {v} leaves ``box`` by time t, with its SEM."""
    window = box.grow(margin)
    hits = 0
    for i in range(replicas):
        run = invade([v], alpha, t, window, seed + i)
        hits += any(x not in box for x in run.occupied_at)
    p = hits / replicas
    return p, math.sqrt(p * (1 - p) / replicas)


# --------------------------------------------------------------------------
# monotone coupling


def monotone_pair(
    alpha: Influence,
    alpha_tilde: Influence,
    W,
    t: float,
    seed: int,
    window: Box,
) -> tuple[Configuration, Configuration]:
    """Invasions under alpha <= alpha_tilde built from one set of arrows.

    Every alpha_tilde arrow x -> y is kept for alpha with probability
    alpha(x, y) / alpha_tilde(x, y), decided by its mark.  The smaller set is
    asserted to lie inside the larger one.
    """
    sites = sites_in(window)
    if not alpha.dominated_by(alpha_tilde, sites):
        raise ValueError("alpha is not dominated by alpha_tilde on the window")
    graph = sample_arrow_graph(alpha_tilde, window, t, seed, marks=True)
    thinned = [
        (s, x, y) for s, x, y, u in graph.arrows
        if u * alpha_tilde.a_of(x, y) < alpha.a_of(x, y)
    ]
    small = reachable_set(ArrowGraph(window, t, thinned), W, t)
    big = reachable_set(graph, W, t)
    if not small <= big:
        raise InvariantViolation("monotone coupling violated", witness=graph.to_json())
    dim = window.dim
    return indicator(sorted(small), dim), indicator(sorted(big), dim)
