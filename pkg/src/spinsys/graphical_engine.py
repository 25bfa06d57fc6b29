"""Shared Poisson clocks and uniform marks driving every coupled process.

A :class:`Timeline` realizes, on a finite window, one clock per site with
intensity C + A * lambda_v / lambda_inf and one uniform mark per ring.  Each
finite-volume system flips v_j when u_j < c_{v_j}(state).  The discrepancy
process of box n flips when the mark lands in [A_j, A_j + gamma_a(v_j,
zeta^n)), where A_j is the smallest rate any of the larger simulated copies
proposes at v_j.  Pathwise containment of the disagreement set follows from
the Lipschitz bound on the rates and is asserted at every event.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from spinsys.configurations import Configuration, LocalView, all_one
from spinsys.errors import InvariantViolation, StabilizationWarning
from spinsys.finite_dynamics import Trajectory, poisson_events, prefilled_view
from spinsys.lattice import Box, Site, index_map, sites_in
from spinsys.rate_models import (
    UNIFORM,
    Influence,
    RateFamily,
    WeightFamily,
    constant_A,
    constant_C,
)

_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class Timeline:
    """Realized clocks on ``window`` over [0, horizon].

    ``site_idx`` indexes ``sites`` (the window in lexicographic order);
    ``marks[j]`` is uniform on [0, rate_of(sites[site_idx[j]])].
    """

    window: Box
    horizon: float
    model: RateFamily
    weights: WeightFamily
    C: float
    A: float
    sites: tuple
    intensities: np.ndarray
    times: np.ndarray
    site_idx: np.ndarray
    marks: np.ndarray
    seed: int | None = None

    def rate_of(self, v: Site) -> float:
        return self.C + self.A * self.weights.lambda_of(v) / self.weights.lambda_inf

    def __len__(self) -> int:
        return len(self.times)

    def events(self):
        """Iterate ``(t_j, v_j, u_j)`` in time order."""
        sites = self.sites
        for t, k, u in zip(self.times.tolist(), self.site_idx.tolist(), self.marks.tolist()):
            yield t, sites[k], u

    def restricted(self, sites, horizon: float | None = None):
        """Events at ``sites`` up to ``horizon``, indices relative to ``sites``."""
        horizon = self.horizon if horizon is None else horizon
        local = {v: i for i, v in enumerate(sites)}
        remap = np.array([local.get(v, -1) for v in self.sites], dtype=np.int64)
        if len(self.times) == 0:
            return self.times, self.site_idx, self.marks
        new_idx = remap[self.site_idx]
        keep = (new_idx >= 0) & (self.times <= horizon)
        return self.times[keep], new_idx[keep], self.marks[keep]


def build_timeline(
    window: Box,
    horizon: float,
    model: RateFamily,
    weights: WeightFamily = UNIFORM,
    seed: int = 0,
) -> Timeline:
    """Sample clocks and marks for every site of ``window``.

    Raises :class:`~spinsys.errors.HypothesisViolation` when C or A is
    infinite, so no timeline exists for such a model.
    """
    C = constant_C(model)
    A = constant_A(model, weights)
    sites = tuple(sites_in(window))
    intens = np.array([C + A * weights.lambda_of(v) / weights.lambda_inf for v in sites])
    rng = np.random.default_rng(seed)
    times, idx, marks = poisson_events(rng, intens, horizon)
    return Timeline(window, float(horizon), model, weights, C, A, sites, intens,
                    times, idx, marks, seed)


# --------------------------------------------------------------------------
# coupled finite-volume copies and their discrepancy processes


@dataclass
class CoupledBundle:
    boxes: list
    xi: list
    zeta: list
    violations: list = field(default_factory=list)
    events_processed: int = 0

    def values_at(self, v: Site, t: float | None = None) -> list[int]:
        """xi^{eta,n_i}_t(v) for every box, at the horizon by default."""
        return [traj.value_at(v, math.inf if t is None else t) for traj in self.xi]


def _invaded_rate(infl: Influence, total: float, v: Site, zeros: set) -> float:
    """gamma_a(v, zeta) for zeta equal to one off the finite set ``zeros``."""
    if infl.formula is not None:
        missing = math.fsum(infl.a_of(w, v) for w in zeros if w != v)
    else:
        missing = math.fsum(a for w, a in infl.sources(v) if w in zeros)
    return max(total - missing, 0.0)


def run_coupled(
    timeline: Timeline,
    eta: Configuration,
    boxes,
    track_zeta: bool = True,
    strict: bool = False,
) -> CoupledBundle:
    """Run xi^{eta,n} for every box in ``boxes`` on one timeline.

    With ``track_zeta`` the discrepancy process zeta^n of each box is run as
    well: it starts equal to one off Box(n) and is flipped using A^n_j, the
    minimum over the simulated copies k >= n of c_{v_j}(xi^{eta,k}).
    Containment violations are recorded (or raised when ``strict``); a mark
    interval leaving [0, rate_of(v_j)] always raises.
    """
    radii = sorted({b.radius if isinstance(b, Box) else int(b) for b in boxes})
    if not radii:
        raise ValueError("need at least one box")
    dim = timeline.window.dim
    if radii[-1] > timeline.window.radius:
        raise ValueError(f"box {radii[-1]} exceeds the timeline window {timeline.window.radius}")
    box_list = [Box(r, dim) for r in radii]
    K = len(box_list)
    model = timeline.model
    rate = model.rate
    infl = model.influence()
    total = infl.total()
    box_sites = [sites_in(b) for b in box_list]
    views = []
    template = prefilled_view(eta, box_sites[-1], model)
    for _ in range(K):
        views.append(LocalView(eta, template))
    xi_events = [[] for _ in range(K)]
    zeros = [set(bs) for bs in box_sites]
    zeta_events = [[] for _ in range(K)]
    # smallest box index containing each window site
    first_box = {}
    for i in range(K - 1, -1, -1):
        for v in box_sites[i]:
            first_box[v] = i
    violations = []
    n_events = 0
    for t, v, u in timeline.events():
        i0 = first_box.get(v)
        if i0 is None:
            continue
        n_events += 1
        rates = [None] * K
        for i in range(i0, K):
            rates[i] = rate(v, views[i])
        if track_zeta:
            suffix_min = math.inf
            for i in range(K - 1, i0 - 1, -1):
                suffix_min = min(suffix_min, rates[i])
                if v not in zeros[i]:
                    continue
                gam = _invaded_rate(infl, total, v, zeros[i])
                lo = suffix_min
                if lo + gam > timeline.rate_of(v) + _SLACK:
                    raise InvariantViolation(
                        f"mark interval [{lo}, {lo + gam}) exceeds clock intensity "
                        f"{timeline.rate_of(v)} at site {v}, t={t}",
                        witness={"t": t, "site": v, "box": box_list[i].radius},
                    )
                if lo <= u < lo + gam:
                    zeros[i].discard(v)
                    zeta_events[i].append((t, v))
        for i in range(i0, K):
            if u < rates[i]:
                views[i][v] ^= 1
                xi_events[i].append((t, v))
        if track_zeta:
            for i in range(i0, K):
                if v in zeros[i]:
                    ref = views[i][v]
                    if any(views[k][v] != ref for k in range(i + 1, K)):
                        record = {"t": t, "site": v, "box": box_list[i].radius,
                                  "values": [views[k][v] for k in range(i, K)]}
                        violations.append(record)
                        if strict:
                            raise InvariantViolation("containment violated", witness=record)
    horizon = timeline.horizon
    xi = [Trajectory(eta, ev, horizon) for ev in xi_events]
    zeta = []
    if track_zeta:
        for bs, ev in zip(box_sites, zeta_events):
            start = all_one(dim).set_values({w: 0 for w in bs})
            zeta.append(Trajectory(start, ev, horizon))
    return CoupledBundle(box_list, xi, zeta, violations, n_events)


# --------------------------------------------------------------------------
# two configurations differing at one site


@dataclass
class TwoConfigRun:
    xi1: Trajectory
    xi2: Trajectory
    discrepancy: Trajectory
    violations: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.xi1, self.xi2, self.discrepancy))


def run_two_config(
    timeline: Timeline,
    eta1: Configuration,
    w: Site,
    n: int | Box,
    strict: bool = False,
) -> TwoConfigRun:
    """Couple the box-n systems started from eta1 and eta1^w with a discrepancy process.

    The discrepancy process starts at {w} and is a (w, a_n)-invasion
    process; it flips vacant v_j when B_j <= u_j < B_j + gamma, B_j being the
    smaller of the two proposed rates.  When w lies outside Box(n) the
    coefficients a(x, v) with v in Box(n) are kept for every source x, since
    the frozen disagreement at w still feeds the rates inside the box.
    """
    w = tuple(w)
    if w not in timeline.window:
        raise ValueError(f"site {w} is outside the timeline window; both copies would coincide")
    box = n if isinstance(n, Box) else Box(int(n), timeline.window.dim)
    if box.radius > timeline.window.radius:
        raise ValueError("box exceeds the timeline window")
    model = timeline.model
    rate = model.rate
    infl = model.influence()
    alpha = infl.restrict(box) if w in box else infl.restrict_targets(box)
    eta2 = eta1.flip(w)
    sites = sites_in(box)
    view1 = prefilled_view(eta1, sites, model)
    view2 = prefilled_view(eta2, sites, model)
    occupied = {w}
    ev1, ev2, evg = [], [], []
    violations = []
    times, idx, marks = timeline.restricted(sites)
    for t, k, u in zip(times.tolist(), idx.tolist(), marks.tolist()):
        v = sites[k]
        c1 = rate(v, view1)
        c2 = rate(v, view2)
        if v not in occupied:
            lo = min(c1, c2)
            gam = math.fsum(alpha.a_of(x, v) for x in occupied)
            if lo + gam > timeline.rate_of(v) + _SLACK:
                raise InvariantViolation(
                    f"mark interval exceeds clock intensity at site {v}, t={t}",
                    witness={"t": t, "site": v},
                )
            if lo <= u < lo + gam:
                occupied.add(v)
                evg.append((t, v))
        if u < c1:
            view1[v] ^= 1
            ev1.append((t, v))
        if u < c2:
            view2[v] ^= 1
            ev2.append((t, v))
        if view1[v] != view2[v] and v not in occupied:
            record = {"t": t, "site": v}
            violations.append(record)
            if strict:
                raise InvariantViolation("discrepancy escaped the invasion set", witness=record)
    h = timeline.horizon
    start = Configuration(eta1.dim, deviations=frozenset({w}))
    return TwoConfigRun(
        Trajectory(eta1, ev1, h), Trajectory(eta2, ev2, h), Trajectory(start, evg, h), violations
    )


# --------------------------------------------------------------------------
# limit process


@dataclass
class LimitEstimate:
    value: int
    stabilization_index: int
    values: list
    boxes: list


def stabilization_index(values) -> int:
    """Smallest 1-based i with values[i-1] == ... == values[-1]."""
    i = len(values)
    while i > 1 and values[i - 2] == values[-1]:
        i -= 1
    return i


def limit_estimate(
    model: RateFamily,
    eta: Configuration,
    v: Site,
    t: float,
    box_schedule,
    seed: int,
    weights: WeightFamily = UNIFORM,
    warn: bool = True,
) -> LimitEstimate:
    """Estimate xi^eta_t(v) by the copy in the largest box of ``box_schedule``.

    Returns the value with the index at which the sequence of copies became
    constant.  Warns when that only happens at the last box.
    """
    radii = sorted({b.radius if isinstance(b, Box) else int(b) for b in box_schedule})
    window = Box(radii[-1], model.dim)
    timeline = build_timeline(window, t, model, weights, seed)
    bundle = run_coupled(timeline, eta, radii, track_zeta=False)
    values = bundle.values_at(tuple(v))
    idx = stabilization_index(values)
    if warn and len(values) > 1 and idx == len(values):
        warnings.warn(
            f"values only agree at the largest box {radii[-1]}; enlarge the schedule",
            StabilizationWarning,
            stacklevel=2,
        )
    return LimitEstimate(values[-1], idx, values, radii)
