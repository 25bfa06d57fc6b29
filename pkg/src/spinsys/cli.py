"""Command-line runner: ``spinsys <command> --config FILE``.

Exit codes: 0 success, 1 invariant violation (witness written to stderr as
JSON), 2 hypothesis rejection (C or A infinite), 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings

from spinsys.config import ExperimentConfig, load_config
from spinsys.errors import ConfigError, HypothesisViolation, InvariantViolation
from spinsys.finite_dynamics import FiniteSystemSpec, simulate_finite
from spinsys.graphical_engine import limit_estimate
from spinsys.invasion import duality_check, escape_probability, growth_curve
from spinsys.lattice import Box, sites_in
from spinsys.observables import (
    LocalFunction,
    generator_check,
    invariance_check,
    triple_norm_growth,
)
from spinsys.rate_models import constant_A, constant_C
from spinsys.seeding import replica_seed, stream_seed
from spinsys import verification

EXIT_OK, EXIT_INVARIANT, EXIT_HYPOTHESIS, EXIT_CONFIG = 0, 1, 2, 3


class _Output:
    """CSV body behind a ``#`` header that records the config and the constants."""

    def __init__(self, command: str, cfg: ExperimentConfig, C: float, A: float):
        self.buf = io.StringIO()
        self.writer = csv.writer(self.buf, lineterminator="\n")
        head = [
            f"spinsys {command}",
            f"model = {cfg.model.describe()}",
            f"weights = {cfg.weights.describe()}",
            f"C = {C!r}",
            f"A = {A!r}",
            f"lambda_inf = {cfg.weights.lambda_inf!r}",
            "config:",
        ] + cfg.to_text().rstrip("\n").splitlines()
        for line in head:
            self.buf.write(f"# {line}".rstrip() + "\n")

    def row(self, *values):
        self.writer.writerow([_cell(v) for v in values])

    def comment(self, text: str):
        self.buf.write(f"# {text}\n")

    def emit(self, path):
        text = self.buf.getvalue()
        if path in (None, "-"):
            sys.stdout.write(text)
        else:
            with open(path, "w") as fh:
                fh.write(text)


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return " ".join(str(c) for c in v) if len(v) > 1 else str(v[0])
    return v


def _constants(cfg: ExperimentConfig):
    C = constant_C(cfg.model)
    A = constant_A(cfg.model, cfg.weights)
    if not (math.isfinite(C) and math.isfinite(A)):
        raise HypothesisViolation(f"C = {C}, A = {A}: the constants must be finite")
    print(f"spinsys: {cfg.model.describe()} C = {C:.6g} A = {A:.6g}", file=sys.stderr)
    return C, A


# --------------------------------------------------------------------------
# commands


def cmd_simulate(cfg, out, args):
    spec = FiniteSystemSpec(cfg.initial, Box(cfg.window, cfg.dim), cfg.model, cfg.horizon)
    out.row("replica", "t", "site", "value")
    for i in range(cfg.replicas):
        traj = simulate_finite(spec, replica_seed(cfg.seed, "simulate", i))
        cur = {}
        for t, v in traj.events:
            cur[v] = cur.get(v, cfg.initial.eval(v)) ^ 1
            out.row(i, t, v, cur[v])
    return EXIT_OK


def cmd_converge(cfg, out, args):
    out.row("replica", "value", "stabilization_index", "values")
    t = cfg.horizon
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for i in range(cfg.replicas):
            est = limit_estimate(cfg.model, cfg.initial, cfg.site, t, cfg.boxes,
                                 replica_seed(cfg.seed, "converge", i), cfg.weights, warn=False)
            out.row(i, est.value, est.stabilization_index, "".join(map(str, est.values)))
    alpha_bar = cfg.model.influence().transpose()
    for n in cfg.boxes:
        p, sem = escape_probability(cfg.site, alpha_bar, t, Box(n, cfg.dim), cfg.replicas,
                                    stream_seed(cfg.seed, f"converge_dual_{n}"))
        out.comment(f"dual escape from Box({n}): p = {p!r} sem = {sem!r}")
    return EXIT_OK


def _default_sources(cfg):
    if cfg.sources:
        return list(cfg.sources)
    return [w for w in sites_in(Box(2, cfg.dim)) if w not in Box(1, cfg.dim)]


def cmd_duality(cfg, out, args):
    W = _default_sources(cfg)
    base = stream_seed(cfg.seed, "duality")
    rep = duality_check(cfg.site, W, cfg.horizon, cfg.model.influence(), Box(cfg.window, cfg.dim),
                        range(base, base + cfg.replicas), strict=False)
    out.row("samples", "violations", "forward_hits", "p_forward", "p_backward", "sigma",
            "boundary_touches")
    out.row(rep.samples, rep.violations, rep.forward_hits, rep.p_forward, rep.p_backward,
            rep.sigma, rep.boundary_touches)
    if rep.violations:
        raise InvariantViolation("duality reversal mismatch",
                                 witness=json.loads(rep.first_witness))
    return EXIT_OK


def cmd_growth(cfg, out, args):
    rows = growth_curve(cfg.site, cfg.model.influence().transpose(), cfg.weights, cfg.times,
                        cfg.replicas, Box(cfg.window, cfg.dim), stream_seed(cfg.seed, "growth"),
                        A=constant_A(cfg.model, cfg.weights))
    out.row("t", "mean_q", "sem", "bound", "boundary_touch_fraction", "within_bound")
    for r in rows:
        out.row(r.t, r.mean_q, r.sem, r.bound, r.boundary_touch_fraction, int(r.within_bound))
    return EXIT_OK


def _function(cfg):
    return cfg.function or LocalFunction.coordinate(cfg.site)


def cmd_generator_check(cfg, out, args):
    t_list = sorted(set(cfg.times), reverse=True)
    rep = generator_check(_function(cfg), cfg.initial, cfg.model, t_list, cfg.boxes[-1],
                          cfg.replicas, stream_seed(cfg.seed, "generator"))
    out.row("t", "replicas", "estimate", "sem", "quotient", "omega", "residual", "bound",
            "within_bound")
    for r in rep.rows:
        out.row(r.t, r.replicas, r.estimate, r.sem, r.quotient, r.omega, r.residual, r.bound,
                int(r.within_bound))
    out.comment(f"K = {rep.K!r} decreasing = {int(rep.decreasing)}")
    return EXIT_OK


def cmd_invariant_check(cfg, out, args):
    if cfg.measure is None:
        raise ConfigError("invariant-check needs a [measure] section", "measure")
    mode = args.mode or ("exact" if cfg.model.range_radius is not None else "mc")
    res = invariance_check(cfg.measure, _function(cfg), cfg.model, mode, cfg.replicas,
                           stream_seed(cfg.seed, "invariance"))
    out.row("mode", "value", "error")
    out.row(res.mode, res.value, res.error)
    return EXIT_OK


def cmd_norm_growth(cfg, out, args):
    rep = triple_norm_growth(_function(cfg), cfg.model, cfg.weights, cfg.horizon, cfg.boxes[0],
                             cfg.replicas, stream_seed(cfg.seed, "norm_growth"))
    out.row("site", "lambda", "mean", "sem")
    for w, (mean, sem) in rep.per_site.items():
        out.row(w, cfg.weights.lambda_of(w), mean, sem)
    out.comment(f"total = {rep.total!r} sigma = {rep.sigma!r} bound = {rep.bound!r} "
                f"passed = {int(rep.passed)}")
    return EXIT_OK


def cmd_verify_all(args):
    if args.config:
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        C, A = _constants(cfg)
        results = verification.model_battery(cfg)
        manifest = {"suite": "model", "model": cfg.model.describe(), "C": C, "A": A,
                    "seed": cfg.seed}
    else:
        seed = 0 if args.seed is None else args.seed
        results = verification.run_acceptance(seed, args.workers)
        manifest = {"suite": "acceptance", "seed": seed}
    manifest["passed"] = all(r.passed for r in results)
    manifest["checks"] = [r.to_json() for r in results]
    for r in results:
        print(r.line(), file=sys.stderr)
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    if not manifest["passed"]:
        failed = [r.to_json() for r in results if not r.passed]
        raise InvariantViolation("verification failed", witness=failed)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "duality": cmd_duality,
    "growth": cmd_growth,
    "generator-check": cmd_generator_check,
    "invariant-check": cmd_invariant_check,
    "norm-growth": cmd_norm_growth,
}


def _apply_overrides(cfg, args):
    if args.seed is not None:
        cfg.seed = args.seed
    if getattr(args, "replicas", None) is not None:
        if args.replicas < 1:
            raise ConfigError("replicas must be >= 1", "--replicas")
        cfg.replicas = args.replicas


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinsys", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", required=True, help="INI experiment file")
        p.add_argument("-o", "--out", help="CSV output path (default stdout)")
        p.add_argument("--seed", type=int)
        p.add_argument("--replicas", type=int)
        if name == "invariant-check":
            p.add_argument("--mode", choices=("exact", "mc"))
    p = sub.add_parser("verify-all")
    p.add_argument("-c", "--config", help="run the model battery for this config "
                                          "instead of the acceptance suite")
    p.add_argument("-o", "--out", help="JSON manifest path (default stdout)")
    p.add_argument("--seed", type=int)
    p.add_argument("--replicas", type=int)
    p.add_argument("--workers", type=int, default=1)
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify-all":
            return cmd_verify_all(args)
        cfg = load_config(args.config)
        _apply_overrides(cfg, args)
        C, A = _constants(cfg)
        out = _Output(args.command, cfg, C, A)
        try:
            code = COMMANDS[args.command](cfg, out, args)
        finally:
            out.emit(args.out)
        return code
    except ConfigError as exc:
        print(f"spinsys: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"spinsys: hypothesis rejected: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except InvariantViolation as exc:
        print(f"spinsys: invariant violation: {exc}", file=sys.stderr)
        print(json.dumps({"witness": _witness_json(exc.witness)}, sort_keys=True),
              file=sys.stderr)
        return EXIT_INVARIANT
    except ValueError as exc:
        print(f"spinsys: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _witness_json(w):
    if isinstance(w, dict):
        return {str(k): _witness_json(v) for k, v in w.items()}
    if isinstance(w, (list, tuple)):
        return [_witness_json(v) for v in w]
    if hasattr(w, "to_text"):
        return w.to_text()
    if isinstance(w, (int, float, str, bool)) or w is None:
        return w
    return str(w)


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
