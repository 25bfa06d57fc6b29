"""Experiment configuration files.

The format is INI (``configparser``) with these sections::

    [model]
    kind = contact            ; contact | voter | glauber | independent
                              ; | long_range_geometric | tabulated
    dimension = 1
    lambda_c = 1.5            ; kind-specific keys, see MODEL_KEYS
    influence = -1:1.5, 1:1.5 ; optional declared a(v + offset, v)

    [weights]
    kind = uniform            ; uniform | polynomial | exponential
    param = 0

    [run]
    seed = 0
    replicas = 1000
    horizon = 1.0
    window = 4
    boxes = 1,2,3
    times = 0.25,0.5,1.0
    site = 0
    sources = -2,2

    [initial]
    config = bg=zero; dev=0

    [function]
    support = [0]
    table = {0: 0, 1: 1}

    [measure]
    kind = product_bernoulli  ; product_bernoulli | point_mass
    p = 0.5
    config = bg=one; dev=

Tabulated models take ``radius`` and ``table = 000:0, 001:1.5, ...``.
Offsets and sites in dimension > 1 are written as tuples, e.g. ``(0,1):0.25``.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field

from spinsys.configurations import (
    Configuration,
    all_zero,
    parse_configuration,
    parse_sites,
)
from spinsys.errors import ConfigError
from spinsys.observables import LocalFunction, PointMass, ProductBernoulli
from spinsys.rate_models import RateFamily, WeightFamily, build_model

MODEL_KEYS = {
    "contact": {"lambda_c": float},
    "voter": {},
    "glauber": {"beta": float},
    "independent": {"birth": float, "death": float},
    "long_range_geometric": {"theta": float, "scale": float},
    "tabulated": {"radius": int},
}

_SECTIONS = {"model", "weights", "run", "initial", "function", "measure"}
_RUN_KEYS = {"seed", "replicas", "horizon", "window", "boxes", "times", "site", "sources"}


@dataclass
class ExperimentConfig:
    model: RateFamily
    weights: WeightFamily = field(default_factory=WeightFamily)
    seed: int = 0
    replicas: int = 1000
    horizon: float = 1.0
    window: int = 4
    boxes: tuple = (1, 2, 3)
    times: tuple = (0.25, 0.5, 1.0)
    site: tuple | None = None
    sources: tuple = ()
    initial: Configuration | None = None
    function: LocalFunction | None = None
    measure: object = None

    @property
    def dim(self) -> int:
        return self.model.dim

    def __post_init__(self):
        if self.initial is None:
            self.initial = all_zero(self.dim)
        if self.site is None:
            self.site = (0,) * self.dim

    def to_text(self) -> str:
        """INI text that parses back to an equal configuration."""
        cp = configparser.ConfigParser()
        cp.optionxform = str
        m = self.model
        model = {"kind": m.name, "dimension": str(m.dim)}
        for key in MODEL_KEYS[m.name]:
            model[key] = repr(getattr(m, key))
        if m.name == "tabulated":
            size = (2 * m.radius + 1) ** m.dim
            model["table"] = ", ".join(
                f"{format(k, f'0{size}b')}:{x!r}" for k, x in enumerate(m.table)
            )
        if m.declared_influence is not None:
            model["influence"] = ", ".join(
                f"{_site_text(o)}:{a!r}" for o, a in m.declared_influence
            )
        cp["model"] = model
        cp["weights"] = {"kind": self.weights.kind, "param": repr(self.weights.param)}
        cp["run"] = {
            "seed": str(self.seed),
            "replicas": str(self.replicas),
            "horizon": repr(self.horizon),
            "window": str(self.window),
            "boxes": ",".join(str(b) for b in self.boxes),
            "times": ",".join(repr(t) for t in self.times),
            "site": _site_text(self.site),
            "sources": ",".join(_site_text(s) for s in self.sources),
        }
        cp["initial"] = {"config": self.initial.to_text()}
        if self.function is not None:
            f = self.function
            cp["function"] = {
                "support": "[" + ",".join(_site_text(v) for v in f.support) + "]",
                "table": "{" + ", ".join(
                    f"{format(k, f'0{len(f.support)}b')}: {x!r}" for k, x in enumerate(f.table)
                ) + "}",
            }
        if isinstance(self.measure, ProductBernoulli):
            cp["measure"] = {"kind": "product_bernoulli", "p": repr(self.measure.p)}
        elif isinstance(self.measure, PointMass):
            cp["measure"] = {"kind": "point_mass", "config": self.measure.cfg.to_text()}
        import io

        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _site_text(v) -> str:
    if len(v) == 1:
        return str(v[0])
    return "(" + ",".join(str(c) for c in v) + ")"


def _get(section, key, conv, where, default=None, required=False):
    if key not in section:
        if required:
            raise ConfigError("missing required key", f"{where}.{key}")
        return default
    raw = section[key]
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad value {raw!r}: {exc}", f"{where}.{key}") from None


def _float_list(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _int_list(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


_PAIR = re.compile(r"\s*(\([^()]*\)|[^,:()]+)\s*:\s*([^,]+)")


def _offset_values(text, dim):
    out = {}
    for m in _PAIR.finditer(text):
        key = m.group(1).strip()
        site = parse_sites(key, dim)
        if len(site) != 1:
            raise ValueError(f"bad offset {key!r}")
        out[site[0]] = float(m.group(2))
    if not out and text.strip():
        raise ValueError("expected offset:value pairs")
    return out


def _table(text):
    out = {}
    for part in text.strip().strip("{}").split(","):
        if not part.strip():
            continue
        key, sep, val = part.partition(":")
        if not sep:
            raise ValueError(f"expected pattern:value in {part!r}")
        key = key.strip().strip("'\"")
        if key and set(key) - {"0", "1"}:
            raise ValueError(f"pattern {key!r} is not a bit string")
        out[key] = float(val)
    return out


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate INI text; raises :class:`ConfigError` with the location."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], "file") from None
    unknown = set(cp.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}", "file")
    if "model" not in cp:
        raise ConfigError("missing [model] section", "file")
    sec = cp["model"]
    kind = _get(sec, "kind", str, "model", required=True)
    if kind not in MODEL_KEYS:
        raise ConfigError(f"unknown model {kind!r}", "model.kind")
    dim = _get(sec, "dimension", int, "model", default=1)
    if dim < 1:
        raise ConfigError("dimension must be >= 1", "model.dimension")
    allowed = {"kind", "dimension", "influence", "table"} | set(MODEL_KEYS[kind])
    extra = set(sec) - allowed
    if extra:
        raise ConfigError(f"unexpected key(s) {sorted(extra)}", "model")
    params = {}
    for key, conv in MODEL_KEYS[kind].items():
        required = not (kind == "long_range_geometric" and key == "scale")
        val = _get(sec, key, conv, "model", required=required)
        if val is not None:
            params[key] = val
    if kind == "tabulated":
        params["table"] = _get(sec, "table", _table, "model", required=True)
    if "influence" in sec:
        params["declared_influence"] = _get(
            sec, "influence", lambda s: _offset_values(s, dim), "model"
        )
    try:
        model = build_model(kind, dim, **params)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc), "model") from None

    weights = WeightFamily()
    if "weights" in cp:
        w = cp["weights"]
        try:
            weights = WeightFamily(
                _get(w, "kind", str, "weights", default="uniform"),
                _get(w, "param", float, "weights", default=0.0),
            )
        except ValueError as exc:
            raise ConfigError(str(exc), "weights") from None

    run = cp["run"] if "run" in cp else {}
    extra = set(run) - _RUN_KEYS
    if extra:
        raise ConfigError(f"unexpected key(s) {sorted(extra)}", "run")
    kw = dict(
        seed=_get(run, "seed", int, "run", 0),
        replicas=_get(run, "replicas", int, "run", 1000),
        horizon=_get(run, "horizon", float, "run", 1.0),
        window=_get(run, "window", int, "run", 4),
        boxes=_get(run, "boxes", _int_list, "run", (1, 2, 3)),
        times=_get(run, "times", _float_list, "run", (0.25, 0.5, 1.0)),
    )
    if kw["replicas"] < 1:
        raise ConfigError("replicas must be >= 1", "run.replicas")
    if kw["horizon"] < 0:
        raise ConfigError("horizon must be >= 0", "run.horizon")
    if not kw["boxes"] or list(kw["boxes"]) != sorted(set(kw["boxes"])) or kw["boxes"][0] < 0:
        raise ConfigError("boxes must be increasing nonnegative radii", "run.boxes")
    if kw["window"] < kw["boxes"][-1]:
        raise ConfigError("window must contain the largest box", "run.window")
    site = _get(run, "site", lambda s: parse_sites(s, dim), "run", None)
    if site is not None:
        if len(site) != 1:
            raise ConfigError("expected exactly one site", "run.site")
        kw["site"] = site[0]
    kw["sources"] = tuple(_get(run, "sources", lambda s: parse_sites(s, dim), "run", ()))

    if "initial" in cp:
        kw["initial"] = _get(cp["initial"], "config",
                             lambda s: parse_configuration(s, dim), "initial", required=True)
    if "function" in cp:
        fs = cp["function"]
        support = _get(fs, "support", lambda s: parse_sites(s, dim), "function", required=True)
        table = _get(fs, "table", _table, "function", required=True)
        try:
            kw["function"] = LocalFunction.from_mapping(support, table)
        except ValueError as exc:
            raise ConfigError(str(exc), "function.table") from None
    if "measure" in cp:
        ms = cp["measure"]
        mkind = _get(ms, "kind", str, "measure", required=True)
        if mkind == "product_bernoulli":
            try:
                kw["measure"] = ProductBernoulli(_get(ms, "p", float, "measure", required=True))
            except ValueError as exc:
                raise ConfigError(str(exc), "measure.p") from None
        elif mkind == "point_mass":
            kw["measure"] = PointMass(_get(ms, "config", lambda s: parse_configuration(s, dim),
                                           "measure", required=True))
        else:
            raise ConfigError(f"unknown measure {mkind!r}", "measure.kind")
    return ExperimentConfig(model, weights, **kw)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(str(exc), str(path)) from None
    return parse_config(text)
