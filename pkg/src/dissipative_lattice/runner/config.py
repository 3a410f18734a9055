"""Run configuration: YAML parsing with line-numbered diagnostics."""
from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

import yaml

from ..evolve import BACKENDS, EvolutionGrid
from ..lattice import LatticeSpec, build_lattice, lattice_preset
from ..observables import DEFAULT_PAIRS, DEFAULT_TAU2_SITES
from ..spin_ops import ANISOTROPY_PRESETS

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepPoint",
    "parse_config",
    "dump_config",
    "normalize",
    "config_from_dict",
    "REFERENCE_FIELDS",
    "REFERENCE_NBARS",
    "REFERENCE_NBAR_RANGE",
]

# reference grid; occupations outside REFERENCE_NBAR_RANGE are flagged as extrapolated
REFERENCE_FIELDS = ((1.0, 1.0), (1.0, 0.1), (0.1, 1.0))
REFERENCE_NBARS = (0.0, 0.001, 0.005, 0.01, 0.05, 0.1)
REFERENCE_NBAR_RANGE = (0.0, 0.1)
INITIAL_STATES = ("separable", "w_state", "max_entangled")
FORMATS = ("csv", "json")

_SCHEMA = {
    "name": None,
    "lattice": {"preset": None, "n_sites": None, "edges": None, "center": None,
                "ring_order": None},
    "model": {"anisotropy": None, "J": None, "omega": None, "Gamma": None},
    "fields": None,
    "nbar": None,
    "initial_states": None,
    "points": None,
    "grid": {"t_max": None, "n_points": None, "rtol": None, "atol": None},
    "backend": None,
    "observables": {"pairs": None, "tau2_sites": None, "all_pairs": None},
    "output": {"dir": None, "format": None},
}
_POINT_KEYS = {"anisotropy", "B1", "B2", "nbar", "initial_state"}


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


@dataclass(frozen=True)
class SweepPoint:
    """One parameter tuple of a sweep."""

    anisotropy: str
    gamma: float
    delta: float
    B1: float
    B2: float
    nbar: float
    initial_state: str

    @property
    def key(self) -> tuple:
        return (self.anisotropy, self.B1, self.B2, self.nbar, self.initial_state)

    @property
    def reference_range(self) -> bool:
        lo, hi = REFERENCE_NBAR_RANGE
        return lo <= self.nbar <= hi

    @property
    def label(self) -> str:
        return (f"{self.anisotropy}_B1-{self.B1:g}_B2-{self.B2:g}"
                f"_nbar-{self.nbar:g}_{self.initial_state}")


def _anisotropy(spec) -> tuple[str, float, float]:
    if isinstance(spec, str):
        gd = ANISOTROPY_PRESETS.get(spec.lower())
        if gd is None:
            raise ValueError(f"unknown anisotropy preset {spec!r}")
        return spec.lower(), gd[0], gd[1]
    g, d = float(spec["gamma"]), float(spec["delta"])
    return spec.get("label") or f"g{g:g}_d{d:g}", g, d


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; see :func:`parse_config` for the schema."""

    name: str = "run"
    lattice_doc: object = "triangular7"
    anisotropy: tuple = ("ising",)
    J: float = 0.05
    omega: float = 1.0
    Gamma: float = 0.05
    fields: tuple = REFERENCE_FIELDS
    nbar: tuple = REFERENCE_NBARS
    initial_states: tuple = ("max_entangled",)
    points: tuple | None = None
    grid: EvolutionGrid = field(default_factory=EvolutionGrid)
    backend: str = "rk-adaptive"
    pairs: tuple = DEFAULT_PAIRS
    tau2_sites: tuple = DEFAULT_TAU2_SITES
    all_pairs: bool = False
    output_dir: str = "out"
    output_format: str = "csv"

    @property
    def lattice(self) -> LatticeSpec:
        return _lattice_from_doc(self.lattice_doc)

    @property
    def reported_pairs(self) -> tuple:
        if self.all_pairs:
            return tuple(self.lattice.pairs())
        return self.pairs

    def sweep_points(self) -> list[SweepPoint]:
        if self.points is not None:
            return list(self.points)
        out = []
        for an, (b1, b2), nb, st in itertools.product(
                self.anisotropy, self.fields, self.nbar, self.initial_states):
            label, g, d = _anisotropy(an)
            out.append(SweepPoint(label, g, d, b1, b2, nb, st))
        return out

    def to_dict(self) -> dict:
        doc = {
            "name": self.name,
            "lattice": self.lattice_doc,
            "model": {"anisotropy": [_plain(a) for a in self.anisotropy],
                      "J": self.J, "omega": self.omega, "Gamma": self.Gamma},
            "fields": [list(f) for f in self.fields],
            "nbar": list(self.nbar),
            "initial_states": list(self.initial_states),
            "grid": {"t_max": self.grid.t_max, "n_points": self.grid.n_points,
                     "rtol": self.grid.rtol, "atol": self.grid.atol},
            "backend": self.backend,
            "observables": {"pairs": [list(p) for p in self.pairs],
                            "tau2_sites": list(self.tau2_sites),
                            "all_pairs": self.all_pairs},
            "output": {"dir": self.output_dir, "format": self.output_format},
        }
        if self.points is not None:
            doc["points"] = [
                {"anisotropy": p.anisotropy if p.anisotropy in ANISOTROPY_PRESETS
                 else {"gamma": p.gamma, "delta": p.delta, "label": p.anisotropy},
                 "B1": p.B1, "B2": p.B2, "nbar": p.nbar, "initial_state": p.initial_state}
                for p in self.points]
        return doc

    def hash(self) -> str:
        return hashlib.sha256(dump_config(self).encode()).hexdigest()


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _lattice_from_doc(doc) -> LatticeSpec:
    if isinstance(doc, str):
        return lattice_preset(doc)
    if "preset" in doc:
        return lattice_preset(doc["preset"])
    return build_lattice(doc["n_sites"], doc["edges"], center=doc.get("center"),
                         ring_order=doc.get("ring_order") or ())


# -- parsing -----------------------------------------------------------------

def _line_index(node, path=(), out=None) -> dict:
    out = {} if out is None else out
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out[path + (k.value,)] = k.start_mark.line + 1
            _line_index(v, path + (k.value,), out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            out[path + (i,)] = item.start_mark.line + 1
            _line_index(item, path + (i,), out)
    return out


class _Ctx:
    def __init__(self, lines):
        self.lines = lines

    def line(self, path):
        path = tuple(path)
        while path and path not in self.lines:
            path = path[:-1]
        return self.lines.get(path)

    def fail(self, path, msg):
        raise ConfigError(msg, self.line(path))


def _check_keys(ctx, doc, schema, path=()):
    if not isinstance(doc, dict):
        ctx.fail(path, f"expected a mapping at '{'.'.join(map(str, path)) or '<root>'}'")
    for k, v in doc.items():
        if k not in schema:
            where = ".".join(map(str, path)) or "top level"
            ctx.fail(path + (k,), f"unknown key '{k}' in {where}")
        sub = schema[k]
        if isinstance(sub, dict) and isinstance(v, dict):
            _check_keys(ctx, v, sub, path + (k,))


def _number(ctx, path, value, lo=None, hi=None, lo_open=False):
    if isinstance(value, str):
        # YAML 1.1 reads exponent-only literals such as 1e-8 as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        ctx.fail(path, f"'{path[-1]}' must be a number, got {value!r}")
    value = float(value)
    if lo is not None and (value < lo or (lo_open and value == lo)):
        ctx.fail(path, f"'{path[-1]}' = {value:g} out of range "
                       f"({'>' if lo_open else '>='} {lo:g} required)")
    if hi is not None and value > hi:
        ctx.fail(path, f"'{path[-1]}' = {value:g} out of range (<= {hi:g} required)")
    return value


def _list(ctx, path, value):
    if not isinstance(value, list) or not value:
        ctx.fail(path, f"'{path[-1]}' must be a non-empty list")
    return value


def _parse_anisotropy(ctx, path, spec):
    if isinstance(spec, str):
        if spec.lower() not in ANISOTROPY_PRESETS:
            ctx.fail(path, f"unknown anisotropy preset '{spec}'; "
                           f"known: {', '.join(sorted(ANISOTROPY_PRESETS))}")
        return spec.lower()
    if isinstance(spec, dict):
        extra = set(spec) - {"gamma", "delta", "label"}
        if extra:
            ctx.fail(path + (sorted(extra)[0],), f"unknown key '{sorted(extra)[0]}' in anisotropy")
        if "gamma" not in spec or "delta" not in spec:
            ctx.fail(path, "explicit anisotropy needs both 'gamma' and 'delta'")
        out = {"gamma": _number(ctx, path + ("gamma",), spec["gamma"]),
               "delta": _number(ctx, path + ("delta",), spec["delta"])}
        if "label" in spec:
            out["label"] = str(spec["label"])
        return out
    ctx.fail(path, f"anisotropy must be a preset name or {{gamma, delta}}, got {spec!r}")


def _parse_lattice(ctx, doc):
    path = ("lattice",)
    if isinstance(doc, str):
        spec = doc
    elif isinstance(doc, dict) and set(doc) == {"preset"}:
        spec = doc["preset"]
    elif isinstance(doc, dict):
        if "preset" in doc:
            ctx.fail(path + ("preset",), "'preset' cannot be combined with an explicit edge list")
        for key in ("n_sites", "edges"):
            if key not in doc:
                ctx.fail(path, f"custom lattice needs '{key}'")
        spec = {"n_sites": int(_number(ctx, path + ("n_sites",), doc["n_sites"], lo=2)),
                "edges": [[int(i), int(j)] for i, j in _list(ctx, path + ("edges",), doc["edges"])]}
        if doc.get("center") is not None:
            spec["center"] = int(doc["center"])
        if doc.get("ring_order"):
            spec["ring_order"] = [int(s) for s in doc["ring_order"]]
    else:
        ctx.fail(path, "lattice must be a preset name or a mapping")
    try:
        _lattice_from_doc(spec)
    except (ValueError, KeyError, TypeError) as exc:
        ctx.fail(path, f"invalid lattice: {exc}")
    return spec


def config_from_dict(doc: dict, lines: dict | None = None) -> RunConfig:
    """Validate a plain mapping (already loaded) into a :class:`RunConfig`."""
    ctx = _Ctx(lines or {})
    doc = doc or {}
    _check_keys(ctx, doc, _SCHEMA)
    kw = {}
    if "name" in doc:
        kw["name"] = str(doc["name"])
    if "lattice" in doc:
        kw["lattice_doc"] = _parse_lattice(ctx, doc["lattice"])
    lattice = _lattice_from_doc(kw.get("lattice_doc", "triangular7"))

    model = doc.get("model") or {}
    if "anisotropy" in model:
        an = model["anisotropy"]
        an = an if isinstance(an, list) else [an]
        kw["anisotropy"] = tuple(_parse_anisotropy(ctx, ("model", "anisotropy", i), a)
                                 for i, a in enumerate(an))
    if "J" in model:
        kw["J"] = _number(ctx, ("model", "J"), model["J"])
    if "omega" in model:
        kw["omega"] = _number(ctx, ("model", "omega"), model["omega"], lo=0, lo_open=True)
    if "Gamma" in model:
        kw["Gamma"] = _number(ctx, ("model", "Gamma"), model["Gamma"], lo=0)

    if "fields" in doc:
        fields = []
        for i, pair in enumerate(_list(ctx, ("fields",), doc["fields"])):
            if not isinstance(pair, list) or len(pair) != 2:
                ctx.fail(("fields", i), "each field entry must be a pair [B1, B2]")
            fields.append((_number(ctx, ("fields", i), pair[0], lo=0),
                           _number(ctx, ("fields", i), pair[1], lo=0)))
        kw["fields"] = tuple(fields)
    if "nbar" in doc:
        nb = doc["nbar"] if isinstance(doc["nbar"], list) else [doc["nbar"]]
        kw["nbar"] = tuple(_number(ctx, ("nbar", i), v, lo=0) for i, v in enumerate(nb))
    if "initial_states" in doc:
        st = doc["initial_states"]
        st = st if isinstance(st, list) else [st]
        for i, s in enumerate(st):
            if s not in INITIAL_STATES:
                ctx.fail(("initial_states", i), f"unknown initial state '{s}'; "
                                                f"known: {', '.join(INITIAL_STATES)}")
        kw["initial_states"] = tuple(st)

    if doc.get("points") is not None:
        pts = []
        for i, p in enumerate(_list(ctx, ("points",), doc["points"])):
            path = ("points", i)
            if not isinstance(p, dict):
                ctx.fail(path, "each point must be a mapping")
            for k in p:
                if k not in _POINT_KEYS:
                    ctx.fail(path + (k,), f"unknown key '{k}' in point")
            missing = _POINT_KEYS - set(p)
            if missing:
                ctx.fail(path, f"point is missing {', '.join(sorted(missing))}")
            an = _parse_anisotropy(ctx, path + ("anisotropy",), p["anisotropy"])
            label, g, d = _anisotropy(an)
            if p["initial_state"] not in INITIAL_STATES:
                ctx.fail(path + ("initial_state",), f"unknown initial state '{p['initial_state']}'")
            pts.append(SweepPoint(label, g, d,
                                  _number(ctx, path + ("B1",), p["B1"], lo=0),
                                  _number(ctx, path + ("B2",), p["B2"], lo=0),
                                  _number(ctx, path + ("nbar",), p["nbar"], lo=0),
                                  p["initial_state"]))
        kw["points"] = tuple(pts)

    grid = doc.get("grid") or {}
    gkw = {}
    if "t_max" in grid:
        gkw["t_max"] = _number(ctx, ("grid", "t_max"), grid["t_max"], lo=0, lo_open=True)
    if "n_points" in grid:
        gkw["n_points"] = int(_number(ctx, ("grid", "n_points"), grid["n_points"], lo=1))
    for key in ("rtol", "atol"):
        if key in grid:
            gkw[key] = _number(ctx, ("grid", key), grid[key], lo=0, lo_open=True)
    kw["grid"] = EvolutionGrid(**gkw)

    if "backend" in doc:
        if doc["backend"] not in BACKENDS:
            ctx.fail(("backend",), f"unknown backend '{doc['backend']}'; "
                                   f"known: {', '.join(BACKENDS)}")
        kw["backend"] = doc["backend"]

    obs = doc.get("observables") or {}
    if "pairs" in obs:
        pairs = []
        for i, p in enumerate(_list(ctx, ("observables", "pairs"), obs["pairs"])):
            if (not isinstance(p, list) or len(p) != 2 or p[0] == p[1]
                    or not all(isinstance(s, int) and 1 <= s <= lattice.n_sites for s in p)):
                ctx.fail(("observables", "pairs", i),
                         f"pair {p!r} must be two distinct sites in 1..{lattice.n_sites}")
            pairs.append(tuple(p))
        kw["pairs"] = tuple(pairs)
    if "tau2_sites" in obs:
        sites = _list(ctx, ("observables", "tau2_sites"), obs["tau2_sites"])
        for i, s in enumerate(sites):
            if not isinstance(s, int) or not 1 <= s <= lattice.n_sites:
                ctx.fail(("observables", "tau2_sites", i), f"site {s!r} outside 1..{lattice.n_sites}")
        kw["tau2_sites"] = tuple(sites)
    if "all_pairs" in obs:
        kw["all_pairs"] = bool(obs["all_pairs"])

    out = doc.get("output") or {}
    if "dir" in out:
        kw["output_dir"] = str(out["dir"])
    if "format" in out:
        if out["format"] not in FORMATS:
            ctx.fail(("output", "format"), f"unknown output format '{out['format']}'")
        kw["output_format"] = out["format"]
    return RunConfig(**kw)


def parse_config(text: str) -> RunConfig:
    """Parse a YAML run configuration.

    Every key is optional; defaults reproduce the Ising, maximally entangled
    start, three field layouts and six bath occupations of the default grid
    with ``J = Gamma = 0.05``, ``omega = 1``.  Unknown keys and out-of-range
    values raise :class:`ConfigError` carrying the offending line.
    """
    try:
        node = yaml.compose(text)
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed YAML: {getattr(exc, 'problem', exc)}",
                          None if mark is None else mark.line + 1) from None
    lines = _line_index(node) if node is not None else {}
    return config_from_dict(doc or {}, lines)


def dump_config(cfg: RunConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def normalize(text: str) -> str:
    """Canonical text of a configuration document."""
    return dump_config(parse_config(text))
