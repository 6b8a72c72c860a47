"""Run configuration: YAML documents mapped onto strict dataclasses.

Unknown keys are errors; every error names the offending key path.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, fields, replace
from pathlib import Path
from typing import Any

import yaml

from .errors import ConfigError
from .lattice import CavityField, FieldKind
from .profiles import DetectorSpec, GaussianProfile, GaussianSwitching, PointLike, SuddenSwitching
from .series import DEFAULT_TOL

SWEEP_AXES = ("T", "sigma", "Omega", "lam", "L", "m")


def _strict(d: Any, allowed: set, path: str) -> dict:
    if d is None:
        return {}
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(d).__name__}")
    for k in d:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}: unknown key (allowed: {', '.join(sorted(allowed))})")
    return d


def _num(d: dict, key: str, path: str, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}: required")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
    if kind is int and int(v) != v:
        raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    return kind(v)


def _keys(cls) -> set:
    return {f.name for f in fields(cls)}


# ---------------------------------------------------------------- blocks


def parse_field(d: Any, path: str = "field") -> CavityField:
    d = _strict(d, {"n", "L", "m", "kind"}, path)
    kind = d.get("kind", "real")
    try:
        kind = FieldKind(kind)
    except ValueError:
        raise ConfigError(f"{path}.kind: must be real, complex or spinor, got {kind!r}") from None
    try:
        return CavityField(_num(d, "n", path, kind=int), _num(d, "L", path, 1.0), _num(d, "m", path, 0.0), kind)
    except ConfigError as e:
        raise ConfigError(f"{path}: {e}") from None


def parse_switching(d: Any, path: str):
    d = _strict(d, {"type", "T", "t0", "window"}, path)
    typ = d.get("type", "sudden")
    if typ == "sudden":
        if "window" in d:
            raise ConfigError(f"{path}.window: only valid for gaussian switching")
        t0 = d.get("t0")
        return SuddenSwitching(_num(d, "T", path), None if t0 is None else float(t0))
    if typ == "gaussian":
        if "t0" in d:
            raise ConfigError(f"{path}.t0: only valid for sudden switching")
        return GaussianSwitching(_num(d, "T", path), _num(d, "window", path, 8.0))
    raise ConfigError(f"{path}.type: must be sudden or gaussian, got {typ!r}")


def parse_profile(d: Any, path: str, n: int):
    d = _strict(d, {"type", "sigma", "x0"}, path)
    typ = d.get("type", "pointlike")
    x0 = d.get("x0", [0.0] * n)
    if not isinstance(x0, list) or len(x0) != n:
        raise ConfigError(f"{path}.x0: expected a list of {n} numbers")
    x0 = tuple(float(v) for v in x0)
    if typ == "pointlike":
        if "sigma" in d:
            raise ConfigError(f"{path}.sigma: only valid for gaussian profiles")
        return PointLike(x0)
    if typ == "gaussian":
        return GaussianProfile(_num(d, "sigma", path), x0)
    raise ConfigError(f"{path}.type: must be pointlike or gaussian, got {typ!r}")


def parse_detector(d: Any, path: str, n: int) -> tuple[str, DetectorSpec]:
    d = _strict(d, {"id", "model", "Omega", "lam", "switching", "profile"}, path)
    if "switching" not in d:
        raise ConfigError(f"{path}.switching: required")
    spec = DetectorSpec(
        _num(d, "Omega", path),
        _num(d, "lam", path),
        _num(d, "model", path, kind=int),
        parse_switching(d["switching"], f"{path}.switching"),
        parse_profile(d.get("profile"), f"{path}.profile", n),
    )
    return str(d.get("id", "d")), spec


# ---------------------------------------------------------------- computations


@dataclass
class VepConfig:
    cutoffs: list | int = 1000
    tol: float = DEFAULT_TOL
    renormalized: bool = True
    require_convergence: bool = False


@dataclass
class VnrpConfig:
    cutoffs: list | int = 8
    method: str = "auto"
    nodes: int = 64
    require_convergence: bool = False


@dataclass
class WickRunConfig:
    words: list = dc_field(default_factory=list)
    modes: list = dc_field(default_factory=list)
    points: dict = dc_field(default_factory=dict)
    Omega: float = 1.0
    oracle: bool = True


@dataclass
class DiagramsConfig:
    model: int | None = None
    order: int = 2
    in_state: dict = dc_field(default_factory=dict)
    out_state: dict = dc_field(default_factory=dict)


@dataclass
class OracleConfig:
    mode: str = "compare"
    count: int = 500
    seed: int = 20240611
    max_symbols: int = 8
    modes: list = dc_field(default_factory=list)
    lams: list = dc_field(default_factory=lambda: [1e-1, 1e-2, 1e-3])
    cap: int = 2
    steps: int | None = None
    method: str = "midpoint"


@dataclass
class SweepConfig:
    axis: str = "T"
    grid: list = dc_field(default_factory=list)
    cutoffs: list | int = 1000
    tol: float = DEFAULT_TOL


@dataclass
class OutputConfig:
    path: str | None = None
    format: str | None = None
    timing: bool = False


@dataclass
class RunConfig:
    field: CavityField | None
    detectors: dict
    vep: VepConfig = dc_field(default_factory=VepConfig)
    vnrp: VnrpConfig = dc_field(default_factory=VnrpConfig)
    wick: WickRunConfig = dc_field(default_factory=WickRunConfig)
    diagrams: DiagramsConfig = dc_field(default_factory=DiagramsConfig)
    oracle: OracleConfig = dc_field(default_factory=OracleConfig)
    sweep: SweepConfig = dc_field(default_factory=SweepConfig)
    output: OutputConfig = dc_field(default_factory=OutputConfig)

    @property
    def detector(self) -> DetectorSpec:
        if not self.detectors:
            raise ConfigError("detector: required for this computation")
        return next(iter(self.detectors.values()))

    def require_field(self) -> CavityField:
        if self.field is None:
            raise ConfigError("field: required for this computation")
        return self.field


_ALIASES = {"in": "in_state", "out": "out_state"}


def _section(cls, d: Any, path: str):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected a mapping")
    d = {_ALIASES.get(k, k): v for k, v in d.items()}
    allowed = _keys(cls)
    for k in d:
        if k not in allowed:
            shown = sorted({next((a for a, b in _ALIASES.items() if b == x), x) for x in allowed})
            raise ConfigError(f"{path}.{k}: unknown key (allowed: {', '.join(shown)})")
    obj = cls(**d)
    for f in fields(cls):
        v = getattr(obj, f.name)
        if f.name == "cutoffs":
            from .response import cutoff_schedule

            ok = isinstance(v, list) and all(isinstance(c, int) and not isinstance(c, bool) for c in v)
            if not (ok or (isinstance(v, int) and not isinstance(v, bool))):
                raise ConfigError(f"{path}.cutoffs: expected an integer or a list of integers, got {v!r}")
            try:
                cutoff_schedule(v)
            except ConfigError as e:
                raise ConfigError(f"{path}.cutoffs: {e}") from None
            continue
        default = getattr(cls(), f.name)
        if default is not None and v is not None and isinstance(default, (int, float)) and not isinstance(default, bool):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{path}.{f.name}: expected a number, got {v!r}")
        if isinstance(default, bool) and not isinstance(v, bool):
            raise ConfigError(f"{path}.{f.name}: expected true or false, got {v!r}")
        if isinstance(default, str) and not isinstance(v, str):
            raise ConfigError(f"{path}.{f.name}: expected a string, got {v!r}")
    return obj


TOP_KEYS = {"field", "detector", "detectors", "vep", "vnrp", "wick", "diagrams", "oracle", "sweep", "output"}


def parse_config(doc: Any) -> RunConfig:
    doc = _strict(doc, TOP_KEYS, "config")
    field = parse_field(doc["field"]) if "field" in doc else None
    n = field.n if field is not None else 1
    if "detector" in doc and "detectors" in doc:
        raise ConfigError("config: give either detector or detectors, not both")
    raw = doc.get("detectors", [doc["detector"]] if "detector" in doc else [])
    if not isinstance(raw, list):
        raise ConfigError("detectors: expected a list")
    dets: dict = {}
    for i, d in enumerate(raw):
        path = "detector" if "detector" in doc else f"detectors[{i}]"
        did, spec = parse_detector(d, path, n)
        if did in dets:
            raise ConfigError(f"{path}.id: duplicate detector id {did!r}")
        if field is not None:
            try:
                spec.check(field)
            except ConfigError as e:
                raise ConfigError(f"{path}: {e}") from None
        dets[did] = spec
    cfg = RunConfig(
        field,
        dets,
        _section(VepConfig, doc.get("vep"), "vep"),
        _section(VnrpConfig, doc.get("vnrp"), "vnrp"),
        _section(WickRunConfig, doc.get("wick"), "wick"),
        _section(DiagramsConfig, doc.get("diagrams"), "diagrams"),
        _section(OracleConfig, doc.get("oracle"), "oracle"),
        _section(SweepConfig, doc.get("sweep"), "sweep"),
        _section(OutputConfig, doc.get("output"), "output"),
    )
    if cfg.output.format not in (None, "csv", "json", "text"):
        raise ConfigError(f"output.format: must be csv, json or text, got {cfg.output.format!r}")
    if cfg.sweep.axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis: must be one of {', '.join(SWEEP_AXES)}, got {cfg.sweep.axis!r}")
    if cfg.oracle.mode not in ("compare", "evolve"):
        raise ConfigError(f"oracle.mode: must be compare or evolve, got {cfg.oracle.mode!r}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"config is not valid YAML: {e}") from None
    return parse_config(doc or {})


def with_overrides(cfg: RunConfig, **kw) -> RunConfig:
    return replace(cfg, **kw)
