"""Run configurations: JSON file plus ``--set key=value`` overrides, resolved to dataclasses."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .errors import ConfigError
from .model import Method

ALL_METHOD_NAMES = ("OLS", "ML", "ReML", "LS-iGLM", "SVR-iGLM")


@dataclass
class SvrConfig:
    C: float = 1.0
    epsilon: float = 0.1
    standardize: bool = True
    mean_loss: bool = False


@dataclass
class SimulateConfig:
    kind: str = "timeseries"  # or "group"
    n: int = 1000
    block_len: int = 10
    cnr: float = 1.0
    cv: float = 1.0
    dt: float = 1.0
    rest: str = "complement"
    # group volume
    shape: list = field(default_factory=lambda: [16, 16, 16])
    n_per_group: int = 50
    radius: float = 4.0
    effect: float = 1.0
    fwhm: float = 3.0


@dataclass
class FitConfig:
    dataset_csv: Optional[str] = None
    design_csv: Optional[str] = None
    roles_json: Optional[str] = None
    obs_csv: Optional[str] = None
    images: Optional[str] = None
    mask: Optional[str] = None
    methods: list = field(default_factory=lambda: list(ALL_METHOD_NAMES))
    contrast: Optional[list] = None
    standardize: bool = True
    ml_noise: str = "identity"  # or "synthetic"
    synthetic: Optional[dict] = None
    reml_components: str = "iid"  # or "ar1"
    lambda_mix: Optional[list] = None
    rescale: bool = False
    svr: SvrConfig = field(default_factory=SvrConfig)


@dataclass
class InferConfig:
    fit_dir: Optional[str] = None
    permutations: int = 1000
    alphas: list = field(default_factory=lambda: [0.05, 0.01])
    resels: Optional[list] = None
    np_alpha: float = 0.05
    null_mask: Optional[str] = None
    bonferroni: bool = True
    methods: Optional[list] = None


@dataclass
class L1Config:
    n: int = 100
    trials: int = 100
    theta_diff: float = 1.0
    sigma_max: float = 2.0
    sigma_steps: int = 21


@dataclass
class ReportConfig:
    report_json: Optional[str] = None
    schema: Optional[str] = None


@dataclass
class RunConfig:
    command: str = ""
    seed: int = 0
    out_dir: str = "out"
    workers: int = 1
    simulate: SimulateConfig = field(default_factory=SimulateConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    infer: InferConfig = field(default_factory=InferConfig)
    l1study: L1Config = field(default_factory=L1Config)
    report: ReportConfig = field(default_factory=ReportConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _merge(obj, data: dict, path: str):
    names = {f.name: f for f in dataclasses.fields(obj)}
    for key, value in data.items():
        where = f"{path}.{key}" if path else key
        if key not in names:
            raise ConfigError(where, "unknown field")
        cur = getattr(obj, key)
        if dataclasses.is_dataclass(cur):
            if not isinstance(value, dict):
                raise ConfigError(where, "expected an object")
            _merge(cur, value, where)
        else:
            setattr(obj, key, value)


def merge_into(cfg: RunConfig, data: dict) -> RunConfig:
    _merge(cfg, data, "")
    return cfg


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: RunConfig, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, text = assignment.split("=", 1)
    parts = key.strip().split(".")
    nested: dict = {}
    cur = nested
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
    cur[parts[-1]] = _parse_value(text)
    _merge(cfg, nested, "")


def load_config(path: Optional[str], overrides=(), command: str = "") -> RunConfig:
    cfg = RunConfig(command=command)
    if path:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file not found: {p}")
        try:
            data = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{p}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be an object")
        data.pop("command", None)
        _merge(cfg, data, "")
    for o in overrides:
        apply_override(cfg, o)
    cfg.command = command
    validate_config(cfg)
    return cfg


def _positive(value, where, integer=False):
    ok = isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0
    if integer:
        ok = ok and float(value).is_integer()
    if not ok:
        raise ConfigError(where, f"must be a positive {'integer' if integer else 'number'}, got {value!r}")


def validate_config(cfg: RunConfig) -> None:
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed", "must be a 64-bit unsigned integer")
    _positive(cfg.workers, "workers", integer=True)
    s = cfg.simulate
    if s.kind not in ("timeseries", "group"):
        raise ConfigError("simulate.kind", "must be 'timeseries' or 'group'")
    _positive(s.cnr, "simulate.cnr")
    _positive(s.n, "simulate.n", integer=True)
    _positive(s.block_len, "simulate.block_len", integer=True)
    _positive(s.dt, "simulate.dt")
    f = cfg.fit
    for m in f.methods:
        try:
            Method.parse(m)
        except ValueError as exc:
            raise ConfigError("fit.methods", str(exc)) from None
    if f.ml_noise not in ("identity", "synthetic"):
        raise ConfigError("fit.ml_noise", "must be 'identity' or 'synthetic'")
    if f.reml_components not in ("iid", "ar1"):
        raise ConfigError("fit.reml_components", "must be 'iid' or 'ar1'")
    _positive(f.svr.C, "fit.svr.C")
    if not isinstance(f.svr.epsilon, (int, float)) or f.svr.epsilon < 0:
        raise ConfigError("fit.svr.epsilon", "must be non-negative")
    i = cfg.infer
    _positive(i.permutations, "infer.permutations", integer=True)
    for where, v in [("infer.np_alpha", i.np_alpha)] + [("infer.alphas", a) for a in i.alphas]:
        if not isinstance(v, (int, float)) or not 0 < v < 1:
            raise ConfigError(where, "must lie in (0, 1)")
    l1 = cfg.l1study
    _positive(l1.n, "l1study.n", integer=True)
    if l1.n % 2:
        raise ConfigError("l1study.n", "must be even")
    _positive(l1.trials, "l1study.trials", integer=True)
    _positive(l1.sigma_steps, "l1study.sigma_steps", integer=True)


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
