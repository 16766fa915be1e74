"""Experiment configuration: YAML loading, presets, validation and digests."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ..backgrounds import CwSpec, NoiseSpec, SolitonSpec
from ..spectral import Grid, build_grid

__all__ = [
    "BackgroundConfig",
    "ExperimentConfig",
    "ConfigError",
    "PRESETS",
    "load_config",
    "config_from_dict",
    "default_z_max",
]

MODES = ("simulate", "predict", "oracle", "scan")
BACKGROUNDS = ("soliton", "cw", "multisoliton")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _steps(start: float, stop: float, step: float, digits: int) -> list[float]:
    n = int(round((stop - start) / step))
    return [round(start + k * step, digits) for k in range(n + 1)]


THREE_SOLITONS = [{"A": 1.0, "center": c} for c in (-33.5, 0.0, 33.5)]

PRESETS: dict[str, dict[str, Any]] = {
    "baseline": {"mode": "simulate", "T": 32 * math.pi, "N": 1024, "dz": 0.0030},
    "table1": {
        "mode": "scan",
        "T": 32 * math.pi,
        "N": 1024,
        "dz_list": _steps(0.0040, 0.0060, 1e-4, 5),
    },
    "table2": {
        "mode": "scan",
        "N": 4096,
        "dz": 0.0043,
        "T_list": [397.0, 398.0, 399.0, 400.0, 128 * math.pi],
        "z_max": 2000.0,
        # the T=399 pair grows at ~0.0024 and clears the floor by ~1.2 decades
        "floor_margin": 1.0,
    },
    "fig3": {
        "mode": "scan",
        "T": 128 * math.pi,
        "N": 4096,
        "dz_list": _steps(0.0039, 0.0050, 1e-4, 5),
    },
    "fig4": {
        "mode": "scan",
        "T": 128 * math.pi,
        "N": 4096,
        "dz_list": _steps(0.00471, 0.00479, 1e-5, 6),
    },
    "multisoliton": {
        "mode": "scan",
        "T": 32 * math.pi,
        "N": 1024,
        "background": {"kind": "multisoliton", "solitons": THREE_SOLITONS},
        "dz_list": [0.0040, 0.0052, 0.0058],
    },
}


def default_z_max(T: float) -> float:
    """500 for windows up to ~32*pi, 2000 for the wide ~128*pi windows."""
    return 500.0 if T < 200.0 else 2000.0


@dataclass(frozen=True)
class BackgroundConfig:
    kind: str = "soliton"
    A: float = 1.0
    center: float = 0.0
    Omega_cw: float = 0.0
    solitons: tuple = ()

    def build(self):
        """The background object understood by the numerical modules."""
        if self.kind == "soliton":
            return SolitonSpec(self.A, self.center)
        if self.kind == "cw":
            return CwSpec(self.A, self.Omega_cw)
        return [SolitonSpec(**s) for s in self.solitons]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    Exactly one of ``dz`` / ``dz_list`` is used: a list (or ``T_list``)
    turns the experiment into a scan over ``dz`` or ``T``.
    """

    mode: str = "simulate"
    beta: float = -1.0
    gamma: float = 2.0
    T: float = 32 * math.pi
    N: int = 1024
    background: BackgroundConfig = field(default_factory=BackgroundConfig)
    sigma: float = 1e-10
    seed: int = 1
    dz: float | None = 0.0040
    dz_list: tuple[float, ...] | None = None
    T_list: tuple[float, ...] | None = None
    z_max: float | None = None
    record_every: int | None = None
    scheme: str = "lie"
    blowup_factor: float = 10.0
    floor_margin: float = 2.0
    exclusions: tuple[tuple[float, float], ...] | None = None
    methods: tuple[str, ...] = ("simulate", "predict")
    oracle_T: float | None = None
    oracle_N: int | None = None
    oracle_variant: str = "exact"
    oracle_max_n: int = 2048
    workers: int = 1
    out: str | None = None
    emit_spectrum: bool = False
    paper_case: str | None = None

    @property
    def grid(self) -> Grid:
        return build_grid(self.T, self.N)

    @property
    def effective_z_max(self) -> float:
        return self.z_max if self.z_max is not None else default_z_max(self.T)

    @property
    def noise(self) -> NoiseSpec:
        return NoiseSpec(self.sigma, self.seed)

    def points(self) -> list["ExperimentConfig"]:
        """Single-run configurations making up this experiment."""
        if self.T_list:
            return [replace(self, T=float(T), T_list=None, dz_list=None, mode="simulate") for T in self.T_list]
        if self.dz_list:
            return [replace(self, dz=float(d), dz_list=None, T_list=None, mode="simulate") for d in self.dz_list]
        return [self]

    def oracle_grid(self) -> Grid:
        """Grid for dense eigenanalysis; reduces ``T`` at fixed ``dt`` if needed."""
        if self.oracle_T is not None or self.oracle_N is not None:
            N = self.oracle_N or self.N
            T = self.oracle_T if self.oracle_T is not None else self.T * N / self.N
            return build_grid(T, N)
        if self.N <= self.oracle_max_n:
            return self.grid
        N = self.oracle_max_n
        return build_grid(self.T * N / self.N, N)

    def validate(self) -> "ExperimentConfig":
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.background.kind not in BACKGROUNDS:
            raise ConfigError(f"background kind must be one of {BACKGROUNDS}")
        if self.beta == 0:
            raise ConfigError("beta must be nonzero")
        if self.background.kind != "cw" and not self.beta * self.gamma < 0:
            raise ConfigError("soliton backgrounds need beta*gamma < 0")
        try:
            grid = self.grid
            for T in self.T_list or ():
                build_grid(T, self.N)
            self.noise
            self.background.build()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        dzs = list(self.dz_list or ([self.dz] if self.dz is not None else []))
        if not dzs:
            raise ConfigError("a step size dz or dz_list is required")
        if any(not d > 0 for d in dzs):
            raise ConfigError("step sizes must be positive")
        if not self.blowup_factor > 1:
            raise ConfigError("blowup_factor must exceed 1")
        if self.z_max is not None and not self.z_max > 0:
            raise ConfigError("z_max must be positive")
        if self.background.kind == "multisoliton":
            if not self.background.solitons:
                raise ConfigError("multisoliton background needs a solitons list")
            for s in self.background.solitons:
                if not -0.5 * grid.T < s.get("center", 0.0) <= 0.5 * grid.T:
                    raise ConfigError(f"soliton center {s.get('center')} outside the window")
        for m in self.methods:
            if m not in ("simulate", "predict", "oracle"):
                raise ConfigError(f"unknown method {m!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def digest(self) -> str:
        """SHA-256 of the physics-relevant fields (not outputs or parallelism)."""
        d = self.to_dict()
        for k in ("out", "emit_spectrum", "workers", "mode", "methods", "paper_case"):
            d.pop(k, None)
        blob = json.dumps(d, sort_keys=True, default=_jsonable)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serialisable: {type(x)}")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(v) for v in x)
    return x


def config_from_dict(data: dict[str, Any] | None) -> ExperimentConfig:
    """Build a validated config; ``paper_case`` expands a preset underneath."""
    data = dict(data or {})
    case = data.get("paper_case")
    if case is not None:
        if case not in PRESETS:
            raise ConfigError(f"unknown paper_case {case!r}; choose from {sorted(PRESETS)}")
        preset = copy.deepcopy(PRESETS[case])
        # an explicit single value overrides the preset's sweep over it
        if "dz" in data and "dz_list" not in data:
            preset.pop("dz_list", None)
        if "T" in data and "T_list" not in data:
            preset.pop("T_list", None)
        data = _merge(preset, data)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    bg = data.pop("background", None) or {}
    if isinstance(bg, str):
        bg = {"kind": bg}
    bg_known = {f.name for f in fields(BackgroundConfig)}
    if set(bg) - bg_known:
        raise ConfigError(f"unknown background keys: {sorted(set(bg) - bg_known)}")
    if "solitons" in bg:
        bg["solitons"] = tuple(dict(s) for s in bg["solitons"])
    kw = {k: _tuplify(v) for k, v in data.items()}
    if "dz_list" in kw or "T_list" in kw:
        kw.setdefault("dz", None if "dz_list" in kw else ExperimentConfig.dz)
    try:
        cfg = ExperimentConfig(background=BackgroundConfig(**bg), **kw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def load_config(path: str | Path | None, **overrides) -> ExperimentConfig:
    """Read a YAML config and apply non-``None`` keyword overrides."""
    data: dict[str, Any] = {}
    if path is not None:
        with open(path) as fh:
            data = yaml.safe_load(fh) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    if overrides.get("dz") is not None:
        data.pop("dz_list", None)
    if overrides.get("T") is not None:
        data.pop("T_list", None)
    return config_from_dict(data)
