"""Experiment configuration: a YAML file validated into pydantic models.

Validation errors are re-raised as ConfigError carrying the dotted field path.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError
from .potentials import Potential, make_potential


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LawConfig(_Strict):
    alpha: float = Field(1.5, gt=0)
    n_max: int = Field(4096, ge=2)
    ideal: bool = False  # semi-analytic layer on the untruncated law


_POTENTIAL_PARAMS = {
    "zero": (),
    "affine": ("a", "b"),
    "concave_quadratic": ("a", "c_H"),
    "overtwist": ("chi",),
    "supercoil": ("chi", "w"),
}


class PotentialConfig(_Strict):
    kind: Literal["zero", "affine", "concave_quadratic", "overtwist", "supercoil"] = "zero"
    a: Optional[float] = None
    b: Optional[float] = None
    c_H: Optional[float] = Field(None, gt=0)
    chi: Optional[float] = Field(None, gt=0)
    w: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _params(self):
        need = _POTENTIAL_PARAMS[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"potential kind {self.kind!r} requires parameter {name!r}")
        for name in ("a", "b", "c_H", "chi", "w"):
            if name not in need and getattr(self, name) is not None:
                raise ValueError(f"parameter {name!r} is not used by potential kind {self.kind!r}")
        return self

    def build(self) -> Potential:
        return make_potential(self.kind, **{k: getattr(self, k) for k in _POTENTIAL_PARAMS[self.kind]})


class DisorderConfig(_Strict):
    dist: Literal["gaussian", "rademacher"] = "gaussian"
    beta: float = Field(0.0, ge=0)
    replicas: int = Field(1, ge=1)
    seed: Optional[int] = Field(None, ge=0)  # defaults to sampling.master_seed


class Linspace(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1)


def _sorted(v, name, strict=True):
    if len(v) == 0:
        raise ValueError(f"{name} must not be empty")
    a = np.asarray(v, dtype=float)
    bad = np.any(np.diff(a) <= 0) if strict else np.any(np.diff(a) < 0)
    if bad:
        raise ValueError(f"{name} must be sorted ascending without repeats")
    return v


class GridsConfig(_Strict):
    h_grid: Union[list[float], Linspace] = Field(default_factory=lambda: [0.0])
    rho_grid: list[float] = Field(default_factory=lambda: [0.2, 0.5, 0.8])
    sizes: list[int] = Field(default_factory=lambda: [256, 512, 1024])
    gamma_grid: list[float] = Field(default_factory=lambda: [0.1, 0.2, 0.4])
    # optional contact densities; each adds the h whose semi-analytic maximizer is that density
    h_from_density: list[float] = Field(default_factory=list)
    fd_step: float = Field(0.05, gt=0)  # step for centered differences in h

    @field_validator("h_grid")
    @classmethod
    def _h(cls, v):
        if isinstance(v, Linspace):
            v = np.linspace(v.start, v.stop, v.num).tolist()
        return _sorted(v, "h_grid")

    @field_validator("rho_grid")
    @classmethod
    def _rho(cls, v):
        _sorted(v, "rho_grid")
        if any(not 0 < r <= 1 for r in v):
            raise ValueError("rho_grid values must lie in (0, 1]")
        return v

    @field_validator("sizes")
    @classmethod
    def _sizes(cls, v):
        _sorted(v, "sizes")
        if v[0] < 1:
            raise ValueError("sizes must be positive")
        return v

    @field_validator("gamma_grid")
    @classmethod
    def _gamma(cls, v):
        _sorted(v, "gamma_grid")
        if any(g <= 0 for g in v):
            raise ValueError("gamma_grid values must be positive")
        return v

    @field_validator("h_from_density")
    @classmethod
    def _hd(cls, v):
        if any(not 0 < r < 1 for r in v):
            raise ValueError("h_from_density values must lie in (0, 1)")
        return v


class SamplingConfig(_Strict):
    draws: int = Field(200, ge=1)
    replicas: int = Field(1, ge=1)  # independent sampler streams at beta = 0
    master_seed: int = Field(0, ge=0)
    dump_contacts: bool = False


class OutputConfig(_Strict):
    directory: str = "out"
    format: Literal["csv", "json"] = "csv"


_UNITS = {"": 1, "b": 1, "k": 2**10, "kb": 2**10, "kib": 2**10, "m": 2**20, "mb": 2**20, "mib": 2**20,
          "g": 2**30, "gb": 2**30, "gib": 2**30}


class CapsConfig(_Strict):
    max_N: int = Field(4096, ge=1)  # homogeneous tables
    max_N_disordered: int = Field(1024, ge=1)  # tables built once per disorder replica
    max_memory: Union[int, str] = 3 * 2**30
    cache: bool = True

    @field_validator("max_memory")
    @classmethod
    def _mem(cls, v):
        if isinstance(v, int):
            return v
        m = re.fullmatch(r"\s*([0-9.]+)\s*([A-Za-z]*)\s*", v)
        if not m or m.group(2).lower() not in _UNITS:
            raise ValueError(f"cannot parse memory size {v!r}")
        return int(float(m.group(1)) * _UNITS[m.group(2).lower()])


class FitsConfig(_Strict):
    g_window: Optional[tuple[float, float]] = None
    pinning_window: tuple[float, float] = (1e-4, 1e-2)
    kink_window: tuple[float, float] = (1e-3, 1e-1)
    delocalization_window: tuple[float, float] = (1e-4, 1e-2)
    points: int = Field(12, ge=3)
    backend: Literal["ideal", "truncated"] = "ideal"
    tolerance: float = Field(0.1, gt=0)  # relative tolerance reported as pass/fail


class OracleConfig(_Strict):
    sizes: list[int] = Field(default_factory=lambda: [6, 10, 14])
    alphas: list[float] = Field(default_factory=lambda: [0.7, 1.5])
    h_values: list[float] = Field(default_factory=lambda: [-0.5, 0.0, 0.8])
    betas: list[float] = Field(default_factory=lambda: [0.0, 1.0])
    seed: int = 7
    tolerance: float = 1e-9
    corrupt_k: Optional[float] = None  # multiply K by this factor (detector self-test)

    @field_validator("sizes")
    @classmethod
    def _n(cls, v):
        if not v or any(not 1 <= n <= 16 for n in v):
            raise ValueError("oracle sizes must lie in 1..16")
        return v


class ExperimentConfig(_Strict):
    law: LawConfig = Field(default_factory=LawConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    disorder: DisorderConfig = Field(default_factory=DisorderConfig)
    grids: GridsConfig = Field(default_factory=GridsConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    caps: CapsConfig = Field(default_factory=CapsConfig)
    fits: FitsConfig = Field(default_factory=FitsConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    extrapolation: Literal["logN", "invN"] = "logN"

    @model_validator(mode="after")
    def _cross(self):
        if self.grids.sizes[-1] > self.law.n_max:
            raise ValueError(f"grids.sizes: largest size {self.grids.sizes[-1]} exceeds law.n_max={self.law.n_max}")
        return self

    @property
    def disorder_seed(self) -> int:
        return self.sampling.master_seed if self.disorder.seed is None else self.disorder.seed


def _path(loc) -> str:
    return ".".join(str(p) for p in loc if not str(p).startswith("function-after"))


def from_dict(data: dict | None) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as exc:
        err = exc.errors()[0]
        raise ConfigError(err["msg"], _path(err["loc"]) or "config") from None


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML: {exc}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    return from_dict(data)
