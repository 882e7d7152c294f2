"""Quenched disorder fields and replica bookkeeping."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError
from .rng import derived_seed, stream

DISTS = ("gaussian", "rademacher")


def log_mgf(dist: str, beta: float) -> float:
    """lambda(beta) = log E[exp(beta omega)]."""
    if dist == "gaussian":
        return 0.5 * beta * beta
    if dist == "rademacher":
        b = abs(beta)
        return b + math.log1p(math.exp(-2.0 * b)) - math.log(2.0)  # log cosh, overflow-safe
    raise ParameterDomainError(f"unknown disorder distribution {dist!r}")


@dataclass(frozen=True, eq=False)
class DisorderField:
    values: np.ndarray  # omega_1..omega_N
    beta: float
    dist: str
    seed: int

    @property
    def N(self) -> int:
        return int(self.values.size)

    @property
    def lambda_beta(self) -> float:
        return log_mgf(self.dist, self.beta)

    def site_weights(self, N: int | None = None) -> np.ndarray:
        """beta * omega_n for n = 0..N, with a zero placeholder at n = 0."""
        N = self.N if N is None else N
        if N > self.N:
            raise ParameterDomainError(f"field has {self.N} sites, {N} requested")
        w = np.zeros(N + 1)
        w[1:] = self.beta * self.values[:N]
        return w

    def with_beta(self, beta: float) -> "DisorderField":
        return DisorderField(self.values, float(beta), self.dist, self.seed)


def generate(dist: str, N: int, seed: int, beta: float = 1.0) -> DisorderField:
    """Deterministic in (dist, N, seed); a longer field extends a shorter one."""
    if dist not in DISTS:
        raise ParameterDomainError(f"unknown disorder distribution {dist!r}")
    if N < 1:
        raise ParameterDomainError("N must be >= 1")
    if beta < 0:
        raise ParameterDomainError("beta must be >= 0")
    rng = stream(seed)
    if dist == "gaussian":
        v = rng.standard_normal(N)
    else:
        v = np.where(rng.random(N) < 0.5, -1.0, 1.0)
    v.setflags(write=False)
    return DisorderField(v, float(beta), dist, int(seed))


def replica_seed(master_seed: int, replica: int) -> int:
    return derived_seed(master_seed, replica)


def replica_fields(dist: str, N: int, beta: float, master_seed: int, replicas: int) -> list[DisorderField]:
    return [generate(dist, N, replica_seed(master_seed, r), beta) for r in range(replicas)]


def annealed_bound_window(beta: float, dist: str = "gaussian") -> tuple[float, float]:
    """(-lambda(beta), 0): the window containing the quenched critical point."""
    if beta < 0:
        raise ParameterDomainError("beta must be >= 0")
    return (-log_mgf(dist, beta), 0.0)
