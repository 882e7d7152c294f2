"""Exact finite-N partition functions and finite-size free-energy estimators."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import _dp
from .cache import TableCache, TableHeader
from .disorder import DisorderField, generate, replica_seed
from .errors import MemoryBudgetError, ParameterDomainError
from .potentials import PsiFactor
from .renewal import InterArrivalLaw

DEFAULT_MAX_BYTES = 3 * 2**30
BRUTE_FORCE_MAX_N = 16


@dataclass(frozen=True, eq=False)
class ConstrainedDP:
    """logZ[n, m] = log Z_{n,m,omega,beta} for 0 <= m <= n <= N.

    The site weight beta*omega_n is attached at the arrival point n, so the
    table also holds every smaller system: rows 0..n form the table of size n.
    """

    N: int
    law: InterArrivalLaw
    field: DisorderField | None
    logZ: np.ndarray
    site_weights: np.ndarray

    @property
    def beta(self) -> float:
        return 0.0 if self.field is None else self.field.beta

    def at_size(self, n: int) -> "ConstrainedDP":
        if not 1 <= n <= self.N:
            raise ParameterDomainError(f"size {n} outside 1..{self.N}")
        return ConstrainedDP(n, self.law, self.field, self.logZ[: n + 1, : n + 1], self.site_weights[: n + 1])

    def row(self, n: int | None = None) -> np.ndarray:
        n = self.N if n is None else n
        return self.logZ[n, : n + 1]


def check_budget(N: int, max_n: int | None = None, max_bytes: int | None = DEFAULT_MAX_BYTES) -> None:
    need = _dp.peak_nbytes(N)
    if max_n is not None and N > max_n:
        raise MemoryBudgetError(f"N={N} exceeds the configured cap max_N={max_n}", N=N, cap=max_n, nbytes=need)
    if max_bytes is not None and need > max_bytes:
        raise MemoryBudgetError(
            f"N={N} needs about {need / 2**20:.0f} MiB, over the budget of {max_bytes / 2**20:.0f} MiB",
            N=N, cap=max_bytes, nbytes=need)


def build_constrained(law: InterArrivalLaw, N: int, field: DisorderField | None = None, *,
                      max_n: int | None = None, max_bytes: int | None = DEFAULT_MAX_BYTES,
                      cache: TableCache | None = None) -> ConstrainedDP:
    if int(N) != N or N < 1:
        raise ParameterDomainError(f"N must be a positive integer, got {N!r}")
    if N > law.n_max:
        raise ParameterDomainError(f"N={N} exceeds n_max={law.n_max}")
    check_budget(N, max_n, max_bytes)
    if field is not None and field.beta == 0.0:
        w = None
        sw = np.zeros(N + 1)
    elif field is not None:
        sw = field.site_weights(N)
        w = sw
    else:
        w = None
        sw = np.zeros(N + 1)
    header = None
    table = None
    if cache is not None:
        header = TableHeader(law.alpha, law.n_max, int(N),
                             0 if w is None else field.seed, 0.0 if w is None else field.beta,
                             None if w is None else field.dist)
        table = cache.get(header)
    if table is None:
        table = _dp.log_table(law.logk, int(N), w)
        if cache is not None:
            cache.put(header, table)
    table.setflags(write=False)
    sw.setflags(write=False)
    return ConstrainedDP(int(N), law, field, table, sw)


def full_partition(dp: ConstrainedDP, psi: PsiFactor, h: float, N: int | None = None) -> float:
    """log Z^Psi_{N,omega,beta,h} by the contact-number decomposition."""
    N = dp.N if N is None else N
    m = np.arange(N + 1)
    return float(logsumexp(h * m + psi.row(N) + dp.logZ[N, : N + 1]))


def log_partition_h(dp: ConstrainedDP, psi: PsiFactor, h_values, N: int | None = None) -> np.ndarray:
    """full_partition over an array of h values."""
    N = dp.N if N is None else N
    m = np.arange(1, N + 1, dtype=np.float64)
    base = psi.row(N)[1:] + dp.logZ[N, 1 : N + 1]
    h = np.asarray(h_values, dtype=np.float64)
    return logsumexp(h[:, None] * m[None, :] + base[None, :], axis=1)


def contact_number_log_weights(dp: ConstrainedDP, psi: PsiFactor, h: float, N: int | None = None) -> np.ndarray:
    """Normalized log P(m) for m = 0..N under the Gibbs measure."""
    N = dp.N if N is None else N
    lw = h * np.arange(N + 1) + psi.row(N) + dp.logZ[N, : N + 1]
    return lw - logsumexp(lw)


# ------------------------------------------------------------ estimators

@dataclass
class FreeEnergyEstimate:
    h: float  # the density rho for g estimates
    beta: float
    estimates: list[tuple[int, int, float]]  # (N, replica, logZ/N)
    extrapolated: float
    stderr: float
    seeds: list[int] = field(default_factory=list)
    model: str = "logN"

    def at_size(self, N: int) -> np.ndarray:
        return np.array([v for n, _, v in self.estimates if n == N])


def extrapolate(sizes, values, model: str = "logN") -> tuple[float, float]:
    """Weighted least squares of values = f + a X(N); returns (f, standard error of f).

    X(N) = log(N)/N or 1/N; weights treat Var(logZ/N) as proportional to 1/N.
    """
    N = np.asarray(sizes, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if N.size == 1:
        return float(y[0]), 0.0
    if model == "logN":
        X = np.log(N) / N
    elif model == "invN":
        X = 1.0 / N
    else:
        raise ParameterDomainError(f"unknown extrapolation model {model!r}")
    W = N  # 1 / variance
    A = np.stack([np.ones_like(X), X], axis=1)
    AtW = A.T * W
    cov = np.linalg.inv(AtW @ A)
    coef = cov @ (AtW @ y)
    dof = N.size - 2
    if dof > 0:
        r = y - A @ coef
        s2 = float(np.dot(W * r, r)) / dof
        se = math.sqrt(max(s2 * cov[0, 0], 0.0))
    else:
        se = 0.0
    return float(coef[0]), se


def _combine(per_replica: np.ndarray, sizes, model) -> tuple[float, float]:
    """per_replica: (R, len(sizes)) array of logZ/N."""
    fits = [extrapolate(sizes, row, model) for row in per_replica]
    vals = np.array([f for f, _ in fits])
    if vals.size > 1:
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(vals.size))
    return float(vals[0]), fits[0][1]


def combine_linear(estimates, coeffs) -> tuple[float, float]:
    """Extrapolated value and standard error of sum_i c_i f_i for estimates sharing
    sizes, replicas and model.

    The combination is formed per replica and size before extrapolating, so the
    strong correlation between nearby grid points of one disorder realization is
    propagated exactly (the extrapolation is linear in the data).
    """
    first = estimates[0]
    sizes = sorted({n for n, _, _ in first.estimates})
    reps = sorted({r for _, r, _ in first.estimates})
    y = np.zeros((len(reps), len(sizes)))
    for e, c in zip(estimates, coeffs):
        if e.model != first.model or len(e.estimates) != len(first.estimates):
            raise ParameterDomainError("estimates do not share sizes, replicas and model")
        for n, r, v in e.estimates:
            y[reps.index(r), sizes.index(n)] += c * v
    return _combine(y, sizes, first.model)


def resolve_seeds(replicas: int, seeds=None, master_seed: int = 0) -> list[int]:
    if seeds is not None:
        seeds = [int(s) for s in seeds]
        if len(seeds) != replicas:
            raise ParameterDomainError("need one seed per replica")
        return seeds
    return [replica_seed(master_seed, r) for r in range(replicas)]


def map_replicas(law: InterArrivalLaw, N: int, beta: float, seeds, fn, *, dist: str = "gaussian",
                 threads: int = 1, max_n=None, max_bytes=DEFAULT_MAX_BYTES, cache=None) -> list:
    """Build the table for each replica and return [fn(dp, r)] in replica order.

    Tables are dropped as soon as fn returns, so with threads=1 only one is alive.
    """
    def one(r):
        fld = generate(dist, N, seeds[r], beta) if beta > 0 else None
        dp = build_constrained(law, N, fld, max_n=max_n, max_bytes=max_bytes, cache=cache)
        return fn(dp, r)

    if threads <= 1 or len(seeds) == 1:
        return [one(r) for r in range(len(seeds))]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(one, range(len(seeds))))


def _check_sizes(law, sizes):
    sizes = [int(s) for s in sizes]
    if not sizes or sorted(sizes) != sizes or len(set(sizes)) != len(sizes):
        raise ParameterDomainError("sizes must be a non-empty strictly ascending list")
    if sizes[-1] > law.n_max:
        raise ParameterDomainError(f"size {sizes[-1]} exceeds n_max={law.n_max}")
    return sizes


def estimate_f_grid(psi: PsiFactor, law: InterArrivalLaw, h_grid, beta: float, sizes, replicas: int = 1,
                    seeds=None, *, master_seed: int = 0, dist: str = "gaussian", model: str = "logN",
                    threads: int = 1, **build) -> list[FreeEnergyEstimate]:
    """Finite-size estimates of f_H(beta, h) on a grid of h, one table per replica."""
    sizes = _check_sizes(law, sizes)
    replicas = 1 if beta == 0 else replicas
    seeds = resolve_seeds(replicas, seeds, master_seed)
    hs = np.asarray(h_grid, dtype=np.float64)

    def fn(dp, r):
        return np.stack([log_partition_h(dp, psi, hs, N) / N for N in sizes], axis=1)  # (H, S)

    per = np.stack(map_replicas(law, sizes[-1], beta, seeds, fn, dist=dist, threads=threads, **build))  # (R, H, S)
    out = []
    for i, h in enumerate(hs):
        f, se = _combine(per[:, i, :], sizes, model)
        est = [(N, r, float(per[r, i, j])) for j, N in enumerate(sizes) for r in range(len(seeds))]
        out.append(FreeEnergyEstimate(float(h), float(beta), est, f, se, list(seeds), model))
    return out


def estimate_f(psi: PsiFactor, law: InterArrivalLaw, h: float, beta: float, sizes, replicas: int = 1,
               seeds=None, **kw) -> FreeEnergyEstimate:
    return estimate_f_grid(psi, law, [h], beta, sizes, replicas, seeds, **kw)[0]


def density_index(rho: float, N: int) -> int:
    """round(rho N), halves rounded up."""
    return int(math.floor(rho * N + 0.5))


def estimate_g_grid(law: InterArrivalLaw, rho_grid, beta: float, sizes, replicas: int = 1, seeds=None, *,
                    master_seed: int = 0, dist: str = "gaussian", model: str = "logN", threads: int = 1,
                    **build) -> list[FreeEnergyEstimate]:
    sizes = _check_sizes(law, sizes)
    replicas = 1 if beta == 0 else replicas
    seeds = resolve_seeds(replicas, seeds, master_seed)
    rhos = [float(r) for r in rho_grid]
    for r in rhos:
        if not 0 < r <= 1:
            raise ParameterDomainError(f"rho must lie in (0, 1], got {r!r}")

    def fn(dp, r):
        return np.array([[dp.logZ[N, density_index(rho, N)] / N for N in sizes] for rho in rhos])

    per = np.stack(map_replicas(law, sizes[-1], beta, seeds, fn, dist=dist, threads=threads, **build))
    out = []
    for i, rho in enumerate(rhos):
        f, se = _combine(per[:, i, :], sizes, model)
        est = [(N, r, float(per[r, i, j])) for j, N in enumerate(sizes) for r in range(len(seeds))]
        out.append(FreeEnergyEstimate(rho, float(beta), est, f, se, list(seeds), model))
    return out


def estimate_g(law: InterArrivalLaw, rho: float, beta: float, sizes, replicas: int = 1, seeds=None,
               **kw) -> FreeEnergyEstimate:
    return estimate_g_grid(law, [rho], beta, sizes, replicas, seeds, **kw)[0]


# ------------------------------------------------------------ brute force

@dataclass(frozen=True, eq=False)
class OracleResult:
    N: int
    log_z: float
    masks: np.ndarray  # bit p-1 set when p is a contact; bit N-1 always set
    log_prob: np.ndarray

    def contacts(self, i: int) -> np.ndarray:
        mask = int(self.masks[i])
        return np.array([p for p in range(1, self.N + 1) if mask >> (p - 1) & 1], dtype=np.int64)

    def prob_map(self) -> dict[int, float]:
        return dict(zip(self.masks.tolist(), np.exp(self.log_prob).tolist()))


def brute_force_oracle(law: InterArrivalLaw, psi: PsiFactor, field: DisorderField | None, h: float,
                       N: int) -> OracleResult:
    """Enumerate every contact set containing N and weight it directly."""
    if not 1 <= N <= BRUTE_FORCE_MAX_N:
        raise ParameterDomainError(f"brute force is limited to 1 <= N <= {BRUTE_FORCE_MAX_N}")
    if N > law.n_max:
        raise ParameterDomainError("N exceeds n_max")
    masks = np.arange(2 ** (N - 1), dtype=np.int64) | (1 << (N - 1))
    logk = law.logk
    beta_w = np.zeros(N + 1) if field is None else field.site_weights(N)
    last = np.zeros(masks.size, dtype=np.int64)
    m = np.zeros(masks.size, dtype=np.int64)
    lw = np.zeros(masks.size)
    for p in range(1, N + 1):
        c = (masks >> (p - 1)) & 1 == 1
        lw[c] += logk[p - last[c]] + beta_w[p]
        last[c] = p
        m[c] += 1
    lw += h * m + psi.row(N)[m]
    lz = float(logsumexp(lw))
    return OracleResult(N, lz, masks, lw - lz)
