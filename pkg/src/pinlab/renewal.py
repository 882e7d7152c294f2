"""Heavy-tailed inter-arrival laws, renewal mass tables, tilting and the
conditioned-renewal sampler."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import bisect
from scipy.special import logsumexp

from . import _dp, _sampling
from .errors import DensityOutOfRangeError, LawInvariantError, ParameterDomainError
from .paths_types import PathSample

SUM_TOL = 1e-14
MEAN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class InterArrivalLaw:
    """Law K(1..n_max) of the renewal increments.

    mean and rho_c describe the truncated law actually used by finite-size code;
    mean_ideal and rho_c_ideal belong to the untruncated power law (mean_ideal is
    inf and rho_c_ideal is 0 when alpha <= 1).
    """

    alpha: float
    n_max: int
    mass: np.ndarray
    log_mass: np.ndarray
    mean: float
    rho_c: float
    mean_ideal: float
    rho_c_ideal: float
    _logk: np.ndarray = field(repr=False)

    @property
    def logk(self) -> np.ndarray:
        """log K indexed by jump length, logk[0] = -inf."""
        return self._logk

    def K(self, n: int) -> float:
        return float(self.mass[n - 1]) if 1 <= n <= self.n_max else 0.0

    def check_invariants(self, shape_tol: float = 0.01) -> None:
        """Raise LawInvariantError unless K sums to 1, is positive, and has the
        n^-(1+alpha) tail over the last decade of support."""
        total = math.fsum(self.mass)
        if not abs(total - 1.0) <= SUM_TOL:
            raise LawInvariantError(f"sum of K is {total!r}, off by {total - 1.0:.3e}")
        if not np.all(self.mass > 0):
            raise LawInvariantError("K(n) must be positive on 1..n_max")
        if not np.allclose(np.exp(self.log_mass), self.mass, rtol=1e-12, atol=0):
            raise LawInvariantError("log_mass disagrees with mass")
        lo = max(1, self.n_max // 10)
        n = np.arange(lo, self.n_max + 1, dtype=np.float64)
        shape = self.log_mass[lo - 1 :] + (1 + self.alpha) * np.log(n)
        spread = math.expm1(shape.max() - shape.min())
        if spread >= shape_tol:
            raise LawInvariantError(f"tail shape K(n) n^(1+alpha) varies by {spread:.3%} over the last decade")


def _make_law(alpha, mass, log_mass) -> InterArrivalLaw:
    n_max = mass.size
    n = np.arange(1, n_max + 1, dtype=np.float64)
    mean = math.fsum(n * mass)
    if alpha > 1:
        with mpmath.workdps(30):
            mean_ideal = float(mpmath.zeta(alpha) / mpmath.zeta(1 + alpha))
        rho_c_ideal = 1.0 / mean_ideal
    else:
        mean_ideal, rho_c_ideal = math.inf, 0.0
    logk = np.concatenate(([-np.inf], log_mass))
    return InterArrivalLaw(float(alpha), int(n_max), mass, log_mass, mean, 1.0 / mean, mean_ideal, rho_c_ideal, logk)


def build_power_law(alpha: float, n_max: int) -> InterArrivalLaw:
    """K(n) = n^-(1+alpha) / Z over 1..n_max."""
    if not (alpha > 0) or not math.isfinite(alpha):
        raise ParameterDomainError(f"alpha must be positive, got {alpha!r}")
    if int(n_max) != n_max or n_max < 2:
        raise ParameterDomainError(f"n_max must be an integer >= 2, got {n_max!r}")
    n = np.arange(1, int(n_max) + 1, dtype=np.float64)
    logw = -(1.0 + alpha) * np.log(n)
    w = np.exp(logw)
    Z = math.fsum(w)
    mass = w / Z
    log_mass = logw - math.log(Z)
    law = _make_law(alpha, mass, log_mass)
    law.check_invariants()
    return law


def law_from_mass(alpha: float, mass, check: bool = True) -> InterArrivalLaw:
    """Wrap a user-supplied K(1..n_max); invariants are checked unless check=False."""
    mass = np.array(mass, dtype=np.float64)
    with np.errstate(divide="ignore"):
        log_mass = np.log(mass)
    law = _make_law(alpha, mass, log_mass)
    if check:
        law.check_invariants()
    return law


# ---------------------------------------------------------------- tables

def _require_size(law: InterArrivalLaw, N: int) -> None:
    if int(N) != N or N < 1:
        raise ParameterDomainError(f"N must be a positive integer, got {N!r}")
    if N > law.n_max:
        raise ParameterDomainError(f"N={N} exceeds the law's support n_max={law.n_max}")


def arrival_table(law: InterArrivalLaw, N: int) -> np.ndarray:
    """A[n, m] = log P(tau_m = n) for 0 <= m, n <= N (engine layout)."""
    _require_size(law, N)
    return _dp.log_table(law.logk, N)


def renewal_mass_table(law: InterArrivalLaw, N: int) -> np.ndarray:
    """logP[m][n] = log P(tau_m = n); -inf off support. A transposed view of
    arrival_table, so no copy is made."""
    return arrival_table(law, N).T


def log_renewal_function(law: InterArrivalLaw, N: int) -> np.ndarray:
    """log u(n) = log P(n in tau) for 0 <= n <= N by the one-dimensional recursion."""
    _require_size(law, N)
    lu = np.full(N + 1, -np.inf)
    lu[0] = 0.0
    logk = law.logk
    for n in range(1, N + 1):
        lu[n] = logsumexp(logk[n:0:-1] + lu[:n])
    return lu


# ---------------------------------------------------------------- tilting

@dataclass(frozen=True, eq=False)
class TiltedLaw:
    q: float
    base: InterArrivalLaw
    mass_q: np.ndarray
    mu_q: float
    sigma2_q: float
    log_laplace: float  # log sum K(n) e^{-qn}


def tilted_moments(law: InterArrivalLaw, q: float) -> tuple[float, float, float]:
    """(log E[e^{-q eta}], mean, variance) of the law tilted by e^{-q n}."""
    n = np.arange(1, law.n_max + 1, dtype=np.float64)
    lw = law.log_mass - q * n
    lz = float(logsumexp(lw))
    p = np.exp(lw - lz)
    mu = float(np.dot(p, n))
    var = float(np.dot(p, (n - mu) ** 2))
    return lz, mu, var


def tilt(law: InterArrivalLaw, q: float) -> TiltedLaw:
    if not q >= 0:
        raise ParameterDomainError(f"tilt parameter must be >= 0, got {q!r}")
    n = np.arange(1, law.n_max + 1, dtype=np.float64)
    lw = law.log_mass - q * n
    lz = float(logsumexp(lw))
    p = np.exp(lw - lz)
    p /= math.fsum(p)
    mu = float(np.dot(p, n))
    return TiltedLaw(float(q), law, p, mu, float(np.dot(p, (n - mu) ** 2)), lz)


def tilt_for_density(law: InterArrivalLaw, rho: float) -> TiltedLaw:
    """Tilt with mean 1/rho. q is found by bisection on the decreasing map q -> mu_q,
    with the bracket grown by doubling from [0, 1]."""
    target = 1.0 / rho if rho > 0 else math.inf
    if not (1.0 < target <= law.mean * (1 + 1e-15)):
        raise DensityOutOfRangeError(
            f"rho={rho!r} needs mean {target!r}, attainable range is (1, {law.mean!r}]"
        )
    if abs(target - law.mean) <= MEAN_TOL:
        return tilt(law, 0.0)

    def excess(q):
        return tilted_moments(law, q)[1] - target

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    q = bisect(excess, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)
    t = tilt(law, q)
    if abs(t.mu_q - target) > MEAN_TOL * max(1.0, target):
        raise DensityOutOfRangeError(f"tilt bisection missed mean {target!r} (got {t.mu_q!r})")
    return t


# ---------------------------------------------------------------- sampler

def sample_conditioned(law: InterArrivalLaw, N: int, m: int, rng: np.random.Generator,
                       table: np.ndarray | None = None) -> PathSample:
    """Exact draw from the renewal conditioned on tau_m = N.

    table is arrival_table(law, N') for some N' >= N (computed when omitted).
    """
    _require_size(law, N)
    if int(m) != m or not 1 <= m <= N:
        raise ParameterDomainError(f"need 1 <= m <= N, got m={m!r}, N={N}")
    if table is None:
        table = arrival_table(law, N)
    out = np.empty(m, dtype=np.int64)
    zeros = np.zeros(table.shape[0])
    _sampling.draw_contacts(table, law.logk, zeros, int(N), int(m), rng, out)
    return PathSample(int(N), out)


def sample_conditioned_batch(law: InterArrivalLaw, N: int, m: int, draws: int, rng: np.random.Generator,
                             table: np.ndarray | None = None, masks: bool = False):
    """draws conditioned samples; returns (eta1, eta2, masks-or-None) as integer arrays."""
    _require_size(law, N)
    if not 1 <= m <= N:
        raise ParameterDomainError(f"need 1 <= m <= N, got m={m!r}, N={N}")
    if masks and N > 62:
        raise ParameterDomainError("bit-mask output needs N <= 62")
    if table is None:
        table = arrival_table(law, N)
    cdf = np.zeros(m + 1)
    cdf[m] = 1.0
    ms = np.empty(draws, dtype=np.int64)
    e1 = np.empty(draws, dtype=np.int64)
    e2 = np.empty(draws, dtype=np.int64)
    mk = np.empty(draws if masks else 1, dtype=np.int64)
    _sampling.draw_batch(table, law.logk, np.zeros(table.shape[0]), int(N), cdf, int(draws), rng,
                         ms, e1, e2, mk, masks)
    return e1, e2, (mk if masks else None)


def sample_tilted_rejection(law: InterArrivalLaw, N: int, m: int, q: float, rng: np.random.Generator,
                            accepted: int, batch: int = 200_000) -> np.ndarray:
    """Test oracle: m i.i.d. K_q increments, kept when they sum to N.
    Returns an (accepted, m) array of increments."""
    t = tilt(law, q)
    support = min(law.n_max, N)
    p = t.mass_q[:support] / t.mass_q[:support].sum()  # lengths > N never survive
    cdf = np.cumsum(p)
    out = []
    got = 0
    while got < accepted:
        u = rng.random((batch, m))
        inc = np.searchsorted(cdf, u * cdf[-1], side="right") + 1
        keep = inc[inc.sum(axis=1) == N]
        out.append(keep)
        got += keep.shape[0]
    return np.concatenate(out)[:accepted]
