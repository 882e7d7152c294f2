"""Exact Gibbs sampling of contact sets and path observables."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import binomtest

from . import _sampling
from .errors import ParameterDomainError
from .partition import ConstrainedDP, contact_number_log_weights
from .paths_types import PathSample
from .potentials import Affine, PsiFactor, Zero
from .rng import CHUNK, stream

__all__ = [
    "PathSample", "SampleBatch", "TailCurve", "observables", "sample_gibbs", "sample_gibbs_batch",
    "configuration_log_prob", "excursion_tail_curve", "exact_excursion_tail", "wilson_interval",
]


def observables(s: PathSample) -> tuple[float, float, float]:
    return s.contact_frac, s.eta1_frac, s.eta2_frac


def _m_cdf(dp, psi, h, N):
    p = np.exp(contact_number_log_weights(dp, psi, h, N))
    return np.cumsum(p)


def sample_gibbs(dp: ConstrainedDP, psi: PsiFactor, h: float, rng: np.random.Generator,
                 N: int | None = None) -> PathSample:
    """One exact draw: m from its marginal, then the increments backward from N."""
    N = dp.N if N is None else N
    cdf = _m_cdf(dp, psi, h, N)
    m = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    m = min(m, N)
    while m > 0 and cdf[m] == cdf[m - 1]:
        m -= 1
    out = np.empty(m, dtype=np.int64)
    _sampling.draw_contacts(dp.logZ, dp.law.logk, dp.site_weights, N, m, rng, out)
    return PathSample(N, out)


@dataclass(frozen=True, eq=False)
class SampleBatch:
    N: int
    m: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    masks: np.ndarray | None = None

    @property
    def contact_frac(self):
        return self.m / self.N

    @property
    def eta1_frac(self):
        return self.eta1 / self.N

    @property
    def eta2_frac(self):
        return self.eta2 / self.N

    def __len__(self):
        return int(self.m.size)


def sample_gibbs_batch(dp: ConstrainedDP, psi: PsiFactor, h: float, draws: int, seed: int, replica: int = 0,
                       N: int | None = None, masks: bool = False) -> SampleBatch:
    """draws exact samples. Chunk c of CHUNK draws uses the stream (seed, replica, c),
    so results do not depend on how the work is scheduled."""
    N = dp.N if N is None else N
    if masks and N > 62:
        raise ParameterDomainError("bit-mask output needs N <= 62")
    cdf = _m_cdf(dp, psi, h, N)
    ms = np.empty(draws, dtype=np.int64)
    e1 = np.empty(draws, dtype=np.int64)
    e2 = np.empty(draws, dtype=np.int64)
    mk = np.empty(draws if masks else 1, dtype=np.int64)
    for c, start in enumerate(range(0, draws, CHUNK)):
        stop = min(draws, start + CHUNK)
        rng = stream(seed, replica, c)
        sl = slice(start, stop)
        _sampling.draw_batch(dp.logZ, dp.law.logk, dp.site_weights, N, cdf, stop - start, rng,
                             ms[sl], e1[sl], e2[sl], mk[sl] if masks else mk, masks)
    return SampleBatch(N, ms, e1, e2, mk if masks else None)


def configuration_log_prob(dp: ConstrainedDP, psi: PsiFactor, h: float, contacts, N: int | None = None) -> float:
    """Log-probability the two-stage sampler assigns to a contact set (no sampling)."""
    N = dp.N if N is None else N
    c = np.asarray(contacts, dtype=np.int64)
    if c.size == 0 or c[-1] != N:
        return -math.inf
    m = c.size
    lp = float(contact_number_log_weights(dp, psi, h, N)[m])
    A, logk, w = dp.logZ, dp.law.logk, dp.site_weights
    prev = np.concatenate(([0], c[:-1]))
    for k in range(m, 0, -1):
        n, l = int(c[k - 1]), int(c[k - 1] - prev[k - 1])
        lp += logk[l] + A[n - l, k - 1] - (A[n, k] - w[n])
    return lp


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=confidence, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TailCurve:
    gamma: np.ndarray
    exceed: np.ndarray
    draws: int
    p_hat: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray


def excursion_tail_curve(dp: ConstrainedDP, psi: PsiFactor, h: float, gamma_grid, draws: int, seed: int,
                         replica: int = 0, N: int | None = None, batch: SampleBatch | None = None) -> TailCurve:
    """Monte Carlo P(eta_1 > gamma N) with Wilson 95% intervals."""
    N = dp.N if N is None else N
    if batch is None:
        batch = sample_gibbs_batch(dp, psi, h, draws, seed, replica, N)
    g = np.asarray(gamma_grid, dtype=np.float64)
    exceed = np.array([int(np.count_nonzero(batch.eta1 > gg * N)) for gg in g])
    n = len(batch)
    lo, hi = zip(*(wilson_interval(k, n) for k in exceed))
    return TailCurve(g, exceed, n, exceed / n, np.array(lo), np.array(hi))


def exact_excursion_tail(dp: ConstrainedDP, h: float, gamma_grid, N: int | None = None,
                         psi: PsiFactor | None = None) -> np.ndarray:
    """Exact log P(eta_1 > gamma N) for contact-local weights (Psi = 1 or affine).

    The event is split on the first increment exceeding L = floor(gamma N):
    restricted forward weight to a, the long jump a -> b, free weight from b to N.
    Every term is positive, so tiny tails keep full relative precision.
    """
    N = dp.N if N is None else N
    if psi is not None:
        p = psi.potential
        if isinstance(p, Affine):
            h = h + p.a
        elif not isinstance(p, Zero):
            raise ParameterDomainError("exact tail needs Psi = exp(a m + b N)")
    logk = dp.law.logk[: N + 1]
    w = dp.site_weights[: N + 1] + h
    # free weight from a contact at b to the end: B[N] = 0
    B = np.full(N + 1, -np.inf)
    B[N] = 0.0
    for b in range(N - 1, -1, -1):
        l = np.arange(1, N - b + 1)
        B[b] = logsumexp(logk[l] + w[b + l] + B[b + l])
    out = []
    for gg in np.asarray(gamma_grid, dtype=np.float64):
        L = int(math.floor(gg * N))
        if L >= N:
            out.append(-math.inf)
            continue
        F = np.full(N + 1, -np.inf)
        F[0] = 0.0
        for n in range(1, N + 1):
            l = np.arange(1, min(n, L) + 1)
            if l.size:
                F[n] = logsumexp(logk[l] + F[n - l]) + w[n]
        terms = []
        for a in range(0, N - L):
            b = np.arange(a + L + 1, N + 1)
            terms.append(F[a] + logk[b - a] + w[b] + B[b])
        out.append(float(logsumexp(np.concatenate(terms))) - B[0])
    return np.array(out)
