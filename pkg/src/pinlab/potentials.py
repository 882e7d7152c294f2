"""Concave energy densities H and the weights Psi(m, N) = Q(m, N) exp(N H(m/N))."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import bisect
from scipy.special import expit, gammaln, log_expit, logsumexp, xlogy

from .errors import ParameterDomainError

LOG2 = math.log(2.0)


def _check_closed(rho):
    if not (0.0 <= rho <= 1.0):
        raise ParameterDomainError(f"rho must lie in [0, 1], got {rho!r}")


def _check_open(rho):
    if not (0.0 < rho < 1.0):
        raise ParameterDomainError(f"H' is evaluated on (0, 1) only, got {rho!r}")


class Potential:
    """Base class. Subclasses implement _H (on (0,1]) and, when available, _dH."""

    kind = "custom"
    has_derivative = True

    def H(self, rho: float) -> float:
        _check_closed(rho)
        if rho == 0.0:
            return self.H_at_0
        return self._H(float(rho))

    def dH(self, rho: float) -> float:
        _check_open(rho)
        return self._dH(float(rho))

    def dH_closed(self, rho: float) -> float:
        """H' extended to the endpoints by its one-sided limits."""
        if rho == 0.0:
            return self.Hprime_at_0
        if rho == 1.0:
            return self.Hprime_at_1
        return self.dH(rho)

    @property
    def H_at_1(self) -> float:
        return self._H(1.0)

    @property
    def Hprime_at_1(self) -> float:
        return self._dH(1.0)

    @property
    def is_trivial(self) -> bool:
        """H'' = 0 identically."""
        return False

    c_H = None

    def params(self) -> dict:
        return {}


@dataclass(frozen=True)
class Zero(Potential):
    kind = "zero"
    H_at_0 = 0.0
    Hprime_at_0 = 0.0

    def _H(self, rho):
        return 0.0

    def _dH(self, rho):
        return 0.0

    @property
    def is_trivial(self):
        return True


@dataclass(frozen=True)
class Affine(Potential):
    """H(rho) = a rho + b, so Psi = exp(a m + b N)."""

    a: float
    b: float
    kind = "affine"

    @property
    def H_at_0(self):
        return self.b

    @property
    def Hprime_at_0(self):
        return self.a

    def _H(self, rho):
        return self.a * rho + self.b

    def _dH(self, rho):
        return self.a

    @property
    def is_trivial(self):
        return True

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class ConcaveQuadratic(Potential):
    """H(rho) = a rho - c_H rho^2 / 2, the finite-slope test potential."""

    a: float
    c_H: float
    kind = "concave_quadratic"
    H_at_0 = 0.0

    def __post_init__(self):
        if not self.c_H > 0:
            raise ParameterDomainError("c_H must be positive")

    @property
    def Hprime_at_0(self):
        return self.a

    def _H(self, rho):
        return self.a * rho - 0.5 * self.c_H * rho * rho

    def _dH(self, rho):
        return self.a - self.c_H * rho

    def params(self):
        return {"a": self.a, "c_H": self.c_H}


@dataclass(frozen=True)
class Overtwist(Potential):
    """H(rho) = -chi (1 - rho)^2 / rho."""

    chi: float
    kind = "overtwist"
    H_at_0 = -math.inf
    Hprime_at_0 = math.inf

    def __post_init__(self):
        if not self.chi > 0:
            raise ParameterDomainError("chi must be positive")

    def _H(self, rho):
        return -self.chi * (1.0 - rho) ** 2 / rho

    def _dH(self, rho):
        return self.chi * (1.0 - rho * rho) / (rho * rho)

    def params(self):
        return {"chi": self.chi}


# ------------------------------------------------------------- supercoil

def supercoil_psi(chi: float, w: float, zeta, rho: float):
    """psi(zeta, rho) with zeta log zeta = 0 at zeta = 0."""
    zeta = np.asarray(zeta, dtype=np.float64)
    r = rho - zeta
    out = zeta * w - rho * LOG2 - chi * (1.0 - rho - zeta) ** 2 / rho + rho * math.log(rho) - xlogy(zeta, zeta) - xlogy(r, r)
    return out if out.ndim else float(out)


def supercoil_dzeta(chi: float, w: float, zeta: float, rho: float) -> float:
    return w + 2.0 * chi * (1.0 - rho - zeta) / rho - math.log(zeta) + math.log(rho - zeta)


@dataclass(frozen=True)
class SupercoilInner:
    zeta0: float
    psi_value: float
    q_prefactor: float
    t: float  # zeta0 / rho
    log_1mt: float  # log(1 - t) = log((rho - zeta0) / rho)


def supercoil_inner(chi: float, w: float, rho: float) -> SupercoilInner:
    """Maximize psi(., rho) over (0, rho).

    With zeta = rho t and s = logit t the stationarity condition reads
    s = w + 2 chi (1 - rho - rho t(s)) / rho, whose right side is decreasing in s
    and confined to [w + 2chi(1-2rho)/rho, w + 2chi(1-rho)/rho]; bisection on s
    therefore has an explicit bracket and resolves both zeta0 and rho - zeta0 to
    full relative precision.
    """
    if not (0.0 < rho <= 1.0):
        raise ParameterDomainError(f"rho must lie in (0, 1], got {rho!r}")

    def F(s):
        return w + 2.0 * chi * (1.0 - rho - rho * expit(s)) / rho - s

    lo = w + 2.0 * chi * (1.0 - 2.0 * rho) / rho
    hi = w + 2.0 * chi * (1.0 - rho) / rho
    if F(lo) <= 0.0:
        s = lo
    elif F(hi) >= 0.0:
        s = hi
    else:
        s = bisect(F, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    log_t = float(log_expit(s))
    log_1mt = float(log_expit(-s))  # log(1 - t), kept exact when rho - zeta0 underflows
    zeta = rho * math.exp(log_t)
    r = rho * math.exp(log_1mt)
    lr = math.log(rho)
    psi = (zeta * w - rho * LOG2 - chi * (1.0 - rho - zeta) ** 2 / rho + rho * lr
           - zeta * (lr + log_t) - r * (lr + log_1mt))
    # rho / (zeta r |psi''|) with |psi''| = 2 chi / rho + 1/zeta + 1/r
    q = math.sqrt(rho / (2.0 * chi * zeta * r / rho + r + zeta))
    t = math.exp(log_t)
    return SupercoilInner(zeta, psi, q, t, log_1mt)


@dataclass(frozen=True)
class Supercoil(Potential):
    """H(rho) = sup over zeta in [0, rho] of psi(zeta, rho)."""

    chi: float
    w: float
    kind = "supercoil"
    H_at_0 = -math.inf
    Hprime_at_0 = math.inf

    def __post_init__(self):
        if not (self.chi > 0 and self.w > 0):
            raise ParameterDomainError("chi and w must be positive")

    def inner(self, rho):
        return supercoil_inner(self.chi, self.w, rho)

    def _H(self, rho):
        return self.inner(rho).psi_value

    def _dH(self, rho):
        # envelope theorem: d/drho of psi at fixed zeta = zeta0
        inn = self.inner(rho)
        z = inn.zeta0
        return (-LOG2 + self.chi * (1.0 - rho - z) * (1.0 + rho - z) / (rho * rho)
                - inn.log_1mt)

    def params(self):
        return {"chi": self.chi, "w": self.w}


class CustomPotential(Potential):
    """User-supplied concave H without a derivative; maximizations use golden section."""

    kind = "custom"
    has_derivative = False

    def __init__(self, H: Callable[[float], float], H_at_0: float | None = None):
        self._fn = H
        self.H_at_0 = float(H(0.0)) if H_at_0 is None else H_at_0
        self.Hprime_at_0 = math.nan

    def _H(self, rho):
        return float(self._fn(rho))

    def _dH(self, rho):
        raise NotImplementedError("CustomPotential has no analytic derivative")

    @property
    def Hprime_at_1(self):
        return math.nan


def H_eval(p: Potential, rho: float) -> float:
    return p.H(rho)


def H_prime(p: Potential, rho: float) -> float:
    return p.dH(rho)


def make_potential(kind: str, **params) -> Potential:
    kinds = {"zero": Zero, "affine": Affine, "concave_quadratic": ConcaveQuadratic,
             "overtwist": Overtwist, "supercoil": Supercoil}
    if kind not in kinds:
        raise ParameterDomainError(f"unknown potential kind {kind!r}")
    return kinds[kind](**params)


# ------------------------------------------------------------- Psi

Q_MODES = ("unit", "overtwist_exact", "supercoil_exact", "custom")


@dataclass(frozen=True, eq=False)
class PsiFactor:
    """Psi(m, N) for a potential.

    q_mode 'unit' means Q = 1 (log Psi = N H(m/N)); the exact modes evaluate the
    closed-form circular-DNA weights; 'custom' adds a user table log_q[N][m].
    """

    potential: Potential
    q_mode: str = "unit"
    log_q: Callable[[int, int], float] | None = None
    _rows: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.q_mode not in Q_MODES:
            raise ParameterDomainError(f"unknown q_mode {self.q_mode!r}")
        if self.q_mode == "overtwist_exact" and not isinstance(self.potential, Overtwist):
            raise ParameterDomainError("overtwist_exact needs an Overtwist potential")
        if self.q_mode == "supercoil_exact" and not isinstance(self.potential, Supercoil):
            raise ParameterDomainError("supercoil_exact needs a Supercoil potential")
        if self.q_mode == "custom" and self.log_q is None:
            raise ParameterDomainError("custom q_mode needs a log_q callable")

    def log_psi(self, m: int, N: int) -> float:
        if not (1 <= m <= N):
            raise ParameterDomainError(f"need 1 <= m <= N, got m={m}, N={N}")
        return float(self.row(N)[m])

    def row(self, N: int) -> np.ndarray:
        """log Psi(m, N) for m = 0..N, with -inf at m = 0 (no contact at N is impossible)."""
        r = self._rows.get(N)
        if r is None:
            r = self._compute_row(int(N))
            r.setflags(write=False)
            self._rows[N] = r
        return r

    def _compute_row(self, N):
        m = np.arange(N + 1, dtype=np.float64)
        out = np.full(N + 1, -np.inf)
        mm = m[1:]
        p = self.potential
        if self.q_mode == "overtwist_exact":
            out[1:] = -p.chi * (N - mm) ** 2 / mm
        elif self.q_mode == "supercoil_exact":
            for k in range(1, N + 1):
                out[k] = supercoil_log_psi_exact(p.chi, p.w, k, N)
        else:
            out[1:] = _nH_row(p, N)
            if self.q_mode == "custom":
                out[1:] += np.array([self.log_q(int(k), N) for k in range(1, N + 1)])
        return out

    def log_Q(self, m: int, N: int) -> float:
        return self.log_psi(m, N) - N * self.potential.H(m / N)


def _nH_row(p: Potential, N: int) -> np.ndarray:
    mm = np.arange(1, N + 1, dtype=np.float64)
    if isinstance(p, Zero):
        return np.zeros(N)
    if isinstance(p, Affine):
        return p.a * mm + p.b * N
    if isinstance(p, ConcaveQuadratic):
        return p.a * mm - 0.5 * p.c_H * mm * mm / N
    if isinstance(p, Overtwist):
        return -p.chi * (N - mm) ** 2 / mm
    return np.array([N * p.H(k / N) for k in range(1, N + 1)])


def supercoil_log_psi_exact(chi: float, w: float, m: int, N: int) -> float:
    """log of sum_{n=0}^m 2^-m C(m, n) exp(n w - chi (N - m - n)^2 / m)."""
    n = np.arange(m + 1, dtype=np.float64)
    terms = (-m * LOG2 + gammaln(m + 1.0) - gammaln(n + 1.0) - gammaln(m - n + 1.0)
             + n * w - chi * (N - m - n) ** 2 / m)
    return float(logsumexp(terms))


def supercoil_log_psi_laplace(chi: float, w: float, m: int, N: int) -> float:
    """Laplace fast path N H(m/N) + log q(m/N); not used by the acceptance checks."""
    rho = m / N
    inn = supercoil_inner(chi, w, rho)
    return N * inn.psi_value + math.log(inn.q_prefactor)


def default_psi(p: Potential) -> PsiFactor:
    """The exact Psi of each family: closed forms for the circular-DNA models, Q = 1 otherwise."""
    if isinstance(p, Overtwist):
        return PsiFactor(p, "overtwist_exact")
    if isinstance(p, Supercoil):
        return PsiFactor(p, "supercoil_exact")
    return PsiFactor(p, "unit")
