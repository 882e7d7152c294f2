"""Semi-analytic free energies at beta = 0.

g(rho) = inf_{x >= 0} (x + rho log E[exp(-x eta)]) is evaluated through its
minimizer x_rho, which solves rho E_x[eta] = 1 (E_x is the law tilted by
e^{-x n}). f_H(h) = sup_rho (h rho + H(rho) + g(rho)) is then a one-dimensional
concave maximization.

Two Laplace backends are available. The truncated one sums over 1..n_max and
is the object finite-size code converges to. The ideal one evaluates the
untruncated power law through polylogarithms and is what the exponent fits
need: their windows reach x ~ 1e-13, far below 1/n_max for any feasible table.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.optimize import bisect, minimize_scalar

from .errors import FitWindowError, ParameterDomainError
from .potentials import Potential, Zero
from .renewal import InterArrivalLaw

EPS = np.finfo(float).eps
X_FLOOR = 1e-300
DPS = 30


def golden_max(fn, a: float, b: float, tol: float = 1e-13, maxiter: int = 500) -> tuple[float, float]:
    """Golden-section search for the maximum of a unimodal fn on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    fx = fn(x)
    cands = [(fx, x), (fc, c), (fd, d)]
    best = max(cands)
    return best[1], best[0]


@dataclass(frozen=True)
class GValue:
    g: float
    g_prime: float
    x: float


class GRhoEvaluator:
    """g(rho), g'(rho) and x_rho for one law; results are cached by rho and x."""

    def __init__(self, law: InterArrivalLaw, ideal: bool = False):
        self.law = law
        self.ideal = bool(ideal)
        a = law.alpha
        if self.ideal:
            self.rho_c = law.rho_c_ideal
            self.mean0 = law.mean_ideal
            with mpmath.workdps(DPS):
                self._zeta_s = mpmath.zeta(1 + a)
            self.log_K1 = -float(mpmath.log(self._zeta_s))
        else:
            self.rho_c = law.rho_c
            self.mean0 = law.mean
            self.log_K1 = float(law.log_mass[0])
            self._n = np.arange(1, law.n_max + 1, dtype=np.float64)
        self._lap: dict[float, tuple[float, float]] = {}
        self._g: dict[float, GValue] = {}

    # -- Laplace transform --------------------------------------------------
    def laplace(self, x: float) -> tuple[float, float]:
        """(log E[e^{-x eta}], E_x[eta]) for x >= 0."""
        r = self._lap.get(x)
        if r is None:
            r = self._laplace_ideal(x) if self.ideal else self._laplace_trunc(x)
            self._lap[x] = r
        return r

    def _laplace_trunc(self, x):
        if x == 0.0:
            return 0.0, self.mean0
        if x > 600.0:
            lk = self.law.log_mass - x * (self._n - 1.0)
            w = np.exp(lk - lk[0])
            s = math.fsum(w)
            return -x + self.log_K1 + math.log(s), math.fsum(w * self._n) / s
        # exactly rounded sums: the terms span many orders of magnitude near x = 0
        e = np.exp(-x * self._n)
        lm1 = math.fsum(self.law.mass * np.expm1(-x * self._n))
        m1 = math.fsum(self.law.mass * self._n * e)
        L = 1.0 + lm1
        return math.log1p(lm1), m1 / L

    def _laplace_ideal(self, x):
        if x == 0.0:
            return 0.0, self.mean0
        a = self.law.alpha
        with mpmath.workdps(DPS):
            z = mpmath.exp(-mpmath.mpf(x))
            lis = mpmath.polylog(1 + a, z)
            lia = mpmath.polylog(a, z)
            lm1 = (lis - self._zeta_s) / self._zeta_s
            return float(mpmath.log1p(lm1)), float(lia / lis)

    # -- g ------------------------------------------------------------------
    def rho_of_x(self, x: float) -> float:
        return 1.0 / self.laplace(x)[1]

    def from_x(self, x: float) -> tuple[float, GValue]:
        """Parametrize by the tilt: returns rho(x) and the g-triple at rho(x)."""
        logL, mean = self.laplace(x)
        rho = 1.0 / mean
        return rho, GValue(x + rho * logL, logL, x)

    def x_of_rho(self, rho: float) -> float:
        if rho <= self.rho_c:
            return 0.0

        def F(s):  # decreasing in s = log x
            return rho * self.laplace(math.exp(s))[1] - 1.0

        s_lo, s_hi = _log_bracket(F)
        if s_lo is None:
            return 0.0
        return math.exp(bisect(F, s_lo, s_hi, xtol=1e-13, maxiter=500))

    def eval(self, rho: float) -> GValue:
        if not 0.0 <= rho <= 1.0:
            raise ParameterDomainError(f"rho must lie in [0, 1], got {rho!r}")
        v = self._g.get(rho)
        if v is not None:
            return v
        if rho == 1.0:
            v = GValue(self.log_K1, -math.inf, math.inf)
        elif rho <= self.rho_c:
            v = GValue(0.0, 0.0, 0.0)
        else:
            x = self.x_of_rho(rho)
            logL, _ = self.laplace(x)
            v = GValue(x + rho * logL, logL, x)
        self._g[rho] = v
        return v


def _log_bracket(F, start: float = 0.0):
    """Bracket the root of a decreasing F(s) by stepping s; None when F > 0 down to X_FLOOR."""
    s = start
    if F(s) > 0:
        lo = s
        step = 1.0
        while True:
            s = lo + step
            if F(s) <= 0:
                return lo, s
            lo, step = s, step * 2.0
    hi = s
    floor = math.log(X_FLOOR)
    step = 1.0
    while hi - step > floor:
        s = hi - step
        if F(s) > 0:
            return s, hi
        hi, step = s, step * 2.0
    return None, hi


def g_eval(ev: GRhoEvaluator, rho: float) -> tuple[float, float, float]:
    v = ev.eval(rho)
    return v.g, v.g_prime, v.x


# ------------------------------------------------------------- Legendre

@dataclass(frozen=True)
class LegendreResult:
    f: float
    rho_h: float
    x: float = 0.0
    tie: bool = False  # first-order point: reported rho_h is the right limit
    note: str = ""


def _root_decreasing(D, lo: float, hi: float) -> float:
    """Root of a decreasing D on (lo, hi) with D(lo) > 0 >= D(hi), by bisection."""
    return bisect(D, lo, hi, xtol=1e-300, rtol=4 * EPS, maxiter=2000)


def _max_on_interval(p: Potential, h: float, hi: float) -> float:
    """argmax of h rho + H(rho) on [0, hi] for H with derivative; requires h + H'(hi) <= 0."""
    d0 = h + p.Hprime_at_0
    if d0 <= 0:
        return 0.0
    D = lambda r: h + p.dH_closed(r)
    lo = min(hi, 0.5) * 0.5
    while D(lo) <= 0:
        lo *= 0.5
    if D(hi) > 0:
        return hi
    return _root_decreasing(D, lo, hi)


def legendre_f(potential: Potential, ev: GRhoEvaluator, h: float) -> LegendreResult:
    """f_H(h) = sup_rho (h rho + H(rho) + g(rho)) and its maximizer rho_h."""
    if not potential.has_derivative:
        return _legendre_golden(potential, ev, h)
    rc = ev.rho_c
    p = potential
    if rc > 0.0:
        d_c = h + p.dH(rc)
        if d_c <= 0.0:
            if p.is_trivial:
                if d_c == 0.0:
                    return LegendreResult(h * rc + p.H(rc), rc, 0.0, True, "tie: all of [0, rho_c] maximizes")
                return LegendreResult(p.H_at_0, 0.0)
            rho = _max_on_interval(p, h, rc)
            return LegendreResult(h * rho + p.H(rho), rho)
        return _solve_in_x(p, ev, h)
    if math.isfinite(p.Hprime_at_0) and h + p.Hprime_at_0 <= 0.0:
        return LegendreResult(p.H_at_0, 0.0)
    return _solve_in_x(p, ev, h)


def _solve_in_x(p: Potential, ev: GRhoEvaluator, h: float) -> LegendreResult:
    def F(s):
        rho, gv = ev.from_x(math.exp(s))
        if rho >= 1.0:
            return -math.inf
        return h + p.dH(rho) + gv.g_prime

    s_lo, s_hi = _log_bracket(F)
    if s_lo is None:
        rho = ev.rho_c
        return LegendreResult(h * rho + p.H(rho), rho, 0.0, False, "maximizer at the x -> 0 numerical boundary")
    s = bisect(F, s_lo, s_hi, xtol=1e-14, maxiter=500)
    x = math.exp(s)
    rho, gv = ev.from_x(x)
    return LegendreResult(h * rho + p.H(rho) + gv.g, rho, x)


def _legendre_golden(p: Potential, ev: GRhoEvaluator, h: float) -> LegendreResult:
    obj = lambda r: h * r + p.H(r) + ev.eval(r).g
    r, val = golden_max(obj, 0.0, 1.0 - 1e-12)
    if obj(0.0) >= val:
        r, val = 0.0, obj(0.0)
    return LegendreResult(val, r, ev.eval(r).x, False, "golden-section fallback")


def f_H_reg(potential: Potential, h: float) -> tuple[float, float]:
    """(sup over [0,1] of h rho + H(rho), maximizer)."""
    p = potential
    if not p.has_derivative:
        r, v = golden_max(lambda r: h * r + p.H(r), 0.0, 1.0)
        return v, r
    if h + p.Hprime_at_1 >= 0.0:
        return h + p.H_at_1, 1.0
    rho = _max_on_interval(p, h, 1.0)
    return h * rho + p.H(rho), rho


def h_for_density(potential: Potential, ev: GRhoEvaluator, rho: float) -> float:
    """The h whose maximizer is rho: h = -H'(rho) - g'(rho)."""
    if not 0.0 < rho < 1.0:
        raise ParameterDomainError("rho must lie in (0, 1)")
    if rho < ev.rho_c and potential.is_trivial:
        raise ParameterDomainError("trivial H never selects a density below rho_c")
    return -potential.dH(rho) - ev.eval(rho).g_prime


# ------------------------------------------------------------- phase diagram

@dataclass(frozen=True)
class CriticalPoints:
    h_c: float
    h_b: float  # equals h_c when rho_c = 0
    rho_c: float


def critical_points(potential: Potential, ev: GRhoEvaluator) -> CriticalPoints:
    h_c = 0.0 - potential.Hprime_at_0
    rc = ev.rho_c
    h_b = 0.0 - potential.dH(rc) if rc > 0.0 else h_c
    return CriticalPoints(h_c, h_b, rc)


def regime(cp: CriticalPoints, h: float) -> str:
    if h <= cp.h_c:
        return "delocalized"
    if cp.rho_c > 0.0 and h < cp.h_b:
        return "big-jump-localized"
    return "fully-localized"


@dataclass(frozen=True)
class PhaseRow:
    h: float
    f_H: float
    f_H_reg: float
    rho_h: float
    regime: str
    flag: str = ""


@dataclass
class PhaseDiagram:
    potential: Potential
    law: InterArrivalLaw
    ideal: bool
    critical: CriticalPoints
    grid: list[PhaseRow] = field(default_factory=list)

    @property
    def rho_c(self):
        return self.critical.rho_c

    @property
    def h_c(self):
        return self.critical.h_c

    @property
    def h_b(self):
        return self.critical.h_b


def build_phase_diagram(potential: Potential, ev: GRhoEvaluator, h_grid) -> PhaseDiagram:
    cp = critical_points(potential, ev)
    pd = PhaseDiagram(potential, ev.law, ev.ideal, cp)
    for h in h_grid:
        h = float(h)
        r = legendre_f(potential, ev, h)
        freg, _ = f_H_reg(potential, h)
        flag = "tie" if r.tie else ("kink" if cp.rho_c > 0 and h == cp.h_b else "")
        pd.grid.append(PhaseRow(h, r.f, freg, r.rho_h, regime(cp, h), flag))
    return pd


def conjugate_g(potential: Potential, ev: GRhoEvaluator, rho: float, bracket=None) -> float:
    """inf_h (f_H(h) - rho h - H(rho)), by bounded scalar minimization over h.

    Without an explicit bracket the search is centred on the stationary
    h = -(H'(rho) + g'(rho)) when H has a derivative, else on zero.
    """
    if bracket is None:
        centre = 0.0
        if potential.has_derivative and 0.0 < rho < 1.0:
            centre = -(potential.dH(rho) + ev.eval(rho).g_prime)
        bracket = (centre - 20.0, centre + 20.0)
    fn = lambda h: legendre_f(potential, ev, h).f - rho * h
    res = minimize_scalar(fn, bounds=bracket, method="bounded", options={"xatol": 1e-10, "maxiter": 500})
    return float(res.fun) - potential.H(rho)


# ------------------------------------------------------------- exponents

@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    expected: float
    x: np.ndarray
    y: np.ndarray
    log_corrected: bool = False
    extra: dict = field(default_factory=dict)


def loglog_slope(x, y) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise FitWindowError("log-log fit needs positive abscissae and ordinates")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def _window(window, points):
    lo, hi = window
    if not 0 < lo < hi:
        raise FitWindowError(f"bad fit window {window!r}")
    return np.geomspace(lo, hi, points)


def _require_resolved(ev: GRhoEvaluator, xs, what: str):
    """Under truncation the asymptotic regime needs x well above 1/n_max."""
    if ev.ideal:
        return
    xmin = min(xs)
    if xmin * ev.law.n_max < 20.0:
        raise FitWindowError(
            f"{what}: smallest tilt x={xmin:.3g} is below 20/n_max={20.0 / ev.law.n_max:.3g}; "
            "the window sits in the truncation crossover (use the ideal backend or a larger n_max)"
        )


def kappa(alpha: float) -> float:
    return max(alpha / (alpha - 1.0), 2.0)


def g_asymptotic_exponent(ev: GRhoEvaluator, window=None, points: int = 12) -> ExponentFit:
    """Slope of -g against rho - rho_c (alpha > 1) or against rho (alpha < 1)."""
    a = ev.law.alpha
    if a > 1:
        d = _window(window or (1e-4, 1e-2), points)
        rho = ev.rho_c + d
        if rho[-1] >= 1:
            raise FitWindowError("window runs past rho = 1")
        expected = kappa(a)
    else:
        d = _window(window or (1e-3, 1e-1), points)
        rho = d
        if rho[0] <= ev.rho_c:
            raise FitWindowError(
                f"window starts at rho={rho[0]:.3g} inside the truncated flat region [0, {ev.rho_c:.3g}]"
            )
        expected = 1.0 / (1.0 - a) if a < 1 else math.nan
    vals = [ev.eval(float(r)) for r in rho]
    _require_resolved(ev, [v.x for v in vals], "g fit")
    y = -np.array([v.g for v in vals])
    s, c = loglog_slope(d, y)
    return ExponentFit(s, c, expected, d, y, a in (1.0, 2.0))


def pinning_exponent_check(ev: GRhoEvaluator, window=(1e-4, 1e-2), points: int = 12) -> ExponentFit:
    """Slope of f(0, h) against h for the plain pinning model; for alpha > 1 also
    the ratio f/h at the smallest h, to be compared with rho_c."""
    a = ev.law.alpha
    hs = _window(window, points)
    res = [legendre_f(Zero(), ev, float(h)) for h in hs]
    _require_resolved(ev, [r.x for r in res], "pinning fit")
    y = np.array([r.f for r in res])
    s, c = loglog_slope(hs, y)
    extra = {}
    if a > 1:
        extra = {"ratio_f_over_h": float(y[0] / hs[0]), "rho_c": ev.rho_c}
    return ExponentFit(s, c, max(1.0, 1.0 / a), hs, y, a == 1.0, extra)


def kink_exponent(potential: Potential, ev: GRhoEvaluator, window=(1e-3, 1e-1), points: int = 12) -> ExponentFit:
    """Slope of f_H_reg - f_H against h - h_b on the localized side."""
    cp = critical_points(potential, ev)
    if not cp.rho_c > 0:
        raise FitWindowError("no big-jump transition when rho_c = 0")
    d = _window(window, points)
    res = [legendre_f(potential, ev, cp.h_b + float(u)) for u in d]
    _require_resolved(ev, [r.x for r in res], "kink fit")
    y = np.array([f_H_reg(potential, cp.h_b + float(u))[0] - r.f for u, r in zip(d, res)])
    s, c = loglog_slope(d, y)
    a = ev.law.alpha
    return ExponentFit(s, c, kappa(a), d, y, a in (1.0, 2.0), {"h_b": cp.h_b})


def delocalization_exponent(potential: Potential, ev: GRhoEvaluator, window=(1e-4, 1e-2), points: int = 12) -> ExponentFit:
    """Slope of f_H - H(0) against h - h_c; extra holds the ratio to (h-h_c)^2/(2 c_H)
    at the smallest offset when c_H is known."""
    cp = critical_points(potential, ev)
    if not math.isfinite(cp.h_c):
        raise FitWindowError("h_c is -inf: the potential is localized for every h")
    d = _window(window, points)
    res = [legendre_f(potential, ev, cp.h_c + float(u)) for u in d]
    y = np.array([r.f - potential.H_at_0 for r in res])
    s, c = loglog_slope(d, y)
    a = ev.law.alpha
    expected = 2.0 if a > 0.5 else 1.0 / a
    extra = {"h_c": cp.h_c}
    if potential.c_H:
        extra["quadratic_ratio"] = float(y[0] * 2.0 * potential.c_H / d[0] ** 2)
    return ExponentFit(s, c, expected, d, y, a == 0.5, extra)
