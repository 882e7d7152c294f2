import math

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from pinlab import free_energy as fe, partition as pt, potentials as P, renewal
from pinlab.errors import FitWindowError

# Frozen oracle: -(1 - rho_c^2)/rho_c^2 with rho_c of the alpha = 2.5, n_max = 4096 law (mpmath, 40 digits).
H_B_OVERTWIST_25_4096 = -0.41751858063287628698


@pytest.fixture(scope="module")
def law15():
    return renewal.build_power_law(1.5, 4096)


@pytest.fixture(scope="module")
def ev15(law15):
    return fe.GRhoEvaluator(law15)


@pytest.fixture(scope="module")
def ev25():
    return fe.GRhoEvaluator(renewal.build_power_law(2.5, 4096))


def ideal(alpha):
    return fe.GRhoEvaluator(renewal.build_power_law(alpha, 4096), ideal=True)


@pytest.mark.parametrize("ideal_backend", [False, True])
def test_g_flat_below_rho_c(law15, ideal_backend):
    ev = fe.GRhoEvaluator(law15, ideal=ideal_backend)
    for r in np.linspace(0, ev.rho_c, 7):
        g, gp, x = fe.g_eval(ev, float(r))
        assert abs(g) <= 1e-12 and x == 0.0


def test_g_at_one(law15, ev15):
    assert abs(fe.g_eval(ev15, 1.0)[0] - math.log(law15.mass[0])) <= 1e-10
    evi = fe.GRhoEvaluator(law15, ideal=True)
    from mpmath import zeta
    assert abs(fe.g_eval(evi, 1.0)[0] + math.log(float(zeta(2.5)))) <= 1e-10


@pytest.mark.parametrize("alpha", [0.5, 1.5, 3.0])
def test_g_nonpositive_concave(alpha):
    for ev in (fe.GRhoEvaluator(renewal.build_power_law(alpha, 2048)), ideal(alpha)):
        r = np.linspace(0.0, 0.99, 45)
        g = np.array([ev.eval(float(x)).g for x in r])
        assert np.all(g <= 1e-15)
        assert np.all(g[:-2] - 2 * g[1:-1] + g[2:] <= 1e-12)


def test_x_rho_solves_mean_equation(ev15):
    for r in (0.6, 0.8, 0.95):
        x = ev15.x_of_rho(r)
        assert abs(r * ev15.laplace(x)[1] - 1) <= 1e-12


def test_g_prime_matches_finite_difference(ev15):
    e = 1e-6
    for r in (0.6, 0.8, 0.95):
        fd = (ev15.eval(r + e).g - ev15.eval(r - e).g) / (2 * e)
        assert abs(ev15.eval(r).g_prime - fd) <= 1e-6


def test_g_matches_dp(law15, ev15):
    A = renewal.arrival_table(law15, 4096)
    m = pt.density_index(0.8, 4096)
    assert abs(ev15.eval(0.8).g - A[4096, m] / 4096) <= 5e-3


@pytest.mark.parametrize("alpha,lo,hi", [(1.5, 2.7, 3.3), (3.0, 1.8, 2.2), (0.5, 1.8, 2.2)])
def test_g_asymptotic_exponent(alpha, lo, hi):
    fit = fe.g_asymptotic_exponent(ideal(alpha))
    assert lo <= fit.slope <= hi


def test_g_fit_window_infeasible_under_truncation():
    ev = fe.GRhoEvaluator(renewal.build_power_law(0.5, 4096))
    with pytest.raises(FitWindowError):
        fe.g_asymptotic_exponent(ev)
    ev = fe.GRhoEvaluator(renewal.build_power_law(1.5, 4096))
    with pytest.raises(FitWindowError):
        fe.g_asymptotic_exponent(ev)


@pytest.mark.parametrize("alpha,expected,tol", [(0.4, 2.5, 0.25), (0.5, 2.0, 0.2)])
def test_pinning_exponent(alpha, expected, tol):
    fit = fe.pinning_exponent_check(ideal(alpha))
    assert abs(fit.slope - expected) <= tol


def test_pinning_ratio_alpha_two():
    ev = ideal(2.0)
    fit = fe.pinning_exponent_check(ev)
    assert abs(fit.extra["ratio_f_over_h"] / ev.rho_c - 1) <= 0.02


def test_zero_potential_tie(ev15):
    r = fe.legendre_f(P.Zero(), ev15, 0.0)
    assert r.f == 0.0 and r.rho_h == ev15.rho_c and r.tie
    assert fe.legendre_f(P.Zero(), ev15, -0.3).rho_h == 0.0


def test_affine_shift(ev15):
    a, b = 0.5, -0.2
    for h in (-1.0, -0.6, -0.4, 0.0, 0.7):
        assert fe.legendre_f(P.Affine(a, b), ev15, h).f == pytest.approx(
            fe.legendre_f(P.Zero(), ev15, h + a).f + b, abs=1e-12)


def test_overtwist_big_jump_side_uses_H_alone(ev25):
    p = P.Overtwist(1.0)
    cp = fe.critical_points(p, ev25)
    h = cp.h_b - 0.2
    res = minimize_scalar(lambda r: -(h * r + p.H(r)), bounds=(1e-9, ev25.rho_c), method="bounded",
                          options={"xatol": 1e-12})
    assert abs(fe.legendre_f(p, ev25, h).f - (-res.fun)) <= 1e-9
    assert abs(fe.legendre_f(p, ev25, h).f - fe.f_H_reg(p, h)[0]) <= 1e-9


def test_critical_points(ev15, ev25):
    cp = fe.critical_points(P.Zero(), ev15)
    assert cp.h_c == 0.0 and cp.h_b == 0.0
    cp = fe.critical_points(P.Zero(), ideal(0.5))
    assert cp.h_c == 0.0 and cp.h_b == 0.0
    cp = fe.critical_points(P.Overtwist(1.0), ev25)
    assert cp.h_c == -math.inf
    assert cp.h_b == pytest.approx(H_B_OVERTWIST_25_4096, abs=1e-12)


def _diagram(p, ev, hs):
    return fe.build_phase_diagram(p, ev, hs)


@pytest.mark.parametrize("pot", [P.Overtwist(1.0), P.ConcaveQuadratic(0.2, 1.0), P.Supercoil(1.0, 1.0), P.Zero()],
                         ids=lambda p: p.kind)
def test_phase_diagram_invariants(pot, ev25):
    cp = fe.critical_points(pot, ev25)
    centre = cp.h_b
    hs = np.linspace(centre - 2.0, centre + 2.0, 40)
    pd = _diagram(pot, ev25, hs)
    f = np.array([r.f_H for r in pd.grid])
    freg = np.array([r.f_H_reg for r in pd.grid])
    rho = np.array([r.rho_h for r in pd.grid])
    assert np.all(np.diff(f) >= -1e-12)
    assert np.all(f[:-2] - 2 * f[1:-1] + f[2:] >= -1e-10)
    assert np.all(np.diff(rho) >= -1e-12)
    for r in pd.grid:
        if math.isfinite(cp.h_c) and r.h <= cp.h_c:
            assert r.f_H == pytest.approx(pot.H_at_0, abs=1e-12)
        if r.h < cp.h_b:
            assert r.rho_h <= cp.rho_c
            assert r.f_H == pytest.approx(r.f_H_reg, abs=1e-10)
        elif r.h > cp.h_b:
            assert r.rho_h > cp.rho_c
            assert r.f_H < r.f_H_reg
    assert all(r.regime != "delocalized" for r in pd.grid) == (cp.h_c == -math.inf)


def test_regime_switch_zero_potential(ev15):
    pd = _diagram(P.Zero(), ev15, [-0.2, -0.1, 0.0, 0.1, 0.2])
    assert [r.regime for r in pd.grid] == ["delocalized"] * 3 + ["fully-localized"] * 2


@pytest.mark.parametrize("pot", [P.Zero(), P.Overtwist(1.0)], ids=lambda p: p.kind)
def test_conjugacy_round_trip(pot, ev15):
    for rho in np.linspace(0.05, 0.95, 7):
        assert abs(fe.conjugate_g(pot, ev15, float(rho)) - ev15.eval(float(rho)).g) <= 1e-6


@pytest.mark.parametrize("pot", [P.Zero(), P.Overtwist(1.0), P.ConcaveQuadratic(0.0, 1.0)], ids=lambda p: p.kind)
def test_derivative_identity(pot, ev15):
    e = 1e-5
    cp = fe.critical_points(pot, ev15)
    for h in (-3.0, -1.0, -0.2, 0.3, 1.0, 2.5):
        if abs(h - cp.h_b) < 0.05 or abs(h - cp.h_c) < 0.05:
            continue
        fd = (fe.legendre_f(pot, ev15, h + e).f - fe.legendre_f(pot, ev15, h - e).f) / (2 * e)
        assert abs(fe.legendre_f(pot, ev15, h).rho_h - fd) <= 1e-6


def test_kink_exponent_overtwist():
    fit = fe.kink_exponent(P.Overtwist(1.0), ideal(2.5))
    assert abs(fit.slope - 2.0) <= 0.25


def test_delocalization_quadratic():
    fit = fe.delocalization_exponent(P.ConcaveQuadratic(0.3, 1.0), ideal(2.5))
    assert 0.9 <= fit.extra["quadratic_ratio"] <= 1.1


def test_delocalization_small_alpha():
    fit = fe.delocalization_exponent(P.ConcaveQuadratic(0.0, 1.0), ideal(0.3))
    assert abs(fit.slope * 0.3 - 1) <= 0.15


def test_golden_fallback_matches(ev15):
    ref = P.ConcaveQuadratic(0.1, 2.0)
    custom = P.CustomPotential(lambda r: ref.H(r))
    for h in (-0.5, 0.2, 1.0):
        a = fe.legendre_f(ref, ev15, h)
        b = fe.legendre_f(custom, ev15, h)
        assert abs(a.f - b.f) <= 1e-9
        assert abs(a.rho_h - b.rho_h) <= 1e-4


def test_h_for_density_inverts_legendre(ev25):
    p = P.Overtwist(1.0)
    for rho in (0.3, 0.42, 0.9, 0.97):
        h = fe.h_for_density(p, ev25, rho)
        assert fe.legendre_f(p, ev25, h).rho_h == pytest.approx(rho, abs=1e-9)
