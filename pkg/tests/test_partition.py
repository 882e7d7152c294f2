import itertools
import math

import numpy as np
import pytest
from scipy.special import logsumexp

from pinlab import disorder, free_energy as fe, partition as pt, potentials as P, renewal
from pinlab.cache import TableCache, TableHeader, load_table, save_table
from pinlab.disorder import DisorderField
from pinlab.errors import MemoryBudgetError, ParameterDomainError


def enumerate_logz(law, N, beta_w, h=0.0, log_psi=None):
    """Independent subset enumeration: log sum over contact sets containing N."""
    K = law.mass
    by_m = {}
    for r in range(N):
        for inner in itertools.combinations(range(1, N), r):
            pts = (0,) + inner + (N,)
            w = sum(math.log(K[b - a - 1]) + beta_w[b] for a, b in zip(pts, pts[1:]))
            by_m.setdefault(len(pts) - 1, []).append(w)
    out = {m: float(logsumexp(v)) for m, v in by_m.items()}
    if log_psi is None:
        return out
    return float(logsumexp([h * m + log_psi(m) + v for m, v in out.items()]))


@pytest.fixture(scope="module")
def law64():
    return renewal.build_power_law(1.5, 64)


def test_beta_zero_is_renewal_mass(law64):
    dp = pt.build_constrained(law64, 64)
    assert np.array_equal(dp.logZ, renewal.arrival_table(law64, 64))
    assert dp.logZ[0, 0] == 0.0 and np.all(dp.logZ[1:, 0] == -np.inf)
    assert np.all(np.isneginf(dp.logZ[np.triu_indices(65, 1)]))


def test_constant_field_shift(law64):
    beta, c = 0.7, 1.3
    fld = DisorderField(np.full(64, c), beta, "gaussian", 0)
    dp = pt.build_constrained(law64, 64, fld)
    ref = renewal.arrival_table(law64, 64)
    m = np.arange(65)
    fin = np.isfinite(ref)
    assert np.max(np.abs(dp.logZ[fin] - (ref + beta * c * m[None, :])[fin])) <= 1e-11
    assert np.array_equal(np.isfinite(dp.logZ), fin)


def test_recursion_consistency(law64):
    fld = disorder.generate("gaussian", 40, 3, beta=1.0)
    dp = pt.build_constrained(law64, 40, fld)
    lk = law64.logk
    for n, m in [(10, 3), (40, 1), (40, 17), (33, 33)]:
        terms = [lk[l] + dp.logZ[n - l, m - 1] for l in range(1, n + 1)]
        assert dp.logZ[n, m] == pytest.approx(float(logsumexp(terms)) + dp.site_weights[n], abs=1e-12)


def test_disordered_table_matches_enumeration():
    law = renewal.build_power_law(1.0, 64)
    fld = disorder.generate("gaussian", 12, 7, beta=1.0)
    dp = pt.build_constrained(law, 12, fld)
    ref = enumerate_logz(law, 12, fld.site_weights(12))
    for m in range(1, 13):
        assert abs(dp.logZ[12, m] - ref[m]) <= 1e-10


def test_full_partition_unweighted(law64):
    dp = pt.build_constrained(law64, 30)
    psi = P.PsiFactor(P.Zero())
    from pinlab.renewal import log_renewal_function
    assert pt.full_partition(dp, psi, 0.0) == pytest.approx(log_renewal_function(law64, 30)[30], abs=1e-12)


@pytest.mark.parametrize("pot", [P.Zero(), P.Overtwist(1.0), P.Supercoil(1.0, 1.0)], ids=lambda p: p.kind)
def test_full_partition_vs_enumeration(law64, pot):
    psi = P.default_psi(pot)
    fld = disorder.generate("gaussian", 14, 21, beta=0.8)
    for f in (None, fld):
        dp = pt.build_constrained(law64, 14, f)
        bw = np.zeros(15) if f is None else f.site_weights(14)
        ref = enumerate_logz(law64, 14, bw, 0.3, lambda m: psi.log_psi(m, 14))
        assert abs(pt.full_partition(dp, psi, 0.3) - ref) <= 1e-10
        assert abs(pt.brute_force_oracle(law64, psi, f, 0.3, 14).log_z - ref) <= 1e-10


def test_oracle_small_sizes(law64):
    psi = P.default_psi(P.Overtwist(0.5))
    fld = disorder.generate("gaussian", 2, 4, beta=1.0)
    h = 0.4
    w = fld.site_weights(2)
    K = law64.mass
    o1 = pt.brute_force_oracle(law64, psi, fld, h, 1)
    assert o1.log_z == pytest.approx(h + w[1] + psi.log_psi(1, 1) + math.log(K[0]), abs=1e-13)
    assert o1.masks.tolist() == [1] and o1.log_prob[0] == 0.0
    z2 = (math.exp(h + w[2] + psi.log_psi(1, 2)) * K[1]
          + math.exp(2 * h + w[1] + w[2] + psi.log_psi(2, 2)) * K[0] ** 2)
    assert pt.brute_force_oracle(law64, psi, fld, h, 2).log_z == pytest.approx(math.log(z2), abs=1e-13)
    with pytest.raises(ParameterDomainError):
        pt.brute_force_oracle(law64, psi, None, h, 17)


def test_oracle_probabilities_sum_to_one(law64):
    o = pt.brute_force_oracle(law64, P.default_psi(P.Overtwist(1.0)), None, -0.2, 10)
    assert math.fsum(np.exp(o.log_prob)) == pytest.approx(1.0, abs=1e-13)
    assert all(o.contacts(i)[-1] == 10 for i in range(o.masks.size))


def test_super_multiplicativity(law64):
    A = renewal.arrival_table(law64, 64)
    rng = np.random.default_rng(5)
    for _ in range(200):
        n1, n2 = rng.integers(1, 32, size=2)
        m1, m2 = rng.integers(1, n1 + 1), rng.integers(1, n2 + 1)
        assert A[n1 + n2, m1 + m2] >= A[n1, m1] + A[n2, m2] - 1e-12


def test_memory_budget_error(law64):
    with pytest.raises(MemoryBudgetError) as ei:
        pt.build_constrained(law64, 64, max_n=32)
    assert ei.value.N == 64 and ei.value.cap == 32
    with pytest.raises(MemoryBudgetError):
        pt.check_budget(100_000, max_bytes=2**30)


def test_cache_roundtrip(tmp_path, law64):
    fld = disorder.generate("rademacher", 48, 99, beta=0.6)
    cache = TableCache(tmp_path)
    a = pt.build_constrained(law64, 48, fld, cache=cache)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    hdr, tab = load_table(files[0])
    assert hdr == TableHeader(1.5, 64, 48, 99, 0.6, "rademacher")
    assert np.array_equal(tab, a.logZ)
    b = pt.build_constrained(law64, 48, fld, cache=cache)
    assert np.array_equal(a.logZ, b.logZ)
    assert cache.path(hdr) != cache.path(TableHeader(1.5, 64, 48, 100, 0.6, "rademacher"))


def test_cache_rejects_foreign_file(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"NOTATABLE" * 10)
    with pytest.raises(ValueError):
        load_table(p)
    save_table(tmp_path / "t.bin", TableHeader(1.0, 8, 2, 0, 0.0, None), np.zeros((3, 3)))
    with open(tmp_path / "t.bin", "r+b") as fh:
        fh.truncate(40)
    with pytest.raises(ValueError):
        load_table(tmp_path / "t.bin")


def test_extrapolate_recovers_model():
    sizes = [64, 128, 256, 512]
    y = [0.3 + 1.7 * math.log(n) / n for n in sizes]
    f, se = pt.extrapolate(sizes, y)
    assert f == pytest.approx(0.3, abs=1e-12) and se <= 1e-12
    f, _ = pt.extrapolate(sizes, [0.3 - 2.0 / n for n in sizes], "invN")
    assert f == pytest.approx(0.3, abs=1e-12)


def test_density_index():
    assert pt.density_index(0.5, 7) == 4
    assert pt.density_index(0.3, 10) == 3
    assert pt.density_index(1.0, 9) == 9


@pytest.fixture(scope="module")
def law25():
    return renewal.build_power_law(2.5, 4096)


@pytest.mark.slow
def test_estimate_f_overtwist_matches_legendre(law25, tmp_path_factory):
    cache = TableCache(tmp_path_factory.mktemp("tables"))
    sizes = [256, 512, 1024, 2048, 4096]
    ev = fe.GRhoEvaluator(law25)
    p = P.Overtwist(1.0)
    hs = [-1.5, -0.8, 0.0, 0.8]
    ests = pt.estimate_f_grid(P.default_psi(p), law25, hs, 0.0, sizes, cache=cache)
    for e in ests:
        assert abs(e.extrapolated - fe.legendre_f(p, ev, e.h).f) <= 5e-3
    vals = [e.extrapolated for e in ests]
    ses = [e.stderr for e in ests]
    for i in range(len(vals) - 1):
        assert vals[i + 1] >= vals[i] - 2 * (ses[i] + ses[i + 1])

    q = P.ConcaveQuadratic(0.2, 1.0)
    e = pt.estimate_f(P.default_psi(q), law25, -0.2 - 3.0, 0.0, sizes, cache=cache)
    assert abs(e.extrapolated - q.H(0.0)) <= 5e-3


@pytest.mark.slow
def test_estimate_g_matches_evaluator():
    law = renewal.build_power_law(1.5, 4096)
    ev = fe.GRhoEvaluator(law)
    ests = pt.estimate_g_grid(law, [0.3, 0.6, 0.9], 0.0, [256, 512, 1024, 2048, 4096])
    for e in ests:
        assert abs(e.extrapolated - ev.eval(e.h).g) <= 5e-3


@pytest.fixture(scope="module")
def g_disordered():
    law = renewal.build_power_law(1.5, 1024)
    rhos = np.linspace(0.1, 0.9, 9)
    sizes = [256, 512, 1024]
    g0 = pt.estimate_g_grid(law, rhos, 0.0, sizes)
    g1 = pt.estimate_g_grid(law, rhos, 0.5, sizes, replicas=6, master_seed=3)
    return g0, g1


def test_disorder_raises_g(g_disordered):
    for a, b in zip(*g_disordered):
        assert b.extrapolated >= a.extrapolated - 2 * math.hypot(a.stderr, b.stderr)


def test_g_estimates_concave(g_disordered):
    # replica error bars; the single beta = 0 sample has only a fit residual, see notes
    ests = g_disordered[1]
    for i in range(1, len(ests) - 1):
        d2, se = pt.combine_linear(ests[i - 1 : i + 2], [1.0, -2.0, 1.0])
        assert d2 <= 2 * se


def test_annealed_bound():
    law = renewal.build_power_law(1.5, 256)
    psi = P.PsiFactor(P.Zero())
    beta, R, N = 1.0, 12, 200
    lam = disorder.log_mgf("gaussian", beta)
    dp0 = pt.build_constrained(law, N)
    for h in (-1.0, -0.3, 0.5):
        vals = [pt.full_partition(pt.build_constrained(law, N, f), psi, h) / N
                for f in disorder.replica_fields("gaussian", N, beta, 17, R)]
        se = np.std(vals, ddof=1) / math.sqrt(R)
        assert np.mean(vals) <= pt.full_partition(dp0, psi, h + lam) / N + 2 * se


def test_estimate_threads_do_not_change_results():
    law = renewal.build_power_law(1.5, 128)
    kw = dict(replicas=4, master_seed=8)
    a = pt.estimate_f_grid(P.PsiFactor(P.Zero()), law, [0.0, 0.5], 1.0, [32, 64, 128], **kw)
    b = pt.estimate_f_grid(P.PsiFactor(P.Zero()), law, [0.0, 0.5], 1.0, [32, 64, 128], threads=3, **kw)
    assert [e.estimates for e in a] == [e.estimates for e in b]


@pytest.mark.parametrize("sizes", [[], [64, 32], [32, 32], [32, 512]])
def test_estimate_rejects_bad_sizes(sizes):
    law = renewal.build_power_law(1.5, 256)
    with pytest.raises(ParameterDomainError):
        pt.estimate_g(law, 0.5, 0.0, sizes)
