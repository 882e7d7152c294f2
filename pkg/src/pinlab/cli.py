"""Command-line experiment driver.

Exit codes: 0 pass, 2 acceptance failure, 1 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _dp, disorder, free_energy as fe, partition as pt, paths, renewal
from .cache import TableCache
from .config import ExperimentConfig, load_config, from_dict
from .errors import ConfigError, LawInvariantError, MemoryBudgetError, ParameterDomainError
from .outputs import write_summary, write_table
from .potentials import default_psi, make_potential
from .rng import derived_seed

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


@dataclass
class Context:
    cfg: ExperimentConfig
    out: Path
    fmt: str
    threads: int
    seed: int

    def __post_init__(self):
        c = self.cfg
        self.law = renewal.build_power_law(c.law.alpha, c.law.n_max)
        self.potential = c.potential.build()
        self.psi = default_psi(self.potential)
        self.cache = TableCache(self.out / "cache") if c.caps.cache else None

    @property
    def disorder_seed(self):
        return self.cfg.disorder.seed if self.cfg.disorder.seed is not None else self.seed

    def build_kw(self, disordered: bool) -> dict:
        caps = self.cfg.caps
        return {"max_n": caps.max_N_disordered if disordered else caps.max_N,
                "max_bytes": caps.max_memory, "cache": self.cache}

    def h_values(self, ev: fe.GRhoEvaluator) -> list[float]:
        hs = set(float(h) for h in self.cfg.grids.h_grid)
        for r in self.cfg.grids.h_from_density:
            try:
                hs.add(float(fe.h_for_density(self.potential, ev, r)))
            except ParameterDomainError as exc:
                raise ConfigError(str(exc), "grids.h_from_density") from None
        return sorted(hs)

    def table(self, stem, columns, rows, comments=()):
        return write_table(self.out, stem, columns, rows, self.fmt, comments)

    def summary(self, stem, data):
        return write_summary(self.out, stem, data)


def _h_key(h: float) -> int:
    return int(np.float64(h).view(np.uint64))


def _sample_seed(master: int, N: int, h: float) -> int:
    return derived_seed(master, N, _h_key(h))


def _mean_ci(x) -> tuple[float, float, float, float]:
    x = np.asarray(x, dtype=float)
    m = float(x.mean())
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return m, se, m - 1.96 * se, m + 1.96 * se


def _sample_stats(dp, psi, h, N, draws, master, replica):
    b = paths.sample_gibbs_batch(dp, psi, h, draws, _sample_seed(master, N, h), replica, N)
    return b


def _describe(ctx) -> dict:
    return {"law": ctx.cfg.law.model_dump(), "potential": ctx.cfg.potential.model_dump(exclude_none=True),
            "disorder": ctx.cfg.disorder.model_dump(), "master_seed": ctx.seed}


# ------------------------------------------------------------------ commands

def cmd_phase_diagram(ctx: Context) -> int:
    """Semi-analytic phase diagram, plus finite-size f when beta > 0."""
    cfg = ctx.cfg
    ev = fe.GRhoEvaluator(ctx.law, ideal=cfg.law.ideal)
    hs = ctx.h_values(ev)
    pd = fe.build_phase_diagram(ctx.potential, ev, hs)
    ctx.table("phase_diagram", ["h", "f_H", "f_H_reg", "rho_h", "regime", "flag"],
              [[r.h, r.f_H, r.f_H_reg, r.rho_h, r.regime, r.flag] for r in pd.grid])
    summary = {**_describe(ctx), "backend": "ideal" if ev.ideal else "truncated",
               "h_c": pd.h_c, "h_b": pd.h_b, "rho_c": pd.rho_c,
               "rho_c_truncated": ctx.law.rho_c, "rho_c_ideal": ctx.law.rho_c_ideal,
               "regimes": {k: sum(r.regime == k for r in pd.grid)
                           for k in ("delocalized", "big-jump-localized", "fully-localized")}}
    beta = cfg.disorder.beta
    if beta > 0:
        ests = pt.estimate_f_grid(ctx.psi, ctx.law, hs, beta, cfg.grids.sizes, cfg.disorder.replicas,
                                  master_seed=ctx.disorder_seed, dist=cfg.disorder.dist, model=cfg.extrapolation,
                                  threads=ctx.threads, **ctx.build_kw(True))
        _emit_estimates(ctx, "phase_diagram_quenched", ests)
        summary["quenched"] = [{"h": e.h, "f_hat": e.extrapolated, "stderr": e.stderr} for e in ests]
    ctx.summary("phase_diagram_summary", summary)
    print(f"phase-diagram: {len(hs)} rows, h_c={pd.h_c!r}, h_b={pd.h_b!r}, rho_c={pd.rho_c!r}")
    return EXIT_OK


def _emit_estimates(ctx, stem, ests):
    rows = []
    for e in ests:
        for N, r, v in e.estimates:
            rows.append([N, r, e.seeds[r], e.h, e.beta, v])
    rows.sort(key=lambda x: (x[3], x[0], x[1]))
    ctx.table(stem, ["N", "replica", "seed", "h", "beta", "logZ_over_N"], rows)


def cmd_bigjump_scan(ctx: Context) -> int:
    """Path statistics across h and N at beta = 0."""
    cfg = ctx.cfg
    if cfg.disorder.beta != 0:
        raise ConfigError("bigjump-scan runs at beta = 0; use disorder-scan for beta > 0", "disorder.beta")
    ev = fe.GRhoEvaluator(ctx.law)
    hs = ctx.h_values(ev)
    cp = fe.critical_points(ctx.potential, ev)
    sizes = cfg.grids.sizes
    dp = pt.build_constrained(ctx.law, sizes[-1], **ctx.build_kw(False))
    rows = []
    for h in hs:
        leg = fe.legendre_f(ctx.potential, ev, h)
        overlay = max(0.0, 1.0 - leg.rho_h / cp.rho_c) if cp.rho_c > 0 else 0.0
        for N in sizes:
            bs = [_sample_stats(dp, ctx.psi, h, N, cfg.sampling.draws, ctx.seed, r)
                  for r in range(cfg.sampling.replicas)]
            cf = np.concatenate([b.contact_frac for b in bs])
            e1 = np.concatenate([b.eta1_frac for b in bs])
            e2 = np.concatenate([b.eta2_frac for b in bs])
            row = [h, N, cf.size]
            for x in (cf, e1, e2):
                m, _, lo, hi = _mean_ci(x)
                row += [m, lo, hi]
            rows.append(row + [leg.rho_h, overlay, fe.regime(cp, h)])
    cols = ["h", "N", "draws"]
    for name in ("contact_frac", "eta1_frac", "eta2_frac"):
        cols += [f"{name}_mean", f"{name}_lo", f"{name}_hi"]
    ctx.table("bigjump_scan", cols + ["rho_h", "eta1_overlay", "regime"], rows)
    ctx.summary("bigjump_scan_summary", {**_describe(ctx), "h_c": cp.h_c, "h_b": cp.h_b, "rho_c": cp.rho_c,
                                         "h_values": hs, "sizes": sizes})
    print(f"bigjump-scan: {len(rows)} rows, h_b={cp.h_b!r}, rho_c={cp.rho_c!r}")
    return EXIT_OK


def cmd_disorder_scan(ctx: Context) -> int:
    """Replica-averaged free energies and path trends at beta > 0."""
    cfg = ctx.cfg
    beta = cfg.disorder.beta
    if not beta > 0:
        raise ConfigError("disorder-scan needs beta > 0", "disorder.beta")
    ev = fe.GRhoEvaluator(ctx.law)
    hs = ctx.h_values(ev)
    cp = fe.critical_points(ctx.potential, ev)
    sizes = cfg.grids.sizes
    d = cfg.grids.fd_step
    h_all = np.array(sorted(set(hs) | {h + s * d for h in hs for s in (-1, 1)}))
    seeds = pt.resolve_seeds(cfg.disorder.replicas, None, ctx.disorder_seed)
    draws = cfg.sampling.draws

    def per_replica(dp, r):
        lz = np.stack([pt.log_partition_h(dp, ctx.psi, h_all, N) / N for N in sizes], axis=1)
        st = {}
        for h in hs:
            for N in sizes:
                b = _sample_stats(dp, ctx.psi, h, N, draws, ctx.seed, r)
                st[(h, N)] = (b.contact_frac.mean(), b.eta1_frac.mean(), b.eta2_frac.mean())
        return lz, st

    res = pt.map_replicas(ctx.law, sizes[-1], beta, seeds, per_replica, dist=cfg.disorder.dist,
                          threads=ctx.threads, **ctx.build_kw(True))
    ests = []
    for i, h in enumerate(h_all):
        est = [(N, r, float(res[r][0][i, j])) for j, N in enumerate(sizes) for r in range(len(seeds))]
        f, se = pt._combine(np.array([res[r][0][i] for r in range(len(seeds))]), sizes, cfg.extrapolation)
        ests.append(pt.FreeEnergyEstimate(float(h), beta, est, f, se, seeds, cfg.extrapolation))
    by_h = {e.h: e for e in ests}
    _emit_estimates(ctx, "disorder_free_energy", ests)

    base_dp = pt.build_constrained(ctx.law, sizes[-1], **ctx.build_kw(False))
    rows = []
    summary_h = []
    for h in hs:
        leg = fe.legendre_f(ctx.potential, ev, h)
        base = {N: _sample_stats(base_dp, ctx.psi, h, N, draws, ctx.seed, 0) for N in sizes}
        for N in sizes:
            b = base[N]
            rows.append([0.0, h, N, 0, 0, draws, b.contact_frac.mean(), b.eta1_frac.mean(), b.eta2_frac.mean()])
        for r, s in enumerate(seeds):
            for N in sizes:
                rows.append([beta, h, N, r, s, draws, *map(float, res[r][1][(h, N)])])
        eta1 = {N: _mean_ci([res[r][1][(h, N)][1] for r in range(len(seeds))])[:2] for N in sizes}
        cf = _mean_ci([res[r][1][(h, sizes[-1])][0] for r in range(len(seeds))])[:2]
        dfdh = pt.combine_linear([by_h[h - d], by_h[h + d]], [-0.5 / d, 0.5 / d])
        e1 = [eta1[N][0] for N in sizes]
        summary_h.append({
            "h": h, "regime_beta0": fe.regime(cp, h), "f_hat": by_h[h].extrapolated, "f_stderr": by_h[h].stderr,
            "dfdh": dfdh[0], "dfdh_stderr": dfdh[1], "contact_frac": cf[0], "contact_frac_stderr": cf[1],
            "contact_density_match_2sigma": abs(cf[0] - dfdh[0]) <= 2 * math.hypot(cf[1], dfdh[1]),
            "eta1_by_N": {str(N): eta1[N][0] for N in sizes},
            "eta1_stderr_by_N": {str(N): eta1[N][1] for N in sizes},
            "eta1_decreasing": bool(all(a > b for a, b in zip(e1, e1[1:]))),
            "eta1_beta0_by_N": {str(N): float(base[N].eta1_frac.mean()) for N in sizes},
            "condensate_beta0": max(0.0, 1.0 - leg.rho_h / cp.rho_c) if cp.rho_c > 0 else 0.0,
        })
    ctx.table("disorder_samples", ["beta", "h", "N", "replica", "seed", "draws", "contact_frac_mean",
                                   "eta1_frac_mean", "eta2_frac_mean"], rows)
    ctx.summary("disorder_scan_summary", {**_describe(ctx), "h_b": cp.h_b, "rho_c": cp.rho_c, "fd_step": d,
                                          "sizes": sizes, "rows": summary_h})
    print(f"disorder-scan: beta={beta!r}, {len(seeds)} replicas, {len(hs)} h values")
    return EXIT_OK


def second_difference_coeffs(h_prev, h, h_next):
    a, b = h - h_prev, h_next - h
    return [2.0 / (a * (a + b)), -2.0 / (a * b), 2.0 / (b * (a + b))]


def cmd_convexity_check(ctx: Context) -> int:
    """Second differences of the finite-size free energy in h."""
    cfg = ctx.cfg
    if ctx.potential.kind != "zero":
        raise ConfigError("convexity-check applies to Psi = 1 (potential kind 'zero')", "potential.kind")
    hs = [float(h) for h in cfg.grids.h_grid]
    if len(hs) < 3:
        raise ConfigError("need at least 3 grid points for second differences", "grids.h_grid")
    beta = cfg.disorder.beta
    ests = pt.estimate_f_grid(ctx.psi, ctx.law, hs, beta, cfg.grids.sizes, cfg.disorder.replicas,
                              master_seed=ctx.disorder_seed, dist=cfg.disorder.dist, model=cfg.extrapolation,
                              threads=ctx.threads, **ctx.build_kw(beta > 0))
    ev = fe.GRhoEvaluator(ctx.law) if beta == 0 else None
    rows, ok = [], True
    for i in range(1, len(hs) - 1):
        c = second_difference_coeffs(hs[i - 1], hs[i], hs[i + 1])
        v, se = pt.combine_linear(ests[i - 1 : i + 2], c)
        positive = v - 2.0 * se > 0
        ok &= positive
        ref = (sum(ci * fe.legendre_f(ctx.potential, ev, hh).f for ci, hh in zip(c, hs[i - 1 : i + 2]))
               if ev is not None else math.nan)
        rows.append([hs[i], v, se, positive, ref])
    ctx.table("convexity", ["h", "d2f", "stderr", "positive_2sigma", "d2f_semi_analytic"], rows)
    ctx.summary("convexity_summary", {**_describe(ctx), "pass": bool(ok),
                                      "f_hat": [{"h": e.h, "f": e.extrapolated, "stderr": e.stderr} for e in ests]})
    print(f"convexity-check: beta={beta!r}: {'PASS' if ok else 'FAIL'} ({len(rows)} interior points)")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_exponents(ctx: Context) -> int:
    """Critical-exponent fits on the semi-analytic layer."""
    cfg = ctx.cfg
    fits = cfg.fits
    ev = fe.GRhoEvaluator(ctx.law, ideal=fits.backend == "ideal")
    a = ctx.law.alpha
    rows = []

    def run(name, fn, **extra_rows):
        try:
            fit = fn()
        except fe.FitWindowError as exc:
            rows.append([name, math.nan, math.nan, math.nan, False, False, f"window infeasible: {exc}"])
            return None
        ok = abs(fit.slope - fit.expected) <= fits.tolerance * abs(fit.expected)
        note = "log-corrected case: diagnostic only" if fit.log_corrected else ""
        rows.append([name, fit.slope, fit.expected, fit.slope - fit.expected, bool(ok), fit.log_corrected, note])
        return fit

    if a not in (1.0,):
        run("g_near_rho_c" if a > 1 else "g_near_zero",
            lambda: fe.g_asymptotic_exponent(ev, fits.g_window, fits.points))
    pin = run("pinning", lambda: fe.pinning_exponent_check(ev, fits.pinning_window, fits.points))
    if pin is not None and a > 1:
        ratio = pin.extra["ratio_f_over_h"]
        ok = abs(ratio / ev.rho_c - 1) <= 0.02
        rows.append(["pinning_f_over_h", ratio, ev.rho_c, ratio - ev.rho_c, bool(ok), False, ""])
    pot = ctx.potential
    if not pot.is_trivial and ev.rho_c > 0:
        run("kink", lambda: fe.kink_exponent(pot, ev, fits.kink_window, fits.points))
    if not pot.is_trivial and math.isfinite(pot.Hprime_at_0):
        fit = run("delocalization", lambda: fe.delocalization_exponent(pot, ev, fits.delocalization_window, fits.points))
        if fit is not None and "quadratic_ratio" in fit.extra and a > 0.5:
            q = fit.extra["quadratic_ratio"]
            rows.append(["delocalization_quadratic_ratio", q, 1.0, q - 1.0, bool(abs(q - 1) <= 0.1), False, ""])
    ctx.table("exponents", ["quantity", "fitted", "expected", "difference", "within_tolerance",
                            "log_corrected", "note"], rows)
    failed = [r[0] for r in rows if not r[4] and not r[5]]
    ctx.summary("exponents_summary", {**_describe(ctx), "backend": fits.backend, "rho_c": ev.rho_c,
                                      "failed": failed})
    for r in rows:
        print(f"  {r[0]:32s} fitted={r[1]:.6g} expected={r[2]:.6g} {'ok' if r[4] else ('diag' if r[5] else 'FAIL')}")
    return EXIT_FAIL if failed else EXIT_OK


def _table_diff(a, b) -> float:
    """Max abs difference over finite entries; inf when the -inf patterns differ."""
    fa, fb = np.isfinite(a), np.isfinite(b)
    if not np.array_equal(fa, fb):
        return math.inf
    return float(np.abs(a[fa] - b[fb]).max()) if fa.any() else 0.0


def cmd_oracle_check(ctx: Context) -> int:
    """DP partition functions and sampler law against brute-force enumeration."""
    oc = ctx.cfg.oracle
    rows, worst, failures = [], 0.0, []
    pots = [make_potential("zero"), make_potential("affine", a=0.5, b=-0.2),
            make_potential("overtwist", chi=1.0), make_potential("supercoil", chi=1.0, w=1.0)]
    n_max = max(max(oc.sizes), ctx.cfg.law.n_max)
    for alpha in oc.alphas:
        law = renewal.build_power_law(alpha, n_max)
        if oc.corrupt_k is not None:
            law = renewal.law_from_mass(alpha, law.mass * oc.corrupt_k, check=False)
        try:
            law.check_invariants()
            rows.append(["law_invariants", alpha, "", "", "", "", 0.0, True])
        except LawInvariantError as exc:
            failures.append(f"alpha={alpha}: {exc}")
            rows.append(["law_invariants", alpha, "", "", "", "", math.nan, False])
        for N in oc.sizes:
            ref = _dp.naive_log_table(law.logk, N)
            zero_field = disorder.generate("gaussian", N, oc.seed, 0.0)
            red = max(_table_diff(pt.build_constrained(law, N).logZ, ref),
                      _table_diff(pt.build_constrained(law, N, zero_field).logZ, ref),
                      _table_diff(renewal.arrival_table(law, N), ref))
            rows.append(["beta0_reduction", alpha, "", 0.0, N, "", red, red <= oc.tolerance])
            for beta in oc.betas:
                fld = disorder.generate("gaussian", N, oc.seed, beta) if beta > 0 else None
                dp = pt.build_constrained(law, N, fld)
                for pot in pots:
                    psi = default_psi(pot)
                    for h in oc.h_values:
                        a = pt.full_partition(dp, psi, h)
                        b = pt.brute_force_oracle(law, psi, fld, h, N).log_z
                        diff = abs(a - b)
                        worst = max(worst, diff)
                        rows.append(["partition", alpha, pot.kind, beta, N, h, diff, diff <= oc.tolerance])
    # sampler configuration law, computed from the sequential conditionals
    law = renewal.build_power_law(1.5, n_max)
    psi = default_psi(make_potential("overtwist", chi=1.0))
    for beta in oc.betas:
        N = min(10, max(oc.sizes))
        fld = disorder.generate("gaussian", N, oc.seed, beta) if beta > 0 else None
        dp = pt.build_constrained(law, N, fld)
        orc = pt.brute_force_oracle(law, psi, fld, 0.3, N)
        err = max(abs(math.exp(paths.configuration_log_prob(dp, psi, 0.3, orc.contacts(i))) - math.exp(orc.log_prob[i]))
                  for i in range(orc.masks.size))
        rows.append(["sampler_law", 1.5, "overtwist", beta, N, 0.3, err, err <= 1e-12])
    ctx.table("oracle_check", ["check", "alpha", "potential", "beta", "N", "h", "abs_error", "pass"], rows)
    ok = all(r[7] for r in rows)
    by = {}
    for r in rows:
        if not (isinstance(r[6], float) and math.isnan(r[6])):
            by[r[0]] = max(by.get(r[0], 0.0), r[6])
    ctx.summary("oracle_check_summary", {"pass": ok, "max_abs_error": by, "failures": failures,
                                         "tolerance": oc.tolerance})
    for k, v in by.items():
        print(f"  {k:18s} max abs error {v:.3e}")
    for f in failures:
        print(f"  FAIL {f}", file=sys.stderr)
    print(f"oracle-check: {'PASS' if ok else 'FAIL'} ({len(rows)} checks)")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_sample(ctx: Context) -> int:
    """Exact Gibbs samples of the contact set."""
    cfg = ctx.cfg
    N = cfg.grids.sizes[-1]
    beta = cfg.disorder.beta
    hs = [float(h) for h in cfg.grids.h_grid]
    dump = cfg.sampling.dump_contacts and N <= 62
    if beta > 0:
        seeds = pt.resolve_seeds(cfg.disorder.replicas, None, ctx.disorder_seed)
    else:
        seeds = [0] * cfg.sampling.replicas

    def per_replica(dp, r):
        return [paths.sample_gibbs_batch(dp, ctx.psi, h, cfg.sampling.draws, _sample_seed(ctx.seed, N, h), r,
                                         masks=dump) for h in hs]

    if beta > 0:
        res = pt.map_replicas(ctx.law, N, beta, seeds, per_replica, dist=cfg.disorder.dist, threads=ctx.threads,
                              **ctx.build_kw(True))
    else:
        dp = pt.build_constrained(ctx.law, N, **ctx.build_kw(False))
        res = [per_replica(dp, r) for r in range(len(seeds))]
    for i, h in enumerate(hs):
        rows = []
        lines = []
        for r in range(len(seeds)):
            b = res[r][i]
            for d in range(len(b)):
                rows.append([r, d, int(b.m[d]), float(b.contact_frac[d]), float(b.eta1_frac[d]), float(b.eta2_frac[d])])
                if dump:
                    mask = int(b.masks[d])
                    lines.append(json.dumps({"replica": r, "draw": d,
                                             "contacts": [p for p in range(1, N + 1) if mask >> (p - 1) & 1]}))
        ctx.table(f"samples_h{i}", ["replica", "draw", "m", "contact_frac", "eta1_frac", "eta2_frac"], rows,
                  comments=[f"h = {h!r}", f"N = {N}", f"beta = {beta!r}"])
        if dump:
            (ctx.out / f"contacts_h{i}.jsonl").write_text("\n".join(lines) + "\n")
    print(f"sample: N={N}, {len(hs)} h values, {len(seeds)} replicas x {cfg.sampling.draws} draws")
    return EXIT_OK


COMMANDS = {
    "phase-diagram": cmd_phase_diagram,
    "bigjump-scan": cmd_bigjump_scan,
    "disorder-scan": cmd_disorder_scan,
    "exponents": cmd_exponents,
    "convexity-check": cmd_convexity_check,
    "oracle-check": cmd_oracle_check,
    "sample": cmd_sample,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML experiment config (defaults apply when omitted)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed (overrides sampling.master_seed)")
    common.add_argument("--threads", type=int, default=1, metavar="INT", help="worker threads for replicas")
    common.add_argument("--format", choices=["csv", "json"], help="table format (overrides output.format)")
    p = _Parser(prog="pinlab", description="Generalized pinning model laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=(fn.__doc__ or name).strip().splitlines()[0])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else from_dict({})
        seed = cfg.sampling.master_seed if args.seed is None else args.seed
        if seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "--seed")
        if args.threads < 1:
            raise ConfigError("threads must be >= 1", "--threads")
        ctx = Context(cfg, Path(args.out or cfg.output.directory), args.format or cfg.output.format,
                      args.threads, seed)
        return COMMANDS[args.command](ctx)
    except (ConfigError, ParameterDomainError, MemoryBudgetError) as exc:
        print(f"pinlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
