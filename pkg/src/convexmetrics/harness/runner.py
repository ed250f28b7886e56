"""Suite runner: evaluates every configured check and returns report rows."""

from __future__ import annotations

import math
import zlib
from functools import cached_property
from typing import Callable, Iterable

import numpy as np
from scipy.optimize import brentq

from .. import bounds as B
from .. import distances as D
from .. import measures as M
from ..errors import ConvexMetricsError, DomainError
from ..transport import exact_ot_cost, sinkhorn_ot_cost
from .config import Check, ExperimentConfig, PairTask, SingleTask
from .report import ReportRow, make_row, signed_slack

CROSSCHECK_REL = 0.05
BL_CAP_TOL = 1e-8
MINIMIZE_TOL = 1e-9
ND_CLOUD = 400


def derive_seed(seed: int, *labels: str) -> int:
    words = [int(seed) & 0xFFFFFFFF] + [zlib.crc32(lbl.encode()) for lbl in labels]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


# --------------------------------------------------------------------------
# constant fitting


def fit_constant(rows: Iterable[tuple[float, float]]) -> float:
    """Smallest c with lhs <= c * rhs_part on every row, i.e. max lhs / rhs_part."""
    rows = list(rows)
    if not rows:
        raise ValueError("fit_constant needs at least one row")
    best = 0.0
    for lhs, part in rows:
        if not part > 0:
            raise DomainError(f"rhs part must be > 0, got {part}")
        best = max(best, lhs / part)
    return best


def _minimal_c(evaluate: Callable[[float], float], lhs: float) -> float | None:
    """Smallest c > 0 with evaluate(c) >= lhs, for evaluate increasing in c."""
    if lhs <= 0:
        return 0.0

    def gap(logc):
        v = evaluate(math.exp(logc))
        return (math.log(v) if v > 0 else -1e300) - math.log(lhs)

    lo, hi = -60.0, 60.0
    if gap(hi) < 0:
        return None
    if gap(lo) >= 0:
        return math.exp(lo)
    return math.exp(brentq(gap, lo, hi, xtol=1e-13, rtol=1e-13))


def _fit_entry(slot: str, lhs: float, evaluate: Callable[[float], float], exponent: float | None):
    if not math.isfinite(lhs):
        return None
    if exponent is not None:
        part = evaluate(1.0)
        if not part > 0 or not math.isfinite(part):
            return None
        return (slot, max(lhs, 0.0) ** (1.0 / exponent), part ** (1.0 / exponent))
    c = _minimal_c(evaluate, lhs)
    return None if c is None else (slot, c, 1.0)


def fitted_constants(rows: Iterable[ReportRow]) -> dict[str, float]:
    groups: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        if r.fit is None or r.verdict in ("invalid-domain", "infinite"):
            continue
        slot, lhs, part = r.fit
        groups.setdefault(slot, []).append((lhs, part))
    return {slot: fit_constant(v) for slot, v in sorted(groups.items())}


# --------------------------------------------------------------------------
# pair quantities


class _Pair:
    def __init__(self, task: PairTask, cfg: ExperimentConfig):
        self.task = task
        self.cfg = cfg
        self.mu = cfg.specs[task.mu]
        self.nu = cfg.specs[task.nu]
        self.n = self.mu.dim
        self._cache: dict = {}

    def seed(self, label: str) -> int:
        return derive_seed(self.cfg.seed, self.task.pair_id, label)

    def memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @cached_property
    def s_eff(self) -> float:
        vals = [self.mu.conv.s, self.nu.conv.s]
        if self.task.s is not None:
            vals.append(self.task.s)
        return min(vals)

    def tv(self) -> D.DistanceEstimate:
        return self.memo("tv", lambda: D.tv_distance(self.mu, self.nu, self.cfg.budget, self.seed("tv")))

    def bl(self) -> D.DistanceEstimate:
        if self.n == 1:
            return self.memo("bl", lambda: D.bl_distance_1d(self.mu, self.nu))
        return self.memo("bl", lambda: D.bl_distance_sampled(self.mu, self.nu, ND_CLOUD, self.seed("bl")))

    def w(self, p: float) -> D.DistanceEstimate:
        if self.n == 1:
            return self.memo(("w", p), lambda: D.wasserstein_1d(self.mu, self.nu, p))

        def emp():
            a = M.sample(self.mu, self.seed("w-mu"), ND_CLOUD)
            b = M.sample(self.nu, self.seed("w-nu"), ND_CLOUD)
            return D.wasserstein_empirical(a, b, p)

        return self.memo(("w", p), emp)

    def renyi(self, p: float) -> D.DistanceEstimate:
        return self.memo(
            ("renyi", p), lambda: D.renyi_divergence(self.mu, self.nu, p, self.cfg.budget, self.seed(f"renyi{p:g}"))
        )

    def tsallis(self, p: float) -> D.DistanceEstimate:
        return self.memo(
            ("tsallis", p), lambda: D.tsallis_divergence(self.mu, self.nu, p, self.cfg.budget, self.seed(f"renyi{p:g}"))
        )


def _se(*parts):
    vals = [p for p in parts if p]
    return math.sqrt(sum(v * v for v in vals)) if vals else None


def _distance_row(pid, quantity, est: D.DistanceEstimate, cap: float, tol: float, sigma: float) -> ReportRow:
    v = est.value
    if not est.finite:
        return ReportRow(pid, quantity, v, cap, signed_slack(v, cap), "infinite", est.method, None)
    slack = v if math.isinf(cap) else min(v, cap - v)
    buffer = tol + (sigma * est.std_error if est.std_error else 0.0)
    verdict = "holds" if slack >= -buffer else "violated"
    return ReportRow(pid, quantity, v, cap, slack, verdict, est.method, est.std_error)


def _pair_rows(pair: _Pair, check: Check) -> list[ReportRow]:
    cfg = pair.cfg
    pid, tol, sig = pair.task.pair_id, cfg.tol_abs, cfg.sigma
    a = check.args
    bc = cfg.bounds
    label = check.label()

    def row(quantity, lhs, rhs, method, **kw):
        return make_row(pid, quantity, lhs, rhs, method, tol=kw.pop("tol", tol), sigma=sig, **kw)

    name = check.name
    if name == "tv":
        return [_distance_row(pid, "d_tv", pair.tv(), 2.0, tol, sig)]
    if name == "bl":
        return [_distance_row(pid, "d_bl", pair.bl(), 2.0, tol, sig)]
    if name == "w":
        return [_distance_row(pid, f"w[{a[0]:g}]", pair.w(a[0]), math.inf, tol, sig)]
    if name == "kl":
        return [_distance_row(pid, "kl", pair.renyi(1.0), math.inf, tol, sig)]
    if name == "renyi":
        return [_distance_row(pid, f"renyi[{a[0]:g}]", pair.renyi(a[0]), math.inf, tol, sig)]
    if name == "tsallis":
        return [_distance_row(pid, f"tsallis[{a[0]:g}]", pair.tsallis(a[0]), math.inf, tol, sig)]

    if name == "pinsker":
        p = a[0]
        tv, dp = pair.tv(), pair.renyi(p)
        lhs = 0.5 * p * tv.value**2
        se = _se(p * tv.value * (tv.std_error or 0.0), dp.std_error)
        return [row(f"pinsker_gilardoni[{p:g}]", lhs, dp.value, f"{tv.method}|{dp.method}", std_error=se)]
    if name == "talagrand":
        w2, kl = pair.w(2.0), pair.renyi(1.0)
        return [row("talagrand", w2.value**2, 2.0 * kl.value, f"{w2.method}|{kl.method}", std_error=kl.std_error)]
    if name == "renyi_interval":
        p, q = a
        coef = B.renyi_interval_coefficient(p, q)
        dp, dq = pair.renyi(p), pair.renyi(q)
        se = _se(dp.std_error, dq.std_error)
        return [
            row(f"renyi_interval[{p:g},{q:g}]/lower", coef * dq.value, dp.value, dp.method, std_error=se),
            row(f"renyi_interval[{p:g},{q:g}]/upper", dp.value, dq.value, dp.method, std_error=se),
        ]
    if name == "w_monotone":
        p, q = a
        wp, wq = pair.w(p), pair.w(q)
        return [row(f"w_monotone[{p:g},{q:g}]", wp.value, wq.value, wp.method)]
    if name == "renyi_monotone":
        p, q = a
        dp, dq = pair.renyi(p), pair.renyi(q)
        return [row(f"renyi_monotone[{p:g},{q:g}]", dp.value, dq.value, dp.method, std_error=_se(dp.std_error, dq.std_error))]
    if name == "tsallis_dominates":
        p = a[0]
        dp, tp = pair.renyi(p), pair.tsallis(p)
        return [row(f"tsallis_dominates[{p:g}]", dp.value, tp.value, dp.method, std_error=_se(dp.std_error, tp.std_error))]
    if name == "bl_cap":
        m = int(a[0])
        x = M.sample(pair.mu, pair.seed(f"{label}-mu"), m)
        y = M.sample(pair.nu, pair.seed(f"{label}-nu"), m)
        bl = D.bl_distance_empirical(x, y)
        tv = D.tv_empirical(x, y)
        w1 = exact_ot_cost(x, y, 1.0)
        return [row(f"bl_cap[{m}]", bl.value, min(tv, w1.distance), f"lp|{w1.method}", tol=BL_CAP_TOL)]
    if name == "ot_crosscheck":
        p, m = a[0], int(a[1])
        x = M.stratified_sample(pair.mu, pair.seed(f"{label}-mu"), m)
        y = M.stratified_sample(pair.nu, pair.seed(f"{label}-nu"), m)
        ref = pair.w(p).value
        ex = exact_ot_cost(x, y, p)
        sk = sinkhorn_ot_cost(x, y, p, reg=0.01)
        return [
            row(f"ot_crosscheck[{p:g},{m}]/exact", abs(ex.distance - ref) / ref, CROSSCHECK_REL, ex.method, tol=0.0),
            row(f"ot_crosscheck[{p:g},{m}]/sinkhorn", abs(sk.distance - ex.distance) / ex.distance, CROSSCHECK_REL, sk.method, tol=0.0),
        ]

    # theorems
    s, n = pair.s_eff, pair.n
    if name == "thm_tv_from_bl":
        tv, bl = pair.tv(), pair.bl()
        br = B.thm_tv_from_bl(bl.value, n, s, bc)
        ev = lambda c: B.thm_tv_from_bl(bl.value, n, s, bc.with_constants(c_tvbl=c)).value
        fit = _fit_entry("c_tvbl", tv.value, ev, B.c_exponent("thm_tv_from_bl", n, s)) if br.in_validity_domain else None
        return [_bound_row(row, "thm_tv_from_bl", tv, br, fit, f"{tv.method}|{bl.method}")]
    if name == "thm_w1_from_bl":
        w1, bl = pair.w(1.0), pair.bl()
        br = B.thm_w1_from_bl(bl.value, n, s, bc)
        ev = lambda c: B.thm_w1_from_bl(bl.value, n, s, bc.with_constants(c_w1bl=c)).value
        fit = _fit_entry("c_w1bl", w1.value, ev, 1.0) if br.in_validity_domain else None
        return [_bound_row(row, "thm_w1_from_bl", w1, br, fit, f"{w1.method}|{bl.method}")]
    if name == "thm_wq_from_wp":
        p, q = a
        wp, wq = pair.w(p), pair.w(q)
        if not wp.finite:
            return [row(f"thm_wq_from_wp[{p:g},{q:g}]", math.inf, math.inf, "analytic-tail")]
        br = B.thm_wq_from_wp(wp.value, p, q, n, s, bc)
        ev = lambda c: B.thm_wq_from_wp(wp.value, p, q, n, s, bc.with_constants(c_wqwp=c)).value
        fit = _fit_entry("c_wqwp", wq.value, ev, 1.0) if br.in_validity_domain else None
        return [_bound_row(row, f"thm_wq_from_wp[{p:g},{q:g}]", wq, br, fit, wq.method)]
    if name == "thm_kl_from_tv":
        tv, kl = pair.tv(), pair.renyi(1.0)
        br = B.thm_kl_from_tv(tv.value, n, s, bc)
        ev = lambda c: B.thm_kl_from_tv(tv.value, n, s, bc.with_constants(c_kl=c)).value
        fit = _fit_entry("c_kl", kl.value, ev, 1.0) if br.in_validity_domain else None
        return [_bound_row(row, "thm_kl_from_tv", kl, br, fit, f"{kl.method}|{tv.method}")]
    if name == "thm_tsallis_from_tv":
        p = a[0]
        tv, tp = pair.tv(), pair.tsallis(p)
        mom = M.exp_quadratic_moment(pair.mu, bc.alpha * (p - 1.0))
        br = B.thm_tsallis_from_tv(tv.value, n, s, p, mom, bc)
        ev = lambda c: B.thm_tsallis_from_tv(tv.value, n, s, p, mom, bc.with_constants(c_tsallis=c)).value
        fit = None
        if br.in_validity_domain and math.isfinite(br.value):
            fit = _fit_entry("c_tsallis", tp.value, ev, None)
        return [_bound_row(row, f"thm_tsallis_from_tv[{p:g}]", tp, br, fit, f"{tp.method}|{tv.method}")]
    raise AssertionError(name)  # pragma: no cover - guarded by config parsing


def _bound_row(row, quantity, est: D.DistanceEstimate, br: B.BoundResult, fit, method) -> ReportRow:
    return row(
        quantity,
        est.value,
        br.value,
        method,
        std_error=est.std_error,
        valid=br.in_validity_domain,
        vacuous=br.vacuous,
        fit=fit,
    )


# --------------------------------------------------------------------------
# single-spec checks


class _Single:
    def __init__(self, task: SingleTask, cfg: ExperimentConfig, l1_cache: dict):
        self.task, self.cfg = task, cfg
        self.spec = cfg.specs[task.spec]
        self.n = self.spec.dim
        self.l1_cache = l1_cache

    def seed(self, label):
        return derive_seed(self.cfg.seed, self.task.pair_id, label)

    @property
    def s_eff(self) -> float:
        s = self.spec.conv.s
        return s if self.task.s is None else min(s, self.task.s)

    def l1_gap(self, t: float) -> float:
        key = (self.task.spec, t)
        if key not in self.l1_cache:
            self.l1_cache[key] = M.l1_distance_to_smoothed(self.spec, t)
        return self.l1_cache[key]


def _single_rows(sg: _Single, check: Check) -> list[ReportRow]:
    cfg, spec, n = sg.cfg, sg.spec, sg.n
    pid, tol, sig, bc = sg.task.pair_id, cfg.tol_abs, cfg.sigma, cfg.bounds
    a = check.args

    def row(quantity, lhs, rhs, method, **kw):
        return make_row(pid, quantity, lhs, rhs, method, tol=kw.pop("tol", tol), sigma=sig, **kw)

    name = check.name
    if name == "grunbaum":
        s = spec.conv.s
        mean = M.mean_and_cov(spec)[0][0]
        return [row("grunbaum_lower", B.grunbaum_lower(s), M.sf_1d(spec, mean), "closed-form-cdf")]
    if name == "max_density":
        if n == 1:
            s = min(spec.conv.s, 0.0)
            br = B.max_density_bound(1, s, bc)
            return [row("max_density_bound", M.density_sup_1d(spec), br.value, "golden-section",
                        valid=br.in_validity_domain)]
        s = sg.s_eff
        br = B.max_density_bound(n, s, bc)
        peak = M.density(spec, M.mode(spec))
        ev = lambda c: B.max_density_bound(n, s, bc.with_constants(c_maxdens=c)).value
        fit = _fit_entry("c_maxdens", peak, ev, B.c_exponent("max_density_bound", n, s)) if br.in_validity_domain else None
        return [row("max_density_bound", peak, br.value, "mode", valid=br.in_validity_domain, fit=fit)]
    if name == "varentropy":
        est = M.varentropy(spec, cfg.budget, sg.seed("varentropy"))
        return [row("varentropy_bound", est.value, B.varentropy_bound(n, spec.conv.kappa), "monte-carlo",
                    std_error=est.std_error)]
    if name == "max_entropy":
        est = M.differential_entropy(spec, cfg.budget, sg.seed("entropy"))
        return [row("max_entropy", est.value, 0.5 * n * math.log(2 * math.pi * math.e), "monte-carlo",
                    std_error=est.std_error)]
    if name == "tail":
        u = a[0]
        s = sg.s_eff
        if n == 1:
            prob, se, method = M.sf_1d(spec, u) + M.cdf_1d(spec, -u), None, "closed-form-cdf"
        else:
            r = np.linalg.norm(M.sample(spec, sg.seed(check.label()), cfg.budget).points, axis=1)
            prob = float(np.mean(r >= u))
            se, method = math.sqrt(max(prob * (1 - prob), 1.0 / cfg.budget) / cfg.budget), "monte-carlo"
        br = B.tail_bound_deviation(u, n, s, bc)
        ev = lambda c: B.tail_bound_deviation(u, n, s, bc.with_constants(c_dev=c)).value
        fit = _fit_entry("c_dev", prob, ev, None) if br.in_validity_domain else None
        return [row(f"tail_bound_deviation[{u:g}]", prob, br.value, method, std_error=se,
                    valid=br.in_validity_domain, vacuous=br.vacuous, fit=fit)]
    if name == "norm_moment":
        p = a[0]
        s = sg.s_eff
        br_valid = -1.0 / p < s < 0
        if not br_valid:
            return [row(f"norm_moment_bound[{p:g}]", math.nan, math.nan, "none", valid=False)]
        mom = M.abs_moment(spec, p, cfg.budget, sg.seed("moment")) ** (1.0 / p)
        mean_abs = M.abs_moment(spec, 1.0, cfg.budget, sg.seed("moment"))
        br = B.norm_moment_bound(p, n, s, mean_abs, bc)
        ev = lambda c: B.norm_moment_bound(p, n, s, mean_abs, bc.with_constants(c_norm=c)).value
        method = "quadrature" if n == 1 else "monte-carlo"
        return [row(f"norm_moment_bound[{p:g}]", mom, br.value, method, valid=br.in_validity_domain,
                    fit=_fit_entry("c_norm", mom, ev, 1.0))]
    if name == "ledoux":
        t = a[0]
        gap = sg.l1_gap(t)
        return [row(f"ledoux[{t:g}]", gap, B.ledoux_bound(t, M.grad_l1_norm_1d(spec)), "quadrature-regions", tol=1e-4)]
    if name == "smoothing":
        t = a[0]
        s = sg.s_eff
        gap = sg.l1_gap(t)
        br = B.smoothing_l1_bound(t, n, s, bc)
        ev = lambda c: B.smoothing_l1_bound(t, n, s, bc.with_constants(c_regul=c)).value
        fit = _fit_entry("c_regul", gap, ev, B.c_exponent("smoothing_l1_bound", n, s)) if br.in_validity_domain else None
        return [row(f"smoothing_l1_bound[{t:g}]", gap, br.value, "quadrature-regions",
                    valid=br.in_validity_domain, vacuous=br.vacuous, fit=fit)]
    if name == "large_dev":
        s = sg.s_eff
        if not -0.5 < s < 0:
            return [row("large_dev_lower", math.nan, math.nan, "none", valid=False)]
        c0 = B.const_c0(n, s)
        peak = M.density_sup_1d(spec) if n == 1 else M.density(spec, M.mode(spec))
        x = M.sample(spec, sg.seed("large_dev"), cfg.budget).points
        dens = M.density(spec, x if n > 1 else x[:, 0])
        frac = float(np.mean(dens >= c0**n * peak))
        se = math.sqrt(max(frac * (1 - frac), 1.0 / cfg.budget) / cfg.budget)
        return [row("large_dev_lower", B.large_dev_lower(n, s), frac, "monte-carlo", std_error=se)]
    if name == "kappa_concavity":
        slack = M.kappa_concavity_slack(spec, seed=sg.seed("kappa"))
        return [row("kappa_concavity", 0.0, slack, "random-triples")]
    raise AssertionError(name)  # pragma: no cover


# --------------------------------------------------------------------------
# global checks


def minimize_oracle(A: float, Bc: float, m: float, p: float, Mlo: float) -> float:
    """Brute force: log-spaced grid on [M, M e^60] refined by golden section in log t."""
    from .._numerics import golden_section_min

    def F(logt):
        t = math.exp(logt)
        return A * t**m + Bc * t ** (-p)

    lo = math.log(Mlo)
    grid = np.linspace(lo, lo + 60.0, 4001)
    vals = np.array([F(g) for g in grid])
    k = int(np.argmin(vals))
    a_, b_ = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    _, best = golden_section_min(F, a_, b_, tol=1e-14)
    return min(best, float(vals[k]), F(lo))


def minimize_draws(seed: int, count: int = 1000):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        A, Bc = np.exp(rng.uniform(math.log(0.1), math.log(10.0), 2))
        m, p = rng.uniform(0.2, 4.0, 2)
        Mlo = math.exp(rng.uniform(math.log(0.01), math.log(10.0)))
        yield float(A), float(Bc), float(m), float(p), float(Mlo)


def _global_rows(name: str, cfg: ExperimentConfig) -> list[ReportRow]:
    pid = "global"

    def row(quantity, lhs, rhs, method, tol):
        return make_row(pid, quantity, lhs, rhs, method, tol=tol, sigma=cfg.sigma)

    if name == "minimize_lemma":
        worst = 0.0
        for args in minimize_draws(derive_seed(cfg.seed, "minimize_lemma")):
            ref = minimize_oracle(*args)
            worst = max(worst, abs(B.minimize_lemma(*args) - ref) / abs(ref))
        return [row("minimize_lemma", worst, MINIMIZE_TOL, "golden-section", 0.0)]
    if name == "constants":
        vals = []
        for n in (1, 2, 4):
            for s in (-0.45, -0.3, -0.2, -0.1, -0.01):
                vals += [B.const_c0(n, s), B.const_c2(s), B.const_c1_bound(s)]
        d0 = min(B.const_d0(n, s) for n in (1, 2, 4) for s in (-0.45, -0.1, -0.01))
        return [
            row("const_c0_c2_c1_bound/upper", max(vals), 1.0, "closed-form", 0.0),
            row("const_c0_c2_c1_bound/lower", 0.0, min(vals), "closed-form", 0.0),
            row("const_d0/lower", 0.0, d0, "closed-form", 0.0),
        ]
    if name == "const_C":
        eps = 1e-8
        return [
            row("const_C[1]/blowup", 1e6, B.const_C(1.0, -1.0 + eps), "closed-form", 0.0),
            row("const_d0/blowup", 1e6, B.const_d0(1, -0.5 + eps), "closed-form", 0.0),
            row("max_density_bound/blowup", 1e6, B.max_density_bound(1, -0.5 + eps).value, "closed-form", 0.0),
            row("const_C[2]/branch", 0.0, min(B.const_C(2.0, s) for s in (-0.49, -0.4, -1 / 3 - 1e-9, -0.2)),
                "closed-form", 0.0),
        ]
    if name == "grunbaum_continuity":
        e = math.exp(-1.0)
        gap = max(abs(B.grunbaum_lower(1e-8) - e), abs(B.grunbaum_lower(-1e-8) - e))
        return [row("grunbaum_lower/continuity", gap, 1e-6, "closed-form", 0.0)]
    if name == "c1_certified":
        worst = 0.0
        for n in (1, 2, 3):
            for s in (-0.45, -0.25, -0.1, -0.02):
                c1, _ = B.c1_exact(n, s)
                worst = max(worst, c1 / B.const_c1_bound(s))
        return [row("large_dev_lower/c1_certified", worst, 1.0, "root-finding", 0.0)]
    raise AssertionError(name)  # pragma: no cover


# --------------------------------------------------------------------------


def run_suite(cfg: ExperimentConfig, progress: Callable[[str], None] | None = None) -> list[ReportRow]:
    """All configured checks, ordered by pair id (globals last as id 'global')."""
    rows: list[ReportRow] = []
    l1_cache: dict = {}
    tasks = sorted([*cfg.pairs, *cfg.singles], key=lambda t: t.pair_id)
    for task in tasks:
        if progress:
            progress(task.pair_id)
        if isinstance(task, PairTask):
            ctx = _Pair(task, cfg)
            for check in task.checks:
                rows.extend(_guard(lambda: _pair_rows(ctx, check), task.pair_id, check))
        else:
            sg = _Single(task, cfg, l1_cache)
            for check in task.checks:
                rows.extend(_guard(lambda: _single_rows(sg, check), task.pair_id, check))
    for name in cfg.globals:
        if progress:
            progress(name)
        rows.extend(_global_rows(name, cfg))
    return rows


def _guard(fn, pid, check: Check) -> list[ReportRow]:
    # a precondition failure is recorded as invalid-domain rather than aborting the suite
    try:
        return fn()
    except (DomainError, ConvexMetricsError) as exc:
        return [ReportRow(pid, check.label(), math.nan, math.nan, math.nan, "invalid-domain", f"error:{type(exc).__name__}")]
