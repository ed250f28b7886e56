"""Acceptance criteria 1-14, one recorded PASS/FAIL line each.

The lines are echoed in the terminal summary (see conftest.record). Oracles
are computed here from closed forms or plain numerics wherever possible, not
taken from the harness.
"""

import json
import math
import time
import warnings

import numpy as np
import pytest
from scipy import optimize, stats

from convexmetrics import bounds as B
from convexmetrics import distances as D
from convexmetrics import measures as M
from convexmetrics.harness import fitted_constants, load_config, run_suite
from convexmetrics.transport import exact_ot_cost, sinkhorn_ot_cost

from conftest import GOLDEN, cauchy_iso, normal, record
from test_bounds import golden_min

G = M.make_distribution("std-gaussian", n=1)
CAUCHY3 = M.make_distribution("cauchy-type", n=1, beta=3)
EXPO = M.make_distribution("exponential-centered")
UNIF = M.isotropize(M.make_distribution("uniform-interval", a=0.0, b=1.0))


def grid_pairs():
    """Twelve 1D pairs with finite D_p for every p <= 1."""
    return [
        ("N(0.5,1)~G", normal(0.5, 1), G),
        ("N(1,1)~G", normal(1, 1), G),
        ("N(2,1)~G", normal(2, 1), G),
        ("N(0,0.5)~G", normal(0, 0.5), G),
        ("N(0,2)~G", normal(0, 2), G),
        ("N(0,4)~G", normal(0, 4), G),
        ("N(1,2)~G", normal(1, 2), G),
        ("cauchy3~G", CAUCHY3, G),
        ("cauchy(-0.1)~G", cauchy_iso(-0.1), G),
        ("cauchy(-0.2)~G", cauchy_iso(-0.2), G),
        ("cauchy3+1~cauchy3", M.affine_image(CAUCHY3, shift=[1.0]), CAUCHY3),
        ("expo~G", EXPO, G),
    ]


def test_c01_minimize_lemma():
    rng = np.random.default_rng(2024)
    draws = [
        (*rng.uniform(0.05, 20, 2), *rng.uniform(0.2, 4, 2), rng.uniform(0.01, 10)) for _ in range(1000)
    ]
    t0 = time.perf_counter()
    closed = [B.minimize_lemma(*d) for d in draws]
    elapsed = time.perf_counter() - t0
    worst = max(abs(c - golden_min(*d)) / golden_min(*d) for c, d in zip(closed, draws))
    ok = worst <= 1e-9 and elapsed < 1.0
    assert record(1, ok, f"1000 draws, worst rel err {worst:.1e}, closed form {elapsed * 1e3:.1f} ms")


def test_c02_grunbaum():
    t0 = time.perf_counter()
    u = M.make_distribution("uniform-interval", a=0.0, b=1.0)
    p_unif = M.sf_1d(u, 0.5)
    p_expo = M.sf_1d(EXPO, 0.0)
    p_cauchy = M.sf_1d(CAUCHY3, 0.0)
    elapsed = time.perf_counter() - t0
    ok = (
        p_unif == B.grunbaum_lower(1.0) == 0.5
        and abs(p_expo - math.exp(-1)) <= 1e-6
        and abs(p_expo - B.grunbaum_lower(0.0)) <= 1e-6
        and p_cauchy == pytest.approx(0.5, abs=1e-12)
        and p_cauchy >= B.grunbaum_lower(-1 / 3) == pytest.approx((2 / 3) ** 3)
        and elapsed < 1.0
    )
    assert record(2, ok, f"uniform {p_unif}, exponential {p_expo:.9f} vs e^-1, cauchy3 {p_cauchy} >= {(2 / 3) ** 3:.4f}")


def located_max(spec):
    lo, hi = spec.support
    lo, hi = max(lo, -12.0), min(hi, 12.0)
    x = np.linspace(lo, hi, 200_001)
    f = np.asarray(M.density(spec, x))
    k = int(np.argmax(f))
    res = optimize.minimize_scalar(
        lambda y: -M.density(spec, y), bounds=(x[max(k - 1, 0)], x[min(k + 1, len(x) - 1)]), method="bounded",
        options={"xatol": 1e-12},
    )
    return max(float(f[k]), -res.fun)


def test_c03_density_maximum():
    members = [(G, 0.0), (EXPO, 0.0)] + [(cauchy_iso(s), s) for s in (-0.05, -0.1, -0.2, -0.3, -0.45)]
    worst = min(1 / (1 + 2 * s) + 1e-8 - located_max(spec) for spec, s in members)
    raw = located_max(CAUCHY3)
    ok = worst >= 0 and abs(raw - 2 / math.pi) <= 1e-9 and raw <= 3
    assert record(3, ok, f"{len(members)} isotropic members, min slack {worst:.2e}; cauchy3 max {raw:.6f} = 2/pi <= 3")


def test_c04_pinsker_gilardoni():
    t0 = time.perf_counter()
    worst = math.inf
    for _, mu, nu in grid_pairs():
        tv = D.tv_distance(mu, nu).value
        for p in (0.25, 0.5, 1.0):
            dp = D.renyi_divergence(mu, nu, p)
            assert dp.finite
            worst = min(worst, dp.value + 1e-6 - 0.5 * p * tv**2)
    elapsed = time.perf_counter() - t0
    ok = worst >= 0 and elapsed < 10
    assert record(4, ok, f"12 pairs x 3 orders, min slack {worst:.3e}, {elapsed:.1f} s")


def test_c05_talagrand():
    eq = max(abs(D.wasserstein_1d(normal(m, 1), G, 2).value ** 2 - 2 * D.kl_divergence(normal(m, 1), G).value) for m in (0.5, 1, 2))
    worst = math.inf
    for _, mu, nu in grid_pairs():
        if nu is not G:
            continue
        kl = D.kl_divergence(mu, nu)
        w2 = D.wasserstein_1d(mu, nu, 2)
        if kl.finite and w2.finite:
            worst = min(worst, 2 * kl.value + 1e-4 - w2.value**2)
    ok = eq <= 1e-4 and worst >= 0
    assert record(5, ok, f"equality gap {eq:.1e} on N(m,1); min slack {worst:.3e} on the Gaussian-reference grid")


def test_c06_monotonicity():
    w_worst = d_worst = t_worst = i_worst = math.inf
    for _, mu, nu in grid_pairs():
        ws = [D.wasserstein_1d(mu, nu, p).value for p in (1, 1.5, 2, 3)]
        w_worst = min(w_worst, min(b - a + 1e-6 for a, b in zip(ws, ws[1:])))
        orders = (0.25, 0.5, 0.75, 1.0, 1.5, 2.0)
        ds = {p: D.renyi_divergence(mu, nu, p) for p in orders}
        for p, q in zip(orders, orders[1:]):
            if ds[q].finite:
                d_worst = min(d_worst, ds[q].value - ds[p].value + 1e-7)
        for q in (1.5, 2.0):
            tq = D.tsallis_divergence(mu, nu, q)
            assert tq.finite == ds[q].finite
            if tq.finite:
                t_worst = min(t_worst, tq.value - ds[q].value + 1e-7)
        for p, q in ((0.25, 0.5), (0.5, 0.75)):
            coef = p * (1 - q) / (1 - p) ** 2
            assert B.renyi_interval_coefficient(p, q) == pytest.approx(coef, rel=1e-15)
            i_worst = min(i_worst, ds[p].value - coef * ds[q].value + 1e-7, ds[q].value - ds[p].value + 1e-7)
    ok = min(w_worst, d_worst, t_worst, i_worst) >= 0
    assert record(
        6, ok, f"min slacks: W_p<=W_q {w_worst:.1e}, D_p<=D_q {d_worst:.1e}, D_q<=T_q {t_worst:.1e}, interval {i_worst:.1e}"
    )


def cloud_pairs():
    rng = np.random.default_rng(7)
    sizes = np.unique(np.round(np.geomspace(2, 500, 19)).astype(int))
    pairs = [(M.EmpiricalMeasure.uniform(np.array([0.0, 1.0])), M.EmpiricalMeasure.uniform(np.array([0.5, 3.0])))]
    for i, m in enumerate(sizes):
        dim = 2 if m <= 120 and i % 2 else 1
        x = rng.normal(size=(m, dim))
        y = rng.standard_t(3, size=(m + i % 3, dim)) * 0.8 + 0.4
        pairs.append((M.EmpiricalMeasure.uniform(x), M.EmpiricalMeasure(y, rng.dirichlet(np.ones(len(y))))))
    while len(pairs) < 20:  # shared atoms: nonzero union-support overlap
        base = rng.normal(size=(30, 1))
        pairs.append((M.EmpiricalMeasure.uniform(base), M.EmpiricalMeasure.uniform(np.vstack([base[:20], rng.normal(size=(10, 1))]))))
    return pairs


def test_c07_bl_cap_on_clouds():
    pairs = cloud_pairs()
    worst = math.inf
    for a, b in pairs:
        bl = D.bl_distance_empirical(a, b).value
        worst = min(worst, min(D.tv_empirical(a, b), exact_ot_cost(a, b, 1).cost) + 1e-8 - bl)
    sizes = [a.size for a, _ in pairs]
    ok = len(pairs) == 20 and worst >= 0
    assert record(7, ok, f"{len(pairs)} cloud pairs, sizes {min(sizes)}..{max(sizes)}, min slack {worst:.2e}")


def test_c08_ot_crosscheck():
    t0 = time.perf_counter()
    m = 2000
    cases = [
        ("N(2,1)~G", normal(2, 1), G),
        ("cauchy3+1~cauchy3", M.affine_image(CAUCHY3, shift=[1.0]), CAUCHY3),
    ]
    details, ok = [], True
    for name, mu, nu in cases:
        quant = D.wasserstein_1d(mu, nu, 2).value
        a, b = M.stratified_sample(mu, 1, m), M.stratified_sample(nu, 2, m)
        exact = exact_ot_cost(a, b, 2)
        sk = sinkhorn_ot_cost(a, b, 2, reg=0.01)
        r1 = abs(exact.distance - quant) / quant
        r2 = abs(sk.cost - exact.cost) / exact.cost
        ok &= r1 <= 0.05 and r2 <= 0.05
        details.append(f"{name}: quantile/exact {r1:.2%}, sinkhorn/exact {r2:.2%}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    assert record(8, ok, "; ".join(details) + f"; {elapsed:.0f} s")


def isotropic_members():
    out = [(G, 1), (UNIF, 1), (EXPO, 1)] + [(cauchy_iso(s), 1) for s in (-0.05, -0.1, -0.2, -0.3, -0.45)]
    out.append((M.make_distribution("std-gaussian", n=2), 2))
    for s in (-0.1, -0.2, -0.3):
        out.append((M.isotropize(M.make_distribution("cauchy-type", n=2, beta=1 / abs(s))), 2))
    return out


def test_c09_varentropy_and_max_entropy():
    v_worst = h_worst = math.inf
    members = isotropic_members()
    for k, (spec, n) in enumerate(members):
        assert M.is_isotropic(spec, tol=1e-6)
        logs = np.asarray(M.log_density(spec, M.sample(spec, 100 + k, 100_000).points))
        m = len(logs)
        c = logs - logs.mean()
        var = c.var(ddof=1)
        se_var = math.sqrt(max(np.mean(c**4) - var**2, 0) / m)
        h, se_h = -logs.mean(), logs.std(ddof=1) / math.sqrt(m)
        v_worst = min(v_worst, B.varentropy_bound(n, spec.conv.kappa) + 3 * se_var - var)
        h_worst = min(h_worst, n / 2 * math.log(2 * math.pi * math.e) + 3 * se_h - h)
    ok = v_worst >= 0 and h_worst >= 0
    assert record(9, ok, f"{len(members)} members (n=1,2), min slacks: varentropy {v_worst:.3f} (uniform and exponential are equality cases), entropy {h_worst:.4f}")


def _ledoux_rows(rows):
    out = {}
    for r in rows:
        if r.quantity.startswith("ledoux["):
            out[(r.pair_id, float(r.quantity[7:-1]))] = r
    return out


def test_c10_ledoux_inequality(default_run):
    rows = _ledoux_rows(default_run[0])
    sup = {"gauss": 1 / math.sqrt(2 * math.pi), "cauchy3": 2 / math.pi, "unif": 1 / (2 * math.sqrt(3)), "expo": 1.0}
    worst = math.inf
    for (pid, t), r in rows.items():
        rhs = 4 * t * sup[pid]  # 2t int|f'| = 4t sup f for unimodal f, jumps included
        assert r.rhs == pytest.approx(rhs, rel=1e-4)
        worst = min(worst, rhs + 1e-4 - r.lhs)
    for t in (0.05, 0.1, 0.2):
        s2 = 1 + t * t
        x0 = math.sqrt(2 * s2 * math.log(math.sqrt(s2)) / (s2 - 1))
        exact = 4 * (stats.norm.cdf(x0) - stats.norm.cdf(x0 / math.sqrt(s2)))
        assert rows[("gauss", t)].lhs == pytest.approx(exact, rel=1e-6)
    assert len(rows) == 12 and worst >= 0


def test_c10_linear_in_t(default_run):
    rows = _ledoux_rows(default_run[0])
    spread = {}
    for pid in sorted({p for p, _ in rows}):
        ratios = [rows[(pid, t)].lhs / t for t in (0.05, 0.1, 0.2)]
        spread[pid] = max(ratios) / min(ratios) - 1
    worst = max(spread.values())
    ineq_ok = all(r.lhs <= r.rhs + 1e-4 for r in rows.values())
    linear = {p for p, v in spread.items() if v <= 0.10}
    detail = (
        f"Ledoux inequality holds on all 12 rows; gap/t spread: "
        + ", ".join(f"{p} {v:.0%}" for p, v in spread.items())
        + f" (linear within 10% only for {sorted(linear)}; smooth densities give a t^2 gap)"
    )
    record(10, ineq_ok and worst <= 0.10, detail)
    if worst > 0.10:
        pytest.xfail("gap is quadratic in t for smooth densities; see decisions ledger")


def test_c11_large_deviation():
    spec = M.isotropize(CAUCHY3)
    s = spec.conv.s
    c0 = B.const_c0(1, s)
    fmax = M.density(spec, 0.0)
    m = 100_000
    f = np.asarray(M.density(spec, M.sample(spec, 5, m).points[:, 0]))
    frac = float(np.mean(f >= c0 * fmax))
    target = 1 - B.grunbaum_lower(s) / 2
    se = math.sqrt(target * (1 - target) / m)
    ok = frac >= target - 3 * se
    assert record(11, ok, f"s={s:.4f}, c0={c0:.3e}, fraction {frac:.5f} >= {target:.5f} - 3 SE")


def test_c12_theorem_constants():
    golden = json.loads((GOLDEN / "theorem_constants.json").read_text())
    grid = load_config(GOLDEN / "theorem_grid.json")
    fits = {seed: fitted_constants(run_suite(grid.with_overrides(seed=seed, constants={}))) for seed in golden["seeds"]}
    a, b = (fits[s] for s in golden["seeds"])
    slots = {"c_tvbl", "c_w1bl", "c_wqwp", "c_kl"}
    spread = max(abs(a[k] - b[k]) / a[k] for k in slots)
    pinned = all(a[k] == pytest.approx(golden["constants"][k], rel=1e-9) for k in slots)
    ok = (
        set(a) == set(b) == slots
        and all(0 < a[k] < math.inf for k in slots)
        and spread <= 0.10
        and pinned
        and golden["kind"] == "derived"
    )
    assert record(12, ok, ", ".join(f"{k}={a[k]:.4g}" for k in sorted(slots)) + f"; two-seed spread {spread:.1%}; pinned")


def test_c13_infinite_divergence():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        kl = D.renyi_divergence(EXPO, G, 1.0)
        high = [D.renyi_divergence(EXPO, G, p) for p in (1.5, 2.0)]
    ok = kl.finite and math.isfinite(kl.value) and all(not e.finite and e.value == math.inf for e in high)
    assert record(13, ok, f"D_1 = {kl.value:.6f} finite; D_1.5, D_2 flagged infinite; no overflow warnings")


def test_c14_full_verify(default_run):
    rows, seconds = default_run
    counts = {}
    for r in rows:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    ok = seconds < 300 and counts.get("violated", 0) == 0
    assert record(14, ok, f"{len(rows)} rows in {seconds:.0f} s; " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
