"""Explicit constants and comparison bounds for isotropic s-concave measures.

Each evaluator returns a :class:`BoundResult`. Unnamed universal constants are
read from :class:`BoundConfig` slots (all default to 1); ``c_exponent`` tells
how each slot enters a formula so that fitted multipliers can be turned back
into values of c.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError

CONSTANT_SLOTS = (
    "c_dev",
    "c_dev_exp",
    "c_norm",
    "c_maxdens",
    "c_regul",
    "c_tvbl",
    "c_w1bl",
    "c_wqwp",
    "c_kl",
    "c_tsallis",
)


@dataclass(frozen=True)
class BoundConfig:
    universal_constants: dict[str, float] = field(default_factory=dict)
    alpha: float = 2.0

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha must lie in (1, 2], got {self.alpha}")
        for k, v in self.universal_constants.items():
            if k not in CONSTANT_SLOTS:
                raise DomainError(f"unknown constant slot {k!r}; expected one of {CONSTANT_SLOTS}")
            if not v > 0:
                raise DomainError(f"constant {k} must be > 0, got {v}")

    def c(self, slot: str) -> float:
        return float(self.universal_constants.get(slot, 1.0))

    @property
    def alpha_conj(self) -> float:
        return self.alpha / (self.alpha - 1.0)

    def with_constants(self, **consts: float) -> "BoundConfig":
        merged = dict(self.universal_constants)
        merged.update(consts)
        return BoundConfig(merged, self.alpha)

    @classmethod
    def from_dict(cls, doc: dict[str, Any] | None) -> "BoundConfig":
        doc = doc or {}
        return cls(dict(doc.get("universal_constants", {})), float(doc.get("alpha", 2.0)))

    def to_dict(self) -> dict[str, Any]:
        return {"alpha": self.alpha, "universal_constants": dict(sorted(self.universal_constants.items()))}


@dataclass(frozen=True)
class BoundResult:
    value: float
    in_validity_domain: bool
    formula_id: str
    inputs_echo: dict[str, Any]
    vacuous: bool = False
    violated_precondition: str | None = None

    def __float__(self) -> float:
        return self.value


def _result(formula_id, value, inputs, problems, cap=None):
    ok = not problems
    vac = cap is not None and value > cap
    return BoundResult(
        value=float(value),
        in_validity_domain=ok,
        formula_id=formula_id,
        inputs_echo=dict(inputs),
        vacuous=bool(vac),
        violated_precondition="; ".join(problems) if problems else None,
    )


def _check_s(s: float, problems: list[str], lo: float = -0.5) -> None:
    if not lo < s < 0:
        problems.append(f"s={s} outside ({lo:g}, 0)")


# --------------------------------------------------------------------------
# elementary lemmas and constants


def minimize_lemma(A: float, B: float, m: float, p: float, M: float) -> float:
    """inf over t >= M of A t^m + B t^-p, in closed form."""
    for name, v in (("A", A), ("B", B), ("m", m), ("p", p), ("M", M)):
        if not v > 0:
            raise DomainError(f"{name} must be > 0, got {v}")
    k = max(A / B * M ** (m + p), p / m)
    return A ** (p / (m + p)) * B ** (m / (m + p)) * (k ** (m / (m + p)) + k ** (-p / (m + p)))


def minimize_lemma_argmin(A: float, B: float, m: float, p: float, M: float) -> float:
    return max(M, (B / A * p / m) ** (1.0 / (m + p)))


def const_C(p: float, s: float) -> float:
    """Moment-comparison constant C(p, s), two branches split at s = -1/(p+1)."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not -1.0 / p < s < 0:
        raise DomainError(f"s={s} outside (-1/p, 0) for p={p}")
    if s > -1.0 / (p + 1.0):
        return float(p)
    a = abs(s)
    return 1.0 / (a ** (1.0 - 1.0 / p) * (1.0 - p * a) ** (1.0 / p))


def grunbaum_lower(s: float) -> float:
    """(1+s)^(-1/s): lower bound on P(X >= EX) for 1D s-concave X; e^-1 at s=0."""
    if s <= -1:
        raise DomainError(f"s must be > -1, got {s}")
    if s == 0:
        return math.exp(-1.0)
    return math.exp(-math.log1p(s) / s)


def _kappa(n: int, s: float) -> float:
    return s / (1.0 - s * n)


def _require_theorem_s(s: float) -> None:
    if not -0.5 < s < 0:
        raise DomainError(f"s={s} outside (-1/2, 0)")


def const_d0(n: int, s: float) -> float:
    _require_theorem_s(s)
    a = 1.0 + n * abs(s)
    return a ** (4.0 * a) / (1.0 + 2.0 * s)


def const_c1_bound(s: float) -> float:
    if not -0.5 <= s < 0:
        raise DomainError(f"s={s} outside [-1/2, 0)")
    return grunbaum_lower(s) / 2.0


def const_c0(n: int, s: float) -> float:
    _require_theorem_s(s)
    b = 1.0 + n * _kappa(n, s)
    return (b / 4.0 * const_c1_bound(s)) ** (4.0 / b)


def const_c2(s: float) -> float:
    _require_theorem_s(s)
    return (1.0 + 2.0 * s) * const_c1_bound(s)


def c1_exact(n: int, s: float, c0: float | None = None) -> tuple[float, float]:
    """(c1, alpha) from the large-deviation lemma, with alpha solving
    sum_i 1/(1 + i kappa - alpha) = -n log c0 on (0, 1 + n kappa)."""
    _require_theorem_s(s)
    kappa = _kappa(n, s)
    c0 = const_c0(n, s) if c0 is None else c0
    target = -n * math.log(c0)
    idx = np.arange(1, n + 1)
    base = 1.0 + idx * kappa
    top = 1.0 + n * kappa

    def eq(alpha):
        return float(np.sum(1.0 / (base - alpha))) - target

    if eq(0.0) > 0:
        raise DomainError("c0 too large: no admissible alpha")
    hi = top * (1.0 - 1e-15)
    alpha = brentq(eq, 0.0, hi, xtol=1e-15, rtol=1e-14, maxiter=500)
    c1 = c0**alpha * float(np.prod((base / (base - alpha)) ** (1.0 / n)))
    return c1, alpha


# --------------------------------------------------------------------------
# lemma-level bounds


def tail_bound_deviation(u: float, n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """P(|X| >= u) <= (c max(sqrt n, 1/|s|) / u)^(1/(2|s|)).

    ``inputs_echo['exp_branch']`` holds e^(-c0 u) when the exponential regime
    (s >= -1/(2 sqrt n), 6 c sqrt n <= u <= 3c/|s|) applies, else None.
    """
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    _check_s(s, problems)
    if not u > 0:
        problems.append(f"u={u} must be > 0")
    c = cfg.c("c_dev")
    a = abs(s) if s != 0 else math.nan
    value = (c * max(math.sqrt(n), 1.0 / a) / u) ** (1.0 / (2.0 * a)) if not problems else math.nan
    exp_branch = None
    if not problems and s >= -1.0 / (2.0 * math.sqrt(n)) and 6 * c * math.sqrt(n) <= u <= 3 * c / a:
        exp_branch = math.exp(-cfg.c("c_dev_exp") * u)
    inputs = {"u": u, "n": n, "s": s, "c": c, "exp_branch": exp_branch}
    return _result("tail_bound_deviation", value, inputs, problems, cap=1.0)


def norm_moment_bound(p: float, n: int, s: float, mean_abs: float, cfg: BoundConfig | None = None) -> BoundResult:
    """E[|X|^p]^(1/p) <= c C(p, s) E|X|."""
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    if not -1.0 / p < s < 0:
        problems.append(f"s={s} outside (-1/p, 0)")
    value = cfg.c("c_norm") * const_C(p, s) * mean_abs if not problems else math.nan
    return _result("norm_moment_bound", value, {"p": p, "n": n, "s": s, "mean_abs": mean_abs}, problems)


def max_density_bound(n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """||f||_inf <= 1/(1+2s) in 1D, c^(n(1+n|s|)) d0^n n^(n/2) otherwise."""
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    if not (n == 1 and s == 0.0):  # 1D log-concave limit is allowed
        _check_s(s, problems)
    if problems:
        return _result("max_density_bound", math.nan, {"n": n, "s": s}, problems)
    if n == 1:
        value = 1.0 / (1.0 + 2.0 * s)
    else:
        c = cfg.c("c_maxdens")
        value = c ** (n * (1 + n * abs(s))) * const_d0(n, s) ** n * n ** (n / 2.0)
    return _result("max_density_bound", value, {"n": n, "s": s}, problems)


def varentropy_bound(n: int, kappa: float) -> float:
    """sum_{i<=n} (1 + i kappa)^-2; zero for kappa = +inf."""
    if kappa * n <= -1:
        raise DomainError(f"kappa={kappa} violates kappa > -1/n for n={n}")
    if kappa == math.inf:
        return 0.0
    return float(sum((1.0 + i * kappa) ** -2 for i in range(1, n + 1)))


def smoothing_l1_bound(t: float, n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """|| f - f * phi_t ||_1 <= c^(1+n|s|) d0 t n."""
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    _check_s(s, problems)
    if not t > 0:
        problems.append(f"t={t} must be > 0")
    if problems:
        return _result("smoothing_l1_bound", math.nan, {"t": t, "n": n, "s": s}, problems)
    c = cfg.c("c_regul")
    value = c ** (1 + n * abs(s)) * const_d0(n, s) * t * n
    return _result("smoothing_l1_bound", value, {"t": t, "n": n, "s": s}, problems, cap=2.0)


def ledoux_bound(t: float, grad_l1: float) -> float:
    """|| f - f * phi_t ||_1 <= 2 t int |grad f|."""
    return 2.0 * t * grad_l1


def large_dev_lower(n: int, s: float) -> float:
    """Certified lower bound 1 - c1_bound(s)^n on P(f(X) >= c0^n ||f||_inf)."""
    return 1.0 - const_c1_bound(s) ** n


def borell_tail_constant(density_fn, n: int, s: float, radii: Iterable[float], directions=None) -> float:
    """Smallest C with f(x) <= C / (1 + |x|^(n - 1/s)) over the given radii (and directions)."""
    if not s < 0:
        raise DomainError(f"Borell tail bound needs s < 0, got {s}")
    expo = n - 1.0 / s
    if directions is None:
        directions = [np.eye(n)[0]] if n > 1 else [1.0]
        directions = [*directions, *[-np.asarray(d) for d in directions]]
    best = 0.0
    for r in radii:
        for d in directions:
            x = r * np.asarray(d, dtype=float)
            fx = density_fn(x if n > 1 else float(x))
            best = max(best, fx * (1.0 + r**expo))
    return best


# --------------------------------------------------------------------------
# theorems


def thm_tv_from_bl(d_bl: float, n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """d_TV <= c^(1+n|s|) (1+n|s|)^(2(1+n|s|)) / sqrt(1+2s) sqrt(n) sqrt(d_BL)."""
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    _check_s(s, problems)
    if not 0 <= d_bl <= 2:
        problems.append(f"d_bl={d_bl} outside [0, 2]")
    inputs = {"d_bl": d_bl, "n": n, "s": s}
    if problems and not (-0.5 < s < 0):
        return _result("thm_tv_from_bl", math.nan, inputs, problems)
    a = 1.0 + n * abs(s)
    c = cfg.c("c_tvbl")
    value = c**a * a ** (2 * a) / math.sqrt(1 + 2 * s) * math.sqrt(n) * math.sqrt(max(d_bl, 0.0))
    return _result("thm_tv_from_bl", value, inputs, problems, cap=2.0)


def thm_w1_from_bl(d_bl: float, n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """W_1 <= c sqrt(n) max(1, 1/(sqrt(n)|s|))^(1/(1+4|s|)) d_BL^(1/(1+4|s|))."""
    cfg = cfg or BoundConfig()
    problems: list[str] = []
    _check_s(s, problems)
    if not 0 <= d_bl <= 2:
        problems.append(f"d_bl={d_bl} outside [0, 2]")
    inputs = {"d_bl": d_bl, "n": n, "s": s}
    if not -0.5 < s < 0:
        return _result("thm_w1_from_bl", math.nan, inputs, problems)
    e = 1.0 / (1.0 + 4.0 * abs(s))
    c = cfg.c("c_w1bl")
    value = c * math.sqrt(n) * max(1.0, 1.0 / (math.sqrt(n) * abs(s))) ** e * max(d_bl, 0.0) ** e
    return _result("thm_w1_from_bl", value, inputs, problems)


def thm_wq_from_wp(
    w_p: float, p: float, q: float, n: int, s: float, cfg: BoundConfig | None = None
) -> BoundResult:
    """W_q from W_p; valid for 1 <= p < q and s in (-1/(alpha q), 0)."""
    cfg = cfg or BoundConfig()
    alpha, ac = cfg.alpha, cfg.alpha_conj
    problems: list[str] = []
    if not 1 <= p < q:
        problems.append(f"need 1 <= p < q, got p={p}, q={q}")
    if not -1.0 / (alpha * q) < s < 0:
        problems.append(f"s={s} outside (-1/(alpha q), 0) = ({-1.0 / (alpha * q):g}, 0)")
    inputs = {"w_p": w_p, "p": p, "q": q, "n": n, "s": s, "alpha": alpha}
    if problems:
        return _result("thm_wq_from_wp", math.nan, inputs, problems)
    a = abs(s)
    den = 1.0 + 2.0 * a * ac * (q - p)
    cq = const_C(alpha * q, s)
    value = (
        cfg.c("c_wqwp")
        * (cq * math.sqrt(n)) ** (2 * a * ac * (q - p) / den)
        * max(math.sqrt(n), 1.0 / a) ** ((q - p) / (q * den))
        * max(w_p, 0.0) ** ((p / q) / den)
    )
    return _result("thm_wq_from_wp", value, inputs, problems)


def thm_kl_from_tv(d_tv: float, n: int, s: float, cfg: BoundConfig | None = None) -> BoundResult:
    """D(mu || gamma_n) from d_TV(mu, gamma_n); valid for s in (-1/(2 alpha), 0)."""
    cfg = cfg or BoundConfig()
    alpha, ac = cfg.alpha, cfg.alpha_conj
    problems: list[str] = []
    if not -1.0 / (2.0 * alpha) < s < 0:
        problems.append(f"s={s} outside (-1/(2 alpha), 0) = ({-0.5 / alpha:g}, 0)")
    if not 0 <= d_tv <= 2:
        problems.append(f"d_tv={d_tv} outside [0, 2]")
    inputs = {"d_tv": d_tv, "n": n, "s": s, "alpha": alpha}
    if not -1.0 / (2.0 * alpha) < s < 0:
        return _result("thm_kl_from_tv", math.nan, inputs, problems)
    a = abs(s)
    e = 1.0 / (1.0 + 4.0 * a * ac)
    pref = cfg.c("c_kl") * n * (1 + n * a) * math.log(ac * n)
    pref /= (1.0 - 2.0 * alpha * a) ** (4.0 * a * (ac - 1.0) * e)
    d = max(d_tv, 0.0)
    value = pref * max(1.0, 1.0 / (math.sqrt(n) * a)) ** (2.0 * e) * (d**e + d)
    return _result("thm_kl_from_tv", value, inputs, problems)


def thm_tsallis_from_tv(
    d_tv: float, n: int, s: float, p: float, M: float, cfg: BoundConfig | None = None
) -> BoundResult:
    """T_p(mu || gamma_n) from d_TV under the moment M = E exp(alpha (p-1) |X|^2 / 2)."""
    cfg = cfg or BoundConfig()
    alpha, ac = cfg.alpha, cfg.alpha_conj
    problems: list[str] = []
    _check_s(s, problems)
    if not p > 1:
        problems.append(f"p={p} must be > 1")
    if not M > 0:
        problems.append(f"M={M} must be > 0")
    if not 0 <= d_tv <= 2:
        problems.append(f"d_tv={d_tv} outside [0, 2]")
    inputs = {"d_tv": d_tv, "n": n, "s": s, "p": p, "M": M, "alpha": alpha}
    if not (-0.5 < s < 0 and p > 1 and M > 0):
        return _result("thm_tsallis_from_tv", math.nan, inputs, problems)
    if M == math.inf:
        return _result("thm_tsallis_from_tv", math.inf, inputs, problems)
    a = abs(s)
    c = cfg.c("c_tsallis")
    dens = c ** (n * (1 + n * a)) * const_d0(n, s) ** n * n ** (n / 2.0)
    lead = dens ** (p - 1) / (p - 1)
    d = max(d_tv, 0.0)
    if d == 0:
        return _result("thm_tsallis_from_tv", 0.0, inputs, problems)
    inner = c * math.sqrt(p - 1) * max(math.sqrt(n), 1.0 / a) / math.sqrt(math.log1p(1.0 / d))
    value = lead * (math.sqrt(d + d * d) + M ** (1.0 / alpha) * inner ** (1.0 / (2.0 * a * ac)))
    return _result("thm_tsallis_from_tv", value, inputs, problems)


# exponent with which each slot's c multiplies the formula (for fitting)
def c_exponent(formula_id: str, n: int = 1, s: float = 0.0) -> float:
    a = abs(s)
    return {
        "thm_tv_from_bl": 1.0 + n * a,
        "thm_w1_from_bl": 1.0,
        "thm_wq_from_wp": 1.0,
        "thm_kl_from_tv": 1.0,
        "smoothing_l1_bound": 1.0 + n * a,
        "max_density_bound": n * (1.0 + n * a),
        "norm_moment_bound": 1.0,
    }[formula_id]


FORMULA_SLOT = {
    "tail_bound_deviation": "c_dev",
    "norm_moment_bound": "c_norm",
    "max_density_bound": "c_maxdens",
    "smoothing_l1_bound": "c_regul",
    "thm_tv_from_bl": "c_tvbl",
    "thm_w1_from_bl": "c_w1bl",
    "thm_wq_from_wp": "c_wqwp",
    "thm_kl_from_tv": "c_kl",
    "thm_tsallis_from_tv": "c_tsallis",
}


# --------------------------------------------------------------------------
# forward inequalities: signed slack rhs - lhs


def _sub(rhs: float, lhs: float) -> float:
    if rhs == math.inf and lhs == math.inf:
        return math.nan
    return rhs - lhs


def pinsker_gilardoni(d_tv: float, d_p: float, p: float) -> float:
    """(p/2) d_TV^2 <= D_p for p in (0, 1]; d_TV in the [0, 2] convention."""
    if not 0 < p <= 1:
        raise DomainError(f"Pinsker-Gilardoni needs p in (0, 1], got {p}")
    return _sub(d_p, 0.5 * p * d_tv**2)


def talagrand(w2: float, kl: float) -> float:
    """W_2^2(mu, gamma_n) <= 2 D(mu || gamma_n)."""
    return _sub(2.0 * kl, w2**2)


def renyi_interval_coefficient(p: float, q: float) -> float:
    if not 0 < p < q < 1:
        raise DomainError(f"need 0 < p < q < 1, got p={p}, q={q}")
    return p * (1.0 - q) / (1.0 - p) ** 2


def renyi_interval(d_p: float, d_q: float, p: float, q: float) -> tuple[float, float]:
    """Slacks of coef * D_q <= D_p and D_p <= D_q."""
    coef = renyi_interval_coefficient(p, q)
    return _sub(d_p, coef * d_q), _sub(d_q, d_p)


def bl_cap(d_bl: float, d_tv: float, w1: float) -> float:
    """d_BL <= min(d_TV, W_1)."""
    return _sub(min(d_tv, w1), d_bl)
