"""Parametric s-concave families, their densities, samplers and 1D machinery.

Every distribution is an affine image ``x = scale @ y + shift`` of one of five
base families. The convexity bookkeeping (s, kappa) is carried along since
affine maps preserve s-concavity.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Callable, NamedTuple

import numpy as np
from scipy import special

from ._numerics import golden_section_min, integrate_line, sign_changes
from .errors import ConstructionError, DomainError, PreconditionError

FAMILIES = (
    "std-gaussian",
    "gaussian",
    "cauchy-type",
    "exponential-centered",
    "uniform-interval",
)

LOG_2PI = math.log(2.0 * math.pi)


# --------------------------------------------------------------------------
# convexity parameters


def kappa_from_s(s: float, n: int) -> float:
    """Density-concavity parameter kappa = s / (1 - s n).

    ``s = 1/n`` maps to ``kappa = +inf`` and ``s = -inf`` to ``-1/n``.
    """
    if n < 1:
        raise DomainError(f"dimension n must be >= 1, got n={n}")
    if s == -math.inf:
        return -1.0 / n
    if s * n > 1.0:
        raise DomainError(f"s={s} violates s*n <= 1 for n={n}")
    if s * n == 1.0:
        return math.inf
    return s / (1.0 - s * n)


def s_from_kappa(kappa: float, n: int) -> float:
    """Inverse of :func:`kappa_from_s`: s = kappa / (1 + kappa n)."""
    if n < 1:
        raise DomainError(f"dimension n must be >= 1, got n={n}")
    if kappa == math.inf:
        return 1.0 / n
    if kappa * n <= -1.0:
        raise DomainError(f"kappa={kappa} violates kappa*n > -1 for n={n}")
    return kappa / (1.0 + kappa * n)


@dataclass(frozen=True)
class ConvexityParams:
    s: float
    n: int
    kappa: float

    @classmethod
    def from_s(cls, s: float, n: int) -> "ConvexityParams":
        return cls(s=float(s), n=int(n), kappa=kappa_from_s(s, n))

    @property
    def in_theorem_range(self) -> bool:
        return -0.5 < self.s < 0.0


def generalized_mean(alpha: float, lam: float, a: float, b: float) -> float:
    """The alpha-mean M_alpha^lambda(a, b) of two nonnegative numbers."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda={lam} outside [0, 1]")
    if a < 0 or b < 0:
        raise DomainError(f"arguments must be nonnegative, got a={a}, b={b}")
    if alpha == -math.inf:
        return min(a, b)
    if alpha == math.inf:
        return max(a, b)
    if alpha == 0.0:
        return a ** (1.0 - lam) * b**lam
    if lam == 0.0:
        return a
    if lam == 1.0:
        return b
    if alpha < 0.0 and min(a, b) == 0.0:
        return 0.0
    if a == 0.0 or b == 0.0:
        return ((1.0 - lam) * a**alpha + lam * b**alpha) ** (1.0 / alpha)
    # pivot so that alpha * log(ratio) <= 0, then expm1/log1p keep small |alpha| exact
    pivot = max(a, b) if alpha > 0 else min(a, b)
    la, lb = math.log(a / pivot), math.log(b / pivot)
    inner = (1.0 - lam) * math.expm1(alpha * la) + lam * math.expm1(alpha * lb)
    return pivot * math.exp(math.log1p(inner) / alpha)


# --------------------------------------------------------------------------
# base families (work in base coordinates y)


class Tail(NamedTuple):
    """Leading behaviour of a log-density along a ray: -quad t^2 - lin t - power log t."""

    quad: float
    lin: float
    power: float


class _Family:
    dim: int
    s: float
    norm: float
    lo = -math.inf
    hi = math.inf

    def logpdf(self, y: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, m: int) -> np.ndarray:
        raise NotImplementedError

    # 1D only
    def cdf(self, y):
        raise NotImplementedError

    def sf(self, y):
        return 1.0 - self.cdf(y)

    def ppf(self, u):
        raise NotImplementedError

    def isf(self, u):
        return self.ppf(1.0 - u)

    mean: np.ndarray
    cov: np.ndarray
    mode: np.ndarray


class _StdGaussian(_Family):
    def __init__(self, n: int):
        self.dim = n
        self.s = 0.0
        self.norm = (2.0 * math.pi) ** (-n / 2)
        self.mean = np.zeros(n)
        self.cov = np.eye(n)
        self.mode = np.zeros(n)
        self.precision = np.eye(n)

    def logpdf(self, y):
        return -0.5 * np.sum(y * y, axis=1) - 0.5 * self.dim * LOG_2PI

    def sample(self, rng, m):
        if self.dim == 1:
            return special.ndtri(_open_uniform(rng, m))[:, None]
        return rng.standard_normal((m, self.dim))

    def cdf(self, y):
        return special.ndtr(y)

    def sf(self, y):
        return special.ndtr(-np.asarray(y))

    def ppf(self, u):
        return special.ndtri(u)

    def isf(self, u):
        return -special.ndtri(u)


class _Gaussian(_Family):
    def __init__(self, mean, cov):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        cov = np.atleast_2d(np.asarray(cov, dtype=float))
        n = mean.shape[0]
        if cov.shape != (n, n):
            raise ConstructionError(f"covariance shape {cov.shape} does not match mean of length {n}")
        if not np.allclose(cov, cov.T, atol=1e-12):
            raise ConstructionError("covariance must be symmetric")
        try:
            self.chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ConstructionError("covariance must be positive definite") from exc
        self.dim = n
        self.s = 0.0
        self.mean = mean
        self.cov = cov
        self.mode = mean
        self.precision = np.linalg.inv(cov)
        logdet = 2.0 * np.sum(np.log(np.diag(self.chol)))
        self._lognorm = -0.5 * (n * LOG_2PI + logdet)
        self.norm = math.exp(self._lognorm)
        self.sd = math.sqrt(cov[0, 0]) if n == 1 else None

    def logpdf(self, y):
        z = np.linalg.solve(self.chol, (y - self.mean).T).T
        return -0.5 * np.sum(z * z, axis=1) + self._lognorm

    def sample(self, rng, m):
        if self.dim == 1:
            return self.mean + self.sd * special.ndtri(_open_uniform(rng, m))[:, None]
        return self.mean + rng.standard_normal((m, self.dim)) @ self.chol.T

    def cdf(self, y):
        return special.ndtr((np.asarray(y) - self.mean[0]) / self.sd)

    def sf(self, y):
        return special.ndtr((self.mean[0] - np.asarray(y)) / self.sd)

    def ppf(self, u):
        return self.mean[0] + self.sd * special.ndtri(u)

    def isf(self, u):
        return self.mean[0] - self.sd * special.ndtri(u)


class _CauchyType(_Family):
    """C sigma^-n (1 + |y/sigma|^2)^(-(n+beta)/2); s = -1/beta."""

    def __init__(self, n: int, beta: float, sigma: float = 1.0):
        if not beta > 0:
            raise ConstructionError(f"cauchy-type needs beta > 0, got {beta}")
        if not sigma > 0:
            raise ConstructionError(f"cauchy-type needs scale > 0, got {sigma}")
        self.dim = n
        self.beta = float(beta)
        self.sigma = float(sigma)
        self.s = -1.0 / beta
        self._lognorm = (
            special.gammaln((n + beta) / 2.0)
            - special.gammaln(beta / 2.0)
            - 0.5 * n * math.log(math.pi)
            - n * math.log(sigma)
        )
        self.norm = math.exp(self._lognorm + n * math.log(sigma))
        self.mode = np.zeros(n)
        self.mean = np.zeros(n) if beta > 1 else np.full(n, np.nan)
        var = sigma**2 / (beta - 2.0) if beta > 2 else math.inf
        self.cov = np.eye(n) * var

    def logpdf(self, y):
        r2 = np.sum(y * y, axis=1) / self.sigma**2
        return self._lognorm - 0.5 * (self.dim + self.beta) * np.log1p(r2)

    def sample(self, rng, m):
        if self.dim == 1:
            return self.ppf(_open_uniform(rng, m))[:, None]
        z = rng.standard_normal((m, self.dim))
        chi = np.sqrt(rng.chisquare(self.beta, size=m))
        return self.sigma * z / chi[:, None]

    # 1D: y = sigma * T_beta / sqrt(beta)
    def cdf(self, y):
        return special.stdtr(self.beta, np.asarray(y) * math.sqrt(self.beta) / self.sigma)

    def sf(self, y):
        return special.stdtr(self.beta, -np.asarray(y) * math.sqrt(self.beta) / self.sigma)

    def ppf(self, u):
        return self.sigma * special.stdtrit(self.beta, u) / math.sqrt(self.beta)

    def isf(self, u):
        return -self.ppf(u)


class _ExponentialCentered(_Family):
    """e^{-(y+1)} on y >= -1: mean 0, variance 1."""

    lo = -1.0

    def __init__(self):
        self.dim = 1
        self.s = 0.0
        self.norm = 1.0
        self.mean = np.zeros(1)
        self.cov = np.eye(1)
        self.mode = np.array([-1.0])

    def logpdf(self, y):
        y = y[:, 0]
        out = np.full(y.shape, -np.inf)
        ok = y >= -1.0
        out[ok] = -(y[ok] + 1.0)
        return out

    def sample(self, rng, m):
        return self.ppf(_open_uniform(rng, m))[:, None]

    def cdf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= -1.0, -np.expm1(-(np.maximum(y, -1.0) + 1.0)), 0.0)

    def sf(self, y):
        y = np.asarray(y, dtype=float)
        return np.where(y >= -1.0, np.exp(-(np.maximum(y, -1.0) + 1.0)), 1.0)

    def ppf(self, u):
        return -1.0 - np.log1p(-np.asarray(u))

    def isf(self, u):
        return -1.0 - np.log(np.asarray(u))


class _Uniform(_Family):
    def __init__(self, a: float, b: float):
        if not a < b:
            raise ConstructionError(f"uniform-interval needs a < b, got a={a}, b={b}")
        self.dim = 1
        self.s = 1.0
        self.a, self.b = float(a), float(b)
        self.lo, self.hi = self.a, self.b
        self.norm = 1.0 / (b - a)
        self.mean = np.array([(a + b) / 2.0])
        self.cov = np.array([[(b - a) ** 2 / 12.0]])
        self.mode = self.mean

    def logpdf(self, y):
        y = y[:, 0]
        out = np.full(y.shape, -np.inf)
        out[(y >= self.a) & (y <= self.b)] = math.log(self.norm)
        return out

    def sample(self, rng, m):
        return self.ppf(_open_uniform(rng, m))[:, None]

    def cdf(self, y):
        return np.clip((np.asarray(y, dtype=float) - self.a) / (self.b - self.a), 0.0, 1.0)

    def sf(self, y):
        return np.clip((self.b - np.asarray(y, dtype=float)) / (self.b - self.a), 0.0, 1.0)

    def ppf(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def isf(self, u):
        return self.b - (self.b - self.a) * np.asarray(u)


def _open_uniform(rng: np.random.Generator, m: int) -> np.ndarray:
    # uniforms strictly inside (0, 1) so that inverse CDFs stay finite
    k = rng.integers(0, 2**53, size=m, dtype=np.int64)
    return (k.astype(float) + 0.5) / 2.0**53


def _build_family(family: str, params: dict) -> _Family:
    p = dict(params)
    if family == "std-gaussian":
        return _StdGaussian(int(p.get("n", 1)))
    if family == "gaussian":
        mean = p.get("mean", 0.0)
        cov = p.get("covariance", p.get("cov", 1.0))
        return _Gaussian(mean, cov)
    if family == "cauchy-type":
        return _CauchyType(int(p.get("n", 1)), float(p["beta"]), float(p.get("scale", 1.0)))
    if family == "exponential-centered":
        return _ExponentialCentered()
    if family == "uniform-interval":
        return _Uniform(float(p.get("a", 0.0)), float(p.get("b", 1.0)))
    raise ConstructionError(f"unknown family {family!r}; expected one of {FAMILIES}")


# --------------------------------------------------------------------------
# DistributionSpec


@dataclass(frozen=True, eq=False)
class DistributionSpec:
    """A base family pushed through ``x = scale @ y + shift``."""

    family: str
    params: dict
    dim: int
    shift: np.ndarray
    scale: np.ndarray
    conv: ConvexityParams
    normalization: float
    seed_policy: str = "explicit"
    name: str | None = field(default=None, compare=False)

    @cached_property
    def _base(self) -> _Family:
        return _build_family(self.family, self.params)

    @cached_property
    def _scale_inv(self) -> np.ndarray:
        return np.linalg.inv(self.scale)

    @cached_property
    def _log_abs_det(self) -> float:
        return float(np.linalg.slogdet(self.scale)[1])

    @property
    def support(self) -> tuple[float, float]:
        """Closed support interval (1D only)."""
        _require_1d(self)
        b = self._base
        a, c = self.scale[0, 0], self.shift[0]
        ends = sorted([a * b.lo + c, a * b.hi + c])
        return ends[0], ends[1]

    def with_name(self, name: str) -> "DistributionSpec":
        return _replace(self, name=name)

    def __repr__(self) -> str:
        label = self.name or self.family
        return f"DistributionSpec({label}, dim={self.dim}, s={self.conv.s:g})"


def _replace(spec: DistributionSpec, **changes) -> DistributionSpec:
    kw = dict(
        family=spec.family,
        params=spec.params,
        dim=spec.dim,
        shift=spec.shift,
        scale=spec.scale,
        conv=spec.conv,
        normalization=spec.normalization,
        seed_policy=spec.seed_policy,
        name=spec.name,
    )
    kw.update(changes)
    return DistributionSpec(**kw)


def make_distribution(
    family: str,
    params: dict | None = None,
    shift=None,
    scale=None,
    name: str | None = None,
    **kwargs,
) -> DistributionSpec:
    """Build a spec; family parameters may be given as a dict or as keywords.

    >>> make_distribution("cauchy-type", n=1, beta=3).normalization  # 2/pi
    0.6366197723675814
    """
    params = dict(params or {})
    params.update(kwargs)
    base = _build_family(family, params)
    n = base.dim
    shift = np.zeros(n) if shift is None else np.atleast_1d(np.asarray(shift, dtype=float))
    if scale is None:
        scale = np.eye(n)
    else:
        scale = np.asarray(scale, dtype=float)
        scale = scale * np.eye(n) if scale.ndim == 0 else np.atleast_2d(scale)
    if shift.shape != (n,) or scale.shape != (n, n):
        raise ConstructionError(f"affine map shapes {shift.shape}, {scale.shape} do not match dim {n}")
    if not np.all(np.isfinite(scale)) or abs(np.linalg.det(scale)) < 1e-300:
        raise ConstructionError("affine scale must be finite and invertible")
    spec = DistributionSpec(
        family=family,
        params=params,
        dim=n,
        shift=shift,
        scale=scale,
        conv=ConvexityParams.from_s(base.s, n),
        normalization=base.norm,
        name=name,
    )
    spec.__dict__["_base"] = base
    return spec


def affine_image(spec: DistributionSpec, shift=None, scale=None) -> DistributionSpec:
    """Compose ``x -> scale @ x + shift`` after ``spec``; s is unchanged."""
    n = spec.dim
    a = np.eye(n) if scale is None else np.asarray(scale, dtype=float)
    a = a * np.eye(n) if a.ndim == 0 else np.atleast_2d(a)
    b = np.zeros(n) if shift is None else np.atleast_1d(np.asarray(shift, dtype=float))
    return _replace(spec, scale=a @ spec.scale, shift=a @ spec.shift + b)


def mean_and_cov(spec: DistributionSpec) -> tuple[np.ndarray, np.ndarray]:
    """Exact mean vector and covariance matrix (may be inf/nan for heavy tails)."""
    b = spec._base
    mean = spec.scale @ b.mean + spec.shift
    cov = spec.scale @ b.cov @ spec.scale.T
    return mean, cov


def mode(spec: DistributionSpec) -> np.ndarray:
    return spec.scale @ spec._base.mode + spec.shift


def isotropize(spec: DistributionSpec, sample_budget: int = 0) -> DistributionSpec:
    """Affine whitening to mean 0 and identity covariance.

    Every supported family has closed-form first and second moments, so the
    whitening is exact; ``sample_budget`` is accepted for API compatibility.
    """
    if spec.conv.s <= -0.5:
        raise PreconditionError("infinite variance regime: isotropization needs s > -1/2")
    mean, cov = mean_and_cov(spec)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        raise PreconditionError("infinite variance regime: second moments diverge")
    evals, evecs = np.linalg.eigh(cov)
    w = evecs @ np.diag(evals**-0.5) @ evecs.T
    return _replace(spec, scale=w @ spec.scale, shift=w @ (spec.shift - mean))


def is_isotropic(spec: DistributionSpec, tol: float = 1e-9) -> bool:
    mean, cov = mean_and_cov(spec)
    if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
        return False
    return bool(np.all(np.abs(mean) <= tol) and np.all(np.abs(cov - np.eye(spec.dim)) <= tol))


# --------------------------------------------------------------------------
# densities


def _as_points(spec: DistributionSpec, x) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if spec.dim == 1:
        if x.ndim == 0:
            return x.reshape(1, 1), True
        if x.ndim == 1:
            return x[:, None], False
        if x.ndim == 2 and x.shape[1] == 1:
            return x, False
        raise ValueError(f"expected scalar or 1-d array for a 1D spec, got shape {x.shape}")
    if x.ndim == 1:
        if x.shape[0] != spec.dim:
            raise ValueError(f"point of length {x.shape[0]} does not match dim {spec.dim}")
        return x[None, :], True
    if x.ndim == 2 and x.shape[1] == spec.dim:
        return x, False
    raise ValueError(f"points of shape {x.shape} do not match dim {spec.dim}")


def log_density(spec: DistributionSpec, x):
    """Log-density; ``-inf`` outside the support. Scalar in, scalar out."""
    pts, scalar = _as_points(spec, x)
    y = (pts - spec.shift) @ spec._scale_inv.T
    out = spec._base.logpdf(y) - spec._log_abs_det
    return float(out[0]) if scalar else out


def density(spec: DistributionSpec, x):
    out = np.exp(log_density(spec, x))
    return float(out) if np.ndim(out) == 0 else out


# --------------------------------------------------------------------------
# empirical measures and sampling


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("an empirical measure needs at least one point")
        if w.shape != (pts.shape[0],):
            raise ValueError(f"{w.shape[0]} weights for {pts.shape[0]} points")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("all coordinates must be finite")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, points) -> "EmpiricalMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        m = pts.shape[0]
        return cls(pts, np.full(m, 1.0 / m))

    @classmethod
    def dirac(cls, x) -> "EmpiricalMeasure":
        return cls(np.atleast_2d(np.asarray(x, dtype=float)), np.ones(1))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row, w in zip(self.points, self.weights):
                writer.writerow([repr(float(v)) for v in row] + [repr(float(w))])

    @classmethod
    def from_csv(cls, path) -> "EmpiricalMeasure":
        rows = np.loadtxt(path, delimiter=",", ndmin=2)
        w = rows[:, -1]
        return cls(rows[:, :-1], w / w.sum() if abs(w.sum() - 1.0) <= 1e-12 else w)


def sample(spec: DistributionSpec, rng_seed: int, m: int) -> EmpiricalMeasure:
    """``m`` i.i.d. draws with uniform weights, deterministic in ``rng_seed``.

    1D families use inverse-CDF sampling; multivariate Gaussians use the
    Cholesky transform and multivariate Cauchy-type laws the Gaussian/chi
    scale mixture ``Z / sqrt(chi2_beta)``.
    """
    if m < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(rng_seed)
    y = spec._base.sample(rng, m)
    return EmpiricalMeasure.uniform(y @ spec.scale.T + spec.shift)


def stratified_sample(spec: DistributionSpec, rng_seed: int, m: int) -> EmpiricalMeasure:
    """One inverse-CDF draw per quantile cell ((i + U_i)/m), in random order.

    Each point is marginally from the law; the cloud has far lower variance
    than i.i.d. draws, which matters for transport costs of heavy tails. 1D only.
    """
    _require_1d(spec)
    if m < 1:
        raise ValueError("sample size must be >= 1")
    rng = np.random.default_rng(rng_seed)
    u = (np.arange(m) + _open_uniform(rng, m)) / m
    u = np.clip(u, 2.0**-60, 1.0 - 2.0**-53)  # (m - 1 + U) / m can round to 1
    return EmpiricalMeasure.uniform(rng.permutation(np.asarray(quantile_1d(spec, u), dtype=float)))


# --------------------------------------------------------------------------
# 1D distribution functions


def _require_1d(spec: DistributionSpec) -> None:
    if spec.dim != 1:
        raise PreconditionError(f"operation needs a 1D spec, got dim={spec.dim}")


def cdf_1d(spec: DistributionSpec, x):
    _require_1d(spec)
    a, c = spec.scale[0, 0], spec.shift[0]
    y = (np.asarray(x, dtype=float) - c) / a
    out = spec._base.cdf(y) if a > 0 else spec._base.sf(y)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def sf_1d(spec: DistributionSpec, x):
    _require_1d(spec)
    a, c = spec.scale[0, 0], spec.shift[0]
    y = (np.asarray(x, dtype=float) - c) / a
    out = spec._base.sf(y) if a > 0 else spec._base.cdf(y)
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


def quantile_1d(spec: DistributionSpec, u):
    _require_1d(spec)
    u_arr = np.asarray(u, dtype=float)
    if np.any((u_arr <= 0.0) | (u_arr >= 1.0)):
        raise DomainError(f"quantile level must lie in (0, 1), got {u}")
    a, c = spec.scale[0, 0], spec.shift[0]
    y = spec._base.ppf(u_arr) if a > 0 else spec._base.isf(u_arr)
    out = a * y + c
    return float(out) if np.ndim(out) == 0 else np.asarray(out)


@dataclass(frozen=True)
class QuantileTable:
    u: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.u) <= 0) or self.u[0] <= 0 or self.u[-1] >= 1:
            raise ValueError("quantile levels must be strictly increasing inside (0, 1)")
        if np.any(np.diff(self.q) < 0):
            raise ValueError("quantiles must be nondecreasing")


def quantile_table(spec: DistributionSpec, size: int = 2001, u_min: float = 1e-5) -> QuantileTable:
    """Quantiles on a grid that is uniform in the logit of u (dense in both tails)."""
    if u_min > 1e-4:
        raise DomainError("u_min must be <= 1e-4 so that the table covers the tails")
    lo, hi = math.log(u_min / (1 - u_min)), math.log((1 - u_min) / u_min)
    u = special.expit(np.linspace(lo, hi, size))
    return QuantileTable(u=u, q=np.asarray(quantile_1d(spec, u)))


def _breakpoints(spec: DistributionSpec) -> list[float]:
    lo, hi = spec.support
    pts = [lo, hi, float(mode(spec)[0])]
    for u in (1e-3, 0.1, 0.5, 0.9, 1 - 1e-3):
        pts.append(quantile_1d(spec, u))
    return [p for p in pts if math.isfinite(p)]


def _width(spec: DistributionSpec) -> float:
    q1, q3 = quantile_1d(spec, 0.25), quantile_1d(spec, 0.75)
    return max(q3 - q1, 1e-8)


def integrate_against(spec: DistributionSpec, fn: Callable[[float], float], extra_points=()) -> float:
    """E[fn(X)] for a 1D spec by adaptive quadrature over the support."""
    _require_1d(spec)
    lo, hi = spec.support

    def integrand(x):
        f = density(spec, x)
        return 0.0 if f == 0.0 else fn(x) * f

    val, _ = integrate_line(integrand, lo, hi, [*_breakpoints(spec), *extra_points], _width(spec))
    return val


def density_sup_1d(spec: DistributionSpec) -> float:
    """Numerically located maximum of a 1D unimodal density."""
    _require_1d(spec)
    lo, hi = spec.support
    a = max(lo, quantile_1d(spec, 1e-6))
    b = min(hi, quantile_1d(spec, 1 - 1e-6))
    grid = np.linspace(a, b, 401)
    vals = density(spec, grid)
    k = int(np.argmax(vals))
    left, right = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    x_best, neg = golden_section_min(lambda x: -density(spec, x), left, right, tol=1e-12)
    best = max(-neg, float(vals[k]))
    for end in (lo, hi):
        if math.isfinite(end):
            best = max(best, density(spec, end))
    return best


# --------------------------------------------------------------------------
# moments


def abs_moment_is_finite(spec: DistributionSpec, p: float) -> bool:
    """Analytic divergence test: E|X|^p is infinite iff s < 0 and p >= 1/|s|."""
    s = spec.conv.s
    return not (s < 0 and p >= 1.0 / abs(s))


def abs_moment(spec: DistributionSpec, p: float, budget: int = 200_000, seed: int = 0) -> float:
    """E|X|^p; quadrature in 1D, Monte-Carlo in higher dimension."""
    if p < 1:
        raise DomainError(f"moment order p must be >= 1, got {p}")
    if not abs_moment_is_finite(spec, p):
        return math.inf
    if spec.dim == 1:
        return integrate_against(spec, lambda x: abs(x) ** p, extra_points=[0.0])
    pts = sample(spec, seed, budget).points
    return float(np.mean(np.linalg.norm(pts, axis=1) ** p))


def tails_1d(spec: DistributionSpec) -> tuple[Tail | None, Tail | None]:
    """(left, right) tail profiles in x-coordinates; None where the support ends."""
    _require_1d(spec)
    b = spec._base
    a, c = spec.scale[0, 0], spec.shift[0]
    if isinstance(b, (_StdGaussian, _Gaussian)):
        mean, cov = mean_and_cov(spec)
        m, v = mean[0], cov[0, 0]
        return Tail(0.5 / v, m / v, 0.0), Tail(0.5 / v, -m / v, 0.0)
    if isinstance(b, _CauchyType):
        t = Tail(0.0, 0.0, 1.0 + b.beta)
        return t, t
    if isinstance(b, _ExponentialCentered):
        t = Tail(0.0, 1.0 / abs(a), 0.0)
        return (None, t) if a > 0 else (t, None)
    return None, None


def tail_form(spec: DistributionSpec) -> tuple[np.ndarray, float]:
    """Radial tail data for dim >= 1: log f(x) ~ -x'Qx - power log|x|."""
    b = spec._base
    if isinstance(b, (_StdGaussian, _Gaussian)):
        _, cov = mean_and_cov(spec)
        return 0.5 * np.linalg.inv(cov), 0.0
    if isinstance(b, _CauchyType):
        return np.zeros((spec.dim, spec.dim)), spec.dim + b.beta
    raise PreconditionError(f"no radial tail form for family {spec.family}")


def exp_quadratic_moment_is_finite(spec: DistributionSpec, c: float) -> bool:
    if spec.dim == 1:
        left, right = tails_1d(spec)
        for t in (left, right):
            if t is not None and not t.quad > c / 2.0:
                return False
        return True
    q, _ = tail_form(spec)
    return bool(np.linalg.eigvalsh(q).min() > c / 2.0)


def exp_quadratic_moment(spec: DistributionSpec, c: float) -> float:
    """M = E[exp(c |X|^2 / 2)], +inf when the Gaussian weight beats the tail."""
    if not c > 0:
        raise DomainError(f"exponent coefficient must be > 0, got {c}")
    if not exp_quadratic_moment_is_finite(spec, c):
        return math.inf
    if spec.dim == 1:
        lo, hi = spec.support

        def integrand(x):
            lf = log_density(spec, x)
            return 0.0 if lf == -math.inf else math.exp(lf + 0.5 * c * x * x)

        val, _ = integrate_line(integrand, lo, hi, [*_breakpoints(spec), 0.0], _width(spec))
        return val
    # multivariate Gaussian closed form
    mean, cov = mean_and_cov(spec)
    prec = np.linalg.inv(cov)
    p_new = prec - c * np.eye(spec.dim)
    b = prec @ mean
    _, logdet_cov = np.linalg.slogdet(cov)
    _, logdet_p = np.linalg.slogdet(p_new)
    expo = 0.5 * (b @ np.linalg.solve(p_new, b) - mean @ prec @ mean)
    return float(math.exp(-0.5 * logdet_cov - 0.5 * logdet_p + expo))


# --------------------------------------------------------------------------
# smoothing operators


def huber(r: float, lam: float) -> float:
    """Huber function: r^2/(2 lam) for r <= lam, r - lam/2 beyond."""
    r = abs(r)
    return r * r / (2.0 * lam) if r <= lam else r - lam / 2.0


def moreau_envelope_1d(
    convex_fn: Callable[[float], float], epsilon: float, x: float, search_radius: float
) -> float:
    """inf over |y - x| <= search_radius of convex_fn(y) + |x - y|^2 / (2 epsilon)."""
    if not search_radius > 0:
        raise DomainError(f"search_radius must be positive, got {search_radius}")
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")

    def obj(y):
        return convex_fn(y) + (x - y) ** 2 / (2.0 * epsilon)

    _, val = golden_section_min(obj, x - search_radius, x + search_radius, tol=1e-12)
    return min(val, convex_fn(x))


def gaussian_convolve_1d(spec: DistributionSpec, t: float, x: float) -> float:
    """(f * phi_t)(x) with phi_t the centered Gaussian density of variance t^2."""
    _require_1d(spec)
    if not t > 0:
        raise DomainError(f"smoothing scale t must be positive, got {t}")
    lo, hi = spec.support
    a, b = max(lo, x - 12.0 * t), min(hi, x + 12.0 * t)
    if b <= a:
        return 0.0
    norm = 1.0 / (math.sqrt(2.0 * math.pi) * t)

    def integrand(y):
        lf = log_density(spec, y)
        if lf == -math.inf:
            return 0.0
        return norm * math.exp(lf - 0.5 * ((x - y) / t) ** 2)

    pts = [x, x - 3 * t, x + 3 * t, *(p for p in _breakpoints(spec) if a < p < b)]
    val, _ = integrate_line(integrand, a, b, pts, epsabs=1e-13, epsrel=1e-11)
    return val


def _effective_support(spec: DistributionSpec, pad: float, floor: float = 1e-12) -> tuple[float, float]:
    lo, hi = spec.support
    center = float(mode(spec)[0])
    w = _width(spec)
    if not math.isfinite(lo):
        lo = min(quantile_1d(spec, 1e-6), center - w)
        while density(spec, lo) >= floor:
            lo = center - 2.0 * (center - lo)
    if not math.isfinite(hi):
        hi = max(quantile_1d(spec, 1 - 1e-6), center + w)
        while density(spec, hi) >= floor:
            hi = center + 2.0 * (hi - center)
    return lo - pad, hi + pad


def smoothed_cdf_1d(spec: DistributionSpec, t: float, x: float) -> float:
    """P(X + tZ <= x), the distribution function of f * phi_t."""
    _require_1d(spec)
    return integrate_against(spec, lambda y: float(special.ndtr((x - y) / t)), (x,))


def l1_distance_to_smoothed(spec: DistributionSpec, t: float, grid_size: int = 241) -> float:
    """|| f - f * phi_t ||_{L1}.

    The sign changes of f - f * phi_t split the line into regions; on each
    region the integral of |f - f * phi_t| is |dF - dG| with G the smoothed
    CDF, so only the crossings need the convolution itself.
    """
    _require_1d(spec)
    if not t > 0:
        raise DomainError(f"smoothing scale t must be positive, got {t}")
    lo, hi = _effective_support(spec, 12.0 * t)

    def diff(x):
        return density(spec, x) - gaussian_convolve_1d(spec, t, x)

    edges = [e for e in spec.support if math.isfinite(e)]
    grid = np.concatenate([np.linspace(lo, hi, grid_size), quantile_table(spec, grid_size // 2).q, edges])
    grid = np.unique(grid[(grid > lo) & (grid < hi)])
    cuts = sorted({*sign_changes(diff, [lo, *grid, hi]), *edges})
    total, prev_f, prev_g = 0.0, 0.0, 0.0
    for c in cuts:
        f_c, g_c = cdf_1d(spec, c), smoothed_cdf_1d(spec, t, c)
        total += abs((f_c - prev_f) - (g_c - prev_g))
        prev_f, prev_g = f_c, g_c
    return total + abs((1.0 - prev_f) - (1.0 - prev_g))


def grad_l1_norm_1d(spec: DistributionSpec, step: float = 1e-5) -> float:
    """Total variation of the density: integral of |f'| plus jumps at support ends."""
    _require_1d(spec)
    lo, hi = spec.support
    jumps = sum(density(spec, e) for e in (lo, hi) if math.isfinite(e))
    a = lo + step if math.isfinite(lo) else -math.inf
    b = hi - step if math.isfinite(hi) else math.inf

    def deriv(x):
        return (density(spec, x + step) - density(spec, x - step)) / (2.0 * step)

    m = float(mode(spec)[0])
    val, _ = integrate_line(lambda x: abs(deriv(x)), a, b, [m, *_breakpoints(spec)], _width(spec))
    return val + jumps


# --------------------------------------------------------------------------
# entropy


class MCEstimate(NamedTuple):
    value: float
    std_error: float | None


def differential_entropy(
    spec: DistributionSpec, budget: int = 100_000, seed: int = 0, method: str = "monte-carlo"
) -> MCEstimate:
    """h(X) = E[-log f(X)]; Monte-Carlo with standard error, or 1D quadrature."""
    if method == "quadrature":
        return MCEstimate(integrate_against(spec, lambda x: -log_density(spec, x)), None)
    logs = log_density(spec, sample(spec, seed, budget).points)
    m = logs.shape[0]
    return MCEstimate(float(-logs.mean()), float(logs.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0)


def varentropy(
    spec: DistributionSpec, budget: int = 100_000, seed: int = 0, method: str = "monte-carlo"
) -> MCEstimate:
    """Var(log f(X)); the Monte-Carlo standard error uses the fourth central moment."""
    if method == "quadrature":
        h = differential_entropy(spec, method="quadrature").value
        second = integrate_against(spec, lambda x: (log_density(spec, x) + h) ** 2)
        return MCEstimate(second, None)
    logs = log_density(spec, sample(spec, seed, budget).points)
    m = logs.shape[0]
    centered = logs - logs.mean()
    var = float(np.mean(centered**2)) * m / max(m - 1, 1)
    m4 = float(np.mean(centered**4))
    se = math.sqrt(max(m4 - var**2, 0.0) / m)
    return MCEstimate(var, se)


def kappa_concavity_slack(spec: DistributionSpec, seed: int = 0, n_triples: int = 200) -> float:
    """min over random triples of f((1-l)x + l y) - M_kappa^l(f(x), f(y)).

    Points are drawn from the spec itself; triples with a zero density are skipped.
    """
    rng = np.random.default_rng(seed)
    pts = sample(spec, seed, 2 * n_triples).points
    lams = rng.random(n_triples)
    kappa = spec.conv.kappa
    worst = math.inf
    for i in range(n_triples):
        x, y, lam = pts[2 * i], pts[2 * i + 1], lams[i]
        fx, fy = density(spec, x if spec.dim > 1 else x[0]), density(spec, y if spec.dim > 1 else y[0])
        if fx <= 0 or fy <= 0:
            continue
        z = (1 - lam) * x + lam * y
        fz = density(spec, z if spec.dim > 1 else z[0])
        worst = min(worst, fz - generalized_mean(kappa, lam, fx, fy))
    return worst


# --------------------------------------------------------------------------
# JSON document


def spec_to_dict(spec: DistributionSpec) -> dict[str, Any]:
    return {
        "family": spec.family,
        "params": _jsonable(spec.params),
        "affine": {"shift": spec.shift.tolist(), "scale": spec.scale.tolist()},
        "seed-policy": spec.seed_policy,
    }


def spec_from_dict(doc: dict[str, Any]) -> DistributionSpec:
    """Inverse of :func:`spec_to_dict`; ``isotropize: true`` whitens after building."""
    try:
        family = doc["family"]
    except (KeyError, TypeError) as exc:
        raise ConstructionError(f"distribution document lacks 'family': {doc!r}") from exc
    affine = doc.get("affine") or {}
    spec = make_distribution(
        family,
        dict(doc.get("params") or {}),
        shift=affine.get("shift"),
        scale=affine.get("scale"),
        name=doc.get("name"),
    )
    spec = _replace(spec, seed_policy=doc.get("seed-policy", "explicit"))
    if doc.get("isotropize"):
        spec = isotropize(spec)
    return spec


def spec_to_json(spec: DistributionSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text_or_path: str | Path) -> DistributionSpec:
    text = str(text_or_path)
    if not text.lstrip().startswith("{"):
        text = Path(text).read_text()
    return spec_from_dict(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
