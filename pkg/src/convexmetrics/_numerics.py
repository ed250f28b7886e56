"""Quadrature and 1D search helpers shared by the distribution and distance code.

Improper integrals are mapped to compact intervals with ``x = a + w*tan(theta)``
before calling QUADPACK, which keeps polynomially decaying tails (Cauchy-type
laws) resolvable without picking a truncation point.
"""

from __future__ import annotations

import math
import warnings
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0

QUAD_LIMIT = 400


def _quad(fn, a, b, epsabs, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=epsrel, limit=QUAD_LIMIT)
    return val, err


def _half_line(fn, start, direction, width, epsabs, epsrel):
    # x = start + direction * width * tan(theta), theta in [0, pi/2)
    def g(theta):
        t = math.tan(theta)
        x = start + direction * width * t
        if not math.isfinite(x):
            return 0.0
        v = fn(x)
        if v == 0.0:
            return 0.0
        return v * width * (1.0 + t * t)

    return _quad(g, 0.0, math.pi / 2, epsabs, epsrel)


def integrate_line(
    fn: Callable[[float], float],
    lo: float = -math.inf,
    hi: float = math.inf,
    points: Iterable[float] = (),
    width: float = 1.0,
    epsabs: float = 1e-12,
    epsrel: float = 1e-10,
) -> tuple[float, float]:
    """Integrate ``fn`` over ``[lo, hi]`` (either end may be infinite).

    ``points`` are interior breakpoints (kinks, jumps, peaks); the interval is
    split there and every piece is integrated separately. Infinite pieces use
    the tangent substitution with scale ``width``. Returns ``(value, abserr)``.
    """
    if hi <= lo:
        return 0.0, 0.0
    cuts = sorted({float(p) for p in points if lo < p < hi and math.isfinite(p)})
    if not math.isfinite(lo) and not math.isfinite(hi) and not cuts:
        cuts = [0.0]
    edges = [lo, *cuts, hi]
    total = 0.0
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if math.isfinite(a) and math.isfinite(b):
            v, e = _quad(fn, a, b, epsabs, epsrel)
        elif math.isfinite(a):
            v, e = _half_line(fn, a, 1.0, width, epsabs, epsrel)
        elif math.isfinite(b):
            v, e = _half_line(fn, b, -1.0, width, epsabs, epsrel)
        else:  # pragma: no cover - excluded by the default cut above
            raise AssertionError("doubly infinite piece without a cut")
        total += v
        err += e
    return total, err


def golden_section_min(
    fn: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_iter: int = 500
) -> tuple[float, float]:
    """Minimize a unimodal ``fn`` on ``[a, b]``; returns ``(argmin, min)``.

    The bracket endpoints are also compared at the end so that a minimum sitting
    on the boundary is returned exactly.
    """
    if b < a:
        a, b = b, a
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    candidates = [(fc, c), (fd, d), (fn(a), a), (fn(b), b)]
    best_val, best_x = min(candidates)
    return best_x, best_val


def sign_changes(fn: Callable[[float], float], grid: Sequence[float]) -> list[float]:
    """Roots of ``fn`` bracketed by consecutive grid points (refined by brentq)."""
    from scipy.optimize import brentq

    xs = np.asarray(sorted(grid), dtype=float)
    vals = np.array([fn(x) for x in xs])
    roots = []
    for i in range(len(xs) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            roots.append(float(xs[i]))
        elif v0 * v1 < 0.0:
            roots.append(brentq(fn, xs[i], xs[i + 1], xtol=1e-13, rtol=1e-13))
    return roots
