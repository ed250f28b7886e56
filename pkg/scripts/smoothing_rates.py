"""L1 gap between a density and its Gaussian smoothing, against t.

    python scripts/smoothing_rates.py

For densities with a jump the gap grows linearly in t; for C^2 densities it
grows like t^2 (the first-order term of f * phi_t - f vanishes by symmetry).
The log-log slope column makes the two regimes visible.
"""

from __future__ import annotations

import math

from convexmetrics import measures as M

TS = (0.025, 0.05, 0.1, 0.2, 0.4)


def members():
    yield "gauss", M.make_distribution("std-gaussian", n=1)
    yield "cauchy3", M.make_distribution("cauchy-type", n=1, beta=3)
    yield "unif", M.isotropize(M.make_distribution("uniform-interval", a=0.0, b=1.0))
    yield "expo", M.make_distribution("exponential-centered")


def main() -> None:
    print("member,t,l1_gap,ledoux_rhs,slope")
    for name, spec in members():
        grad = M.grad_l1_norm_1d(spec)
        prev = None
        for t in TS:
            gap = M.l1_distance_to_smoothed(spec, t)
            slope = "" if prev is None else f"{math.log(gap / prev[1]) / math.log(t / prev[0]):.3f}"
            print(f"{name},{t:g},{gap:.6e},{2 * t * grad:.6e},{slope}")
            prev = (t, gap)


if __name__ == "__main__":
    main()
