"""Command-line entry point: ``convexmetrics {dist,bound,verify,fit}``.

Total variation follows the L1 convention throughout: d_TV = int |f - g|,
with values in [0, 2].
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .. import bounds as B
from .. import distances as D
from ..errors import ConfigError, ConvexMetricsError
from ..measures import spec_from_json
from .config import default_config_path, load_config
from .report import any_violated, emit
from .runner import fitted_constants, run_suite

ENV_SEED = "CONVEXMETRICS_SEED"

BOUND_FORMULAS = {
    "minimize_lemma": B.minimize_lemma,
    "const_C": B.const_C,
    "const_d0": B.const_d0,
    "const_c0": B.const_c0,
    "const_c2": B.const_c2,
    "const_c1_bound": B.const_c1_bound,
    "grunbaum_lower": B.grunbaum_lower,
    "varentropy_bound": B.varentropy_bound,
    "large_dev_lower": B.large_dev_lower,
    "tail_bound_deviation": B.tail_bound_deviation,
    "norm_moment_bound": B.norm_moment_bound,
    "max_density_bound": B.max_density_bound,
    "smoothing_l1_bound": B.smoothing_l1_bound,
    "thm_tv_from_bl": B.thm_tv_from_bl,
    "thm_w1_from_bl": B.thm_w1_from_bl,
    "thm_wq_from_wp": B.thm_wq_from_wp,
    "thm_kl_from_tv": B.thm_kl_from_tv,
    "thm_tsallis_from_tv": B.thm_tsallis_from_tv,
}
_TAKES_CFG = {"tail_bound_deviation", "norm_moment_bound", "max_density_bound", "smoothing_l1_bound"} | {
    k for k in BOUND_FORMULAS if k.startswith("thm_")
}
_INT_ARGS = {"n"}


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    return v


def _resolve_seed(flag: int | None, fallback: int | None = None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get(ENV_SEED)
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{ENV_SEED}={env!r} is not an integer") from exc
    return fallback


def _load(args):
    cfg = load_config(args.config or default_config_path())
    return cfg.with_overrides(seed=_resolve_seed(args.seed), budget=args.budget)


def _cmd_dist(args) -> int:
    mu, nu = spec_from_json(args.mu), spec_from_json(args.nu)
    seed = _resolve_seed(args.seed, 0)
    budget = args.budget or D.DEFAULT_BUDGET
    kind, p = args.distance, args.p
    if kind == "tv":
        est = D.tv_distance(mu, nu, budget, seed)
    elif kind == "bl":
        est = D.bl_distance_1d(mu, nu) if mu.dim == 1 else D.bl_distance_sampled(mu, nu, seed=seed)
    elif kind == "w":
        est = D.wasserstein_1d(mu, nu, p or 1.0)
    elif kind == "kl":
        est = D.renyi_divergence(mu, nu, 1.0, budget, seed)
    elif kind == "renyi":
        est = D.renyi_divergence(mu, nu, p or 2.0, budget, seed)
    else:
        est = D.tsallis_divergence(mu, nu, p or 2.0, budget, seed)
    print(json.dumps(est.to_record(kind, p), sort_keys=True))
    return 0


def _parse_kv(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {item!r}")
        out[key] = int(val) if key in _INT_ARGS else float(val)
    return out


def _cmd_bound(args) -> int:
    fn = BOUND_FORMULAS[args.formula]
    kw = _parse_kv(args.arg)
    if args.formula in _TAKES_CFG:
        kw["cfg"] = load_config(args.config).bounds if args.config else B.BoundConfig()
    res = fn(**kw)
    if isinstance(res, B.BoundResult):
        rec = {
            "formula_id": res.formula_id,
            "value": res.value,
            "in_validity_domain": res.in_validity_domain,
            "vacuous": res.vacuous,
            "violated_precondition": res.violated_precondition,
            "inputs": res.inputs_echo,
        }
    elif isinstance(res, tuple):
        rec = {"formula_id": args.formula, "value": list(res)}
    else:
        rec = {"formula_id": args.formula, "value": res}
    print(json.dumps(_json_safe(rec), sort_keys=True))
    return 0


def _progress(enabled):
    if not enabled:
        return None
    return lambda label: print(f"  .. {label}", file=sys.stderr, flush=True)


def _cmd_verify(args) -> int:
    cfg = _load(args)
    rows = run_suite(cfg, _progress(args.verbose))
    fmt = args.format or cfg.output_format
    out = args.out or cfg.output_path
    text = emit(rows, fmt, out)
    if out is None:
        sys.stdout.write(text)
    if args.fit_constants:
        fits = fitted_constants(run_suite(cfg.with_overrides(constants={}), None))
        target = Path(out).with_suffix(".constants.json") if out else None
        blob = json.dumps(fits, indent=1, sort_keys=True) + "\n"
        if target:
            target.write_text(blob)
        else:
            sys.stderr.write(blob)
    counts = {}
    for r in rows:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    print("verdicts: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())), file=sys.stderr)
    return 1 if any_violated(rows) else 0


def _cmd_fit(args) -> int:
    cfg = _load(args).with_overrides(constants={})
    fits = fitted_constants(run_suite(cfg, _progress(args.verbose)))
    blob = json.dumps(fits, indent=1, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(blob)
    else:
        sys.stdout.write(blob)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="convexmetrics",
        description="Distances, divergences and comparison bounds for s-concave laws. "
        "d_TV is reported as the L1 distance of densities (range [0, 2]).",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config (.json or .toml); default: bundled config")
        p.add_argument("--seed", type=int, help=f"master seed (overrides {ENV_SEED} and the config)")
        p.add_argument("--budget", type=int, help="Monte-Carlo sample budget")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    d = sub.add_parser("dist", help="one distance between two distributions")
    common(d)
    d.add_argument("--mu", required=True, help="distribution JSON (literal or path)")
    d.add_argument("--nu", required=True, help="distribution JSON (literal or path)")
    d.add_argument("--distance", required=True, choices=["tv", "bl", "w", "kl", "renyi", "tsallis"])
    d.add_argument("--p", type=float, help="order for w / renyi / tsallis")
    d.set_defaults(func=_cmd_dist)

    b = sub.add_parser("bound", help="evaluate one bound formula")
    b.add_argument("formula", choices=sorted(BOUND_FORMULAS))
    b.add_argument("--arg", action="append", metavar="KEY=VALUE", help="formula argument (repeatable)")
    b.add_argument("--config", help="config whose bounds section supplies the constants")
    b.set_defaults(func=_cmd_bound)

    v = sub.add_parser("verify", help="run the full check suite")
    common(v)
    v.add_argument("--format", choices=["csv", "json"])
    v.add_argument("--fit-constants", action="store_true", help="also fit the universal constants")
    v.set_defaults(func=_cmd_verify)

    f = sub.add_parser("fit", help="fit minimal universal constants over the configured grid")
    common(f)
    f.set_defaults(func=_cmd_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ConvexMetricsError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
