"""Experiment configuration: parsing, validation, defaults.

A config document (JSON, or TOML by file extension) looks like::

    {
      "seed": 7,
      "budget": 100000,
      "tolerances": {"abs": 1e-6, "sigma": 3.0},
      "bounds": {"alpha": 2.0, "universal_constants": {"c_tvbl": 1.0}},
      "specs": {"gauss": {"family": "std-gaussian", "params": {"n": 1}}},
      "sweeps": [{"prefix": "cauchy", "family": "cauchy-type", "n": 1,
                  "s": [-0.1, -0.2], "isotropize": true}],
      "singles": [{"specs": ["gauss"], "s": -0.1, "checks": ["grunbaum"]}],
      "pairs": [{"mu": ["cauchy(s=-0.1)"], "nu": ["gauss"], "checks": ["tv", "w:2"]}],
      "globals": ["minimize_lemma"]
    }

Sweep entries build Cauchy-type laws with beta = 1/|s| (so that the law is
exactly s-concave) and name them ``prefix(s=<value>)``. ``mu``/``nu`` lists
expand to their cartesian product; the pair id is ``mu~nu``.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..bounds import BoundConfig
from ..errors import ConfigError, ConvexMetricsError
from ..measures import DistributionSpec, isotropize, make_distribution, spec_from_dict

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

PAIR_CHECKS = {
    "tv": 0,
    "bl": 0,
    "w": 1,
    "kl": 0,
    "renyi": 1,
    "tsallis": 1,
    "pinsker": 1,
    "talagrand": 0,
    "renyi_interval": 2,
    "w_monotone": 2,
    "renyi_monotone": 2,
    "tsallis_dominates": 1,
    "bl_cap": 1,
    "ot_crosscheck": 2,
    "thm_tv_from_bl": 0,
    "thm_w1_from_bl": 0,
    "thm_wq_from_wp": 2,
    "thm_kl_from_tv": 0,
    "thm_tsallis_from_tv": 1,
}

SINGLE_CHECKS = {
    "grunbaum": 0,
    "max_density": 0,
    "varentropy": 0,
    "max_entropy": 0,
    "tail": 1,
    "norm_moment": 1,
    "ledoux": 1,
    "smoothing": 1,
    "large_dev": 0,
    "kappa_concavity": 0,
}

ONE_D_ONLY = {"talagrand", "w_monotone", "ot_crosscheck", "grunbaum", "ledoux", "smoothing"}

GLOBAL_CHECKS = ("minimize_lemma", "constants", "const_C", "grunbaum_continuity", "c1_certified")


@dataclass(frozen=True)
class Check:
    name: str
    args: tuple[float, ...] = ()

    @classmethod
    def parse(cls, text: str, table: dict[str, int]) -> "Check":
        name, _, rest = str(text).partition(":")
        name = name.strip()
        if name not in table:
            raise ConfigError(f"unknown check {name!r}; expected one of {sorted(table)}")
        try:
            args = tuple(float(a) for a in rest.split(",")) if rest else ()
        except ValueError as exc:
            raise ConfigError(f"bad numeric arguments in check {text!r}") from exc
        if len(args) != table[name]:
            raise ConfigError(f"check {name!r} takes {table[name]} argument(s), got {len(args)} in {text!r}")
        return cls(name, args)

    def label(self) -> str:
        return self.name if not self.args else f"{self.name}[{','.join(f'{a:g}' for a in self.args)}]"


@dataclass(frozen=True)
class PairTask:
    pair_id: str
    mu: str
    nu: str
    s: float | None
    checks: tuple[Check, ...]


@dataclass(frozen=True)
class SingleTask:
    pair_id: str
    spec: str
    s: float | None
    checks: tuple[Check, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    specs: dict[str, DistributionSpec] = field(default_factory=dict)
    pairs: tuple[PairTask, ...] = ()
    singles: tuple[SingleTask, ...] = ()
    globals: tuple[str, ...] = ()
    budget: int = 100_000
    tol_abs: float = 1e-6
    sigma: float = 3.0
    bounds: BoundConfig = field(default_factory=BoundConfig)
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        if not self.tol_abs > 0 or not self.sigma > 0:
            raise ConfigError("tolerances must be > 0")
        if self.budget < 100:
            raise ConfigError(f"budget must be >= 100, got {self.budget}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output format must be csv or json, got {self.output_format!r}")

    def with_overrides(self, seed=None, budget=None, constants=None) -> "ExperimentConfig":
        kw = {f: getattr(self, f) for f in self.__dataclass_fields__}
        if seed is not None:
            kw["seed"] = int(seed)
        if budget is not None:
            kw["budget"] = int(budget)
        if constants is not None:
            kw["bounds"] = BoundConfig(dict(constants), self.bounds.alpha)
        return ExperimentConfig(**kw)


def _listify(v) -> list:
    if v is None:
        return []
    return list(v) if isinstance(v, (list, tuple)) else [v]


def sweep_name(prefix: str, s: float) -> str:
    return f"{prefix}(s={s:g})"


def _build_specs(doc: dict) -> dict[str, DistributionSpec]:
    specs: dict[str, DistributionSpec] = {}
    for name, sd in (doc.get("specs") or {}).items():
        try:
            specs[name] = spec_from_dict({**sd, "name": name})
        except (ConvexMetricsError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"spec {name!r} is not constructible: {exc}") from exc
    for sw in doc.get("sweeps") or []:
        prefix = sw.get("prefix") or sw.get("family")
        family = sw.get("family", "cauchy-type")
        if family != "cauchy-type":
            raise ConfigError(f"sweeps are defined for cauchy-type only, got {family!r}")
        n = int(sw.get("n", 1))
        for s in _listify(sw.get("s")):
            s = float(s)
            if not s < 0:
                raise ConfigError(f"sweep value s={s} must be negative")
            name = sweep_name(prefix, s)
            try:
                spec = make_distribution(family, n=n, beta=1.0 / abs(s), name=name)
                if sw.get("isotropize", True):
                    spec = isotropize(spec).with_name(name)
            except ConvexMetricsError as exc:
                raise ConfigError(f"sweep member {name} is not constructible: {exc}") from exc
            specs[name] = spec
    return specs


def _require_1d(pid: str, spec: DistributionSpec, checks) -> None:
    bad = sorted({c.name for c in checks} & ONE_D_ONLY)
    if bad and spec.dim != 1:
        raise ConfigError(f"{pid}: checks {bad} are defined for 1D laws only (dim={spec.dim})")


def config_from_dict(doc: dict[str, Any], base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    if "seed" not in doc:
        raise ConfigError("config must contain a seed")
    specs = _build_specs(doc)

    def need(name):
        if name not in specs:
            raise ConfigError(f"unknown spec {name!r}; defined: {sorted(specs)}")
        return name

    pairs = []
    seen = set()
    for entry in doc.get("pairs") or []:
        checks = tuple(Check.parse(c, PAIR_CHECKS) for c in _listify(entry.get("checks")))
        s = entry.get("s")
        for mu in _listify(entry.get("mu")):
            for nu in _listify(entry.get("nu")):
                pid = entry.get("id") or f"{need(mu)}~{need(nu)}"
                need(mu), need(nu)
                if specs[mu].dim != specs[nu].dim:
                    raise ConfigError(f"pair {pid}: dimensions {specs[mu].dim} and {specs[nu].dim} differ")
                if pid in seen:
                    raise ConfigError(f"duplicate pair id {pid!r}")
                _require_1d(pid, specs[mu], checks)
                seen.add(pid)
                pairs.append(PairTask(pid, mu, nu, None if s is None else float(s), checks))
    singles = []
    for entry in doc.get("singles") or []:
        checks = tuple(Check.parse(c, SINGLE_CHECKS) for c in _listify(entry.get("checks")))
        s = entry.get("s")
        for name in _listify(entry.get("specs")):
            pid = need(name)
            _require_1d(pid, specs[name], checks)
            if pid in seen:
                raise ConfigError(f"duplicate id {pid!r}")
            seen.add(pid)
            singles.append(SingleTask(pid, name, None if s is None else float(s), checks))
    globs = tuple(_listify(doc.get("globals")))
    for g in globs:
        if g not in GLOBAL_CHECKS:
            raise ConfigError(f"unknown global check {g!r}; expected one of {GLOBAL_CHECKS}")
    tol = doc.get("tolerances") or {}
    out = doc.get("output") or {}
    try:
        bcfg = BoundConfig.from_dict(doc.get("bounds"))
    except ConvexMetricsError as exc:
        raise ConfigError(f"bad bounds section: {exc}") from exc
    path = out.get("path")
    if path is not None and base_dir is not None and not Path(path).is_absolute():
        path = str(base_dir / path)
    try:
        seed = int(doc["seed"])
        budget = int(doc.get("budget", 100_000))
        tol_abs = float(tol.get("abs", 1e-6))
        sigma = float(tol.get("sigma", 3.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad scalar setting: {exc}") from exc
    return ExperimentConfig(
        seed=seed,
        specs=specs,
        pairs=tuple(pairs),
        singles=tuple(singles),
        globals=globs,
        budget=budget,
        tol_abs=tol_abs,
        sigma=sigma,
        bounds=bcfg,
        output_path=path,
        output_format=out.get("format", "csv"),
    )


def read_config_document(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(raw.decode())
        return json.loads(raw)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a JSON or TOML config (chosen by extension) and validate it."""
    return config_from_dict(read_config_document(path), Path(path).parent)


def default_config_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "default_config.json"


def load_default_config() -> ExperimentConfig:
    return load_config(default_config_path())

