import csv
import io
import json
import math

import pytest

from convexmetrics import bounds as B
from convexmetrics import distances as D
from convexmetrics.errors import ConfigError
from convexmetrics.harness import config as C
from convexmetrics.harness.report import (
    COLUMNS,
    ReportRow,
    decide,
    emit,
    make_row,
    rows_from_csv,
    rows_from_json,
    rows_to_csv,
)
from convexmetrics.harness.runner import derive_seed, fit_constant, fitted_constants, run_suite

from conftest import GOLDEN

SMALL = {
    "seed": 5,
    "budget": 20000,
    "specs": {
        "gauss": {"family": "std-gaussian", "params": {"n": 1}},
        "shift": {"family": "gaussian", "params": {"mean": 0.5, "covariance": 1.0}},
    },
    "sweeps": [{"prefix": "cauchy", "n": 1, "s": [-0.1]}],
    "pairs": [
        {"mu": ["shift"], "nu": ["gauss"], "checks": ["tv", "w:1", "kl", "talagrand", "pinsker:1"]},
        {"mu": ["cauchy(s=-0.1)"], "nu": ["gauss"], "checks": ["bl", "thm_tv_from_bl", "thm_w1_from_bl"]},
    ],
    "singles": [{"specs": ["gauss"], "checks": ["varentropy", "max_entropy"]}],
}


def small(**over):
    doc = json.loads(json.dumps(SMALL))
    doc.update(over)
    return C.config_from_dict(doc)


# -- config --------------------------------------------------------------------


def test_config_parses_and_expands():
    cfg = small()
    assert [p.pair_id for p in cfg.pairs] == ["shift~gauss", "cauchy(s=-0.1)~gauss"]
    assert cfg.specs["cauchy(s=-0.1)"].conv.s == pytest.approx(-0.1)
    assert cfg.pairs[0].checks[1] == C.Check("w", (1.0,))


@pytest.mark.parametrize(
    "patch,match",
    [
        ({"seed": None}, "seed"),
        ({"pairs": [{"mu": ["nope"], "nu": ["gauss"], "checks": ["tv"]}]}, "unknown spec"),
        ({"pairs": [{"mu": ["gauss"], "nu": ["gauss"], "checks": ["w"]}]}, "argument"),
        ({"pairs": [{"mu": ["gauss"], "nu": ["gauss"], "checks": ["hellinger"]}]}, "unknown check"),
        ({"specs": {"bad": {"family": "gaussian", "params": {"mean": 0, "covariance": -1}}}}, "bad"),
        ({"tolerances": {"abs": 0}}, "tolerances"),
        ({"globals": ["everything"]}, "global"),
        ({"bounds": {"universal_constants": {"c_zz": 1}}}, "bounds"),
        ({"sweeps": [{"prefix": "c", "s": [0.2]}]}, "negative"),
    ],
)
def test_config_errors(patch, match):
    doc = json.loads(json.dumps(SMALL))
    for k, v in patch.items():
        if v is None:
            doc.pop(k)
        else:
            doc[k] = v
    with pytest.raises(ConfigError, match=match):
        C.config_from_dict(doc)


def test_duplicate_and_dimension_errors():
    doc = {
        "seed": 1,
        "specs": {"g1": {"family": "std-gaussian", "params": {"n": 1}}, "g2": {"family": "std-gaussian", "params": {"n": 2}}},
        "pairs": [{"mu": ["g1"], "nu": ["g2"], "checks": ["tv"]}],
    }
    with pytest.raises(ConfigError, match="dimensions"):
        C.config_from_dict(doc)
    doc["pairs"] = [{"mu": ["g2"], "nu": ["g2"], "checks": ["talagrand"]}]
    with pytest.raises(ConfigError, match="1D"):
        C.config_from_dict(doc)
    doc["pairs"] = [{"mu": ["g1"], "nu": ["g1"], "checks": ["tv"]}] * 2
    with pytest.raises(ConfigError, match="duplicate"):
        C.config_from_dict(doc)


def test_toml_and_json_files(tmp_path):
    (tmp_path / "c.toml").write_text(
        'seed = 3\n[specs.g]\nfamily = "std-gaussian"\nparams = {n = 1}\n'
        '[[pairs]]\nmu = ["g"]\nnu = ["g"]\nchecks = ["tv"]\n'
    )
    cfg = C.load_config(tmp_path / "c.toml")
    assert cfg.seed == 3 and cfg.pairs[0].pair_id == "g~g"
    (tmp_path / "c.json").write_text("{not json")
    with pytest.raises(ConfigError, match="cannot parse"):
        C.load_config(tmp_path / "c.json")
    with pytest.raises(ConfigError, match="cannot read"):
        C.load_config(tmp_path / "missing.json")


def test_overrides():
    cfg = small().with_overrides(seed=9, budget=500, constants={"c_kl": 0.5})
    assert (cfg.seed, cfg.budget, cfg.bounds.c("c_kl")) == (9, 500, 0.5)


# -- report --------------------------------------------------------------------


def test_verdict_rules():
    assert decide(1.0, 2.0, tol=1e-6) == (1.0, "holds")
    assert decide(2.0, 1.0, tol=1e-6)[1] == "violated"
    assert decide(1.0 + 1e-7, 1.0, tol=1e-6)[1] == "holds"
    assert decide(1.1, 1.0, tol=1e-6, std_error=0.05)[1] == "holds"  # within 3 SE
    assert decide(1.0, 5.0, tol=1e-6, vacuous=True)[1] == "holds-vacuous"
    assert decide(1.0, math.inf, tol=1e-6)[1] == "holds-vacuous"
    assert decide(math.inf, math.inf, tol=1e-6) == (0.0, "infinite")
    assert decide(math.inf, 1.0, tol=1e-6)[1] == "violated"
    assert decide(5.0, 1.0, tol=1e-6, valid=False)[1] == "invalid-domain"
    with pytest.raises(ValueError):
        ReportRow("a", "q", 0, 0, 0, "fine", "m")


def test_emit_header_only_and_columns(tmp_path):
    assert emit([], "csv") == ",".join(COLUMNS) + "\n"
    assert emit([], "json") == "[]\n"
    out = tmp_path / "r.csv"
    emit([make_row("p", "q", 1, 2, "m", tol=1e-6)], "csv", out)
    assert next(csv.reader(io.StringIO(out.read_text()))) == list(COLUMNS)
    with pytest.raises(OSError, match="cannot write report to"):
        emit([], "csv", tmp_path / "no" / "dir.csv")
    with pytest.raises(ValueError):
        emit([], "xml")


def test_roundtrips_including_nonfinite():
    rows = [
        make_row("a~b", "kl", math.inf, math.inf, "analytic-tail", tol=1e-6),
        make_row("a~b", "w[2]", 0.25, 0.5, "quantile-quadrature", tol=1e-6, std_error=0.01),
        ReportRow("a~b", "renyi[2]", math.nan, math.nan, math.nan, "invalid-domain", "error:DomainError"),
    ]
    text = emit(rows, "json")
    rec = json.loads(text)
    assert rec[0]["lhs"] is None and rec[0]["lhs_nonfinite"] == "inf"
    back = rows_from_json(text)
    assert back[:2] == rows[:2]
    assert math.isnan(back[2].lhs) and back[2].verdict == "invalid-domain"
    csv_text = rows_to_csv(rows)
    assert ",inf,inf,0,infinite," in csv_text
    assert rows_to_csv(rows_from_csv(csv_text)) == csv_text


# -- runner --------------------------------------------------------------------


def test_fit_constant():
    assert fit_constant([(1, 2), (3, 2)]) == 1.5
    assert fit_constant([(0, 1), (0, 3)]) == 0
    with pytest.raises(ValueError):
        fit_constant([])


def test_derive_seed_stable_and_label_sensitive():
    assert derive_seed(3, "a", "tv") == derive_seed(3, "a", "tv")
    assert derive_seed(3, "a", "tv") != derive_seed(3, "a", "kl")
    assert derive_seed(3, "a") != derive_seed(4, "a")


def test_empty_config_gives_empty_report():
    assert run_suite(C.config_from_dict({"seed": 0})) == []


def test_gaussian_self_pair_all_zero():
    cfg = C.config_from_dict(
        {
            "seed": 1,
            "specs": {"g": {"family": "std-gaussian", "params": {"n": 1}}},
            "pairs": [{"mu": ["g"], "nu": ["g"], "checks": ["tv", "bl", "w:1", "w:2", "kl", "renyi:2", "tsallis:2", "talagrand"]}],
        }
    )
    rows = run_suite(cfg)
    assert {r.verdict for r in rows} == {"holds"}
    assert all(r.slack >= 0 for r in rows)
    assert all(r.lhs == 0 for r in rows if r.quantity in ("d_tv", "d_bl", "w[1]", "w[2]", "kl", "renyi[2]", "tsallis[2]"))


def test_every_check_once_and_deterministic():
    cfg = small()
    rows = run_suite(cfg)
    assert emit(rows) == emit(run_suite(cfg))
    labels = [(r.pair_id, r.quantity) for r in rows]
    assert len(labels) == len(set(labels))
    for task in cfg.pairs:
        seen = {q for pid, q in labels if pid == task.pair_id}
        assert len(seen) >= len(task.checks)
    assert not any(r.verdict == "violated" for r in rows)


def test_seed_changes_only_monte_carlo_rows():
    a, b = run_suite(small()), run_suite(small(seed=6))
    for ra, rb in zip(a, b):
        assert (ra.pair_id, ra.quantity) == (rb.pair_id, rb.quantity)
        if ra.std_error is None:
            assert ra.lhs == rb.lhs or (math.isnan(ra.lhs) and math.isnan(rb.lhs))
    assert any(ra.lhs != rb.lhs for ra, rb in zip(a, b) if ra.std_error is not None)


def test_fitted_constants_recover_minimal_c():
    rows = run_suite(small())
    fits = fitted_constants(rows)
    assert set(fits) == {"c_tvbl", "c_w1bl"}
    # with c at the fitted value the tightest row is met with equality
    cfg = small(bounds={"universal_constants": fits})
    refit = run_suite(cfg)
    tv = [r for r in refit if r.quantity.startswith("thm_tv_from_bl")]
    assert min(r.slack for r in tv) == pytest.approx(0.0, abs=1e-9)


def test_invalid_domain_rows_never_hold():
    cfg = C.config_from_dict(
        {
            "seed": 2,
            "specs": {"g": {"family": "std-gaussian", "params": {"n": 1}}},
            "sweeps": [{"prefix": "c", "s": [-0.3]}],
            "pairs": [{"mu": ["c(s=-0.3)"], "nu": ["g"], "checks": ["thm_kl_from_tv", "thm_wq_from_wp:1,2"]}],
        }
    )
    rows = run_suite(cfg)
    assert rows and all(r.verdict == "invalid-domain" for r in rows)


# -- bundled config ------------------------------------------------------------


def test_default_report_matches_golden_bytes(default_run):
    rows, _ = default_run
    assert emit(rows) == (GOLDEN / "default_report.csv").read_text()


def test_default_fits_match_golden(default_run):
    rows, _ = default_run
    golden = json.loads((GOLDEN / "default_constants.json").read_text())
    assert golden["kind"] == "derived"
    fits = fitted_constants(rows)
    assert fits.keys() == golden["constants"].keys()
    for k, v in golden["constants"].items():
        assert fits[k] == pytest.approx(v, rel=1e-9)


def test_default_config_coverage(default_run):
    rows, _ = default_run
    quantities = " ".join(r.quantity for r in rows)
    methods = {m for r in rows for m in r.method.split("|")}
    formula_ids = [
        *B.FORMULA_SLOT,
        "minimize_lemma",
        "const_C",
        "const_d0",
        "grunbaum_lower",
        "varentropy_bound",
        "large_dev_lower",
        "pinsker_gilardoni",
        "talagrand",
        "renyi_interval",
        "bl_cap",
        "ledoux",
    ]
    assert [f for f in formula_ids if f not in quantities] == []
    distance_methods = {
        "analytic-tail",
        "identical",
        "lp",
        "lp-grid",
        "lp-sampled",
        "quadrature-regions",
        "monte-carlo-mixture",
        "quantile-quadrature",
        "quadrature",
        "quadrature-kl",
        "monte-carlo",
        "monte-carlo-kl",
        "sorted-matching",
        "assignment",
        "sinkhorn",
    }
    assert distance_methods - methods == set()
    assert D.INFINITE.method in methods
