import json
import math
import subprocess
import sys

import pytest

from convexmetrics.harness.cli import ENV_SEED, main

GAUSS = '{"family": "std-gaussian", "params": {"n": 1}}'
SHIFT = '{"family": "gaussian", "params": {"mean": 1.0, "covariance": 1.0}}'
EXPO = '{"family": "exponential-centered", "params": {}}'

CONFIG = {
    "seed": 4,
    "budget": 5000,
    "specs": {"g": {"family": "std-gaussian", "params": {"n": 1}}},
    "sweeps": [{"prefix": "c", "s": [-0.1]}],
    "pairs": [{"mu": ["c(s=-0.1)"], "nu": ["g"], "checks": ["tv", "bl", "thm_tv_from_bl"]}],
    "singles": [{"specs": ["g"], "checks": ["max_entropy"]}],
}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def config_file(tmp_path):
    def make(**over):
        doc = {**CONFIG, **over}
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        return str(path)

    return make


def test_dist_kl_closed_form(capsys):
    code, out, _ = run(capsys, "dist", "--mu", SHIFT, "--nu", GAUSS, "--distance", "kl")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(0.5, abs=1e-7) and rec["finite"]


def test_dist_infinite_renyi(capsys):
    code, out, _ = run(capsys, "dist", "--mu", EXPO, "--nu", GAUSS, "--distance", "renyi", "--p", "2")
    rec = json.loads(out)
    assert code == 0 and rec["finite"] is False and rec["value"] is None


def test_dist_reads_spec_from_file(capsys, tmp_path):
    path = tmp_path / "mu.json"
    path.write_text(SHIFT)
    code, out, _ = run(capsys, "dist", "--mu", str(path), "--nu", GAUSS, "--distance", "w", "--p", "2")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.0, rel=1e-6)


def test_bound_formula(capsys):
    code, out, _ = run(capsys, "bound", "thm_w1_from_bl", "--arg", "d_bl=0.1", "--arg", "n=4", "--arg", "s=-0.25")
    rec = json.loads(out)
    assert code == 0 and rec["value"] == pytest.approx(2 * math.sqrt(0.2), rel=1e-12)
    assert rec["in_validity_domain"] is True


def test_bound_plain_float_and_bad_args(capsys):
    code, out, _ = run(capsys, "bound", "const_d0", "--arg", "n=1", "--arg", "s=-0.25")
    assert code == 0 and json.loads(out)["value"] == pytest.approx(1.25**5 / 0.5)
    code, _, err = run(capsys, "bound", "const_d0", "--arg", "n")
    assert code == 2 and "key=value" in err
    code, _, err = run(capsys, "bound", "const_d0", "--arg", "n=1", "--arg", "s=0.3")
    assert code == 2


def test_verify_exit_zero_and_outputs(capsys, config_file, tmp_path):
    cfg = config_file()
    code, out, err = run(capsys, "verify", "--config", cfg)
    assert code == 0 and out.startswith("pair_id,quantity,")
    assert "verdicts:" in err and "violated" not in err
    target = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "--config", cfg, "--format", "json", "--out", str(target), "--fit-constants")
    assert code == 0
    assert isinstance(json.loads(target.read_text()), list)
    fits = json.loads(target.with_suffix(".constants.json").read_text())
    assert set(fits) == {"c_tvbl"} and 0 < fits["c_tvbl"] < 1


def test_verify_exit_one_on_violation(capsys, config_file):
    # a constant far below the fitted minimum makes the theorem row fail
    cfg = config_file(bounds={"universal_constants": {"c_tvbl": 1e-3}})
    code, out, _ = run(capsys, "verify", "--config", cfg)
    assert code == 1 and ",violated," in out


def test_verify_exit_two_on_config_error(capsys, config_file, tmp_path):
    cfg = config_file(pairs=[{"mu": ["missing"], "nu": ["g"], "checks": ["tv"]}])
    code, _, err = run(capsys, "verify", "--config", cfg)
    assert code == 2 and "config error" in err and "missing" in err
    code, _, err = run(capsys, "verify", "--config", str(tmp_path / "absent.toml"))
    assert code == 2


def test_seed_flag_env_and_precedence(capsys, config_file, monkeypatch):
    cfg = config_file()
    base = run(capsys, "verify", "--config", cfg)[1]
    monkeypatch.setenv(ENV_SEED, "99")
    env = run(capsys, "verify", "--config", cfg)[1]
    assert env != base  # Monte-Carlo rows follow the new seed
    assert run(capsys, "verify", "--config", cfg, "--seed", "4")[1] == base
    monkeypatch.setenv(ENV_SEED, "x")
    assert run(capsys, "verify", "--config", cfg)[0] == 2


def test_fit_subcommand(capsys, config_file):
    code, out, _ = run(capsys, "fit", "--config", config_file())
    assert code == 0 and "c_tvbl" in json.loads(out)


def test_console_script_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "convexmetrics.harness.cli", "bound", "grunbaum_lower", "--arg", "s=-0.5"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert res.returncode == 0 and json.loads(res.stdout)["value"] == pytest.approx(0.25)
