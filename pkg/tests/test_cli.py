import json

import pytest

from covexplorer import cli
from covexplorer.config import ConfigError, load_config, parse_config
from covexplorer.koopman import FitError

CAR = """
seed = 1
test_cases = 3
seeds = [0, 1]

[plant]
name = "kinematic_car"

[train]
iterations = 2
sim_count = 6
cluster_count = 3
steps = 20

[tune]
m_rff = [0, 20]
lengthscale_factors = [1.0]
regs = [1e-6, 1e-3]
"""

LINE = """
[objective]
projection = [0]
bounds = [[0.0, 100.0]]
sigma = 3.0
"""


@pytest.fixture
def car_cfg(tmp_path):
    p = tmp_path / "car.toml"
    p.write_text(CAR)
    return p


def run(*argv):
    return cli.main([str(a) for a in argv])


def test_config_strict():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config({"plant": {"name": "kinematic_car"}, "bogus": 1})
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config({"plant": {"name": "kinematic_car", "wheels": 4}})
    with pytest.raises(ConfigError, match="unknown plant"):
        parse_config({"plant": {"name": "zeppelin"}})
    with pytest.raises(ConfigError):
        parse_config({"plant": {"name": "kinematic_car"}, "train": {"iterations": 0}})
    cfg = parse_config({"plant": {"name": "point_mass", "speed_limit": 2.0}})
    assert cfg.make_plant().input_high.tolist() == [2.0, 2.0, 2.0]


def test_missing_config_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.toml"
    assert run("train", "--config", missing) == 2
    assert str(missing) in capsys.readouterr().err


def test_train_generate_score(tmp_path, car_cfg, capsys):
    out = tmp_path / "run"
    assert run("train", "--config", car_cfg, "--out", out) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["iterations"]) == 2
    assert manifest["config"]["seed"] == 1
    assert (out / "iterations" / "clusters_01.csv").exists()
    assert (out / "iterations" / "regions_00.csv").exists()
    assert (out / "model" / "A.csv").exists()

    gen = tmp_path / "gen"
    assert run("generate", "--config", car_cfg, "--model", out / "model", "--out", gen) == 0
    assert len(list((gen / "cases").glob("case_*.csv"))) == 3
    report = json.loads((gen / "score.json").read_text())
    capsys.readouterr()
    assert run("score", "--config", car_cfg, gen / "cases") == 0
    printed = capsys.readouterr().out
    assert f"coverage score: {report['score']!r}" in printed


def test_generate_count_one_and_mismatch(tmp_path, car_cfg):
    out = tmp_path / "run"
    assert run("train", "--config", car_cfg, "--out", out) == 0
    one = tmp_path / "one.toml"
    one.write_text(CAR.replace("test_cases = 3", "test_cases = 1"))
    assert run("generate", "--config", one, "--model", out / "model", "--out", tmp_path / "g") == 0
    assert len(list((tmp_path / "g" / "cases").glob("case_*.csv"))) == 1
    pm = tmp_path / "pm.toml"
    pm.write_text('[plant]\nname = "point_mass"\n')
    assert run("generate", "--config", pm, "--model", out / "model", "--out", tmp_path / "x") == 3
    (out / "model" / "A.csv").write_text("1,2\n")
    assert run("generate", "--config", car_cfg, "--model", out / "model",
               "--out", tmp_path / "y") == 3


def test_train_deterministic(tmp_path, car_cfg):
    for name in ("a", "b"):
        assert run("train", "--config", car_cfg, "--out", tmp_path / name) == 0
    for f in (tmp_path / "a").rglob("*"):
        if f.is_file():
            assert f.read_bytes() == (tmp_path / "b" / f.relative_to(tmp_path / "a")).read_bytes()


def test_score_fig2_fixture(tmp_path, capsys):
    cfg = tmp_path / "line.toml"
    cfg.write_text(LINE)
    d = tmp_path / "traces"
    d.mkdir()
    for i, v in enumerate((20.0, 60.0)):
        (d / f"s{i}.csv").write_text(f"t,x0\n0.0,{v}\n")
    assert run("score", "--config", cfg, d) == 0
    score = float(capsys.readouterr().out.split("coverage score:")[1])
    assert score == pytest.approx(2.0, abs=0.02)
    (d / "s2.csv").write_text("t,x0\n0.0,60.0\n")
    assert run("score", "--config", cfg, d) == 0
    assert float(capsys.readouterr().out.split("coverage score:")[1]) == score


def test_score_empty_and_malformed(tmp_path, capsys):
    cfg = tmp_path / "line.toml"
    cfg.write_text(LINE)
    (tmp_path / "empty").mkdir()
    assert run("score", "--config", cfg, tmp_path / "empty") == 0
    assert "coverage score: 0.0" in capsys.readouterr().out
    bad = tmp_path / "bad.csv"
    bad.write_text("t,x0\n0.0,1.0\n1.0,zz\n")
    assert run("score", "--config", cfg, bad) == 3
    assert "row 3" in capsys.readouterr().err


def test_compare_writes_per_seed_rows(tmp_path, car_cfg, capsys):
    out = tmp_path / "cmp"
    assert run("compare", "--config", car_cfg, "--out", out) == 0
    rows = (out / "compare_scores.csv").read_text().splitlines()
    assert rows[0] == "seed,method,score" and len(rows) == 5
    assert "coverage-guided" in capsys.readouterr().out
    first = (out / "compare_scores.csv").read_bytes()
    assert run("compare", "--config", car_cfg, "--out", out) == 0
    assert (out / "compare_scores.csv").read_bytes() == first


def test_numerical_failure_exit_4(tmp_path, car_cfg, monkeypatch):
    def boom(*a, **k):
        raise FitError("singular")
    monkeypatch.setattr(cli, "train_model", boom)
    assert run("train", "--config", car_cfg, "--out", tmp_path / "z") == 4


def test_load_config_roundtrip(car_cfg):
    cfg = load_config(car_cfg)
    assert cfg.train.grid.m_rff == (0, 20)
    assert cfg.with_seed(9).train.seed == 9
