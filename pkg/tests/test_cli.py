import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from coranks import __version__
from coranks.cli import run
from coranks.codf import empirical_codf, ranks_and_signs
from coranks.densities import make_reference
from coranks.grid import factorize, make_grid
from coranks.io import ArtifactError, model_from_config, read_csv, write_csv
from coranks.scores import score_from_name
from coranks.statistics import (approximate_score_statistic, exact_score_statistic_mc,
                                partial_sum_statistic)


@pytest.fixture
def data60(tmp_path):
    path = tmp_path / "data.csv"
    assert run(["sample", "--n", "60", "--seed", "7", "-o", str(path)]) == 0
    return path


def _meta(path):
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    return json.loads(first[1:]) if first.startswith("#") else json.loads(open(path).read())


@given(arrays(float, (4, 3), elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_csv_float_round_trip_is_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    write_csv(path, ["a", "b", "c"], values, meta={"seed": 1})
    meta, header, back = read_csv(path)
    assert header == ["a", "b", "c"] and meta == {"seed": 1}
    np.testing.assert_array_equal(back, values)


@pytest.mark.parametrize("text, field", [
    ("a,b\n1,2\n3\n", "line 3"),
    ("a,b\n1,2\n3,x\n", "column 'b'"),
    ("a,b\n", "no data rows"),
    ("", "missing header"),
    ("a,a\n1,2\n", "duplicate"),
    ("a,b\n1,nan\n", "non-finite"),
])
def test_malformed_csv_names_field(tmp_path, text, field):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ArtifactError, match=field):
        read_csv(path)


@pytest.mark.parametrize("cfg, field", [
    ({"f0": {"name": "cauchy"}}, "f0"),
    ({"kind": "scale"}, "kind"),
    ({"kind": "linear_regression"}, "covariates"),
    ({"k": 3}, "'k'"),
])
def test_bad_model_config_names_field(cfg, field):
    with pytest.raises(ArtifactError, match=field):
        model_from_config(cfg)


def test_ranks_example(tmp_path, data60):
    out = tmp_path / "ranks.csv"
    assert run(["ranks", "-i", str(data60), "--model", "location", "--theta", "0,0",
                "--nr", "6", "--ns", "10", "--seed", "7", "-o", str(out)]) == 0
    meta, header, values = read_csv(out)
    assert header == ["rank", "sign_1", "sign_2", "image_1", "image_2"]
    assert len(values) == 60
    assert sorted(values[:, 0].astype(int).tolist()) == sorted(list(range(1, 7)) * 10)
    assert meta["version"] == __version__ and meta["seed"] == 7
    assert meta["config"]["grid"]["n_R"] == 6


def test_outputs_never_overwritten_without_force(tmp_path, data60, capsys):
    out = tmp_path / "ranks.csv"
    args = ["ranks", "-i", str(data60), "--nr", "6", "--ns", "10", "-o", str(out)]
    assert run(args) == 0
    before = out.read_bytes()
    assert run(args) == 2
    assert "--force" in capsys.readouterr().err
    assert out.read_bytes() == before
    assert run(args + ["--force"]) == 0


@pytest.mark.parametrize("args", [
    ["stat", "--score", "wilcoxon"],
    ["stat", "--score", "gaussian", "--constants", "two-sample"],
    ["stat", "--statistic", "partial", "--score", "tangent:tanh:1", "--u", "0.4"],
    ["stat", "--statistic", "exact", "--score", "gaussian", "--reps", "100", "--seed", "3"],
])
def test_ranks_stat_round_trip_bit_for_bit(tmp_path, data60, args):
    ranks = tmp_path / "ranks.csv"
    out = tmp_path / "stat.json"
    assert run(["ranks", "-i", str(data60), "--nr", "6", "--ns", "10", "-o", str(ranks)]) == 0
    assert run(args + ["-i", str(ranks), "-o", str(out)]) == 0
    record = json.loads(out.read_text())["statistic"]

    _, _, x = read_csv(data60)
    rs = ranks_and_signs(empirical_codf(x, make_grid(factorize(60, 2, 6, 10))))
    ref = make_reference("gaussian", 2)
    if "partial" in args:
        value = partial_sum_statistic(score_from_name("tangent:tanh:1", 2, ref), rs, 0.4)
    elif "exact" in args:
        value = exact_score_statistic_mc(np.arange(1, 61.0), score_from_name("gaussian", 2), rs,
                                         ref, 100, 3)
    else:
        c = np.r_[-np.ones(30), np.ones(30)] if "two-sample" in args else np.arange(1, 61.0)
        value = approximate_score_statistic(c, score_from_name(args[2], 2), rs)
    assert record["value"] == value.value.tolist()
    assert record["n"] == 60 and record["grid_meta"]["n_R"] == 6


def test_stat_needs_n_r_without_metadata(tmp_path, capsys):
    path = tmp_path / "plain.csv"
    write_csv(path, ["image_1", "image_2"], [[0.5, 0.0], [-0.5, 0.0]])
    assert run(["stat", "-i", str(path), "-o", str(tmp_path / "s.json")]) == 2
    assert "--nr" in capsys.readouterr().err
    assert run(["stat", "-i", str(path), "--nr", "1", "-o", str(tmp_path / "s.json")]) == 0


def test_contours_sorted_by_angle(tmp_path, data60):
    out = tmp_path / "c.csv"
    assert run(["contours", "-i", str(data60), "--nr", "6", "--ns", "10", "--orders", "2,5",
                "-o", str(out)]) == 0
    meta, header, values = read_csv(out)
    for j in (2, 5):
        rows = values[values[:, 0] == j]
        assert len(rows) == 10
        assert np.all(np.diff(rows[:, header.index("angle")]) > 0)
        assert np.all(rows[:, 1] == j / 7)
    assert meta["config"]["contours"]["5"]["points"] == 10
    assert run(["contours", "-i", str(data60), "--nr", "6", "--ns", "10", "--orders", "7",
                "-o", str(tmp_path / "d.csv")]) == 2


def test_grid_and_sample_commands(tmp_path):
    out = tmp_path / "g.json"
    assert run(["grid", "--n", "10", "-o", str(out)]) == 0
    body = json.loads(out.read_text())
    assert len(body["points"]) == 10 and body["grid"]["n_0"] == 1
    assert body["version"] == __version__ and "seed" in body
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sample", "--density", "t", "--n", "5", "--seed", "1", "-o", str(a)]) == 0
    assert run(["sample", "--density", "t", "--n", "5", "--seed", "1", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fig1_fixture_regenerates(tmp_path, fixtures_dir):
    cfg = json.loads((fixtures_dir / "fig1.json").read_text())
    out = tmp_path / "fig1.csv"
    assert run(["sample", "--density", "mixture", "--n", str(cfg["n"]), "--seed", str(cfg["seed"]),
                "-o", str(out)]) == 0
    _, _, fresh = read_csv(out)
    _, _, stored = read_csv(fixtures_dir / cfg["input"])
    np.testing.assert_array_equal(fresh, stored)


def test_verify_exit_codes(tmp_path, fixtures_dir, capsys):
    cfg = str(fixtures_dir / "dfree.json")
    out = tmp_path / "r.json"
    assert run(["verify", "dfree", "--config", cfg, "--reps", "1000", "-o", str(out)]) == 0
    body = json.loads(out.read_text())
    assert body["report"]["pass"] is True and body["seed"] == 12345
    assert body["report"]["alpha"] == 0.001
    # a same-law negative control cannot reject: gate failure -> exit 1
    same = tmp_path / "same.json"
    same.write_text(json.dumps({"densities": ["gaussian", "gaussian"], "nr": 6, "ns": 10}))
    assert run(["verify", "dfree", "--config", str(same), "--reps", "500",
                "-o", str(tmp_path / "s1.json")]) == 1
    assert run(["verify", "dfree", "--config", str(same), "--reps", "500", "--diagnostic",
                "-o", str(tmp_path / "s2.json")]) == 0
    assert "warning" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, field", [
    ({"densities": ["gaussian"]}, "densities"),
    ({"tangents": ["tanh:9"], "local": [{"tau": [0, 0]}]}, "tangents[0]"),
    ({"tangents": ["tanh:1"], "local": [{"tau": [0, 0], "eta": "sin:1"}]}, "local[0].eta"),
    ({"tangents": ["tanh:1"], "local": [{"tau": [0, 0, 1]}]}, "local[0].tau"),
])
def test_verify_config_errors_name_field(tmp_path, capsys, cfg, field):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    check = "dfree" if "densities" in cfg else "limit"
    assert run(["verify", check, "--config", str(path), "--reps", "10",
                "-o", str(tmp_path / "r.json")]) == 2
    assert field in capsys.readouterr().err


def test_simulate_outputs(tmp_path, fixtures_dir):
    out = tmp_path / "paths.csv"
    assert run(["simulate", "--config", str(fixtures_dir / "limit.json"), "--reps", "2000",
                "-o", str(out)]) == 0
    meta, header, values = read_csv(out)
    assert len(values) == 2000 and meta["seed"] == 12345
    assert header[:5] == ["path", "endpoint_1", "endpoint_2", "endpoint_3", "endpoint_4"]
    bridge_ends = [i for i, h in enumerate(header) if h.startswith("bridge") and
                   (h.endswith("u0.0") or h.endswith("u1.0"))]
    assert np.all(values[:, bridge_ends] == 0.0)
    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["report"]["pass"] is True
    assert len(summary["endpoint_cov"]) == 4
    assert summary["version"] == __version__


@pytest.mark.parametrize("argv", [[], ["bogus"], ["ranks"], ["grid", "-o", "x.json"],
                                  ["ranks", "-i", "missing.csv", "-o", "x.csv"]])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert run(argv) == 2
