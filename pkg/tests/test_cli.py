from __future__ import annotations

import json
import math
import os

import pytest

from schrodmax.cli import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    _json_safe,
    _write_atomic,
    emit_csv,
    main,
    parse_config_text,
    parse_csv,
)


def _base(verb="lemmas-verify", **extra):
    raw = {"verb": verb}
    raw.update(extra)
    return ExperimentConfig.from_mapping(raw)


def test_parse_config_text_shapes():
    text = """
    # comment
    verb = counterexample

    ladder = 2^16 2^17 2^18 2^19
    out = runs/a=b
    """
    got = parse_config_text(text)
    assert got["verb"] == "counterexample"
    assert got["out"] == "runs/a=b"
    with pytest.raises(ConfigError):
        parse_config_text("verb = a\nverb = b\n")
    with pytest.raises(ConfigError):
        parse_config_text("just a line\n")
    with pytest.raises(ConfigError):
        parse_config_text("= value\n")


def test_unknown_and_missing_keys():
    with pytest.raises(ConfigError, match="unknown key"):
        _base(**{"model.dd": "2"})
    with pytest.raises(ConfigError, match="verb"):
        ExperimentConfig.from_mapping({"seed": "1"})
    with pytest.raises(ConfigError, match="verb"):
        _base(verb="sweepify")
    with pytest.raises(ConfigError, match="ladder"):
        _base(verb="maximal-sweep")
    with pytest.raises(ConfigError, match="model.R"):
        _base(verb="propagator-check")


def test_field_level_messages():
    with pytest.raises(ConfigError, match="model.gamma"):
        _base(**{"model.gamma": "-2.0"})
    with pytest.raises(ConfigError, match="samples"):
        _base(samples="1")
    with pytest.raises(ConfigError, match="ce.experiment"):
        _base(**{"ce.experiment": "maybe"})
    with pytest.raises(ConfigError, match="ladder"):
        _base(verb="maximal-sweep", ladder="2^4 2^5 2^6")
    with pytest.raises(ConfigError, match="ladder"):
        _base(verb="maximal-sweep", ladder="2^5 2^4 2^6 2^7")


def test_defaults_and_ladder_syntax():
    cfg = _base(verb="counterexample", ladder="2^16,2^17 2^18, 2^19")
    assert cfg.ladder == (65536.0, 131072.0, 262144.0, 524288.0)
    assert cfg.samples == 2000
    assert cfg.seed == 0
    assert cfg.model_d == 2
    assert cfg.model_gamma == 2.0
    assert cfg.ce_experiment is True
    assert cfg.out_dir == os.path.join("runs", "counterexample")


def test_ce_overrides_collected():
    cfg = _base(verb="counterexample", ladder="2^16 2^17 2^18 2^19",
                **{"ce.c1": "0.01", "ce.mu0": "0.002"})
    assert ("c1", 0.01) in cfg.ce_overrides
    assert ("mu0", 0.002) in cfg.ce_overrides


def test_echo_is_a_fixed_point():
    cfg = _base(verb="counterexample", ladder="2^16 2^17 2^18 2^19",
                samples="500", **{"ce.c1": "0.01", "s": "0.25"})
    again = ExperimentConfig.from_mapping(cfg.echo())
    assert again == cfg


def test_csv_round_trip_fixed_point():
    rec = {"R": 65536.0, "ratio": 1.0 / 3.0, "tiny": -2.5e-17, "tag": "ok",
           "count": 40}
    text = emit_csv([rec])
    assert text.endswith("\n")
    back = parse_csv(text)
    assert back[0]["count"] == 40
    assert isinstance(back[0]["count"], int)
    assert back[0]["tag"] == "ok"
    assert back[0]["ratio"] == pytest.approx(rec["ratio"], rel=1e-11)
    assert emit_csv(back) == text


def test_csv_rejects_malformed_records():
    with pytest.raises(ValueError):
        emit_csv([{"a": 1}, {"b": 2}])
    with pytest.raises(ValueError):
        emit_csv([{"a": "x,y"}])
    with pytest.raises(ValueError):
        emit_csv([])
    assert emit_csv([], fieldnames=["a", "b"]) == "a,b\n"
    with pytest.raises(ValueError):
        parse_csv("")
    with pytest.raises(ValueError):
        parse_csv("a,b\n1\n")


def test_write_atomic_leaves_no_temp(tmp_path):
    target = tmp_path / "out" / "report.json"
    _write_atomic(str(target), "{}\n")
    assert target.read_text() == "{}\n"
    assert [p.name for p in target.parent.iterdir()] == ["report.json"]


def test_report_json_excludes_wall_clock():
    rep = RunReport(verb="lemmas-verify", config_echo={"verb": "lemmas-verify"},
                    records=({"suite": "x", "worst": 0.0},),
                    summary={"n": 1}, verdicts={"a": True, "b": False},
                    wall_clock={"total_s": 1.23})
    payload = json.loads(rep.to_json())
    assert "wall_clock" not in payload
    assert payload["passed"] is False
    assert rep.passed is False
    assert _json_safe(math.inf) == "inf"
    assert _json_safe({"x": (1, math.nan)}) == {"x": [1, "nan"]}


def test_main_rejects_bad_values(tmp_path, capsys):
    rc = main(["lemmas-verify", "--set", "model.gamma=-2.0",
               "--out", str(tmp_path / "x")])
    assert rc == 2
    assert "model.gamma" in capsys.readouterr().err
    rc = main(["lemmas-verify", "--config", str(tmp_path / "missing.cfg")])
    assert rc == 2
    assert "cannot read" in capsys.readouterr().err


def test_main_lemmas_verify_end_to_end(tmp_path, capsys):
    out = tmp_path / "lemmas"
    rc = main(["lemmas-verify", "--seed", "1", "--out", str(out)])
    captured = capsys.readouterr()
    assert rc == 0
    assert captured.out.count(": pass") == 5
    payload = json.loads((out / "report.json").read_text())
    assert payload["config"]["seed"] == "1"
    assert all(payload["verdicts"].values())
    rows = parse_csv((out / "records.csv").read_text())
    assert [r["suite"] for r in rows] == [
        "gauss", "weyl", "abel", "vitali", "dirichlet"]


def test_main_propagator_check(tmp_path, capsys):
    out = tmp_path / "prop"
    rc = main(["propagator-check", "--R", "64", "--points", "4",
               "--out", str(out)])
    assert rc == 0
    assert "factorized-vs-direct: pass" in capsys.readouterr().out
    payload = json.loads((out / "report.json").read_text())
    assert payload["summary"]["worst_rel_error"] <= 1e-4


def test_main_counterexample_deterministic(tmp_path, capsys):
    cfg = tmp_path / "ce.cfg"
    cfg.write_text("verb = counterexample\n"
                   "ladder = 2^16 2^17 2^18 2^19\n"
                   "samples = 150\n"
                   "seed = 9\n")
    out_a, out_b, out_c = (str(tmp_path / n) for n in "abc")
    rc_a = main(["counterexample", "--config", str(cfg), "--out", out_a])
    rc_b = main(["counterexample", "--config", str(cfg), "--out", out_b])
    rc_c = main(["counterexample", "--config", str(cfg), "--out", out_c,
                 "--workers", "2"])
    capsys.readouterr()
    assert rc_a in (0, 1) and rc_b == rc_a and rc_c == rc_a
    payloads = [json.loads((tmp_path / n / "report.json").read_text())
                for n in "abc"]
    for p in payloads:
        del p["config"]["out"]
        p["config"].pop("workers")
    assert payloads[0] == payloads[1] == payloads[2]
    rows = parse_csv((tmp_path / "a" / "records.csv").read_text())
    assert list(rows[0].keys()) == ["R", "mean_modulus", "measure_estimate",
                                    "ratio_estimate", "E1", "E2"]
    assert [r["R"] for r in rows] == [2**k for k in range(16, 20)]


def test_main_counterexample_clamps_gamma_above_two(tmp_path, capsys):
    args = ["counterexample", "--ladder", "2^16 2^17 2^18 2^19",
            "--samples", "150", "--seed", "9"]
    rc_hi = main(args + ["--gamma", "3", "--out", str(tmp_path / "hi")])
    rc_lo = main(args + ["--gamma", "2", "--out", str(tmp_path / "lo")])
    capsys.readouterr()
    assert rc_hi in (0, 1) and rc_lo in (0, 1)
    hi, lo = (json.loads((tmp_path / n / "report.json").read_text())
              for n in ("hi", "lo"))
    assert hi["summary"]["gamma_eval"] == 3.0
    assert lo["summary"]["gamma_eval"] == 2.0
    for rec_hi, rec_lo in zip(hi["records"], lo["records"]):
        # same construction and sampling, weaker damping at t < 1
        assert rec_hi["measure_estimate"] == rec_lo["measure_estimate"]
        assert rec_hi["mean_modulus"] > rec_lo["mean_modulus"]


def test_main_counterexample_runtime_failure(tmp_path, capsys):
    rc = main(["counterexample", "--ladder", "2^8 2^9 2^10 2^11",
               "--set", "ce.experiment=false", "--samples", "50",
               "--out", str(tmp_path / "fail")])
    assert rc == 3
    assert "run failed" in capsys.readouterr().err


def test_main_maximal_sweep_small(tmp_path, capsys):
    out = tmp_path / "sweep"
    rc = main(["maximal-sweep", "--d", "1", "--gamma", "0.5",
               "--ladder", "2^2 2^3 2^4 2^5", "--out", str(out),
               "--set", "space.per_axis=5", "--set", "time.geometric=6",
               "--set", "time.cap=16"])
    assert rc == 0
    assert "slope: pass" in capsys.readouterr().out
    payload = json.loads((out / "report.json").read_text())
    assert len(payload["records"]) == 4
    assert payload["summary"]["target_exponent"] == 0.0


def test_main_maximal_sweep_is_reproducible(tmp_path, capsys):
    args = ["maximal-sweep", "--d", "1", "--gamma", "0.5",
            "--ladder", "2^2 2^3 2^4 2^5",
            "--set", "space.per_axis=5", "--set", "time.geometric=6",
            "--set", "time.cap=16"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    capsys.readouterr()
    pair = [json.loads((tmp_path / n / "report.json").read_text())
            for n in "ab"]
    for p in pair:
        del p["config"]["out"]
    assert pair[0] == pair[1]
    assert ((tmp_path / "a" / "records.csv").read_bytes()
            == (tmp_path / "b" / "records.csv").read_bytes())
