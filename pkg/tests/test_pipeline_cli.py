import json
import subprocess
import sys

import pandas as pd
import pytest

from elitecore.cli import main
from elitecore.pipeline import ConfigError, PipelineConfig, run_pipeline, sensitivity_sweep

SMALL = {"n_directors": 400, "n_boards": 90, "core_size": 10, "months": 3, "seed": 4}
FIGURES = ("fig1_rounds.csv", "fig2_core.csv", "fig3_compare.csv", "fig4_concentration.csv",
           "fig5_enrichment.csv", "fig6_profiles.csv")


def write_config(tmp_path, **kw):
    doc = {"synth": dict(SMALL)}
    doc.update(kw)
    p = tmp_path / "config.json"
    p.write_text(json.dumps(doc))
    return p


def test_pipeline_then_cached(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["pipeline", "--config", str(cfg), "--out", str(out)]) == 0
    first = capsys.readouterr().out
    assert "ingest: done" in first and "report: done" in first
    for name in FIGURES + ("manifest.json", "panel.csv", "ranks.csv", "core_summary.csv"):
        assert (out / name).exists(), name
    assert sorted(p.name for p in (out / "months").iterdir()) == ["2013-01", "2013-02", "2013-03"]
    assert main(["pipeline", "--config", str(cfg), "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines and all(line.endswith(": cached") for line in lines)


def test_config_change_invalidates_downstream(tmp_path, capsys):
    out = tmp_path / "out"
    main(["pipeline", "--config", str(write_config(tmp_path)), "--out", str(out)])
    capsys.readouterr()
    main(["pipeline", "--config", str(write_config(tmp_path, brokerage_threshold="2")), "--out", str(out)])
    status = dict(line.split(": ") for line in capsys.readouterr().out.strip().splitlines())
    assert status["ingest"] == "cached" and status["rank"] == "cached"
    assert status["network"] == "done" and status["report"] == "done"


def test_unknown_mode_rejected_before_work(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_config(tmp_path, brokerage_mode="sideways")
    assert main(["pipeline", "--config", str(cfg), "--out", str(out)]) == 2
    assert "brokerage_mode" in capsys.readouterr().err
    assert not out.exists()
    with pytest.raises(ConfigError):
        PipelineConfig(brokerage_mode="sideways").validate()


def test_missing_input_path(tmp_path):
    with pytest.raises(ConfigError, match="does not exist"):
        PipelineConfig(positions=str(tmp_path / "nope.csv")).validate()


def test_unknown_config_key(tmp_path, capsys):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"brokerage_treshold": "1"}))
    assert main(["pipeline", "--config", str(p), "--out", str(tmp_path / "o")]) == 2


def test_threshold_sweep(tmp_path):
    cfg = PipelineConfig(synth={"n_directors": 1000, "n_boards": 200, "core_size": 20, "seed": 9})
    frame = sensitivity_sweep(cfg, "brokerage_threshold", ["0.5", "1", "2"], tmp_path, echo=None)
    assert (tmp_path / "sweep_brokerage_threshold.csv").exists()
    r1 = frame.sort_values("value", key=lambda s: s.astype(float))["round1_brokers"].tolist()
    assert r1 == sorted(r1, reverse=True)
    assert set(frame["value"].astype(str)) == {"0.5", "1", "2"}


def test_sweep_errors(tmp_path):
    cfg = PipelineConfig(synth=dict(SMALL))
    with pytest.raises(ConfigError, match="empty"):
        sensitivity_sweep(cfg, "brokerage_threshold", [], tmp_path)
    with pytest.raises(ConfigError, match="sweepable"):
        sensitivity_sweep(cfg, "workers", [1, 2], tmp_path)
    with pytest.raises(ConfigError):
        sensitivity_sweep(cfg, "brokerage_mode", ["sideways"], tmp_path)


def test_print_config(capsys):
    assert main(["--print-config"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["brokerage_mode"] == "middleman" and doc["rank_cutoffs"] == [50, 500, 5000]
    assert PipelineConfig.from_dict(doc) == PipelineConfig()


def test_stage_subcommands(tmp_path, capsys):
    cfg = write_config(tmp_path)
    out = tmp_path / "out"
    assert main(["rank", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "ranks.csv").exists() and not (out / "panel.csv").exists()
    assert main(["kcore", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "months" / "2013-01" / "coreness.csv").exists()
    assert main(["snapshot", "--config", str(cfg), "--out", str(out), "--month", "2013-02"]) == 0
    assert (out / "months" / "2013-02" / "coboard.tsv").exists()


def test_synth_subcommand(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "reg"), "--seed", "3"]) == 0
    for name in ("positions.csv", "financials.csv", "groups.csv", "directors.csv", "committees.csv",
                 "ground_truth.csv", "dgp.json"):
        assert (tmp_path / "reg" / name).exists()


def test_pipeline_on_written_registry(tmp_path):
    reg = tmp_path / "reg"
    main(["synth", "--config", str(write_config(tmp_path)), "--out", str(reg)])
    doc = {k: str(reg / f"{k}.csv") for k in ("positions", "financials", "groups", "directors", "committees")}
    doc.update(study_start="2013-01", study_end="2013-03")
    p = tmp_path / "real.json"
    p.write_text(json.dumps(doc))
    out = tmp_path / "out"
    assert main(["pipeline", "--config", str(p), "--out", str(out)]) == 0
    panel = pd.read_csv(out / "panel.csv")
    assert set(panel["month"]) == {"2013-01", "2013-02", "2013-03"}
    truth = pd.read_csv(reg / "ground_truth.csv")
    core = set(truth.loc[truth["tier"] == "core", "director_id"])
    jan = panel[panel["month"] == "2013-01"].set_index("director_id")["elite_category"]
    assert all(jan[d] == 4 for d in core)


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "elitecore", "--print-config"], capture_output=True, text=True)
    assert res.returncode == 0 and "brokerage_threshold" in res.stdout


def test_run_pipeline_function(tmp_path):
    out = run_pipeline(PipelineConfig(synth=dict(SMALL)), tmp_path / "o", until="panel", echo=None)
    assert (tmp_path / "o" / "panel.csv").exists() and not (tmp_path / "o" / "fig1_rounds.csv").exists()
