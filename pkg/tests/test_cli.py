"""Tests for the command-line interface."""

from __future__ import annotations

import json
import os
import shutil
import subprocess
import sys

import pytest

import assembly_bench.service
from assembly_bench.cli import main
from assembly_bench.dataset_io import read_dataset, write_predictions
from assembly_bench.prompts import PLACEHOLDER, SYSTEM_LINE, format_timeline, parse_timeline_output


def run_gen(tmp_path, *extra, seed="3", per_task="2", name="d.jsonl"):
    out = str(tmp_path / name)
    code = main(["--seed", seed, "gen", "--out", out, "--per-task", per_task, *extra])
    assert code == 0
    return out


def test_gen_writes_dataset(tmp_path, capsys):
    out = run_gen(tmp_path)
    samples = read_dataset(out)
    assert len(samples) == 16
    stdout = capsys.readouterr().out
    assert "wrote 16 samples" in stdout
    assert "insert/positional: 2" in stdout


def test_gen_quiet(tmp_path, capsys):
    out = str(tmp_path / "q.jsonl")
    assert main(["--quiet", "gen", "--out", out, "--per-task", "1"]) == 0
    assert capsys.readouterr().out == ""


def test_gen_is_byte_deterministic(tmp_path):
    a = run_gen(tmp_path, name="a.jsonl")
    b = run_gen(tmp_path, name="b.jsonl")
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() == fb.read()


def test_gen_seed_changes_output(tmp_path):
    a = run_gen(tmp_path, seed="3", name="a.jsonl")
    b = run_gen(tmp_path, seed="4", name="b.jsonl")
    with open(a, "rb") as fa, open(b, "rb") as fb:
        assert fa.read() != fb.read()


def test_gen_zero_per_task(tmp_path):
    out = run_gen(tmp_path, per_task="0")
    assert open(out, encoding="utf-8").read() == ""


def test_gen_length_range(tmp_path):
    out = run_gen(tmp_path, "--length-range", "3:6", per_task="4")
    samples = read_dataset(out)
    gold_lengths = {len(s.output_timeline.entries) for s in samples}
    assert gold_lengths <= {3, 4, 5, 6}
    assert len(gold_lengths) > 1
    # insert inputs run one short of gold, remove inputs one long
    assert {len(s.input_timeline.entries) for s in samples} <= set(range(2, 8))


def test_gen_compositional(tmp_path):
    out = run_gen(tmp_path, "--compositional", per_task="1")
    samples = read_dataset(out)
    assert len(samples) == 12
    assert all("+" in s.task for s in samples)


def test_gen_missing_manifest(tmp_path, capsys):
    code = main(["gen", "--out", str(tmp_path / "x.jsonl"), "--manifest", "no-such.jsonl"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_gen_bad_config_is_operational_failure(tmp_path, capsys):
    code = main(["gen", "--out", str(tmp_path / "x.jsonl"), "--length", "1"])
    assert code == 1


def test_gen_bad_length_range_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["gen", "--out", str(tmp_path / "x.jsonl"), "--length-range", "five"])
    assert err.value.code == 2


def test_no_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main([])
    assert err.value.code == 2


def test_exec_all_agrees(tmp_path, capsys):
    out = run_gen(tmp_path)
    assert main(["--quiet", "exec", "--dataset", out, "--all"]) == 0
    assert "agreement 16/16 (100.0%)" in capsys.readouterr().out


def test_exec_single_sample_prints_gold(tmp_path, capsys):
    out = run_gen(tmp_path)
    sample = read_dataset(out)[0]
    assert main(["exec", "--dataset", out, "--sample", sample.sample_id]) == 0
    printed = capsys.readouterr().out
    assert parse_timeline_output(printed) == list(sample.output_timeline.entries)


def test_exec_unknown_sample(tmp_path, capsys):
    out = run_gen(tmp_path)
    assert main(["exec", "--dataset", out, "--sample", "ghost"]) == 1


def test_exec_requires_sample_or_all(tmp_path):
    out = run_gen(tmp_path)
    with pytest.raises(SystemExit) as err:
        main(["exec", "--dataset", out])
    assert err.value.code == 2


def test_exec_detects_tampered_gold(tmp_path, capsys):
    out = run_gen(tmp_path)
    lines = open(out, encoding="utf-8").read().splitlines()
    record = json.loads(lines[0])
    record["output_timeline"] = list(reversed(record["output_timeline"]))
    lines[0] = json.dumps(record, ensure_ascii=False)
    tampered = str(tmp_path / "tampered.jsonl")
    with open(tampered, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    assert main(["--quiet", "exec", "--dataset", tampered, "--all"]) == 1
    captured = capsys.readouterr()
    assert "differs from gold" in captured.err
    assert "agreement 15/16" in captured.out


def test_exec_corrupt_dataset(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert main(["exec", "--dataset", str(bad), "--all"]) == 1
    assert "error:" in capsys.readouterr().err


def test_prompt_writes_files(tmp_path, capsys):
    out = run_gen(tmp_path)
    prompt_dir = str(tmp_path / "prompts")
    assert main(["prompt", "--dataset", out, "--out-dir", prompt_dir]) == 0
    names = sorted(os.listdir(prompt_dir))
    assert len(names) == 16
    text = open(os.path.join(prompt_dir, names[0]), encoding="utf-8").read()
    assert text.startswith(SYSTEM_LINE)
    assert PLACEHOLDER in text


def test_prompt_caption_mode(tmp_path):
    out = run_gen(tmp_path, per_task="1")
    prompt_dir = str(tmp_path / "prompts")
    assert main(["prompt", "--dataset", out, "--mode", "caption", "--out-dir", prompt_dir]) == 0
    for name in os.listdir(prompt_dir):
        text = open(os.path.join(prompt_dir, name), encoding="utf-8").read()
        assert PLACEHOLDER not in text


def test_eval_gold_predictions(tmp_path, capsys):
    out = run_gen(tmp_path)
    samples = read_dataset(out)
    preds = str(tmp_path / "preds.jsonl")
    write_predictions(
        {s.sample_id: format_timeline(s.output_timeline) for s in samples}, preds
    )
    assert main(["eval", "--dataset", out, "--predictions", preds]) == 0
    stdout = capsys.readouterr().out
    assert "100.0" in stdout
    assert "Avg." in stdout


def test_eval_lenient_flag(tmp_path, capsys):
    out = run_gen(tmp_path, per_task="1")
    samples = read_dataset(out)
    sloppy = {
        s.sample_id: format_timeline(s.output_timeline).replace('"', "'")
        for s in samples
    }
    preds = str(tmp_path / "preds.jsonl")
    write_predictions(sloppy, preds)
    capsys.readouterr()

    assert main(["eval", "--dataset", out, "--predictions", preds]) == 0
    strict_row = next(
        line for line in capsys.readouterr().out.splitlines() if line.startswith("accuracy")
    )
    assert "100.0" not in strict_row
    assert "0.0" in strict_row

    assert main(["eval", "--dataset", out, "--predictions", preds, "--lenient"]) == 0
    lenient_out = capsys.readouterr().out
    assert "100.0" in lenient_out


def test_eval_predictions_directory_and_report(tmp_path, capsys):
    out = run_gen(tmp_path)
    samples = read_dataset(out)
    pred_dir = tmp_path / "preds"
    pred_dir.mkdir()
    for s in samples:
        (pred_dir / f"{s.sample_id}.txt").write_text(format_timeline(s.output_timeline))
    report_dir = str(tmp_path / "report")
    code = main(
        ["eval", "--dataset", out, "--predictions", str(pred_dir), "--report", report_dir]
    )
    assert code == 0
    assert sorted(os.listdir(report_dir)) == ["report.csv", "report.json", "report.png"]
    with open(os.path.join(report_dir, "report.json"), encoding="utf-8") as fh:
        assert json.load(fh)["overall"] == 1.0


def test_eval_unknown_prediction_id(tmp_path, capsys):
    out = run_gen(tmp_path, per_task="1")
    preds = str(tmp_path / "preds.jsonl")
    write_predictions({"ghost": "{}"}, preds)
    assert main(["eval", "--dataset", out, "--predictions", preds]) == 1
    assert "error:" in capsys.readouterr().err


def test_route_sim_prints_reference_average(capsys):
    assert main(["route-sim", "--trials", "0"]) == 0
    stdout = capsys.readouterr().out
    lines = stdout.splitlines()
    assert lines[-1].split() == ["average", "79.2"]
    assert "simulated" not in lines[0]


def test_route_sim_with_trials_and_report(tmp_path, capsys):
    report_dir = str(tmp_path / "routing")
    code = main(["--seed", "9", "route-sim", "--trials", "5000", "--report", report_dir])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "simulated" in stdout.splitlines()[0]
    assert sorted(os.listdir(report_dir)) == ["routing.csv", "routing.json", "routing.png"]


def test_route_sim_custom_spec(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(
        json.dumps({"accuracy": [[0.5] * 8] * 8, "routing": [[0.125] * 8] * 8})
    )
    assert main(["route-sim", "--spec", str(spec), "--trials", "0"]) == 0
    assert "50.0" in capsys.readouterr().out


def test_route_sim_missing_spec(capsys):
    assert main(["route-sim", "--spec", "absent.json"]) == 1
    assert "error:" in capsys.readouterr().err


def test_templates_env_override(tmp_path, monkeypatch, capsys):
    bundled = os.path.join(
        os.path.dirname(assembly_bench.service.__file__), "data", "templates.json"
    )
    copy = tmp_path / "templates.json"
    shutil.copyfile(bundled, copy)
    monkeypatch.setenv("ASSEMBLY_BENCH_TEMPLATES", str(copy))
    out = str(tmp_path / "d.jsonl")
    assert main(["--quiet", "gen", "--out", out, "--per-task", "1"]) == 0

    monkeypatch.setenv("ASSEMBLY_BENCH_TEMPLATES", str(tmp_path / "absent.json"))
    assert main(["--quiet", "gen", "--out", out, "--per-task", "1"]) == 1
    assert "error:" in capsys.readouterr().err


def test_templates_flag_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ASSEMBLY_BENCH_TEMPLATES", str(tmp_path / "absent.json"))
    bundled = os.path.join(
        os.path.dirname(assembly_bench.service.__file__), "data", "templates.json"
    )
    out = str(tmp_path / "d.jsonl")
    code = main(["--quiet", "--templates", bundled, "gen", "--out", out, "--per-task", "1"])
    assert code == 0


def test_serve_wiring(monkeypatch):
    calls = {}

    def fake_run_server(host, port, manifest, templates):
        calls["host"] = host
        calls["port"] = port

    monkeypatch.setattr(assembly_bench.service, "run_server", fake_run_server)
    assert main(["serve", "--port", "8123", "--host", "0.0.0.0"]) == 0
    assert calls == {"host": "0.0.0.0", "port": 8123}


def test_console_script_help():
    result = subprocess.run(
        [sys.executable, "-m", "assembly_bench.cli", "--help"],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0
    assert "usage: assembly-bench" in result.stdout
