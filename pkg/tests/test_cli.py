import json

import pytest

from calf.cli import main
from calf.synth import SynthSpec, generate


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("clicorpus")
    generate(SynthSpec(count=24, width=32, height=32, roi_fraction=0.75, seed=13), out)
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_usage_error_exit_code(capsys):
    code, _, err = run(capsys, "analyze")  # missing manifest argument
    assert code == 1
    code, _, err = run(capsys, "bogus-command")
    assert code == 1


def test_analyze_text_output(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "manifest.jsonl"))
    assert code == 0
    assert "selected_loss:" in out
    assert "skewness:" in out
    assert "24 (18 ROI-present)" in out


def test_analyze_json_roundtrip(capsys, corpus_dir):
    code, out, _ = run(capsys, "analyze", str(corpus_dir / "manifest.jsonl"), "--format", "json")
    assert code == 0
    payload = json.loads(out)
    assert payload["n_samples"] == 24
    assert json.loads(json.dumps(payload)) == payload


def test_analyze_missing_manifest_is_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "analyze", str(tmp_path / "missing.jsonl"))
    assert code == 2
    assert "manifest" in err


def test_analyze_empty_manifest_reports_empty_sample(capsys, tmp_path):
    manifest = tmp_path / "empty.jsonl"
    manifest.write_text("")
    code, _, err = run(capsys, "analyze", str(manifest))
    assert code == 2
    assert "empty area sample" in err


def test_analyze_force_loss(capsys, corpus_dir):
    code, out, _ = run(
        capsys, "analyze", str(corpus_dir / "manifest.jsonl"), "--force-loss", "focal"
    )
    assert code == 0
    assert "focal" in out and "(forced)" in out


def test_gen_then_analyze_selects_regime(capsys, tmp_path):
    out_dir = tmp_path / "fisher"
    code, out, _ = run(
        capsys, "gen", "--out-dir", str(out_dir), "--count", "40", "--width", "48",
        "--height", "48", "--roi-fraction", "0.9", "--regime", "fisher", "--seed", "3",
    )
    assert code == 0
    assert (out_dir / "manifest.jsonl").exists()
    code, out, _ = run(capsys, "analyze", str(out_dir / "manifest.jsonl"))
    assert code == 0
    assert "selected_loss:   fisher" in out


def test_gen_numeric_failure_is_exit_3(capsys, tmp_path):
    code, _, err = run(
        capsys, "gen", "--out-dir", str(tmp_path / "x"), "--count", "30",
        "--roi-fraction", "0", "--regime", "fisher",
    )
    assert code == 3
    assert "attempts" in err


def test_train_eval_pipeline(capsys, corpus_dir, tmp_path):
    model_path = tmp_path / "model.json"
    history_path = tmp_path / "history.json"
    code, out, _ = run(
        capsys, "train", str(corpus_dir / "manifest.jsonl"), "--loss", "auto",
        "--no-ratio", "--epochs", "5", "--seed", "7",
        "--model-out", str(model_path), "--history-out", str(history_path),
    )
    assert code == 0
    assert "selected_loss:" in out
    model = json.loads(model_path.read_text())
    assert model["feature_version"] == 1
    assert len(model["weights"]) == 4
    history = json.loads(history_path.read_text())
    assert len(history["epoch_losses"]) == 5

    code, out, _ = run(
        capsys, "eval", str(corpus_dir / "manifest.jsonl"), "--model", str(model_path),
        "--format", "json",
    )
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == 25  # 24 per-image records + aggregate
    records = [json.loads(line) for line in lines]
    assert records[-1]["id"] == "aggregate"
    for rec in records:
        assert 0.0 <= rec["dsc"] <= 1.0


def test_eval_text_table(capsys, corpus_dir, tmp_path):
    model_path = tmp_path / "model.json"
    model_path.write_text(json.dumps({"weights": [0, 0, 0, 0], "feature_version": 1}))
    code, out, _ = run(
        capsys, "eval", str(corpus_dir / "manifest.jsonl"), "--model", str(model_path)
    )
    assert code == 0
    header = out.splitlines()[0]
    for col in ("Accuracy", "DSC", "Specificity", "Sensitivity", "Precision", "MAE"):
        assert col in header
    assert "aggregate" in out


def test_train_ratio_default_applies(capsys, corpus_dir, tmp_path):
    code, out, _ = run(
        capsys, "train", str(corpus_dir / "manifest.jsonl"), "--loss", "bce",
        "--epochs", "1", "--ratio", "0.5", "--format", "json",
    )
    assert code == 0
    assert json.loads(out)["n_train"] == 12


def test_bench_table_schema(capsys, corpus_dir):
    code, out, _ = run(
        capsys, "bench", str(corpus_dir / "manifest.jsonl"),
        "--ratios", "0.5", "--losses", "bce,calf", "--epochs", "2",
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "ratio 0.5"
    header = lines[1].split()
    assert header == ["Loss", "Accuracy", "DSC", "Specificity", "Sensitivity", "Precision", "MAE"]
    assert lines[2].startswith("BCE")
    assert lines[3].startswith("CALF")


def test_bench_json_deterministic(capsys, corpus_dir):
    args = (
        "bench", str(corpus_dir / "manifest.jsonl"), "--ratios", "0.5",
        "--losses", "bce", "--epochs", "2", "--seed", "11", "--format", "json",
    )
    code1, out1, _ = run(capsys, *args)
    code2, out2, _ = run(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2


def test_bench_skipped_rows(capsys, tmp_path):
    out_dir = tmp_path / "allpresent"
    run(capsys, "gen", "--out-dir", str(out_dir), "--count", "20", "--roi-fraction", "1.0",
        "--width", "32", "--height", "32")
    code, out, _ = run(
        capsys, "bench", str(out_dir / "manifest.jsonl"), "--ratios", "0.5",
        "--losses", "bce", "--epochs", "1",
    )
    assert code == 0
    assert "skipped" in out and "cannot achieve ratio" in out


def test_output_to_file(capsys, corpus_dir, tmp_path):
    out_file = tmp_path / "analysis.json"
    code, out, _ = run(
        capsys, "analyze", str(corpus_dir / "manifest.jsonl"), "--format", "json",
        "--out", str(out_file),
    )
    assert code == 0
    assert out == ""
    assert json.loads(out_file.read_text())["n_samples"] == 24
