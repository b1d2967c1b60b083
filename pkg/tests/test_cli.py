from __future__ import annotations

import json
from pathlib import Path

import pytest

from evoclust.cli import main


@pytest.fixture()
def blob_csv(tmp_path) -> Path:
    path = tmp_path / "blobs.csv"
    code = main(
        ["gen", "--kind", "fixed_density_blobs", "--n", "300", "--seed", "3", "--out", str(path)]
    )
    assert code == 0
    return path


class TestGen:
    def test_writes_rows_with_label(self, tmp_path):
        out = tmp_path / "rect.csv"
        code = main(["gen", "--kind", "rectangle", "--n", "400", "--seed", "7", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 401
        assert lines[0].split(",")[-1] == "label"

    def test_bad_kind_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["gen", "--kind", "nope", "--n", "10"])
        assert err.value.code == 2

    def test_below_minimum_is_runtime_error(self, capsys):
        assert main(["gen", "--kind", "rectangle", "--n", "4"]) == 1
        assert "at least" in capsys.readouterr().err


class TestCluster:
    def test_labels_and_report(self, blob_csv, tmp_path, capsys):
        out = tmp_path / "labels.csv"
        code = main(
            ["cluster", "--input", str(blob_csv), "--truth", "label", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "cluster"
        assert len(lines) == 301
        report = json.loads(out.with_suffix(".report.json").read_text())
        assert report["config"]["expansion"] == 0.5
        assert "ari" in report and report["ari"] == 1.0
        head = capsys.readouterr().out
        assert "# dataset=" in head and "sha=" in head and "config=" in head

    def test_byte_identical_reruns(self, blob_csv, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert main(
                ["cluster", "--input", str(blob_csv), "--seed", "11", "--out", str(out)]
            ) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_input_runtime_error(self, capsys):
        assert main(["cluster", "--input", "/nonexistent.csv"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_invalid_flag_value_usage_error(self, blob_csv):
        with pytest.raises(SystemExit) as err:
            main(["cluster", "--input", str(blob_csv), "--policy", "maybe"])
        assert err.value.code == 2

    def test_unknown_flag_rejected(self, blob_csv):
        with pytest.raises(SystemExit) as err:
            main(["cluster", "--input", str(blob_csv), "--frobnicate", "1"])
        assert err.value.code == 2

    def test_out_of_range_config_runtime_error(self, blob_csv, capsys):
        assert main(["cluster", "--input", str(blob_csv), "--expansion", "1.5"]) == 1
        assert "expansion" in capsys.readouterr().err


class TestTune:
    def test_writes_jsonl_and_summary(self, blob_csv, tmp_path, capsys):
        out = tmp_path / "trials.jsonl"
        code = main(
            [
                "tune", "--input", str(blob_csv), "--truth", "label",
                "--trials", "5", "--seconds", "60", "--seed", "42", "--out", str(out),
            ]
        )
        assert code == 0
        lines = out.read_text().strip().splitlines()
        assert 1 <= len(lines) <= 5
        first = json.loads(lines[0])
        assert first["trial"] == 1 and first["schema_version"] == 1
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert summary["best_ari"] >= 0.9
        assert "best_ari=" in capsys.readouterr().out


class TestBench:
    def test_smoke(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code = main(
            [
                "bench", "--sizes", "300,600", "--d", "4", "--dims", "4,8",
                "--n", "300", "--index", "exact", "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["n_sweep"]) == 2
        assert len(payload["dim_sweep"]) == 2
        assert "ratio" in capsys.readouterr().out


class TestAblate:
    def test_single_dataset_skips_significance(self, blob_csv, tmp_path, capsys):
        out = tmp_path / "ablate.json"
        code = main(
            [
                "ablate", "--input", str(blob_csv), "--truth", "label",
                "--trials", "2", "--seconds", "30", "--reruns", "1",
                "--arms", "policy_noise", "--out", str(out),
            ]
        )
        assert code == 0
        text = capsys.readouterr().out
        assert "baseline" in text and "policy_noise" in text
        assert "skipped" in text
        payload = json.loads(out.read_text())
        assert payload["results"][blob_csv.stem][0]["arm"] == "baseline"


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0


class TestTunePreparation:
    def test_subsample_cap_applies(self, tmp_path, capsys):
        src = tmp_path / "big.csv"
        main(["gen", "--kind", "circles", "--n", "700", "--seed", "1", "--out", str(src)])
        capsys.readouterr()
        out = tmp_path / "t.jsonl"
        code = main(
            [
                "tune", "--input", str(src), "--truth", "label",
                "--max-n", "200", "--trials", "2", "--seconds", "30", "--out", str(out),
            ]
        )
        assert code == 0
        head = capsys.readouterr().out
        assert "n=200" in head
