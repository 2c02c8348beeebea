import json

import pytest

from ptde.cli import main
from ptde.data import read_feature_header
from ptde.metrics import NORMAL_CATEGORIES

TINY = [
    "--dim", "8",
    "--train-theft", "4", "--train-pickup", "2",
    "--train-delivery", "2", "--train-irrelevant", "1",
    "--test-theft", "3", "--test-pickup", "1",
    "--test-delivery", "2", "--test-irrelevant", "1",
]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-data")
    code = main(["synth", "--out-dir", str(root), "--seed", "4", *TINY])
    assert code == 0
    return root / "manifest.json"


@pytest.fixture(scope="module")
def checkpoint(dataset, tmp_path_factory):
    out = tmp_path_factory.mktemp("cli-ckpt") / "model.ckpt"
    code = main([
        "train", "--manifest", str(dataset), "--out-checkpoint", str(out),
        "--epochs", "5", "--pairs-per-epoch", "3", "--seed", "1",
        "--fusion", "global-local",
    ])
    assert code == 0
    return out


class TestSynthCommand:
    def test_prints_manifest_path(self, dataset, capsys):
        # the module fixture already ran; regenerate to capture stdout
        code = main(["synth", "--out-dir", str(dataset.parent), "--seed", "4", *TINY])
        out = capsys.readouterr().out.strip()
        assert code == 0
        assert out.endswith("manifest.json")

    def test_env_seed_fallback(self, tmp_path, monkeypatch):
        a, b = tmp_path / "a", tmp_path / "b"
        monkeypatch.setenv("PTDE_SEED", "21")
        assert main(["synth", "--out-dir", str(a), *TINY]) == 0
        monkeypatch.delenv("PTDE_SEED")
        assert main(["synth", "--out-dir", str(b), "--seed", "21", *TINY]) == 0
        assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    def test_bad_env_seed_is_usage_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("PTDE_SEED", "not-a-number")
        code = main(["synth", "--out-dir", str(tmp_path / "x"), *TINY])
        assert code == 1
        assert "PTDE_SEED" in capsys.readouterr().err


class TestTrainCommand:
    def test_writes_checkpoint_and_log(self, dataset, checkpoint):
        assert checkpoint.is_file()
        log = checkpoint.parent / (checkpoint.name + ".log")
        lines = log.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 5
        assert all(len(line.split("\t")) == 5 for line in lines)

    def test_missing_manifest_exits_2_and_names_path(self, tmp_path, capsys):
        missing = tmp_path / "absent.json"
        code = main([
            "train", "--manifest", str(missing),
            "--out-checkpoint", str(tmp_path / "m.ckpt"), "--epochs", "1",
        ])
        assert code == 2
        assert "absent.json" in capsys.readouterr().err


class TestScoreCommand:
    def test_line_count_matches_segment_arithmetic(self, dataset, checkpoint, capsys):
        manifest = json.loads(dataset.read_text(encoding="utf-8"))
        video = manifest["videos"][0]
        clip_count, _ = read_feature_header(dataset.parent / video["feature_file"])
        expected = (clip_count * manifest["clip_length"]) // manifest["segment_length"]
        code = main([
            "score", "--checkpoint", str(checkpoint),
            "--manifest", str(dataset), "--video-id", video["id"],
        ])
        lines = capsys.readouterr().out.strip().splitlines()
        assert code == 0
        assert len(lines) == expected
        assert all(0.0 < float(line) < 1.0 for line in lines)

    def test_unknown_video_exits_2(self, dataset, checkpoint, capsys):
        code = main([
            "score", "--checkpoint", str(checkpoint),
            "--manifest", str(dataset), "--video-id", "ghost",
        ])
        assert code == 2
        assert "ghost" in capsys.readouterr().err


class TestEvalCommand:
    def test_report_structure(self, dataset, checkpoint, capsys):
        code = main([
            "eval", "--checkpoint", str(checkpoint), "--manifest", str(dataset),
        ])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["threshold"] == 0.2
        assert 0.0 <= report["overall_auc"] <= 1.0
        assert set(report["per_category_auc"]) == set(NORMAL_CATEGORIES)
        assert report["segment_count"] > 0
        detections = report["detections"]
        assert (
            detections["total"]
            == detections["theft_segments"] + detections["normal_segments"]
        )

    def test_threshold_flag(self, dataset, checkpoint, capsys):
        code = main([
            "eval", "--checkpoint", str(checkpoint), "--manifest", str(dataset),
            "--threshold", "0.9",
        ])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["threshold"] == 0.9


class TestRocCommand:
    def test_csv_and_svg(self, dataset, checkpoint, tmp_path, capsys):
        csv = tmp_path / "roc.csv"
        svg = tmp_path / "roc.svg"
        code = main([
            "roc", "--checkpoint", str(checkpoint), "--manifest", str(dataset),
            "--out-csv", str(csv), "--out-svg", str(svg),
        ])
        assert code == 0
        lines = csv.read_text(encoding="utf-8").splitlines()
        assert lines[0] == "threshold,fpr,tpr"
        assert len(lines) > 2
        assert svg.read_text(encoding="utf-8").startswith("<svg")
        assert capsys.readouterr().out.startswith("auc ")

    def test_roc_area_matches_eval_auc(self, dataset, checkpoint, tmp_path, capsys):
        csv = tmp_path / "roc.csv"
        main(["roc", "--checkpoint", str(checkpoint), "--manifest", str(dataset),
              "--out-csv", str(csv)])
        roc_out = capsys.readouterr().out
        main(["eval", "--checkpoint", str(checkpoint), "--manifest", str(dataset)])
        report = json.loads(capsys.readouterr().out)
        area = float(roc_out.split()[1])
        assert abs(area - report["overall_auc"]) < 1e-6


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert capsys.readouterr().err

    def test_missing_required_flag(self, capsys):
        assert main(["train"]) == 1
        assert capsys.readouterr().err

    def test_invalid_flag_value(self, tmp_path, capsys):
        code = main(["synth", "--out-dir", str(tmp_path), "--noise", "0"])
        assert code == 1
        assert "noise" in capsys.readouterr().err

    def test_checkpoint_dataset_dim_mismatch(self, dataset, checkpoint, tmp_path, capsys):
        other = tmp_path / "other"
        assert main([
            "synth", "--out-dir", str(other), "--seed", "4", "--dim", "16",
            *TINY[2:],
        ]) == 0
        code = main([
            "eval", "--checkpoint", str(checkpoint),
            "--manifest", str(other / "manifest.json"),
        ])
        assert code == 2


class TestDeterminism:
    def test_full_pipeline_reproducible(self, tmp_path, capsys):
        reports = []
        for sub in ("r1", "r2"):
            root = tmp_path / sub
            assert main(["synth", "--out-dir", str(root), "--seed", "9", *TINY]) == 0
            ckpt = root / "m.ckpt"
            assert main([
                "train", "--manifest", str(root / "manifest.json"),
                "--out-checkpoint", str(ckpt), "--epochs", "4",
                "--pairs-per-epoch", "2", "--seed", "3",
            ]) == 0
            capsys.readouterr()
            assert main([
                "eval", "--checkpoint", str(ckpt),
                "--manifest", str(root / "manifest.json"),
            ]) == 0
            reports.append(capsys.readouterr().out)
        assert reports[0] == reports[1]
