import json

import numpy as np
import pytest
from PIL import Image

from cbir.cli import (
    EXIT_FORMAT,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    discover_corpus,
    main,
)
from cbir.index import load_index
from cbir.synthetic import COREL_LIKE_CLASSES, generate_corpus_files


@pytest.fixture()
def small_corpus(tmp_path):
    root = tmp_path / "corpus"
    generate_corpus_files(root, per_class=2, seed=7, classes=COREL_LIKE_CLASSES[:3])
    return root


@pytest.fixture()
def small_index(tmp_path, small_corpus):
    out = tmp_path / "small.cbiridx"
    code = main(["index", "--data", str(small_corpus), "--out", str(out), "--workers", "1"])
    assert code == EXIT_OK
    return out


class TestDiscovery:
    def test_folder_layout_labels(self, small_corpus):
        entries = discover_corpus(small_corpus, "folders")
        assert len(entries) == 6
        assert {e.label for e in entries} == {"disk-red", "disk-green", "disk-blue"}
        rels = [e.rel_path for e in entries]
        assert rels == sorted(rels)

    def test_corel_layout_labels(self, tmp_path):
        root = tmp_path / "flat"
        root.mkdir()
        px = np.zeros((8, 8, 3), dtype=np.uint8)
        for n in (0, 5, 99, 100, 250, 999):
            Image.fromarray(px).save(root / f"{n}.png")
        (root / "notes.txt").write_text("ignored")
        entries = discover_corpus(root, "corel")
        labels = {e.rel_path: e.label for e in entries}
        assert labels == {
            "0.png": "0",
            "5.png": "0",
            "99.png": "0",
            "100.png": "1",
            "250.png": "2",
            "999.png": "9",
        }

    def test_ids_are_dense_and_ordered(self, small_corpus):
        entries = discover_corpus(small_corpus, "folders")
        assert [e.id for e in entries] == list(range(len(entries)))


class TestIndexCommand:
    def test_index_writes_file(self, small_corpus, tmp_path, capsys):
        out = tmp_path / "idx.cbiridx"
        code = main(["index", "--data", str(small_corpus), "--out", str(out), "--workers", "1"])
        assert code == EXIT_OK
        captured = capsys.readouterr()
        assert "indexed 6 images" in captured.out
        index = load_index(out)
        assert len(index) == 6
        assert index.mode == "MINMAX"

    def test_raw_mode_flag(self, small_corpus, tmp_path):
        out = tmp_path / "raw.cbiridx"
        code = main(
            ["index", "--data", str(small_corpus), "--out", str(out), "--mode", "raw", "--workers", "1"]
        )
        assert code == EXIT_OK
        assert load_index(out).mode == "RAW"

    def test_parallel_workers(self, small_corpus, tmp_path):
        out = tmp_path / "par.cbiridx"
        code = main(["index", "--data", str(small_corpus), "--out", str(out), "--workers", "2"])
        assert code == EXIT_OK
        assert len(load_index(out)) == 6

    def test_empty_folder_fails(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main(["index", "--data", str(empty), "--out", str(tmp_path / "x"), "--workers", "1"])
        assert code == EXIT_RUNTIME
        assert "no images found" in capsys.readouterr().err

    def test_corrupt_file_skipped_with_warning(self, small_corpus, tmp_path, capsys):
        bad = small_corpus / "disk-red" / "bad.png"
        bad.write_bytes(b"this is not a png")
        out = tmp_path / "skip.cbiridx"
        code = main(["index", "--data", str(small_corpus), "--out", str(out), "--workers", "1"])
        assert code == EXIT_OK
        err = capsys.readouterr().err
        assert "disk-red/bad.png" in err
        assert "skipped 1" in err
        assert len(load_index(out)) == 6

    def test_unwritable_output_fails(self, small_corpus, tmp_path, capsys):
        code = main(
            ["index", "--data", str(small_corpus), "--out", str(tmp_path / "nodir" / "x.idx"), "--workers", "1"]
        )
        assert code == EXIT_RUNTIME


class TestQueryCommand:
    def test_self_match_top1(self, small_corpus, small_index, capsys):
        image = sorted((small_corpus / "disk-red").glob("*.png"))[0]
        code = main(
            ["query", "--index", str(small_index), "--image", str(image), "--top", "1"]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        lines = [ln for ln in out.strip().split("\n") if ln]
        assert len(lines) == 2  # header + 1 hit
        assert "0.000000" in lines[1]

    def test_json_format(self, small_corpus, small_index, capsys):
        image = sorted((small_corpus / "disk-blue").glob("*.png"))[0]
        code = main(
            [
                "query", "--index", str(small_index), "--image", str(image),
                "--top", "3", "--format", "json",
            ]
        )
        assert code == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["k"] == 3
        assert len(doc["entries"]) == 3
        first = doc["entries"][0]
        assert set(first) == {"id", "label", "path", "distance", "segments"}
        assert set(first["segments"]) == {"histogram", "moments", "hu"}
        # Stored descriptors round-trip at 9 significant digits, so the
        # self-match lands within the contract's 1e-6 rather than exactly 0.
        assert first["distance"] == pytest.approx(0.0, abs=1e-6)

    def test_exclude_self(self, small_corpus, small_index, capsys):
        image = sorted((small_corpus / "disk-green").glob("*.png"))[0]
        code = main(
            [
                "query", "--index", str(small_index), "--image", str(image),
                "--top", "1", "--format", "json", "--exclude-self",
            ]
        )
        assert code == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc["entries"][0]["distance"] > 0

    def test_top_zero_is_usage_error(self, small_index, small_corpus):
        image = next((small_corpus / "disk-red").glob("*.png"))
        code = main(
            ["query", "--index", str(small_index), "--image", str(image), "--top", "0"]
        )
        assert code == EXIT_USAGE

    def test_missing_image_fails(self, small_index, tmp_path):
        code = main(
            ["query", "--index", str(small_index), "--image", str(tmp_path / "nope.png")]
        )
        assert code == EXIT_RUNTIME

    def test_missing_index_fails(self, tmp_path, small_corpus):
        image = next((small_corpus / "disk-red").glob("*.png"))
        code = main(
            ["query", "--index", str(tmp_path / "absent.idx"), "--image", str(image)]
        )
        assert code == EXIT_RUNTIME

    def test_malformed_index_is_format_error(self, tmp_path, small_corpus):
        bad = tmp_path / "bad.idx"
        bad.write_text("GARBAGE\n")
        image = next((small_corpus / "disk-red").glob("*.png"))
        code = main(["query", "--index", str(bad), "--image", str(image)])
        assert code == EXIT_FORMAT


class TestEvalCommand:
    def test_writes_csv_and_prints_means(self, small_index, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main(
            ["eval", "--index", str(small_index), "--top", "2", "--out", str(out)]
        )
        assert code == EXIT_OK
        assert "mean precision" in capsys.readouterr().out
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "class,precision,recall"
        assert len(lines) == 5  # 3 classes + mean
        assert lines[-1].startswith("mean,")

    def test_feature_flag(self, small_index, tmp_path):
        out = tmp_path / "hu.csv"
        code = main(
            ["eval", "--index", str(small_index), "--top", "2", "--feature", "hu", "--out", str(out)]
        )
        assert code == EXIT_OK

    def test_one_per_class_queries(self, small_index, tmp_path):
        out = tmp_path / "opc.csv"
        code = main(
            [
                "eval", "--index", str(small_index), "--top", "2",
                "--queries", "one-per-class", "--out", str(out),
            ]
        )
        assert code == EXIT_OK

    def test_top_zero_usage_error(self, small_index, tmp_path):
        code = main(
            ["eval", "--index", str(small_index), "--top", "0", "--out", str(tmp_path / "r.csv")]
        )
        assert code == EXIT_USAGE


class TestBenchCommand:
    def test_repeat_one(self, small_corpus, capsys):
        code = main(["bench", "--data", str(small_corpus), "--repeat", "1"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "variant,mean,median,p95,count"
        assert len(lines) == 3
        exclusive = lines[2].split(",")
        assert exclusive[0] == "exclusive"
        assert float(exclusive[1]) <= 0.32
        assert int(exclusive[4]) == 6

    def test_repeat_zero_usage_error(self, small_corpus):
        code = main(["bench", "--data", str(small_corpus), "--repeat", "0"])
        assert code == EXIT_USAGE


class TestParser:
    def test_unknown_command_exits_64(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == EXIT_USAGE

    def test_bad_flag_value_exits_64(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["query", "--index", "x", "--image", "y", "--top", "abc"])
        assert excinfo.value.code == EXIT_USAGE


class TestWorkerCount:
    def test_env_var_overrides_default(self, monkeypatch):
        from cbir.cli import _worker_count

        monkeypatch.setenv("CBIR_WORKERS", "3")
        assert _worker_count(None) == 3

    def test_flag_beats_env(self, monkeypatch):
        from cbir.cli import _worker_count

        monkeypatch.setenv("CBIR_WORKERS", "3")
        assert _worker_count(7) == 7

    def test_garbage_env_falls_back_to_cores(self, monkeypatch):
        import os

        from cbir.cli import _worker_count

        monkeypatch.setenv("CBIR_WORKERS", "lots")
        assert _worker_count(None) == (os.cpu_count() or 1)
