import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cbir.descriptors import DESCRIPTOR_SIZE, Descriptor
from cbir.evaluation import (
    CSV,
    MARKDOWN,
    UnlabeledRecord,
    evaluate,
    evaluate_ablations,
    precision_at_k,
    recall_at_k,
    render_report,
    render_timing_report,
    benchmark_extraction,
    write_report,
)
from cbir.index import MINMAX, RAW, IndexRecord, from_records


def stub_descriptor(values_by_dim: dict[int, float]) -> Descriptor:
    values = np.zeros(DESCRIPTOR_SIZE)
    for dim, v in values_by_dim.items():
        values[dim] = v
    return Descriptor(values)


def toy_two_class_index():
    """2 classes x 2 images; each image's nearest neighbor is its class-mate."""
    records = [
        IndexRecord(0, "a", "a0.png", stub_descriptor({0: 0.00})),
        IndexRecord(1, "a", "a1.png", stub_descriptor({0: 0.10})),
        IndexRecord(2, "b", "b0.png", stub_descriptor({0: 1.00})),
        IndexRecord(3, "b", "b1.png", stub_descriptor({0: 1.10})),
    ]
    return from_records(records, RAW)


class TestPrecisionRecall:
    def test_all_relevant_top20(self):
        assert precision_at_k(["x"] * 20, "x", 20) == 100.0

    def test_three_of_four(self):
        assert precision_at_k(["A", "A", "B", "A"], "A", 4) == 75.0

    def test_none_relevant(self):
        assert precision_at_k(["B", "C"], "A", 2) == 0.0

    def test_short_list_keeps_k_divisor(self):
        assert precision_at_k(["A"], "A", 4) == 25.0

    def test_recall_top20_class100(self):
        assert recall_at_k(["x"] * 20, "x", 20, 100) == 20.0

    def test_recall_one_of_four(self):
        assert recall_at_k(["A", "B"], "A", 2, 4) == 25.0

    def test_recall_zero(self):
        assert recall_at_k(["B", "B"], "A", 2, 4) == 0.0

    @given(
        st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=40),
        st.integers(1, 40),
        st.integers(1, 60),
    )
    @settings(max_examples=300, deadline=None)
    def test_recall_precision_identity(self, labels, k, class_size):
        # recall = precision * k / class_size whenever k <= list length.
        if k > len(labels):
            return
        p = precision_at_k(labels, "a", k)
        r = recall_at_k(labels, "a", k, class_size)
        assert r == pytest.approx(p * k / class_size, abs=1e-9)


class TestEvaluate:
    def test_toy_corpus_hand_computed(self):
        report = evaluate(toy_two_class_index(), k=2)
        assert report.mean_precision == 100.0
        assert {row.name: row.precision for row in report.rows} == {"a": 100.0, "b": 100.0}
        # k=2 retrieves both class members; class size is 2 -> recall 100.
        assert report.mean_recall == 100.0

    def test_k1_self_match_is_perfect(self, rng):
        records = [
            IndexRecord(i, f"c{i % 4}", f"{i}.png", Descriptor(rng.uniform(0, 1, DESCRIPTOR_SIZE)))
            for i in range(20)
        ]
        report = evaluate(from_records(records, MINMAX), k=1)
        assert report.mean_precision == 100.0

    def test_unlabeled_record_rejected(self):
        records = [
            IndexRecord(0, "", "0.png", stub_descriptor({0: 0.0})),
            IndexRecord(1, "a", "1.png", stub_descriptor({0: 1.0})),
        ]
        with pytest.raises(UnlabeledRecord):
            evaluate(from_records(records, RAW), k=1)

    def test_mean_is_mean_of_class_rows(self, rng):
        records = [
            IndexRecord(i, f"c{i % 3}", f"{i}.png", Descriptor(rng.uniform(0, 1, DESCRIPTOR_SIZE)))
            for i in range(12)
        ]
        report = evaluate(from_records(records, MINMAX), k=4)
        assert report.mean_precision == pytest.approx(
            np.mean([r.precision for r in report.rows]), abs=1e-9
        )
        assert report.mean_recall == pytest.approx(
            np.mean([r.recall for r in report.rows]), abs=1e-9
        )

    def test_fused_equals_sum_of_segment_distances(self, rng):
        # Restricting L1 to all three segments one at a time and summing the
        # distances reproduces the fused ranking input exactly.
        matrix = rng.uniform(0, 1, size=(10, DESCRIPTOR_SIZE))
        from cbir.descriptors import HIST_SLICE, HU_SLICE, MOMENT_SLICE

        q = matrix[0]
        fused = np.abs(matrix - q).sum(axis=1)
        parts = (
            np.abs(matrix[:, HIST_SLICE] - q[HIST_SLICE]).sum(axis=1)
            + np.abs(matrix[:, MOMENT_SLICE] - q[MOMENT_SLICE]).sum(axis=1)
            + np.abs(matrix[:, HU_SLICE] - q[HU_SLICE]).sum(axis=1)
        )
        assert parts == pytest.approx(fused, abs=1e-9)

    def test_single_feature_uses_segment_only(self):
        # Two records identical on the histogram segment but far apart on the
        # moment segment: hist-only evaluation cannot separate them.
        records = [
            IndexRecord(0, "a", "0.png", stub_descriptor({130: 0.0})),
            IndexRecord(1, "b", "1.png", stub_descriptor({130: 1.0})),
            IndexRecord(2, "a", "2.png", stub_descriptor({130: 0.1})),
            IndexRecord(3, "b", "3.png", stub_descriptor({130: 0.9})),
        ]
        index = from_records(records, RAW)
        moments_report = evaluate(index, k=2, feature="moments")
        assert moments_report.mean_precision == 100.0
        hist_report = evaluate(index, k=2, feature="hist")
        # All histogram segments equal: ranking collapses to id order, so the
        # top-2 for every query is records 0 and 1 (labels a, b): 50% each.
        assert hist_report.mean_precision == 50.0

    def test_one_per_class_sampling(self):
        report = evaluate(toy_two_class_index(), k=2, queries="one-per-class")
        assert len(report.rows) == 2
        assert report.mean_precision == 100.0

    def test_exclude_self_convention(self):
        # Without the self-match, each toy query retrieves its class-mate and
        # then the nearest record of the other class: precision@2 drops to 50.
        included = evaluate(toy_two_class_index(), k=2)
        excluded = evaluate(toy_two_class_index(), k=2, include_self=False)
        assert included.include_self is True
        assert excluded.include_self is False
        assert included.mean_precision == 100.0
        assert excluded.mean_precision == 50.0

    def test_ablations_cover_all_features(self):
        reports = evaluate_ablations(toy_two_class_index(), k=2)
        assert set(reports) == {"hist", "moments", "hu", "fused"}


class TestReports:
    def test_csv_shape_and_determinism(self):
        report = evaluate(toy_two_class_index(), k=2)
        text = render_report(report, CSV)
        lines = text.strip().split("\n")
        assert lines[0] == "class,precision,recall"
        assert len(lines) == 4  # 2 class rows + mean
        assert lines[-1].startswith("mean,")
        assert render_report(report, CSV) == text

    def test_empty_rows_header_only(self):
        from cbir.evaluation import EvalReport

        empty = EvalReport(
            k=5, feature="fused", mode=RAW, queries="all", include_self=True,
            rows=(), mean_precision=float("nan"), mean_recall=float("nan"),
        )
        assert render_report(empty, CSV) == "class,precision,recall\n"

    def test_markdown_table(self):
        report = evaluate(toy_two_class_index(), k=2)
        text = render_report(report, MARKDOWN)
        assert text.startswith("| class | precision | recall |")
        assert "| mean |" in text

    def test_write_to_stream(self):
        report = evaluate(toy_two_class_index(), k=2)
        buf = io.StringIO()
        write_report(report, CSV, buf)
        assert buf.getvalue() == render_report(report, CSV)


class TestBenchmark:
    def test_counts_and_ordering(self, tmp_path, rng):
        from PIL import Image

        paths = []
        for i in range(3):
            px = rng.integers(0, 256, size=(64, 96, 3), dtype=np.uint8)
            p = tmp_path / f"{i}.png"
            Image.fromarray(px).save(p)
            paths.append(p)
        report = benchmark_extraction(paths, repeats=2)
        assert report.count == 6
        for stats in (report.inclusive, report.exclusive):
            assert stats.mean > 0
            assert stats.median <= stats.p95
        text = render_timing_report(report)
        lines = text.strip().split("\n")
        assert lines[0] == "variant,mean,median,p95,count"
        assert lines[1].startswith("inclusive,")
        assert lines[2].startswith("exclusive,")
