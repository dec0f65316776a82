import csv
import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import tiny_config, tiny_records

from fndfusion import (
    SyntheticSpec,
    build_model,
    evaluate,
    export_features,
    format_comparison_table,
    format_metrics_table,
    generate_synthetic,
    make_batch,
    metrics_from_counts,
    sample_report,
    similarity_bins,
)
from fndfusion.errors import ConfigError


class TestMetricsFromCounts:
    def test_all_correct(self):
        rep = metrics_from_counts(tp=4, fp=0, fn=0, tn=6)
        assert rep.accuracy == 1.0
        assert rep.fake.f1 == 1.0
        assert rep.real.f1 == 1.0

    def test_degenerate_all_real_predictor(self):
        # 7 real, 3 fake, everything predicted real
        rep = metrics_from_counts(tp=0, fp=0, fn=3, tn=7)
        assert rep.accuracy == pytest.approx(0.7)
        assert rep.fake.recall == 0.0
        assert rep.fake.precision is None  # zero denominator -> null, not 0
        assert rep.fake.f1 is None
        assert any("undefined" in note for note in rep.notes)

    def test_null_serializes_as_json_null(self):
        rep = metrics_from_counts(tp=0, fp=0, fn=3, tn=7)
        data = json.loads(rep.to_json())
        assert data["fake"]["precision"] is None

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 200), st.integers(0, 200), st.integers(0, 200),
           st.integers(0, 200))
    def test_internal_consistency(self, tp, fp, fn, tn):
        if tp + fp + fn + tn == 0:
            return
        rep = metrics_from_counts(tp=tp, fp=fp, fn=fn, tn=tn)
        assert rep.accuracy == pytest.approx((tp + tn) / (tp + fp + fn + tn))
        for cls in (rep.fake, rep.real):
            if cls.f1 is not None:
                assert cls.f1 == pytest.approx(
                    2 * cls.precision * cls.recall / (cls.precision + cls.recall))
        if rep.fake.precision is not None:
            assert rep.fake.precision == pytest.approx(tp / (tp + fp))
        if rep.real.recall is not None:
            assert rep.real.recall == pytest.approx(tn / (tn + fp))


class TestEvaluate:
    def test_counts_match_independent_tally(self, records16):
        model = build_model(tiny_config(seed=2))
        rep = evaluate(model, records16)
        # independent per-sample tally with a direct forward pass
        trace = model.forward(make_batch(records16), train=False)
        preds = trace.logits.argmax(axis=1)
        tally = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
        for pred, rec in zip(preds, records16):
            key = {(1, 1): "tp", (1, 0): "fp", (0, 1): "fn", (0, 0): "tn"}[(pred, rec.label)]
            tally[key] += 1
        assert (rep.tp, rep.fp, rep.fn, rep.tn) == (
            tally["tp"], tally["fp"], tally["fn"], tally["tn"])

    def test_order_invariant(self, records16):
        model = build_model(tiny_config(seed=3))
        forward = evaluate(model, records16)
        backward = evaluate(model, list(reversed(records16)))
        assert forward.accuracy == backward.accuracy
        assert (forward.tp, forward.fp) == (backward.tp, backward.fp)

    def test_empty_corpus(self):
        model = build_model(tiny_config())
        with pytest.raises(ConfigError):
            evaluate(model, [])

    def test_table_renders_nulls_as_dash(self):
        rep = metrics_from_counts(tp=0, fp=0, fn=3, tn=7)
        table = format_metrics_table(rep, label="degenerate")
        line = table.splitlines()[2]
        assert "-" in line
        assert "0.700" in line

    def test_comparison_table_has_all_rows(self):
        reps = {f"v{i}": metrics_from_counts(tp=3, fp=1, fn=2, tn=4) for i in range(3)}
        table = format_comparison_table(reps)
        assert len(table.strip().splitlines()) == 2 + 3


class TestSimilarityBins:
    def gate_corpus(self, fake=1.0, real=0.0, n=150, sigma=0.0):
        return generate_synthetic(SyntheticSpec(
            n_real=n, n_fake=n, n_bert=4, n_resnet=4, n_clip=16, seed=21,
            mismatch_prob_fake=fake, mismatch_prob_real=real, noise_sigma=sigma))

    def test_extreme_mismatch_pattern(self):
        report = similarity_bins(self.gate_corpus(), bin_count=10)
        top = next(r for r in reversed(report.real_rates) if r is not None)
        bottom = next(r for r in report.real_rates if r is not None)
        assert top == pytest.approx(1.0)
        assert bottom == pytest.approx(0.0, abs=0.05)

    def test_bin_count_floor(self):
        with pytest.raises(ConfigError):
            similarity_bins(self.gate_corpus(n=10), bin_count=1)

    def test_weighted_deviations_sum_to_zero(self):
        report = similarity_bins(self.gate_corpus(fake=0.7, real=0.2, sigma=0.4),
                                 bin_count=8)
        total = sum(c * d for c, d in zip(report.counts, report.deviations)
                    if d is not None)
        assert abs(total) < 1e-12

    def test_assignment_exhaustive(self):
        corpus = self.gate_corpus(fake=0.5, real=0.5, sigma=0.6, n=80)
        report = similarity_bins(corpus, bin_count=7)
        assert sum(report.counts) == len(corpus)

    def test_single_class_flagged(self):
        corpus = [r for r in self.gate_corpus(n=40) if r.label == 0]
        report = similarity_bins(corpus, bin_count=4)
        assert report.single_class
        assert report.average_real_rate == 1.0

    def test_gated_scores_with_model(self):
        corpus = self.gate_corpus(n=60)
        model = build_model(tiny_config(n_bert=4, n_resnet=4, n_clip=16))
        report = similarity_bins(corpus, model=model, bin_count=5)
        assert report.score_kind == "gated"
        assert all(0.0 <= e <= 1.0 for e in report.edges)

    def test_csv_roundtrip(self, tmp_path):
        report = similarity_bins(self.gate_corpus(n=50), bin_count=5)
        path = tmp_path / "bins.csv"
        report.save_csv(path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["bin_lo", "bin_hi", "count", "real_rate", "deviation"]
        assert len(rows) == 6


class TestSampleReport:
    def test_fields_match_trace(self, records16):
        model = build_model(tiny_config(seed=4))
        ids = [records16[3].id, records16[7].id]
        reports = sample_report(model, records16, ids)
        trace = model.forward(make_batch(records16), train=False)
        assert reports[0].id == ids[0]
        assert reports[0].fields["sim"] == pytest.approx(float(trace.sim[3]), abs=1e-12)
        assert reports[0].fields["gate"] == pytest.approx(float(trace.gate[3]), abs=1e-12)
        assert reports[0].fields["att_txt"] == pytest.approx(float(trace.att[3, 0]), abs=1e-12)

    def test_variant_without_fusion_omits_att_mix(self, records16):
        model = build_model(tiny_config(variant="no_fusion", seed=5))
        rep = sample_report(model, records16, [records16[0].id])[0]
        assert "att_mix" not in rep.fields  # absent, not zero
        assert "att_txt" in rep.fields
        assert "gate" not in rep.fields

    def test_repeatable(self, records16):
        model = build_model(tiny_config(seed=6))
        a = sample_report(model, records16, [records16[1].id])
        b = sample_report(model, records16, [records16[1].id])
        assert a[0].to_dict() == b[0].to_dict()

    def test_unknown_id(self, records16):
        model = build_model(tiny_config(seed=7))
        with pytest.raises(KeyError):
            sample_report(model, records16, ["nope"])


class TestExportFeatures:
    def test_aggregated_shape(self, tmp_path, records16):
        model = build_model(tiny_config(seed=8))
        path = tmp_path / "feat.csv"
        export_features(model, records16[:5], "aggregated", path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 6  # header + 5
        assert len(rows[0]) == 2 + model.config.proj_out

    def test_values_match_trace(self, tmp_path, records16):
        model = build_model(tiny_config(seed=9))
        path = tmp_path / "feat.csv"
        export_features(model, records16, "aggregated", path)
        trace = model.forward(make_batch(records16), train=False)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        got = np.array([[float(v) for v in row[2:]] for row in rows[1:]])
        assert np.array_equal(got, trace.m_agg)  # repr round-trips float64

    def test_projected_stage_columns(self, tmp_path, records16):
        model = build_model(tiny_config(seed=10))
        path = tmp_path / "proj.csv"
        export_features(model, records16, "projected", path)
        with open(path) as fh:
            header = next(csv.reader(fh))
        L = model.config.proj_out
        assert len(header) == 2 + 3 * L
        assert header[2].startswith("m_txt_")

    def test_deterministic_export(self, tmp_path, records16):
        model = build_model(tiny_config(seed=11))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_features(model, records16, "aggregated", p1)
        export_features(model, records16, "aggregated", p2)
        assert p1.read_bytes() == p2.read_bytes()
