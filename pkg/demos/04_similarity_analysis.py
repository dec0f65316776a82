"""Inspect the similarity gate: per-sample traces, bins, feature export."""

import io
import tempfile
from pathlib import Path

from fndfusion import (
    FusionConfig,
    SyntheticSpec,
    TrainConfig,
    build_model,
    export_features,
    generate_synthetic,
    sample_report,
    similarity_bins,
    split,
    train,
)

DIMS = dict(n_bert=32, n_resnet=48, n_clip=96)

spec = SyntheticSpec(n_real=500, n_fake=500, class_separation=0.5,
                     mismatch_prob_fake=0.8, mismatch_prob_real=0.1,
                     noise_sigma=1.0, seed=21, **DIMS)
train_recs, test_recs = split(generate_synthetic(spec), 0.7, seed=21)

model = build_model(FusionConfig(seed=4, **DIMS))
tcfg = TrainConfig(epochs=10, batch_size=64, seed=77,
                   eval_split="test", selection="best_eval_accuracy")
train(model, train_recs, test_recs, tcfg, log_stream=io.StringIO())

print("similarity bins over the test split (gated score, 8 bins):")
bins = similarity_bins(test_recs, model=model, bin_count=8)
for i, (count, rate) in enumerate(zip(bins.counts, bins.real_rates)):
    lo, hi = bins.edges[i], bins.edges[i + 1]
    bar = "" if rate is None else "#" * int(rate * 40)
    shown = " n/a " if rate is None else f"{rate:.2f}"
    print(f"  [{lo:.2f}, {hi:.2f})  n={count:4d}  real rate {shown}  {bar}")
print(f"  corpus average real rate: {bins.average_real_rate:.2f}\n")

print("per-sample traces (higher gate -> fused branch contributes more):")
for rep in sample_report(model, test_recs, [r.id for r in test_recs[:5]]):
    f = rep.fields
    print(f"  {rep.id}: predicted={'fake' if rep.predicted_label else 'real'} "
          f"sim={f['sim']:+.3f} gate={f['gate']:.3f} "
          f"att=({f['att_txt']:.2f}, {f['att_img']:.2f}, {f['att_mix']:.2f})")

with tempfile.TemporaryDirectory() as d:
    path = Path(d) / "features.csv"
    export_features(model, test_recs[:50], "aggregated", path)
    lines = path.read_text().splitlines()
    print(f"\nexported {len(lines) - 1} aggregated feature rows "
          f"({len(lines[0].split(',')) - 2} columns each) for external plotting")
