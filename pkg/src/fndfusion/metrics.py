"""Classification metrics, similarity-bin statistics, and feature export.

Metrics with a zero denominator are reported as None (JSON null, "-" in the
rendered table), never as zero.  Confusion counts treat the fake class
(label 1) as positive: TP = fake predicted fake, TN = real predicted real.
"""

import csv
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DimensionError
from .model import make_batch
from .nn import sigmoid_forward

_EVAL_CHUNK = 512


@dataclass
class ClassMetrics:
    precision: Optional[float]
    recall: Optional[float]
    f1: Optional[float]


@dataclass
class MetricsReport:
    accuracy: float
    fake: ClassMetrics
    real: ClassMetrics
    tp: int
    fp: int
    fn: int
    tn: int
    total: int
    corpus_id: str = ""
    variant: str = ""
    seed: Optional[int] = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def _ratio(num, den):
    return num / den if den > 0 else None


def _f1(precision, recall):
    if precision is None or recall is None or precision + recall == 0.0:
        return None
    return 2.0 * precision * recall / (precision + recall)


def metrics_from_counts(tp, fp, fn, tn, **meta):
    total = tp + fp + fn + tn
    if total == 0:
        raise ConfigError("cannot compute metrics over zero samples")
    fake_p = _ratio(tp, tp + fp)
    fake_r = _ratio(tp, tp + fn)
    real_p = _ratio(tn, tn + fn)
    real_r = _ratio(tn, tn + fp)
    notes = []
    for name, value in (("fake precision", fake_p), ("fake recall", fake_r),
                        ("real precision", real_p), ("real recall", real_r)):
        if value is None:
            notes.append(f"{name} undefined (zero denominator)")
    return MetricsReport(
        accuracy=(tp + tn) / total,
        fake=ClassMetrics(fake_p, fake_r, _f1(fake_p, fake_r)),
        real=ClassMetrics(real_p, real_r, _f1(real_p, real_r)),
        tp=tp, fp=fp, fn=fn, tn=tn, total=total, notes=notes, **meta)


def predict(model, records):
    """Eval-mode argmax labels for a record list."""
    preds = np.empty(len(records), dtype=np.intp)
    for lo in range(0, len(records), _EVAL_CHUNK):
        batch = make_batch(records[lo:lo + _EVAL_CHUNK])
        trace = model.forward(batch, train=False)
        preds[lo:lo + len(batch)] = trace.logits.argmax(axis=1)
    return preds


def evaluate(model, records, corpus_id=""):
    """Full-corpus eval-mode metrics with exact confusion counts."""
    records = list(records)
    if not records:
        raise ConfigError("cannot evaluate an empty corpus")
    preds = predict(model, records)
    labels = np.array([r.label for r in records], dtype=np.intp)
    tp = int(((preds == 1) & (labels == 1)).sum())
    fp = int(((preds == 1) & (labels == 0)).sum())
    fn = int(((preds == 0) & (labels == 1)).sum())
    tn = int(((preds == 0) & (labels == 0)).sum())
    return metrics_from_counts(tp, fp, fn, tn, corpus_id=corpus_id,
                               variant=model.config.variant, seed=model.config.seed)


def _fmt(value, width=9):
    return f"{value:>{width}.3f}" if value is not None else f"{'-':>{width}}"


_TABLE_COLUMNS = ("Accuracy", "FakeP", "FakeR", "FakeF1", "RealP", "RealR", "RealF1")


def _metric_row(report):
    return (report.accuracy,
            report.fake.precision, report.fake.recall, report.fake.f1,
            report.real.precision, report.real.recall, report.real.f1)


def format_metrics_table(report, label="model"):
    return format_comparison_table({label: report})


def format_comparison_table(reports):
    """Monospace table: one row per entry, per-class P/R/F1 columns."""
    name_w = max(len("Method"), *(len(k) for k in reports)) + 2
    header = f"{'Method':<{name_w}}" + "".join(f"{c:>9}" for c in _TABLE_COLUMNS)
    lines = [header, "-" * len(header)]
    for name, rep in reports.items():
        cells = "".join(_fmt(v) for v in _metric_row(rep))
        lines.append(f"{name:<{name_w}}{cells}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# similarity bins

@dataclass
class SimilarityBinReport:
    edges: list                 # bin_count + 1 boundaries, left-closed/right-open
    counts: list
    real_rates: list            # None for empty bins
    deviations: list            # rate - average, None for empty bins
    average_real_rate: float
    score_kind: str             # "cosine" or "gated"
    single_class: bool

    def to_dict(self):
        return asdict(self)

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def save_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_lo", "bin_hi", "count", "real_rate", "deviation"])
            for i, count in enumerate(self.counts):
                w.writerow([repr(self.edges[i]), repr(self.edges[i + 1]), count,
                            "" if self.real_rates[i] is None else repr(self.real_rates[i]),
                            "" if self.deviations[i] is None else repr(self.deviations[i])])


def similarity_scores(records, model=None):
    """Per-record similarity: raw cosine, or the model's frozen gate value."""
    batch = make_batch(records)
    dots = np.sum(batch.f_clip_t * batch.f_clip_i, axis=1)
    norms = np.linalg.norm(batch.f_clip_t, axis=1) * np.linalg.norm(batch.f_clip_i, axis=1)
    if (norms == 0.0).any():
        raise DimensionError("zero CLIP vector; similarity undefined")
    sims = np.clip(dots / norms, -1.0, 1.0)
    if model is None or model.gate is None:
        return sims, "cosine"
    g = model.gate
    z = (sims - g.running_mean[0]) / np.sqrt(g.running_var[0] + g.eps)
    return sigmoid_forward(z), "gated"


def similarity_bins(records, model=None, bin_count=10):
    """Equal-width bins over the observed similarity range.

    Assignment is left-closed/right-open with the last bin closed, so every
    sample lands in exactly one bin.
    """
    if bin_count < 2:
        raise ConfigError(f"bin_count must be >= 2, got {bin_count}")
    records = list(records)
    if not records:
        raise ConfigError("cannot bin an empty corpus")
    scores, kind = similarity_scores(records, model)
    labels = np.array([r.label for r in records], dtype=np.intp)

    lo, hi = float(scores.min()), float(scores.max())
    if hi == lo:
        hi = lo + 1.0  # degenerate range: everything lands in the first bin
    width = (hi - lo) / bin_count
    idx = np.minimum(((scores - lo) / width).astype(np.intp), bin_count - 1)

    counts, rates, devs = [], [], []
    average = float((labels == 0).mean())
    for b in range(bin_count):
        mask = idx == b
        c = int(mask.sum())
        counts.append(c)
        if c == 0:
            rates.append(None)
            devs.append(None)
        else:
            rate = float((labels[mask] == 0).mean())
            rates.append(rate)
            devs.append(rate - average)
    edges = [lo + width * i for i in range(bin_count)] + [hi]
    return SimilarityBinReport(edges=edges, counts=counts, real_rates=rates,
                               deviations=devs, average_real_rate=average,
                               score_kind=kind, single_class=len(set(labels)) < 2)


# ---------------------------------------------------------------------------
# per-sample reports and feature export

@dataclass
class SampleReport:
    id: str
    predicted_label: int
    fields: dict  # sim/gate/att_* when the active variant produces them

    def to_dict(self):
        out = {"id": self.id, "predicted_label": self.predicted_label}
        out.update(self.fields)
        return out


def sample_report(model, records, ids):
    """Trace fields for the requested record ids (order preserved)."""
    index = {r.id: i for i, r in enumerate(records)}
    missing = [i for i in ids if i not in index]
    if missing:
        raise KeyError(f"unknown record ids: {missing}")
    picked = [records[index[i]] for i in ids]
    trace = model.forward(make_batch(picked), train=False)
    reports = []
    for row, rec_id in enumerate(ids):
        s = trace.sample(row)
        pred = int(np.argmax(s.pop("logits")))
        s.pop("id")
        reports.append(SampleReport(id=rec_id, predicted_label=pred, fields=s))
    return reports


def export_features(model, records, stage, path):
    """CSV of pre-classifier features: id, label, then the feature columns."""
    if stage not in ("aggregated", "projected"):
        raise ConfigError(f'stage must be "aggregated" or "projected", got {stage!r}')
    records = list(records)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = None
        for lo in range(0, len(records), _EVAL_CHUNK):
            chunk = records[lo:lo + _EVAL_CHUNK]
            batch = make_batch(chunk)
            trace = model.forward(batch, train=False)
            if stage == "aggregated":
                blocks = [("agg", trace.m_agg)]
            else:
                blocks = [(n, m) for n, m in
                          (("txt", trace.m_txt), ("img", trace.m_img), ("mix", trace.m_mix))
                          if m is not None]
            if header is None:
                header = ["id", "label"]
                for name, m in blocks:
                    header += [f"m_{name}_{j:03d}" for j in range(m.shape[1])]
                w.writerow(header)
            for row, rec in enumerate(chunk):
                values = [rec.id, rec.label]
                for _, m in blocks:
                    values += [repr(float(v)) for v in m[row]]
                w.writerow(values)
    return path
