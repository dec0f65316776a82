"""Seeded mini-batch training with epoch-level checkpoint selection.

Each epoch draws its shuffle and dropout randomness from a fresh generator
seeded with seed + epoch, so resuming from a last-epoch checkpoint replays
exactly the same stream as an uninterrupted run.
"""

import json
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import CheckpointError, ConfigError, NumericError
from .model import make_batch
from .nn import cross_entropy
from .optim import adam_step
from .synthetic import split

SELECTIONS = ("best_eval_accuracy", "last_epoch")
EVAL_SPLITS = ("held_out_validation", "test")


@dataclass
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 64
    epochs: int = 50
    seed: int = 0
    selection: str = "best_eval_accuracy"
    eval_split: str = "held_out_validation"
    val_fraction: float = 0.1

    def validate(self, allow_zero_epochs=False):
        if self.lr <= 0.0:
            raise ConfigError("lr must be positive")
        if self.batch_size < 2:
            raise ConfigError("batch_size must be >= 2 (batch statistics)")
        if self.epochs < (0 if allow_zero_epochs else 1):
            raise ConfigError("epochs must be >= 1")
        if self.selection not in SELECTIONS:
            raise ConfigError(f"selection must be one of {SELECTIONS}")
        if self.eval_split not in EVAL_SPLITS:
            raise ConfigError(f"eval_split must be one of {EVAL_SPLITS}")
        if not 0.0 < self.val_fraction < 1.0:
            raise ConfigError("val_fraction must be in (0, 1)")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown train config keys: {sorted(extra)}")
        cfg = cls(**d)
        cfg.validate(allow_zero_epochs=True)
        return cfg


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    eval_accuracy: float
    wall_time_s: float


@dataclass
class RunLog:
    entries: list = field(default_factory=list)
    selected_epoch: int = 0
    checkpoint_path: Optional[str] = None

    def losses(self):
        return [e.train_loss for e in self.entries]

    def eval_accuracies(self):
        return [e.eval_accuracy for e in self.entries]

    def to_dict(self):
        return {
            "epochs": [asdict(e) for e in self.entries],
            "selected_epoch": self.selected_epoch,
            "checkpoint_path": self.checkpoint_path,
        }

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2)
            fh.write("\n")


def _first_nonfinite(model, trace, loss):
    """Name the first non-finite tensor for the abort diagnostic."""
    if trace is not None and not np.isfinite(trace.logits).all():
        for name in sorted(model.store.params):
            if not np.isfinite(model.store.params[name].value).all():
                return f"param {name}"
        for name in sorted(model.store.buffers):
            if not np.isfinite(model.store.buffers[name]).all():
                return f"buffer {name}"
        return "logits"
    if loss is not None and not np.isfinite(loss):
        return "loss"
    for name in sorted(model.store.params):
        p = model.store.params[name]
        if not np.isfinite(p.value).all():
            return f"param {name}"
        if not np.isfinite(p.grad).all():
            return f"grad of {name}"
    return "loss"


def eval_accuracy(model, records, chunk=512):
    """Eval-mode accuracy over a record list (order-independent)."""
    if not records:
        raise ConfigError("cannot evaluate on an empty corpus")
    correct = 0
    for lo in range(0, len(records), chunk):
        batch = make_batch(records[lo:lo + chunk])
        trace = model.forward(batch, train=False)
        correct += int((trace.logits.argmax(axis=1) == batch.labels).sum())
    return correct / len(records)


class _Snapshot:
    """Full mutable state of a model: params, Adam moments, buffers."""

    def __init__(self, model):
        self.values = {n: p.value.copy() for n, p in model.store.params.items()}
        self.adam_m = {n: p.adam_m.copy() for n, p in model.store.params.items()}
        self.adam_v = {n: p.adam_v.copy() for n, p in model.store.params.items()}
        self.steps = {n: p.step_count for n, p in model.store.params.items()}
        self.buffers = model.store.snapshot_buffers()

    def restore(self, model):
        for n, p in model.store.params.items():
            p.value[...] = self.values[n]
            p.adam_m[...] = self.adam_m[n]
            p.adam_v[...] = self.adam_v[n]
            p.step_count = self.steps[n]
        model.store.restore_buffers(self.buffers)


def train(model, train_records, eval_records, tcfg, checkpoint_path=None,
          start_epoch=0, log_stream=None):
    """Train in place; returns (checkpoint_path, RunLog).

    eval_records may be None when eval_split="held_out_validation" (the
    eval set is carved from the training records: 10% stratified by
    default).  With eval_split="test" the supplied eval corpus is used for
    the per-epoch accuracy, which also drives best-epoch selection.
    """
    tcfg.validate(allow_zero_epochs=start_epoch > 0)
    train_records = list(train_records)
    if not train_records:
        raise ConfigError("empty training corpus")
    if tcfg.eval_split == "test":
        if not eval_records:
            raise ConfigError('eval_split="test" needs an eval corpus')
        fit_records, sel_records = train_records, list(eval_records)
    else:
        fit_records, sel_records = split(train_records, 1.0 - tcfg.val_fraction, tcfg.seed)

    stream = log_stream if log_stream is not None else sys.stderr
    run = RunLog()
    best = None  # (accuracy, epoch, snapshot)
    n = len(fit_records)

    for epoch in range(start_epoch + 1, start_epoch + tcfg.epochs + 1):
        t0 = time.perf_counter()
        rng = np.random.default_rng(tcfg.seed + epoch)
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        seen = 0
        for lo in range(0, n, tcfg.batch_size):
            idx = order[lo:lo + tcfg.batch_size]
            if idx.size < 2:
                continue  # batch statistics need at least two samples
            batch = make_batch([fit_records[i] for i in idx])
            trace = model.forward(batch, train=True, rng=rng)
            loss, dlogits = cross_entropy(trace.logits, batch.labels)
            if not np.isfinite(loss):
                culprit = _first_nonfinite(model, trace, loss)
                raise NumericError(
                    f"non-finite loss at epoch {epoch}; first non-finite tensor: {culprit}")
            model.zero_grads()
            model.backward(dlogits)
            adam_step(model.store, tcfg.lr, tcfg.beta1, tcfg.beta2,
                      tcfg.adam_eps, tcfg.weight_decay)
            loss_sum += loss * idx.size
            correct += int((trace.logits.argmax(axis=1) == batch.labels).sum())
            seen += idx.size
        if seen == 0:
            raise ConfigError("no trainable batch of size >= 2; corpus too small")
        acc = eval_accuracy(model, sel_records)
        stats = EpochStats(epoch, loss_sum / seen, correct / seen, acc,
                           time.perf_counter() - t0)
        run.entries.append(stats)
        print(f"epoch={epoch} train_loss={stats.train_loss:.6f} "
              f"train_acc={stats.train_accuracy:.4f} eval_acc={acc:.4f} "
              f"time={stats.wall_time_s:.2f}s", file=stream)
        if tcfg.selection == "best_eval_accuracy" and (best is None or acc > best[0]):
            best = (acc, epoch, _Snapshot(model))

    if tcfg.selection == "best_eval_accuracy" and best is not None:
        best[2].restore(model)
        run.selected_epoch = best[1]
    else:
        run.selected_epoch = start_epoch + tcfg.epochs
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, model, epoch=run.selected_epoch)
        run.checkpoint_path = str(checkpoint_path)
    return checkpoint_path, run


def resume(checkpoint_path, train_records, eval_records, tcfg,
           expected_config=None, out_checkpoint_path=None, log_stream=None):
    """Continue training from a checkpoint for tcfg.epochs additional epochs."""
    tcfg.validate(allow_zero_epochs=True)
    model, meta = load_checkpoint(checkpoint_path)
    if expected_config is not None:
        theirs = model.config
        if (theirs.variant != expected_config.variant
                or (theirs.n_bert, theirs.n_resnet, theirs.n_clip)
                != (expected_config.n_bert, expected_config.n_resnet, expected_config.n_clip)):
            raise CheckpointError(
                f"checkpoint variant/dims ({theirs.variant}, {theirs.n_bert}, "
                f"{theirs.n_resnet}, {theirs.n_clip}) do not match requested config")
    start_epoch = int(meta.get("epoch", 0))
    if tcfg.epochs == 0:
        run = RunLog(selected_epoch=start_epoch)
        if out_checkpoint_path is not None:
            save_checkpoint(out_checkpoint_path, model, epoch=start_epoch)
            run.checkpoint_path = str(out_checkpoint_path)
        return model, run
    _, run = train(model, train_records, eval_records, tcfg,
                   checkpoint_path=out_checkpoint_path, start_epoch=start_epoch,
                   log_stream=log_stream)
    return model, run
