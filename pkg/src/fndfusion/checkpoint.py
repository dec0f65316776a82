"""Single-file model checkpoints.

Layout: magic "FNDC" | version u16 | meta_len u32 | meta JSON (UTF-8)
| entry_count u32 | table of contents | payload.  Each TOC entry is
name_len u32 | name UTF-8 | kind u8 | rows u32 | cols u32 | offset u64;
payload arrays are 64-bit little-endian floats.  Kinds: 0 value, 1 adam_m,
2 adam_v, 3 buffer.  Meta carries the config echo, per-parameter step
counts, and the epoch the state was taken from.  Loading rebuilds the model
from the config echo and overwrites arrays in place, so eval-mode outputs
reproduce bit-exactly.
"""

import json
import struct

import numpy as np

from .errors import CheckpointError
from .model import FusionConfig, FusionModel

MAGIC = b"FNDC"
VERSION = 1

_KIND_VALUE, _KIND_M, _KIND_V, _KIND_BUFFER = 0, 1, 2, 3


def save_checkpoint(path, model, epoch=0, extra_meta=None):
    meta = {
        "fusion": model.config.to_dict(),
        "epoch": int(epoch),
        "step_counts": {name: p.step_count for name, p in sorted(model.store.params.items())},
    }
    if extra_meta:
        meta.update(extra_meta)
    meta_bytes = json.dumps(meta, sort_keys=True).encode("utf-8")

    entries = []
    for name in sorted(model.store.params):
        p = model.store.params[name]
        entries.append((name, _KIND_VALUE, p.value))
        entries.append((name, _KIND_M, p.adam_m))
        entries.append((name, _KIND_V, p.adam_v))
    for name in sorted(model.store.buffers):
        buf = model.store.buffers[name]
        entries.append((name, _KIND_BUFFER, buf.reshape(1, -1)))

    toc_size = sum(4 + len(name.encode("utf-8")) + 1 + 4 + 4 + 8 for name, _, _ in entries)
    offset = len(MAGIC) + 2 + 4 + len(meta_bytes) + 4 + toc_size
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        fh.write(struct.pack("<I", len(entries)))
        for name, kind, arr in entries:
            nb = name.encode("utf-8")
            rows, cols = arr.shape
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<BIIQ", kind, rows, cols, offset))
            offset += arr.size * 8
        for _, _, arr in entries:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_exact(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise CheckpointError(f"truncated checkpoint while reading {what}")
    return buf


def read_checkpoint_raw(path):
    """Returns (meta dict, list of (name, kind, array))."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise CheckpointError(f"{path}: bad checkpoint magic")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        (meta_len,) = struct.unpack("<I", _read_exact(fh, 4, "meta length"))
        meta = json.loads(_read_exact(fh, meta_len, "meta").decode("utf-8"))
        (count,) = struct.unpack("<I", _read_exact(fh, 4, "entry count"))
        toc = []
        for _ in range(count):
            (name_len,) = struct.unpack("<I", _read_exact(fh, 4, "entry name length"))
            name = _read_exact(fh, name_len, "entry name").decode("utf-8")
            kind, rows, cols, offset = struct.unpack("<BIIQ", _read_exact(fh, 17, "entry record"))
            toc.append((name, kind, rows, cols, offset))
        entries = []
        for name, kind, rows, cols, offset in toc:
            fh.seek(offset)
            buf = _read_exact(fh, rows * cols * 8, f"payload of {name}")
            entries.append((name, kind, np.frombuffer(buf, dtype="<f8").reshape(rows, cols).copy()))
    return meta, entries


def load_checkpoint(path):
    """Rebuild the model from a checkpoint; returns (model, meta)."""
    meta, entries = read_checkpoint_raw(path)
    config = FusionConfig.from_dict(meta["fusion"])
    model = FusionModel(config)
    seen = set()
    for name, kind, arr in entries:
        if kind == _KIND_BUFFER:
            if name not in model.store.buffers:
                raise CheckpointError(f"unknown buffer {name!r} in checkpoint")
            model.store.buffers[name][...] = arr.reshape(model.store.buffers[name].shape)
        else:
            if name not in model.store.params:
                raise CheckpointError(f"unknown parameter {name!r} in checkpoint")
            p = model.store.params[name]
            target = (p.value, p.adam_m, p.adam_v)[kind]
            if target.shape != arr.shape:
                raise CheckpointError(f"shape mismatch for {name!r}: "
                                      f"checkpoint {arr.shape}, model {target.shape}")
            target[...] = arr
        seen.add((name, kind))
    missing = [name for name in model.store.params if (name, _KIND_VALUE) not in seen]
    missing += [name for name in model.store.buffers if (name, _KIND_BUFFER) not in seen]
    if missing:
        raise CheckpointError(f"checkpoint missing entries for: {missing}")
    for name, count in meta.get("step_counts", {}).items():
        if name not in model.store.params:
            raise CheckpointError(f"step count for unknown parameter {name!r}")
        model.store.params[name].step_count = int(count)
    return model, meta
