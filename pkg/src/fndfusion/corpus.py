"""Bit-exact persistence of embedding corpora.

Canonical container is the ``.fnde`` binary format (see docs/corpus-format.md
for a hex-annotated example):

    header:  magic "FNDE" | version u16 | n_bert u32 | n_resnet u32
             | n_clip u32 | record_count u64          (all little-endian)
    record:  id_len u32 | id UTF-8 bytes | label u8
             | f_bert f32[n_bert] | f_resnet f32[n_resnet]
             | f_clip_t f32[n_clip] | f_clip_i f32[n_clip]

A JSONL alternative (one object per record) exists for debuggability; the
binary form is canonical.  Vectors are stored as 32-bit floats and widened
to 64-bit when batches are assembled for the model.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CorpusFormatError, DimensionError, LabelError

MAGIC = b"FNDE"
VERSION = 1
_HEADER = struct.Struct("<4sHIIIQ")

LABEL_REAL = 0
LABEL_FAKE = 1


class EmbeddingRecord:
    """One news item's four frozen embeddings plus label and id."""

    __slots__ = ("id", "label", "f_bert", "f_resnet", "f_clip_t", "f_clip_i")

    def __init__(self, id, label, f_bert, f_resnet, f_clip_t, f_clip_i):
        self.id = id
        self.label = int(label)
        self.f_bert = np.asarray(f_bert, dtype=np.float32)
        self.f_resnet = np.asarray(f_resnet, dtype=np.float32)
        self.f_clip_t = np.asarray(f_clip_t, dtype=np.float32)
        self.f_clip_i = np.asarray(f_clip_i, dtype=np.float32)

    def dims(self):
        return (self.f_bert.shape[0], self.f_resnet.shape[0], self.f_clip_t.shape[0])

    def validate(self):
        if self.label not in (LABEL_REAL, LABEL_FAKE):
            raise LabelError(f"record {self.id!r}: label {self.label} not in {{0, 1}}")
        for field in ("f_bert", "f_resnet", "f_clip_t", "f_clip_i"):
            v = getattr(self, field)
            if v.ndim != 1:
                raise DimensionError(f"record {self.id!r}: {field} must be 1-D")
            if not np.isfinite(v).all():
                raise CorpusFormatError(f"record {self.id!r}: non-finite values in {field}")
        if self.f_clip_t.shape != self.f_clip_i.shape:
            raise DimensionError(f"record {self.id!r}: CLIP vector lengths differ")

    def __eq__(self, other):
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (self.id == other.id and self.label == other.label
                and np.array_equal(self.f_bert, other.f_bert)
                and np.array_equal(self.f_resnet, other.f_resnet)
                and np.array_equal(self.f_clip_t, other.f_clip_t)
                and np.array_equal(self.f_clip_i, other.f_clip_i))

    def __repr__(self):
        return (f"EmbeddingRecord(id={self.id!r}, label={self.label}, "
                f"dims={self.dims()})")


@dataclass(frozen=True)
class CorpusHeader:
    n_bert: int
    n_resnet: int
    n_clip: int
    record_count: int
    version: int = VERSION

    def validate(self):
        if min(self.n_bert, self.n_resnet, self.n_clip) <= 0:
            raise CorpusFormatError(f"header dims must be positive, got {self}")


def _check_uniform_dims(records):
    if not records:
        return None
    dims = records[0].dims()
    for rec in records:
        rec.validate()
        if rec.dims() != dims:
            raise DimensionError(
                f"record {rec.id!r}: dims {rec.dims()} differ from corpus dims {dims}")
    return dims


def write_corpus(records, path):
    """Write records to a .fnde file; round-trips bit-exactly."""
    records = list(records)
    dims = _check_uniform_dims(records)
    if dims is None:
        raise CorpusFormatError("cannot write an empty corpus without dims; "
                                "use write_corpus_with_dims")
    write_corpus_with_dims(records, dims, path)


def write_corpus_with_dims(records, dims, path):
    records = list(records)
    got = _check_uniform_dims(records)
    if got is not None and got != tuple(dims):
        raise DimensionError(f"records have dims {got}, expected {tuple(dims)}")
    n_bert, n_resnet, n_clip = dims
    header = CorpusHeader(n_bert, n_resnet, n_clip, len(records))
    header.validate()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n_bert, n_resnet, n_clip, len(records)))
        for rec in records:
            id_bytes = rec.id.encode("utf-8")
            fh.write(struct.pack("<I", len(id_bytes)))
            fh.write(id_bytes)
            fh.write(struct.pack("<B", rec.label))
            for v in (rec.f_bert, rec.f_resnet, rec.f_clip_t, rec.f_clip_i):
                fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


def _read_exact(fh, n, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise CorpusFormatError(f"truncated file while reading {what}")
    return buf


def read_corpus(path, validate=True):
    """Read a .fnde file; returns (CorpusHeader, list of EmbeddingRecord)."""
    with open(path, "rb") as fh:
        raw = _read_exact(fh, _HEADER.size, "header")
        magic, version, n_bert, n_resnet, n_clip, count = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise CorpusFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise CorpusFormatError(f"unsupported version {version}, expected {VERSION}")
        header = CorpusHeader(n_bert, n_resnet, n_clip, count, version)
        header.validate()
        records = []
        for i in range(count):
            (id_len,) = struct.unpack("<I", _read_exact(fh, 4, f"record {i} id length"))
            rec_id = _read_exact(fh, id_len, f"record {i} id").decode("utf-8")
            (label,) = struct.unpack("<B", _read_exact(fh, 1, f"record {i} label"))
            vecs = []
            for name, n in (("f_bert", n_bert), ("f_resnet", n_resnet),
                            ("f_clip_t", n_clip), ("f_clip_i", n_clip)):
                buf = _read_exact(fh, 4 * n, f"record {i} {name}")
                vecs.append(np.frombuffer(buf, dtype="<f4").copy())
            records.append(EmbeddingRecord(rec_id, label, *vecs))
        if fh.read(1):
            raise CorpusFormatError("trailing bytes after last record")
    if validate:
        for rec in records:
            rec.validate()
    return header, records


def write_corpus_jsonl(records, path):
    records = list(records)
    _check_uniform_dims(records)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {
                "id": rec.id,
                "label": rec.label,
                "f_bert": [float(x) for x in rec.f_bert],
                "f_resnet": [float(x) for x in rec.f_resnet],
                "f_clip_t": [float(x) for x in rec.f_clip_t],
                "f_clip_i": [float(x) for x in rec.f_clip_i],
            }
            fh.write(json.dumps(obj) + "\n")


def read_corpus_jsonl(path, validate=True):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"{path}:{lineno}: invalid JSON: {e}") from e
            try:
                records.append(EmbeddingRecord(
                    obj["id"], obj["label"], obj["f_bert"], obj["f_resnet"],
                    obj["f_clip_t"], obj["f_clip_i"]))
            except KeyError as e:
                raise CorpusFormatError(f"{path}:{lineno}: missing field {e}") from e
    dims = _check_uniform_dims(records) if validate else None
    header = CorpusHeader(*dims, len(records)) if dims else None
    return header, records


def labels_array(records):
    return np.array([rec.label for rec in records], dtype=np.intp)
