import hashlib
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fndfusion.corpus import (
    CorpusHeader,
    EmbeddingRecord,
    read_corpus,
    read_corpus_jsonl,
    write_corpus,
    write_corpus_jsonl,
    write_corpus_with_dims,
)
from fndfusion.errors import CorpusFormatError, DimensionError, LabelError


def make_record(rec_id, label, dims=(3, 4, 2), rng=None, fill=None):
    n_bert, n_resnet, n_clip = dims
    if fill is not None:
        vecs = [np.full(n, fill, dtype=np.float32)
                for n in (n_bert, n_resnet, n_clip, n_clip)]
    else:
        vecs = [rng.standard_normal(n).astype(np.float32)
                for n in (n_bert, n_resnet, n_clip, n_clip)]
    return EmbeddingRecord(rec_id, label, *vecs)


class TestBinaryRoundTrip:
    def test_empty_corpus(self, tmp_path):
        path = tmp_path / "empty.fnde"
        write_corpus_with_dims([], (3, 4, 2), path)
        header, records = read_corpus(path)
        assert header == CorpusHeader(3, 4, 2, 0)
        assert records == []

    def test_single_zero_record(self, tmp_path):
        rec = make_record("only", 0, fill=0.0)
        path = tmp_path / "one.fnde"
        write_corpus([rec], path)
        _, back = read_corpus(path)
        assert back == [rec]

    def test_many_random_records(self, tmp_path):
        rng = np.random.default_rng(0)
        records = [make_record(f"r{i}", int(rng.integers(0, 2)), rng=rng)
                   for i in range(200)]
        path = tmp_path / "many.fnde"
        write_corpus(records, path)
        header, back = read_corpus(path)
        assert header.record_count == 200
        assert back == records  # order preserved, payload bit-exact

    def test_write_is_deterministic(self, tmp_path):
        rng = np.random.default_rng(42)
        records = [make_record(f"r{i}", i % 2, rng=rng) for i in range(50)]
        p1, p2 = tmp_path / "a.fnde", tmp_path / "b.fnde"
        write_corpus(records, p1)
        write_corpus(records, p2)
        h1 = hashlib.sha256(p1.read_bytes()).hexdigest()
        h2 = hashlib.sha256(p2.read_bytes()).hexdigest()
        assert h1 == h2

    def test_unicode_ids(self, tmp_path):
        rng = np.random.default_rng(1)
        records = [make_record("新闻-0001", 1, rng=rng), make_record("héllo", 0, rng=rng)]
        path = tmp_path / "uni.fnde"
        write_corpus(records, path)
        _, back = read_corpus(path)
        assert [r.id for r in back] == ["新闻-0001", "héllo"]


class TestFormatErrors:
    def _valid_bytes(self, tmp_path):
        rng = np.random.default_rng(3)
        path = tmp_path / "v.fnde"
        write_corpus([make_record("a", 0, rng=rng)], path)
        return path.read_bytes()

    def test_bad_magic(self, tmp_path):
        data = self._valid_bytes(tmp_path)
        bad = tmp_path / "bad.fnde"
        bad.write_bytes(b"NOPE" + data[4:])
        with pytest.raises(CorpusFormatError, match="magic"):
            read_corpus(bad)

    def test_bad_version(self, tmp_path):
        data = bytearray(self._valid_bytes(tmp_path))
        data[4] = 99
        bad = tmp_path / "bad.fnde"
        bad.write_bytes(bytes(data))
        with pytest.raises(CorpusFormatError, match="version"):
            read_corpus(bad)

    def test_truncated(self, tmp_path):
        data = self._valid_bytes(tmp_path)
        bad = tmp_path / "bad.fnde"
        bad.write_bytes(data[:-5])
        with pytest.raises(CorpusFormatError, match="truncated"):
            read_corpus(bad)

    def test_trailing_garbage(self, tmp_path):
        data = self._valid_bytes(tmp_path)
        bad = tmp_path / "bad.fnde"
        bad.write_bytes(data + b"x")
        with pytest.raises(CorpusFormatError, match="trailing"):
            read_corpus(bad)

    def test_mixed_dims_rejected(self, tmp_path):
        rng = np.random.default_rng(5)
        records = [make_record("a", 0, dims=(3, 4, 2), rng=rng),
                   make_record("b", 1, dims=(3, 4, 3), rng=rng)]
        with pytest.raises(DimensionError):
            write_corpus(records, tmp_path / "x.fnde")

    def test_bad_label_rejected(self):
        rng = np.random.default_rng(6)
        rec = make_record("a", 2, rng=rng)
        with pytest.raises(LabelError):
            rec.validate()

    def test_nonfinite_rejected(self):
        rec = make_record("a", 0, fill=np.inf)
        with pytest.raises(CorpusFormatError, match="non-finite"):
            rec.validate()


class TestJsonl:
    def test_matches_binary_load(self, tmp_path):
        rng = np.random.default_rng(7)
        records = [make_record(f"r{i}", i % 2, rng=rng) for i in range(20)]
        bpath, jpath = tmp_path / "c.fnde", tmp_path / "c.jsonl"
        write_corpus(records, bpath)
        write_corpus_jsonl(records, jpath)
        _, from_bin = read_corpus(bpath)
        _, from_jsonl = read_corpus_jsonl(jpath)
        assert from_bin == from_jsonl  # float32 decimal encoding round-trips exactly

    def test_missing_field(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text(json.dumps({"id": "a", "label": 0}) + "\n")
        with pytest.raises(CorpusFormatError, match="missing field"):
            read_corpus_jsonl(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(CorpusFormatError, match="invalid JSON"):
            read_corpus_jsonl(path)


@st.composite
def corpora(draw):
    n_bert = draw(st.integers(1, 6))
    n_resnet = draw(st.integers(1, 6))
    n_clip = draw(st.integers(1, 4))
    count = draw(st.integers(0, 5))
    finite32 = st.floats(width=32, allow_nan=False, allow_infinity=False)
    records = []
    for i in range(count):
        rec_id = draw(st.text(min_size=0, max_size=8))
        label = draw(st.integers(0, 1))
        vecs = [np.array(draw(st.lists(finite32, min_size=n, max_size=n)), dtype=np.float32)
                for n in (n_bert, n_resnet, n_clip, n_clip)]
        records.append(EmbeddingRecord(f"{i}-{rec_id}", label, *vecs))
    return (n_bert, n_resnet, n_clip), records


@settings(max_examples=40, deadline=None)
@given(corpora())
def test_roundtrip_property(tmp_path_factory, corpus):
    dims, records = corpus
    path = tmp_path_factory.mktemp("prop") / "c.fnde"
    write_corpus_with_dims(records, dims, path)
    header, back = read_corpus(path)
    assert (header.n_bert, header.n_resnet, header.n_clip) == dims
    assert back == records
