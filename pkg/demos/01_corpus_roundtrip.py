"""Corpus persistence walkthrough: binary round-trip, JSONL twin, hex peek."""

import tempfile
from pathlib import Path

from fndfusion import (
    SyntheticSpec,
    generate_synthetic,
    read_corpus,
    read_corpus_jsonl,
    write_corpus,
    write_corpus_jsonl,
)

spec = SyntheticSpec(n_real=3, n_fake=2, n_bert=4, n_resnet=6, n_clip=4, seed=1)
records = generate_synthetic(spec)
print(f"generated {len(records)} records, dims {records[0].dims()}")

with tempfile.TemporaryDirectory() as d:
    binary = Path(d) / "demo.fnde"
    jsonl = Path(d) / "demo.jsonl"
    write_corpus(records, binary)
    write_corpus_jsonl(records, jsonl)

    header, back = read_corpus(binary)
    print(f"header: {header}")
    print(f"binary round-trip exact: {back == records}")

    _, from_jsonl = read_corpus_jsonl(jsonl)
    print(f"jsonl matches binary:    {from_jsonl == back}")

    raw = binary.read_bytes()
    print(f"\nfile is {len(raw)} bytes; header region:")
    head = raw[:26]
    print("  " + " ".join(f"{b:02x}" for b in head))
    print(f'  magic={raw[:4]!r} version={int.from_bytes(raw[4:6], "little")} '
          f'dims=({int.from_bytes(raw[6:10], "little")}, '
          f'{int.from_bytes(raw[10:14], "little")}, '
          f'{int.from_bytes(raw[14:18], "little")}) '
          f'count={int.from_bytes(raw[18:26], "little")}')
