import { EmbeddingRecord } from "./types.js";

/**
 * Writer (and test-support reader) for the .fnde corpus container.
 *
 * Layout, all little-endian: magic "FNDE", version u16, n_bert u32,
 * n_resnet u32, n_clip u32, record_count u64; then per record: id length
 * u32 + UTF-8 bytes, label u8, and the four float32 vectors in declared
 * order.
 */

export const MAGIC = "FNDE";
export const VERSION = 1;

export interface CorpusDims {
  nBert: number;
  nResnet: number;
  nClip: number;
}

export function encodeCorpus(records: EmbeddingRecord[], dims: CorpusDims): Buffer {
  for (const rec of records) {
    if (rec.fBert.length !== dims.nBert || rec.fResnet.length !== dims.nResnet
        || rec.fClipT.length !== dims.nClip || rec.fClipI.length !== dims.nClip) {
      throw new Error(`record ${rec.id}: vector lengths do not match corpus dims`);
    }
    for (const vec of [rec.fBert, rec.fResnet, rec.fClipT, rec.fClipI]) {
      for (let i = 0; i < vec.length; i++) {
        if (!Number.isFinite(vec[i])) {
          throw new Error(`record ${rec.id}: non-finite embedding value`);
        }
      }
    }
  }

  const chunks: Buffer[] = [];
  const header = Buffer.alloc(26);
  header.write(MAGIC, 0, "ascii");
  header.writeUInt16LE(VERSION, 4);
  header.writeUInt32LE(dims.nBert, 6);
  header.writeUInt32LE(dims.nResnet, 10);
  header.writeUInt32LE(dims.nClip, 14);
  header.writeBigUInt64LE(BigInt(records.length), 18);
  chunks.push(header);

  for (const rec of records) {
    const idBytes = Buffer.from(rec.id, "utf-8");
    const pre = Buffer.alloc(4 + idBytes.length + 1);
    pre.writeUInt32LE(idBytes.length, 0);
    idBytes.copy(pre, 4);
    pre.writeUInt8(rec.label, 4 + idBytes.length);
    chunks.push(pre);
    for (const vec of [rec.fBert, rec.fResnet, rec.fClipT, rec.fClipI]) {
      const buf = Buffer.alloc(vec.length * 4);
      for (let i = 0; i < vec.length; i++) buf.writeFloatLE(vec[i], i * 4);
      chunks.push(buf);
    }
  }
  return Buffer.concat(chunks);
}

export function decodeCorpus(data: Buffer): { dims: CorpusDims; records: EmbeddingRecord[] } {
  if (data.toString("ascii", 0, 4) !== MAGIC) throw new Error("bad magic");
  if (data.readUInt16LE(4) !== VERSION) throw new Error("bad version");
  const dims = {
    nBert: data.readUInt32LE(6),
    nResnet: data.readUInt32LE(10),
    nClip: data.readUInt32LE(14),
  };
  const count = Number(data.readBigUInt64LE(18));
  let pos = 26;
  const records: EmbeddingRecord[] = [];
  const takeVec = (n: number): Float32Array => {
    const vec = new Float32Array(n);
    for (let i = 0; i < n; i++) vec[i] = data.readFloatLE(pos + i * 4);
    pos += n * 4;
    return vec;
  };
  for (let r = 0; r < count; r++) {
    const idLen = data.readUInt32LE(pos);
    pos += 4;
    const id = data.toString("utf-8", pos, pos + idLen);
    pos += idLen;
    const label = data.readUInt8(pos) as 0 | 1;
    pos += 1;
    records.push({
      id, label,
      fBert: takeVec(dims.nBert),
      fResnet: takeVec(dims.nResnet),
      fClipT: takeVec(dims.nClip),
      fClipI: takeVec(dims.nClip),
    });
  }
  if (pos !== data.length) throw new Error("trailing bytes after last record");
  return { dims, records };
}
