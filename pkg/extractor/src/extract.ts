import { readFileSync, writeFileSync } from "node:fs";
import { dirname, resolve } from "node:path";

import { makeBackend } from "./encoders/index.js";
import { CorpusDims, encodeCorpus } from "./fnde.js";
import { readManifest } from "./manifest.js";
import { decodePpm, resize } from "./ppm.js";
import { DEFAULT_SPEC, EmbeddingRecord, ExtractSpec, RawPost } from "./types.js";

export interface ExtractSummary {
  dims: CorpusDims;
  written: number;
  skipped: number;
  outPath: string;
}

export function tokenize(text: string, maxTokens: number): string[] {
  return text.toLowerCase().split(/\s+/).filter(Boolean).slice(0, maxTokens);
}

/** Deterministic multi-image choice: sorted-first, or seeded pick. */
export function chooseImage(image: string | string[], spec: ExtractSpec, postId: string): string {
  if (typeof image === "string") return image;
  const sorted = [...image].sort();
  if (spec.imageChoice === "first") return sorted[0];
  let h = 2166136261 ^ spec.seed;
  for (const ch of postId) h = Math.imul(h ^ ch.charCodeAt(0), 16777619) >>> 0;
  return sorted[h % sorted.length];
}

export async function extract(
  posts: RawPost[],
  spec: Partial<ExtractSpec>,
  outPath: string,
  baseDir = ".",
  log: (line: string) => void = (line) => console.error(line),
): Promise<ExtractSummary> {
  const full: ExtractSpec = { ...DEFAULT_SPEC, ...spec };
  const backend = await makeBackend(full);
  const records: EmbeddingRecord[] = [];
  let skipped = 0;

  for (const post of posts) {
    const imagePath = resolve(baseDir, chooseImage(post.image, full, post.id));
    let image;
    try {
      image = resize(decodePpm(readFileSync(imagePath)), full.imageSize);
    } catch (e) {
      skipped++;
      log(`skip ${post.id}: cannot decode image ${imagePath}: ${(e as Error).message}`);
      continue;
    }
    const tokens = tokenize(post.text, full.maxTextTokens);
    records.push({
      id: post.id,
      label: post.label,
      fBert: backend.encodeText(tokens),
      fResnet: backend.encodeImage(image),
      fClipT: backend.encodeClipText(tokens),
      fClipI: backend.encodeClipImage(image),
    });
  }

  const dims: CorpusDims = {
    nBert: backend.textDim,
    nResnet: backend.imageDim,
    nClip: backend.clipDim,
  };
  writeFileSync(outPath, encodeCorpus(records, dims));
  const summary: ExtractSummary = { dims, written: records.length, skipped, outPath };
  log(`dims=(${dims.nBert}, ${dims.nResnet}, ${dims.nClip}) ` +
      `records=${records.length} skipped=${skipped} out=${outPath}`);
  return summary;
}

export function extractFromManifest(
  manifestPath: string,
  spec: Partial<ExtractSpec>,
  outPath: string,
): Promise<ExtractSummary> {
  return extract(readManifest(manifestPath), spec, outPath, dirname(manifestPath));
}
