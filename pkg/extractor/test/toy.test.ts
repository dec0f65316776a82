import { describe, expect, it } from "vitest";

import { ToyBackend } from "../src/encoders/toy.js";
import { RgbImage } from "../src/types.js";

function solid(color: [number, number, number], size = 32): RgbImage {
  const pixels = new Uint8Array(size * size * 3);
  for (let i = 0; i < size * size; i++) pixels.set(color, i * 3);
  return { width: size, height: size, pixels };
}

function cosine(a: Float32Array, b: Float32Array): number {
  let dot = 0, na = 0, nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / Math.sqrt(na * nb);
}

describe("toy encoders", () => {
  const backend = new ToyBackend();

  it("produces the declared dims", () => {
    const tokens = ["a", "red", "square"];
    const img = solid([220, 40, 40]);
    expect(backend.encodeText(tokens)).toHaveLength(768);
    expect(backend.encodeImage(img)).toHaveLength(2048);
    expect(backend.encodeClipText(tokens)).toHaveLength(512);
    expect(backend.encodeClipImage(img)).toHaveLength(512);
  });

  it("is deterministic", () => {
    const tokens = ["some", "caption", "words"];
    const img = solid([40, 80, 220]);
    expect(backend.encodeClipText(tokens)).toEqual(backend.encodeClipText(tokens));
    expect(backend.encodeImage(img)).toEqual(backend.encodeImage(img));
  });

  it("clip vectors are unit length", () => {
    const t = backend.encodeClipText(["a", "green", "circle"]);
    let norm = 0;
    for (const v of t) norm += v * v;
    expect(Math.sqrt(norm)).toBeCloseTo(1.0, 6);
  });

  it("caption color aligns with image color in the shared space", () => {
    const redText = backend.encodeClipText(["a", "red", "thing"]);
    const redImage = backend.encodeClipImage(solid([220, 40, 40]));
    const blueImage = backend.encodeClipImage(solid([40, 80, 220]));
    expect(cosine(redText, redImage)).toBeGreaterThan(cosine(redText, blueImage));
  });
});
