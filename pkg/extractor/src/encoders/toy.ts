import { EncoderBackend, RgbImage } from "../types.js";

/**
 * Deterministic offline encoders for smoke tests and plumbing work.
 *
 * The CLIP-like pair embeds captions and images into one shared space from
 * first principles: named colors and coarse shape statistics occupy fixed
 * channels on both sides, with low-weight hashed features filling the rest.
 * Matched caption/image pairs therefore align the same way real CLIP pairs
 * do, just on a rudimentary feature basis.  The text and image encoders fill
 * their dims with hashed bag-of-words and patch statistics.  Nothing here is
 * learned; these are stand-ins with the right shapes and determinism, not a
 * substitute for pretrained models.
 */

export const TEXT_DIM = 768;
export const IMAGE_DIM = 2048;
export const CLIP_DIM = 512;

const COLOR_REFS: Array<[string, [number, number, number]]> = [
  ["red", [220, 40, 40]],
  ["green", [40, 180, 70]],
  ["blue", [40, 80, 220]],
  ["yellow", [230, 210, 50]],
  ["purple", [150, 60, 200]],
  ["orange", [240, 140, 30]],
  ["white", [245, 245, 245]],
  ["black", [20, 20, 20]],
];
const SHAPES = ["square", "circle", "stripes"];
const SHAPE_BASE = COLOR_REFS.length; // channels 8..10
const HASH_BASE = 16; // hashed tail lives in channels 16..CLIP_DIM-1

export function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

function l2normalize(v: Float32Array): Float32Array {
  let sum = 0;
  for (let i = 0; i < v.length; i++) sum += v[i] * v[i];
  const norm = Math.sqrt(sum);
  if (norm > 0) for (let i = 0; i < v.length; i++) v[i] /= norm;
  return v;
}

function nearestColor(r: number, g: number, b: number): number {
  let best = 0;
  let bestDist = Infinity;
  for (let c = 0; c < COLOR_REFS.length; c++) {
    const [, [cr, cg, cb]] = COLOR_REFS[c];
    const d = (r - cr) ** 2 + (g - cg) ** 2 + (b - cb) ** 2;
    if (d < bestDist) {
      bestDist = d;
      best = c;
    }
  }
  return best;
}

/** Per-channel share of pixels whose nearest reference is that color. */
function colorShares(image: RgbImage): Float64Array {
  const shares = new Float64Array(COLOR_REFS.length);
  const n = image.width * image.height;
  for (let i = 0; i < n; i++) {
    shares[nearestColor(image.pixels[3 * i], image.pixels[3 * i + 1],
                        image.pixels[3 * i + 2])]++;
  }
  for (let c = 0; c < shares.length; c++) shares[c] /= n;
  return shares;
}

/**
 * Coarse shape scores (square, circle, stripes) from the foreground mask.
 * Background is the nearest-color class dominating the image border.
 */
function shapeScores(image: RgbImage): Float64Array {
  const { width: w, height: h, pixels } = image;
  const classOf = (x: number, y: number) =>
    nearestColor(pixels[3 * (y * w + x)], pixels[3 * (y * w + x) + 1],
                 pixels[3 * (y * w + x) + 2]);

  const borderCounts = new Float64Array(COLOR_REFS.length);
  for (let x = 0; x < w; x++) {
    borderCounts[classOf(x, 0)]++;
    borderCounts[classOf(x, h - 1)]++;
  }
  for (let y = 0; y < h; y++) {
    borderCounts[classOf(0, y)]++;
    borderCounts[classOf(w - 1, y)]++;
  }
  let background = 0;
  for (let c = 1; c < borderCounts.length; c++) {
    if (borderCounts[c] > borderCounts[background]) background = c;
  }

  let minX = w, maxX = -1, minY = h, maxY = -1, fgCount = 0;
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      if (classOf(x, y) !== background) {
        fgCount++;
        if (x < minX) minX = x;
        if (x > maxX) maxX = x;
        if (y < minY) minY = y;
        if (y > maxY) maxY = y;
      }
    }
  }
  const scores = new Float64Array(SHAPES.length);
  if (fgCount === 0) return scores;

  // horizontal band count down the centre column detects stripes
  let bands = 1;
  const cx = Math.floor(w / 2);
  for (let y = 1; y < h; y++) {
    if (classOf(cx, y) !== classOf(cx, y - 1)) bands++;
  }
  const bbox = (maxX - minX + 1) * (maxY - minY + 1);
  const fill = fgCount / bbox;
  if (bands >= 4) {
    scores[2] = 1.0;
  } else if (fill >= 0.92) {
    scores[0] = 1.0; // solid rectangle fills its bounding box
  } else if (fill >= 0.55) {
    scores[1] = 1.0; // disc fills ~pi/4 of it
  }
  return scores;
}

function hashedTail(v: Float32Array, items: string[], weight: number, salt: string) {
  if (items.length === 0) return;
  const scale = weight / Math.sqrt(items.length);
  for (const item of items) {
    const h = fnv1a(salt + item);
    const idx = HASH_BASE + (h % (CLIP_DIM - HASH_BASE));
    v[idx] += (h & 0x100 ? 1 : -1) * scale;
  }
}

export class ToyBackend implements EncoderBackend {
  readonly textDim = TEXT_DIM;
  readonly imageDim = IMAGE_DIM;
  readonly clipDim = CLIP_DIM;

  encodeText(tokens: string[]): Float32Array {
    const v = new Float32Array(TEXT_DIM);
    const scale = 1.0 / Math.sqrt(tokens.length + 1);
    for (let i = 0; i < tokens.length; i++) {
      const h = fnv1a(tokens[i]);
      v[h % TEXT_DIM] += (h & 0x10000 ? 1 : -1) * scale;
      if (i + 1 < tokens.length) {
        const hb = fnv1a(tokens[i] + " " + tokens[i + 1]);
        v[hb % TEXT_DIM] += (hb & 0x10000 ? 0.5 : -0.5) * scale;
      }
    }
    return v;
  }

  encodeImage(image: RgbImage): Float32Array {
    const v = new Float32Array(IMAGE_DIM);
    const { width: w, height: h, pixels } = image;
    const grid = 7;
    let cell = 0;
    for (let gy = 0; gy < grid; gy++) {
      for (let gx = 0; gx < grid; gx++, cell++) {
        const x0 = Math.floor((gx * w) / grid), x1 = Math.floor(((gx + 1) * w) / grid);
        const y0 = Math.floor((gy * h) / grid), y1 = Math.floor(((gy + 1) * h) / grid);
        const n = Math.max(1, (x1 - x0) * (y1 - y0));
        for (let ch = 0; ch < 3; ch++) {
          let sum = 0, sumSq = 0;
          for (let y = y0; y < y1; y++) {
            for (let x = x0; x < x1; x++) {
              const p = pixels[3 * (y * w + x) + ch] / 255;
              sum += p;
              sumSq += p * p;
            }
          }
          const mean = sum / n;
          const std = Math.sqrt(Math.max(0, sumSq / n - mean * mean));
          v[fnv1a(`cell-mean:${cell}:${ch}`) % IMAGE_DIM] += mean;
          v[fnv1a(`cell-std:${cell}:${ch}`) % IMAGE_DIM] += std;
        }
      }
    }
    const shares = colorShares(image);
    for (let c = 0; c < shares.length; c++) {
      v[fnv1a(`hist:${c}`) % IMAGE_DIM] += shares[c];
    }
    return v;
  }

  encodeClipText(tokens: string[]): Float32Array {
    const v = new Float32Array(CLIP_DIM);
    const bag = new Set(tokens.map((t) => t.toLowerCase()));
    COLOR_REFS.forEach(([name], c) => {
      if (bag.has(name)) v[c] = 1.0;
    });
    SHAPES.forEach((name, s) => {
      if (bag.has(name)) v[SHAPE_BASE + s] = 1.0;
    });
    hashedTail(v, [...bag], 0.25, "clip-text:");
    return l2normalize(v);
  }

  encodeClipImage(image: RgbImage): Float32Array {
    const v = new Float32Array(CLIP_DIM);
    const shares = colorShares(image);
    for (let c = 0; c < shares.length; c++) v[c] = shares[c];
    const shapes = shapeScores(image);
    for (let s = 0; s < shapes.length; s++) v[SHAPE_BASE + s] = shapes[s];
    const cells: string[] = [];
    for (let c = 0; c < shares.length; c++) {
      cells.push(`${c}:${Math.round(shares[c] * 8)}`);
    }
    hashedTail(v, cells, 0.1, "clip-image:");
    return l2normalize(v);
  }
}
