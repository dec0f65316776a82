/** Regenerate the bundled 8-pair caption/image smoke set (deterministic). */

import { mkdirSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { encodePpm } from "../src/ppm.js";
import { RgbImage } from "../src/types.js";

const COLORS: Record<string, [number, number, number]> = {
  red: [220, 40, 40],
  green: [40, 180, 70],
  blue: [40, 80, 220],
  yellow: [230, 210, 50],
  purple: [150, 60, 200],
  orange: [240, 140, 30],
  white: [245, 245, 245],
  black: [20, 20, 20],
};

const SIZE = 96;

function blank(bg: [number, number, number]): RgbImage {
  const pixels = new Uint8Array(SIZE * SIZE * 3);
  for (let i = 0; i < SIZE * SIZE; i++) pixels.set(bg, i * 3);
  return { width: SIZE, height: SIZE, pixels };
}

function put(img: RgbImage, x: number, y: number, c: [number, number, number]) {
  img.pixels.set(c, (y * SIZE + x) * 3);
}

function square(fg: [number, number, number], bg: [number, number, number]): RgbImage {
  const img = blank(bg);
  for (let y = 24; y < 72; y++) for (let x = 24; x < 72; x++) put(img, x, y, fg);
  return img;
}

function circle(fg: [number, number, number], bg: [number, number, number]): RgbImage {
  const img = blank(bg);
  for (let y = 0; y < SIZE; y++) {
    for (let x = 0; x < SIZE; x++) {
      if ((x - 48) ** 2 + (y - 48) ** 2 <= 28 ** 2) put(img, x, y, fg);
    }
  }
  return img;
}

function stripes(fg: [number, number, number], bg: [number, number, number]): RgbImage {
  const img = blank(bg);
  for (let y = 0; y < SIZE; y++) {
    if (Math.floor(y / 16) % 2 === 0) {
      for (let x = 0; x < SIZE; x++) put(img, x, y, fg);
    }
  }
  return img;
}

interface Pair {
  shape: "square" | "circle" | "stripes";
  color: string;
  background: string;
  label: 0 | 1;
}

const PAIRS: Pair[] = [
  { shape: "square", color: "red", background: "white", label: 0 },
  { shape: "circle", color: "green", background: "white", label: 1 },
  { shape: "square", color: "blue", background: "white", label: 0 },
  { shape: "circle", color: "yellow", background: "black", label: 1 },
  { shape: "stripes", color: "purple", background: "white", label: 0 },
  { shape: "square", color: "orange", background: "black", label: 1 },
  { shape: "circle", color: "red", background: "black", label: 0 },
  { shape: "stripes", color: "blue", background: "black", label: 1 },
];

const MAKERS = { square, circle, stripes };

function main() {
  const here = dirname(fileURLToPath(import.meta.url));
  const outDir = join(here, "..", "..", "assets", "smoke");
  mkdirSync(outDir, { recursive: true });

  const manifest: string[] = [];
  PAIRS.forEach((pair, i) => {
    const img = MAKERS[pair.shape](
      COLORS[pair.color] as [number, number, number],
      COLORS[pair.background] as [number, number, number]);
    const name = `img${i}.ppm`;
    writeFileSync(join(outDir, name), encodePpm(img));
    const text = pair.shape === "stripes"
      ? `a photo of ${pair.color} stripes on a ${pair.background} background`
      : `a photo of a ${pair.color} ${pair.shape} on a ${pair.background} background`;
    manifest.push(JSON.stringify({ id: `pair-${i}`, text, image: name, label: pair.label }));
  });
  writeFileSync(join(outDir, "manifest.jsonl"), manifest.join("\n") + "\n");
  console.log(`wrote ${PAIRS.length} pairs to ${outDir}`);
}

main();
