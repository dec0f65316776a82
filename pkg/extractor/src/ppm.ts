import { RgbImage } from "./types.js";

/** Decode a binary P6 PPM (8-bit). Throws on anything else. */
export function decodePpm(data: Uint8Array): RgbImage {
  let pos = 0;
  const token = (): string => {
    // skip whitespace and # comments
    for (;;) {
      while (pos < data.length && isSpace(data[pos])) pos++;
      if (data[pos] === 0x23) {
        while (pos < data.length && data[pos] !== 0x0a) pos++;
      } else break;
    }
    const start = pos;
    while (pos < data.length && !isSpace(data[pos])) pos++;
    return asString(data, start, pos);
  };

  if (token() !== "P6") throw new Error("not a binary PPM (P6) file");
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0) || !(height > 0)) throw new Error("bad PPM dimensions");
  if (maxval !== 255) throw new Error(`unsupported PPM maxval ${maxval}`);
  pos++; // single whitespace after maxval
  const need = width * height * 3;
  if (data.length - pos < need) throw new Error("truncated PPM payload");
  return { width, height, pixels: data.slice(pos, pos + need) };
}

export function encodePpm(image: RgbImage): Uint8Array {
  const header = `P6\n${image.width} ${image.height}\n255\n`;
  const head = new TextEncoder().encode(header);
  const out = new Uint8Array(head.length + image.pixels.length);
  out.set(head, 0);
  out.set(image.pixels, head.length);
  return out;
}

/** Nearest-neighbour resize to size x size. */
export function resize(image: RgbImage, size: number): RgbImage {
  if (image.width === size && image.height === size) return image;
  const pixels = new Uint8Array(size * size * 3);
  for (let y = 0; y < size; y++) {
    const sy = Math.min(image.height - 1, Math.floor((y * image.height) / size));
    for (let x = 0; x < size; x++) {
      const sx = Math.min(image.width - 1, Math.floor((x * image.width) / size));
      const src = (sy * image.width + sx) * 3;
      const dst = (y * size + x) * 3;
      pixels[dst] = image.pixels[src];
      pixels[dst + 1] = image.pixels[src + 1];
      pixels[dst + 2] = image.pixels[src + 2];
    }
  }
  return { width: size, height: size, pixels };
}

function isSpace(b: number): boolean {
  return b === 0x20 || b === 0x09 || b === 0x0a || b === 0x0d;
}

function asString(data: Uint8Array, start: number, end: number): string {
  let s = "";
  for (let i = start; i < end; i++) s += String.fromCharCode(data[i]);
  return s;
}
