#!/usr/bin/env node
import { extractFromManifest } from "./extract.js";
import { DEFAULT_SPEC, ExtractSpec } from "./types.js";

const USAGE = `usage: fnde-extract --manifest posts.jsonl --out corpus.fnde
  [--backend toy|module:<path>]  encoder backend (default: toy)
  [--max-tokens N]               text truncation length (default: 300)
  [--image-size N]               square resize applied to images (default: 224)
  [--image-choice first|random]  multi-image policy (default: first)
  [--seed N]                     seed for the random image choice
Image paths in the manifest are resolved relative to the manifest file.`;

function parseArgs(argv: string[]): { manifest: string; out: string; spec: Partial<ExtractSpec> } {
  const spec: Partial<ExtractSpec> = {};
  let manifest = "";
  let out = "";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) throw new Error(`${arg} needs a value`);
      return argv[++i];
    };
    switch (arg) {
      case "--manifest": manifest = next(); break;
      case "--out": out = next(); break;
      case "--backend": spec.backend = next(); break;
      case "--max-tokens": spec.maxTextTokens = parseInt(next(), 10); break;
      case "--image-size": spec.imageSize = parseInt(next(), 10); break;
      case "--image-choice": {
        const v = next();
        if (v !== "first" && v !== "random") throw new Error("--image-choice: first|random");
        spec.imageChoice = v;
        break;
      }
      case "--seed": spec.seed = parseInt(next(), 10); break;
      case "--help": case "-h":
        console.log(USAGE);
        process.exit(0);
        break;
      default:
        throw new Error(`unknown argument: ${arg}`);
    }
  }
  if (!manifest || !out) throw new Error("--manifest and --out are required");
  return { manifest, out, spec };
}

async function main() {
  try {
    const { manifest, out, spec } = parseArgs(process.argv.slice(2));
    await extractFromManifest(manifest, { ...DEFAULT_SPEC, ...spec }, out);
  } catch (e) {
    console.error(`error: ${(e as Error).message}`);
    console.error(USAGE);
    process.exit(1);
  }
}

main();
