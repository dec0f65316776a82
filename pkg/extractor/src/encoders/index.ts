import { EncoderBackend, ExtractSpec } from "../types.js";
import { ToyBackend } from "./toy.js";

/**
 * Resolve the encoder backend named in the spec.
 *
 * "toy" is bundled and fully offline.  "module:<path>" dynamically imports a
 * user module whose default export (or createBackend export) is a
 * `(spec) => EncoderBackend | Promise<EncoderBackend>` factory; that is the
 * hook for wiring real pretrained encoders (e.g. a transformers.js pipeline
 * with bert-base, pooled ResNet-101 features, and ViT-B/32 CLIP), which need
 * network access to fetch weights and are therefore not bundled.
 */
export async function makeBackend(spec: ExtractSpec): Promise<EncoderBackend> {
  if (spec.backend === "toy") {
    return new ToyBackend();
  }
  if (spec.backend.startsWith("module:")) {
    const path = spec.backend.slice("module:".length);
    const mod = await import(path);
    const factory = mod.createBackend ?? mod.default;
    if (typeof factory !== "function") {
      throw new Error(`backend module ${path} exports no createBackend factory`);
    }
    return await factory(spec);
  }
  throw new Error(
    `unknown backend "${spec.backend}"; use "toy" or "module:<path-to-factory>"`);
}
