/** One news post as listed in the input manifest. */
export interface RawPost {
  id: string;
  text: string;
  /** Single path, or several; multi-image posts are resolved by imageChoice. */
  image: string | string[];
  label: 0 | 1;
}

export interface ExtractSpec {
  /** Encoder backend: "toy" is bundled and offline; others are plug points. */
  backend: string;
  textModel: string;
  imageModel: string;
  clipModel: string;
  maxTextTokens: number;
  imageSize: number;
  batchSize: number;
  /** Multi-image policy: lexicographically first (default) or seeded random. */
  imageChoice: "first" | "random";
  seed: number;
}

export const DEFAULT_SPEC: ExtractSpec = {
  backend: "toy",
  textModel: "bert-base-uncased",
  imageModel: "resnet-101-pooled",
  clipModel: "ViT-B/32",
  maxTextTokens: 300,
  imageSize: 224,
  batchSize: 16,
  imageChoice: "first",
  seed: 0,
};

export interface EmbeddingRecord {
  id: string;
  label: 0 | 1;
  fBert: Float32Array;
  fResnet: Float32Array;
  fClipT: Float32Array;
  fClipI: Float32Array;
}

/** RGB image as flat rows of r,g,b bytes. */
export interface RgbImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

/**
 * An encoder backend produces all four embeddings.  Implementations must be
 * deterministic for fixed weights/inputs (no dropout at inference).
 */
export interface EncoderBackend {
  readonly textDim: number;
  readonly imageDim: number;
  readonly clipDim: number;
  encodeText(tokens: string[]): Float32Array;
  encodeImage(image: RgbImage): Float32Array;
  encodeClipText(tokens: string[]): Float32Array;
  encodeClipImage(image: RgbImage): Float32Array;
}
