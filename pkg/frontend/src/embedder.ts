/** Embedding model registry.
 *
 * Two deterministic local models keep the exporter and its tests fully
 * offline; any other model name is loaded through transformers.js (install
 * `@xenova/transformers` and use e.g. "Xenova/all-MiniLM-L6-v2" for text or
 * "Xenova/clip-vit-base-patch32" for images, comparable to the SBERT/CLIP
 * extractors the simulator's experiments assume).
 */

export interface Embedder {
  readonly name: string;
  embedTexts(texts: string[]): Promise<Float32Array[]>;
  embedImages(images: Buffer[]): Promise<Float32Array[]>;
}

function fnv1a(data: string | Buffer): number {
  let h = 0x811c9dc5;
  if (typeof data === "string") {
    for (let i = 0; i < data.length; i++) {
      h ^= data.charCodeAt(i);
      h = Math.imul(h, 0x01000193);
    }
  } else {
    for (const byte of data) {
      h ^= byte;
      h = Math.imul(h, 0x01000193);
    }
  }
  return h >>> 0;
}

function l2Normalize(v: Float32Array): Float32Array {
  let sum = 0;
  for (const x of v) sum += x * x;
  const norm = Math.sqrt(sum);
  if (norm > 0) {
    for (let i = 0; i < v.length; i++) v[i] /= norm;
  }
  return v;
}

/** Hashed bag-of-words text embedder: deterministic, offline, and preserving
 * the property that near-duplicate texts land close in L2 (shared tokens hash
 * to the same buckets). Not a semantic model; intended for tests and dry
 * runs. */
export class HashTextEmbedder implements Embedder {
  readonly name = "hash-text";

  constructor(readonly dim: number = 256) {
    if (dim < 8) throw new Error("hash-text dim must be >= 8");
  }

  async embedTexts(texts: string[]): Promise<Float32Array[]> {
    return texts.map((text) => {
      const v = new Float32Array(this.dim);
      const tokens = text.toLowerCase().split(/[^a-z0-9']+/).filter(Boolean);
      for (let i = 0; i < tokens.length; i++) {
        const uni = fnv1a(tokens[i]);
        v[uni % this.dim] += 1;
        if (i + 1 < tokens.length) {
          const bi = fnv1a(tokens[i] + " " + tokens[i + 1]);
          v[bi % this.dim] += 0.25;
        }
      }
      for (let i = 0; i < this.dim; i++) v[i] = Math.sqrt(v[i]);
      return l2Normalize(v);
    });
  }

  async embedImages(): Promise<Float32Array[]> {
    throw new Error("hash-text embeds text only; use byte-histogram or a CLIP model for images");
  }
}

/** Byte-histogram image embedder: deterministic and offline; near-duplicate
 * files produce near-identical histograms. */
export class ByteHistogramEmbedder implements Embedder {
  readonly name = "byte-histogram";

  async embedTexts(): Promise<Float32Array[]> {
    throw new Error("byte-histogram embeds images only; use hash-text or a sentence model for text");
  }

  async embedImages(images: Buffer[]): Promise<Float32Array[]> {
    return images.map((data) => {
      const v = new Float32Array(256);
      for (const byte of data) v[byte] += 1;
      for (let i = 0; i < 256; i++) v[i] = Math.sqrt(v[i]);
      return l2Normalize(v);
    });
  }
}

/** transformers.js-backed embedder for real pretrained checkpoints. */
class TransformersEmbedder implements Embedder {
  private textPipe: any = null;
  private imagePipe: any = null;

  constructor(readonly name: string) {}

  private async load(task: "feature-extraction" | "image-feature-extraction") {
    let pipeline: any;
    // optional dependency: resolved only when a real checkpoint is requested
    const specifier = "@xenova/transformers";
    try {
      ({ pipeline } = await import(specifier));
    } catch (err) {
      throw new Error(
        `model ${this.name} needs the optional dependency @xenova/transformers ` +
        `(npm install @xenova/transformers): ${(err as Error).message}`,
      );
    }
    try {
      return await pipeline(task, this.name);
    } catch (err) {
      throw new Error(`failed to load model ${this.name}: ${(err as Error).message}`);
    }
  }

  async embedTexts(texts: string[]): Promise<Float32Array[]> {
    this.textPipe = this.textPipe ?? (await this.load("feature-extraction"));
    const out: Float32Array[] = [];
    for (const text of texts) {
      const t = await this.textPipe(text, { pooling: "mean", normalize: true });
      out.push(Float32Array.from(t.data as Float32Array));
    }
    return out;
  }

  async embedImages(images: Buffer[]): Promise<Float32Array[]> {
    this.imagePipe = this.imagePipe ?? (await this.load("image-feature-extraction"));
    const out: Float32Array[] = [];
    for (const image of images) {
      const blob = new Blob([new Uint8Array(image)]);
      const url = URL.createObjectURL(blob);
      try {
        const t = await this.imagePipe(url, { pooling: "mean", normalize: true });
        out.push(Float32Array.from(t.data as Float32Array));
      } finally {
        URL.revokeObjectURL(url);
      }
    }
    return out;
  }
}

export function getEmbedder(model: string, dim = 256): Embedder {
  if (model === "hash-text") return new HashTextEmbedder(dim);
  if (model === "byte-histogram") return new ByteHistogramEmbedder();
  return new TransformersEmbedder(model);
}

export function cosine(a: Float32Array, b: Float32Array): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / Math.sqrt(na * nb);
}
