/** SEMB dataset files: the wire format consumed by the semlink simulator.
 *
 * Little-endian: magic "SEMB", version u8=1, dtype u8=0 (float32),
 * reserved u16=0, N u32, p u32, n_class u32, then N*p float32 row-major,
 * then N labels as u16.
 */

import * as fs from "node:fs";

const MAGIC = "SEMB";
const HEADER_BYTES = 20;

export interface SembDataset {
  /** row-major N x p */
  embeddings: Float32Array;
  n: number;
  p: number;
  labels: Uint16Array;
  nClass: number;
}

export function encodeSemb(ds: SembDataset): Buffer {
  const { n, p, nClass } = ds;
  if (n < 1 || p < 1) throw new Error("dataset must have N >= 1 and p >= 1");
  if (nClass < 1) throw new Error("n_class must be >= 1");
  if (ds.embeddings.length !== n * p) {
    throw new Error(`embeddings length ${ds.embeddings.length} != N*p = ${n * p}`);
  }
  if (ds.labels.length !== n) throw new Error("need one label per row");
  for (const value of ds.embeddings) {
    if (!Number.isFinite(value)) throw new Error("embeddings must be finite");
  }
  for (const label of ds.labels) {
    if (label >= nClass) throw new Error(`label ${label} >= n_class ${nClass}`);
  }
  const buf = Buffer.alloc(HEADER_BYTES + 4 * n * p + 2 * n);
  const view = new DataView(buf.buffer, buf.byteOffset);
  buf.write(MAGIC, 0, "ascii");
  view.setUint8(4, 1); // version
  view.setUint8(5, 0); // dtype float32
  view.setUint16(6, 0, true); // reserved
  view.setUint32(8, n, true);
  view.setUint32(12, p, true);
  view.setUint32(16, nClass, true);
  let off = HEADER_BYTES;
  for (const value of ds.embeddings) {
    view.setFloat32(off, value, true);
    off += 4;
  }
  for (const label of ds.labels) {
    view.setUint16(off, label, true);
    off += 2;
  }
  return buf;
}

export function writeSemb(path: string, ds: SembDataset): void {
  fs.writeFileSync(path, encodeSemb(ds));
}

/** Strict parser mirroring the simulator's validator; used by the tests. */
export function readSemb(path: string): SembDataset {
  const buf = fs.readFileSync(path);
  if (buf.length < HEADER_BYTES) throw new Error("truncated header");
  const view = new DataView(buf.buffer, buf.byteOffset, buf.length);
  if (buf.toString("ascii", 0, 4) !== MAGIC) throw new Error("bad magic");
  if (view.getUint8(4) !== 1) throw new Error("unsupported version");
  if (view.getUint8(5) !== 0) throw new Error("unsupported dtype");
  if (view.getUint16(6, true) !== 0) throw new Error("reserved field must be 0");
  const n = view.getUint32(8, true);
  const p = view.getUint32(12, true);
  const nClass = view.getUint32(16, true);
  const need = HEADER_BYTES + 4 * n * p + 2 * n;
  if (buf.length !== need) throw new Error(`payload size ${buf.length} != expected ${need}`);
  const embeddings = new Float32Array(n * p);
  let off = HEADER_BYTES;
  for (let i = 0; i < n * p; i++) {
    embeddings[i] = view.getFloat32(off, true);
    off += 4;
  }
  const labels = new Uint16Array(n);
  for (let i = 0; i < n; i++) {
    labels[i] = view.getUint16(off, true);
    off += 2;
    if (labels[i] >= nClass) throw new Error(`label ${labels[i]} >= n_class ${nClass}`);
  }
  return { embeddings, n, p, labels, nClass };
}
