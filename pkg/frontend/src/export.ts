/** The export job: embed a labeled dataset and write the three SEMB splits
 * (codebook / classifier-train / test) plus a reproducibility manifest. */

import * as fs from "node:fs";
import * as path from "node:path";

import { SourceDataset, loadImageFolder, loadTextCsv } from "./dataset.js";
import { Embedder, getEmbedder } from "./embedder.js";
import { Rng } from "./rng.js";
import { SembDataset, writeSemb } from "./semb.js";

export interface ExportJob {
  sourceKind: "text-csv" | "image-folder";
  inputPath: string;
  model: string;
  outDir: string;
  /** split sizes: stored-codebook rows and test rows; the remainder trains
   * the receiver classifier (capped by trainN when given) */
  codebookN: number;
  testN: number;
  trainN?: number;
  seed: number;
  /** dimension knob for the offline hash embedder */
  dim?: number;
}

export interface ExportResult {
  codebookPath: string;
  trainPath: string;
  testPath: string;
  manifestPath: string;
  p: number;
  nClass: number;
  counts: { codebook: number; train: number; test: number };
}

function toSemb(vectors: Float32Array[], labels: number[], nClass: number): SembDataset {
  const n = vectors.length;
  const p = vectors[0].length;
  const embeddings = new Float32Array(n * p);
  for (const [i, v] of vectors.entries()) {
    if (v.length !== p) throw new Error("embedding model returned inconsistent dimensions");
    embeddings.set(v, i * p);
  }
  return { embeddings, n, p, labels: Uint16Array.from(labels), nClass };
}

async function embedItems(ds: SourceDataset, embedder: Embedder, batch = 64): Promise<Float32Array[]> {
  const out: Float32Array[] = [];
  for (let start = 0; start < ds.items.length; start += batch) {
    const chunk = ds.items.slice(start, start + batch);
    if (ds.kind === "text-csv") {
      out.push(...await embedder.embedTexts(chunk.map((item) => item.text ?? "")));
    } else {
      const buffers = chunk.map((item) => fs.readFileSync(item.imagePath!));
      out.push(...await embedder.embedImages(buffers));
    }
  }
  return out;
}

export async function runExport(job: ExportJob): Promise<ExportResult> {
  if (job.codebookN < 1 || job.testN < 1) {
    throw new Error("codebookN and testN must be >= 1 (empty split)");
  }
  const ds = job.sourceKind === "text-csv" ? loadTextCsv(job.inputPath) : loadImageFolder(job.inputPath);
  const total = ds.items.length;
  const trainN = job.trainN ?? total - job.codebookN - job.testN;
  if (trainN < 1) throw new Error("classifier-train split is empty");
  if (job.codebookN + job.testN + trainN > total) {
    throw new Error(`split sizes ${job.codebookN}+${job.testN}+${trainN} exceed dataset size ${total}`);
  }

  const order = new Rng(job.seed).permutation(total);
  const splits = {
    codebook: order.slice(0, job.codebookN),
    test: order.slice(job.codebookN, job.codebookN + job.testN),
    train: order.slice(job.codebookN + job.testN, job.codebookN + job.testN + trainN),
  };

  const embedder = getEmbedder(job.model, job.dim ?? 256);
  const vectors = await embedItems(ds, embedder);
  const classOf = new Map(ds.classes.map((cls, i) => [cls, i]));
  const labelOf = (i: number) => classOf.get(ds.items[i].label)!;

  fs.mkdirSync(job.outDir, { recursive: true });
  const paths = {
    codebookPath: path.join(job.outDir, "codebook.semb"),
    trainPath: path.join(job.outDir, "train.semb"),
    testPath: path.join(job.outDir, "test.semb"),
    manifestPath: path.join(job.outDir, "manifest.txt"),
  };
  const nClass = ds.classes.length;
  writeSemb(paths.codebookPath, toSemb(splits.codebook.map((i) => vectors[i]),
                                       splits.codebook.map(labelOf), nClass));
  writeSemb(paths.trainPath, toSemb(splits.train.map((i) => vectors[i]),
                                    splits.train.map(labelOf), nClass));
  writeSemb(paths.testPath, toSemb(splits.test.map((i) => vectors[i]),
                                   splits.test.map(labelOf), nClass));

  const manifest = [
    `model = ${job.model}`,
    `seed = ${job.seed}`,
    `source = ${job.sourceKind}:${job.inputPath}`,
    `p = ${vectors[0].length}`,
    `n_class = ${nClass}`,
    `classes = ${ds.classes.join(",")}`,
    `codebook_indices = ${splits.codebook.join(",")}`,
    `test_indices = ${splits.test.join(",")}`,
    `train_indices = ${splits.train.join(",")}`,
    "",
  ].join("\n");
  fs.writeFileSync(paths.manifestPath, manifest);

  return {
    ...paths,
    p: vectors[0].length,
    nClass,
    counts: { codebook: job.codebookN, train: trainN, test: job.testN },
  };
}
