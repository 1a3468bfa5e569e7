#!/usr/bin/env node
/** embed-export: labeled dataset -> three SEMB splits + manifest.
 *
 * embed-export --source text-csv --input data.csv --model hash-text \
 *   --out exported/ --codebook-n 100 --test-n 50 [--train-n N] [--seed 7] [--dim 256]
 */

import { ExportJob, runExport } from "./export.js";

const USAGE = `usage: embed-export --source <text-csv|image-folder> --input <path> \\
  --model <name> --out <dir> --codebook-n <N> --test-n <N> \\
  [--train-n <N>] [--seed <int>] [--dim <int>]

models: hash-text (offline text), byte-histogram (offline image), or any
transformers.js checkpoint, e.g. Xenova/all-MiniLM-L6-v2 (text) or
Xenova/clip-vit-base-patch32 (image); real checkpoints need
'npm install @xenova/transformers'.`;

function parseArgs(argv: string[]): ExportJob {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`bad argument ${key}; ${USAGE}`);
    }
    opts.set(key.slice(2), value);
  }
  const need = (key: string): string => {
    const value = opts.get(key);
    if (value === undefined) throw new Error(`missing --${key}\n${USAGE}`);
    return value;
  };
  const int = (key: string, value: string): number => {
    const parsed = Number(value);
    if (!Number.isInteger(parsed)) throw new Error(`--${key} must be an integer, got ${value}`);
    return parsed;
  };
  const source = need("source");
  if (source !== "text-csv" && source !== "image-folder") {
    throw new Error(`--source must be text-csv or image-folder, got ${source}`);
  }
  const known = new Set(["source", "input", "model", "out", "codebook-n", "test-n",
                         "train-n", "seed", "dim"]);
  for (const key of opts.keys()) {
    if (!known.has(key)) throw new Error(`unknown option --${key}\n${USAGE}`);
  }
  return {
    sourceKind: source,
    inputPath: need("input"),
    model: need("model"),
    outDir: need("out"),
    codebookN: int("codebook-n", need("codebook-n")),
    testN: int("test-n", need("test-n")),
    trainN: opts.has("train-n") ? int("train-n", opts.get("train-n")!) : undefined,
    seed: opts.has("seed") ? int("seed", opts.get("seed")!) : 0,
    dim: opts.has("dim") ? int("dim", opts.get("dim")!) : undefined,
  };
}

export async function main(argv: string[]): Promise<number> {
  try {
    const job = parseArgs(argv);
    const result = await runExport(job);
    console.log(`model ${job.model}, p=${result.p}, ${result.nClass} classes`);
    console.log(`codebook ${result.counts.codebook} -> ${result.codebookPath}`);
    console.log(`train    ${result.counts.train} -> ${result.trainPath}`);
    console.log(`test     ${result.counts.test} -> ${result.testPath}`);
    console.log(`manifest -> ${result.manifestPath}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 2;
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(
  process.argv[1].split("/").pop() ?? "",
);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
