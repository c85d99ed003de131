#!/usr/bin/env node
// Sidecar CLI: `finetune` trains the projection head on alignment pairs,
// `export` writes embedding tables in the core's hand-off format.

import * as fs from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { DEFAULT_CONFIG, Encoder, finetune } from "./encoder.js";
import { writeEmbeddingFile } from "./embeddingFile.js";
import { readEntityTexts, readLiterals, readPairs } from "./tsv.js";

export async function runFinetune(argv: {
  pairs: string;
  texts1?: string;
  texts2?: string;
  model: string;
  epochs: number;
  margin: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}): Promise<void> {
  const rawPairs = readPairs(argv.pairs);
  let pairs: Array<[string, string]>;
  if (argv.texts1 && argv.texts2) {
    // pair file carries entity ids; join through the text tables
    const t1 = readEntityTexts(argv.texts1);
    const t2 = readEntityTexts(argv.texts2);
    pairs = [];
    for (const [a, b] of rawPairs) {
      const ta = t1.get(a);
      const tb = t2.get(b);
      if (ta !== undefined && tb !== undefined) pairs.push([ta, tb]);
    }
    if (pairs.length === 0) {
      throw new Error("no pair ids resolved through the text tables");
    }
  } else {
    pairs = rawPairs; // pair file already carries raw texts
  }
  const encoder = await finetune(pairs, {
    epochs: argv.epochs,
    margin: argv.margin,
    batchSize: argv.batchSize,
    learningRate: argv.learningRate,
    seed: argv.seed,
  });
  fs.writeFileSync(argv.model, JSON.stringify(encoder.toJSON()), "utf-8");
  console.log(`trained on ${pairs.length} pairs; model saved to ${argv.model}`);
  encoder.dispose();
}

export async function runExport(argv: {
  model: string;
  texts?: string;
  literals?: string;
  out: string;
  batch: number;
}): Promise<void> {
  const encoder = Encoder.fromJSON(JSON.parse(fs.readFileSync(argv.model, "utf-8")));
  let ids: string[];
  let texts: string[];
  if (argv.texts) {
    const table = readEntityTexts(argv.texts);
    ids = [...table.keys()];
    texts = ids.map((id) => table.get(id)!);
  } else if (argv.literals) {
    ids = readLiterals(argv.literals);
    texts = ids;
  } else {
    throw new Error("one of --texts or --literals is required");
  }
  const vectors: number[][] = [];
  for (let lo = 0; lo < texts.length; lo += argv.batch) {
    vectors.push(...encoder.embed(texts.slice(lo, lo + argv.batch)));
  }
  writeEmbeddingFile(argv.out, ids, vectors);
  console.log(`wrote ${ids.length} vectors (dim ${encoder.config.outputDim}) to ${argv.out}`);
  encoder.dispose();
}

export async function main(args: string[]): Promise<number> {
  try {
    await yargs(args)
      .scriptName("nalign-sidecar")
      .command(
        "finetune",
        "train the projection head on alignment pairs",
        (y) =>
          y
            .option("pairs", { type: "string", demandOption: true })
            .option("texts1", { type: "string" })
            .option("texts2", { type: "string" })
            .option("model", { type: "string", demandOption: true })
            .option("epochs", { type: "number", default: DEFAULT_CONFIG.epochs })
            .option("margin", { type: "number", default: DEFAULT_CONFIG.margin })
            .option("batch-size", { type: "number", default: DEFAULT_CONFIG.batchSize })
            .option("learning-rate", { type: "number", default: DEFAULT_CONFIG.learningRate })
            .option("seed", { type: "number", default: DEFAULT_CONFIG.seed }),
        async (a) =>
          runFinetune({
            pairs: a.pairs,
            texts1: a.texts1,
            texts2: a.texts2,
            model: a.model,
            epochs: a.epochs,
            margin: a.margin,
            batchSize: a["batch-size"],
            learningRate: a["learning-rate"],
            seed: a.seed,
          }),
      )
      .command(
        "export",
        "write an embedding table for one channel",
        (y) =>
          y
            .option("model", { type: "string", demandOption: true })
            .option("texts", { type: "string", describe: "entity-text TSV (id<TAB>text)" })
            .option("literals", { type: "string", describe: "one literal per line" })
            .option("out", { type: "string", demandOption: true })
            .option("batch", { type: "number", default: 512 }),
        async (a) =>
          runExport({
            model: a.model,
            texts: a.texts,
            literals: a.literals,
            out: a.out,
            batch: a.batch,
          }),
      )
      .demandCommand(1)
      .strict()
      .fail((msg, err) => {
        throw err ?? new Error(msg);
      })
      .parseAsync();
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (isDirectRun) {
  main(hideBin(process.argv)).then((code) => {
    process.exitCode = code;
  });
}
