// Trainable projection head over the frozen featurizer, tuned with a
// pairwise margin loss: positive pairs should out-cosine every in-batch
// negative by the margin.

import * as tf from "@tensorflow/tfjs";

import { FEATURE_DIM, featurize } from "./textFeatures.js";

export interface FinetuneConfig {
  epochs: number;
  baseEncoder: string;
  outputDim: number;
  margin: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export const DEFAULT_CONFIG: FinetuneConfig = {
  epochs: 15,
  baseEncoder: `char-ngram-${FEATURE_DIM}`,
  outputDim: 300,
  margin: 0.4,
  batchSize: 32,
  learningRate: 0.05,
  seed: 7,
};

// Deterministic PRNG so weight init and batch shuffling are reproducible.
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a |= 0;
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export class Encoder {
  readonly config: FinetuneConfig;
  readonly projection: tf.Variable<tf.Rank.R2>;

  constructor(config: FinetuneConfig, projection?: tf.Tensor2D) {
    this.config = config;
    if (projection === undefined) {
      const rand = mulberry32(config.seed);
      const scale = 1 / Math.sqrt(FEATURE_DIM);
      const data = new Float32Array(FEATURE_DIM * config.outputDim);
      for (let i = 0; i < data.length; i++) data[i] = (rand() * 2 - 1) * scale;
      projection = tf.tensor2d(data, [FEATURE_DIM, config.outputDim]);
    }
    this.projection = tf.variable(projection) as tf.Variable<tf.Rank.R2>;
  }

  features(texts: string[]): tf.Tensor2D {
    const flat = new Float32Array(texts.length * FEATURE_DIM);
    texts.forEach((t, row) => {
      flat.set(Float32Array.from(featurize(t)), row * FEATURE_DIM);
    });
    return tf.tensor2d(flat, [texts.length, FEATURE_DIM]);
  }

  /** Unit-normalized output vectors, one row per text. */
  embed(texts: string[]): number[][] {
    return tf.tidy(() => {
      const projected = this.features(texts).matMul(this.projection);
      const normalized = tf.div(projected, tf.norm(projected, 2, 1, true));
      return normalized.arraySync() as number[][];
    });
  }

  toJSON(): object {
    return {
      config: this.config,
      projection: Array.from(this.projection.dataSync()),
    };
  }

  static fromJSON(data: any): Encoder {
    const config: FinetuneConfig = { ...DEFAULT_CONFIG, ...data.config };
    const projection = tf.tensor2d(
      Float32Array.from(data.projection),
      [FEATURE_DIM, config.outputDim],
    );
    return new Encoder(config, projection);
  }

  dispose(): void {
    this.projection.dispose();
  }
}

function marginLoss(a: tf.Tensor2D, b: tf.Tensor2D, margin: number): tf.Scalar {
  const an = tf.div(a, tf.norm(a, 2, 1, true));
  const bn = tf.div(b, tf.norm(b, 2, 1, true));
  const sims = an.matMul(bn, false, true); // [batch, batch] cosines
  const positives = sims.flatten().gather(
    tf.range(0, sims.shape[0]).mul(sims.shape[0] + 1).toInt(),
  );
  // hinge against every in-batch negative, diagonal excluded
  const hinge = tf.relu(sims.sub(positives.expandDims(1)).add(margin));
  const offDiagonal = tf.onesLike(sims).sub(tf.eye(sims.shape[0]));
  return hinge.mul(offDiagonal).mean() as tf.Scalar;
}

export async function finetune(
  pairs: Array<[string, string]>,
  config: Partial<FinetuneConfig> = {},
): Promise<Encoder> {
  if (pairs.length === 0) {
    throw new Error(
      "no training pairs: run without finetuning and let the core penalize the channel",
    );
  }
  const cfg: FinetuneConfig = { ...DEFAULT_CONFIG, ...config };
  const encoder = new Encoder(cfg);
  const optimizer = tf.train.adam(cfg.learningRate);
  const rand = mulberry32(cfg.seed ^ 0x9e3779b9);
  const order = pairs.map((_, i) => i);
  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    // Fisher-Yates with the seeded generator
    for (let i = order.length - 1; i > 0; i--) {
      const j = Math.floor(rand() * (i + 1));
      [order[i], order[j]] = [order[j], order[i]];
    }
    for (let start = 0; start < order.length; start += cfg.batchSize) {
      const batch = order.slice(start, start + cfg.batchSize);
      if (batch.length < 2) continue; // margin loss needs a negative
      const left = encoder.features(batch.map((i) => pairs[i][0]));
      const right = encoder.features(batch.map((i) => pairs[i][1]));
      optimizer.minimize(
        () =>
          marginLoss(
            left.matMul(encoder.projection) as tf.Tensor2D,
            right.matMul(encoder.projection) as tf.Tensor2D,
            cfg.margin,
          ),
        false,
        [encoder.projection],
      );
      left.dispose();
      right.dispose();
      await tf.nextFrame();
    }
  }
  optimizer.dispose();
  return encoder;
}
