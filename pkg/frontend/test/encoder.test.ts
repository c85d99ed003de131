import { describe, expect, it } from "vitest";

import { DEFAULT_CONFIG, Encoder, finetune } from "../src/encoder.js";
import { cosine, featurize } from "../src/textFeatures.js";

// Synthetic cross-"language" names: the right side applies a consistent
// token transformation so there is signal to learn, never string identity.
function makeNamePairs(n: number, seed = 3): Array<[string, string]> {
  const pairs: Array<[string, string]> = [];
  for (let i = 0; i < n; i++) {
    const stem = `entity ${((i * 2654435761) >>> 16).toString(36)} ${i % 7}`;
    pairs.push([`${stem} city`, `ville ${stem.toUpperCase()}`]);
  }
  return pairs;
}

describe("featurizer", () => {
  it("is deterministic and unit-normalized", () => {
    const a = featurize("Wellington");
    const b = featurize("Wellington");
    expect(Array.from(a)).toEqual(Array.from(b));
    let norm = 0;
    for (const x of a) norm += x * x;
    expect(Math.sqrt(norm)).toBeCloseTo(1, 9);
  });

  it("scores related strings above unrelated ones", () => {
    const close = cosine(featurize("Michael Jackson"), featurize("michael jackson (singer)"));
    const far = cosine(featurize("Michael Jackson"), featurize("Wellington Harbour"));
    expect(close).toBeGreaterThan(far);
  });
});

describe("finetune", () => {
  it("rejects an empty training set", async () => {
    await expect(finetune([])).rejects.toThrow(/no training pairs/);
  });

  it("lifts held-out positive pairs above random pairs", async () => {
    const all = makeNamePairs(120);
    const train = all.slice(0, 90);
    const held = all.slice(90);
    const encoder = await finetune(train, { epochs: 8, seed: 11 });
    const left = encoder.embed(held.map((p) => p[0]));
    const right = encoder.embed(held.map((p) => p[1]));
    let positive = 0;
    for (let i = 0; i < held.length; i++) positive += cosine(left[i], right[i]);
    positive /= held.length;
    let random = 0;
    let count = 0;
    for (let i = 0; i < held.length; i++) {
      for (let j = 0; j < held.length; j++) {
        if (j === i) continue;
        random += cosine(left[i], right[j]);
        count++;
      }
    }
    random /= count;
    expect(positive).toBeGreaterThan(random);
    encoder.dispose();
  }, 120_000);

  it("round-trips through JSON with identical outputs", async () => {
    const encoder = await finetune(makeNamePairs(24), { epochs: 2, seed: 5 });
    const clone = Encoder.fromJSON(JSON.parse(JSON.stringify(encoder.toJSON())));
    const a = encoder.embed(["Heal the World"])[0];
    const b = clone.embed(["Heal the World"])[0];
    for (let i = 0; i < a.length; i++) expect(a[i]).toBeCloseTo(b[i], 6);
    expect(clone.config.outputDim).toBe(DEFAULT_CONFIG.outputDim);
    encoder.dispose();
    clone.dispose();
  }, 60_000);
});
