import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { readEmbeddingFile, writeEmbeddingFile } from "../src/embeddingFile.js";
import { cosine } from "../src/textFeatures.js";

function tmpFile(name: string): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "sidecar-"));
  return path.join(dir, name);
}

describe("embedding file format", () => {
  it("writes the header and one row per id", () => {
    const p = tmpFile("e.txt");
    writeEmbeddingFile(p, ["a", "b"], [[1, 0, 0], [0, 2, 0]]);
    const lines = fs.readFileSync(p, "utf-8").trim().split("\n");
    expect(lines[0]).toBe("#dim=3");
    expect(lines).toHaveLength(3);
    expect(lines[1].startsWith("a\t")).toBe(true);
  });

  it("rejects duplicate ids and zero vectors", () => {
    const p = tmpFile("bad.txt");
    expect(() => writeEmbeddingFile(p, ["a", "a"], [[1], [1]])).toThrow(/duplicate/);
    expect(() => writeEmbeddingFile(p, ["a"], [[0, 0]])).toThrow(/zero vector/);
  });

  it("round-trips cosines within 1e-5", () => {
    const rng = (() => {
      let s = 42;
      return () => {
        s = (s * 1103515245 + 12345) % 2147483648;
        return s / 2147483648 - 0.5;
      };
    })();
    const vectors = Array.from({ length: 20 }, () =>
      Array.from({ length: 300 }, rng),
    );
    const ids = vectors.map((_, i) => `id-${i}`);
    const p = tmpFile("roundtrip.txt");
    writeEmbeddingFile(p, ids, vectors);
    const back = readEmbeddingFile(p);
    expect(back.size).toBe(20);
    for (let i = 0; i < 20; i++) {
      for (let j = i + 1; j < 20; j++) {
        const want = cosine(vectors[i], vectors[j]);
        const got = cosine(back.get(`id-${i}`)!, back.get(`id-${j}`)!);
        expect(Math.abs(got - want)).toBeLessThanOrEqual(1e-5);
      }
    }
  });
});
