import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { describe, expect, it } from "vitest";

import { main } from "../src/cli.js";
import { readEmbeddingFile } from "../src/embeddingFile.js";
import { cosine } from "../src/textFeatures.js";

function workdir(): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), "sidecar-cli-"));
}

describe("cli", () => {
  it("finetunes from id pairs joined through text tables, then exports", async () => {
    const dir = workdir();
    const ids1 = Array.from({ length: 30 }, (_, i) => `kg1/e${i}`);
    const ids2 = Array.from({ length: 30 }, (_, i) => `kg2/e${i}`);
    fs.writeFileSync(
      path.join(dir, "texts1.tsv"),
      ids1.map((id, i) => `${id}\tplace number ${i} west`).join("\n") + "\n",
    );
    fs.writeFileSync(
      path.join(dir, "texts2.tsv"),
      ids2.map((id, i) => `${id}\tPLACE NUMBER ${i} ouest`).join("\n") + "\n",
    );
    fs.writeFileSync(
      path.join(dir, "pairs.tsv"),
      ids1.map((id, i) => `${id}\t${ids2[i]}`).join("\n") + "\n",
    );
    const model = path.join(dir, "model.json");
    let rc = await main([
      "finetune",
      "--pairs", path.join(dir, "pairs.tsv"),
      "--texts1", path.join(dir, "texts1.tsv"),
      "--texts2", path.join(dir, "texts2.tsv"),
      "--model", model,
      "--epochs", "2",
    ]);
    expect(rc).toBe(0);
    expect(fs.existsSync(model)).toBe(true);

    const out1 = path.join(dir, "emb1.txt");
    rc = await main([
      "export", "--model", model, "--texts", path.join(dir, "texts1.tsv"), "--out", out1,
    ]);
    expect(rc).toBe(0);
    const table = readEmbeddingFile(out1);
    expect(table.size).toBe(30);
    const first = table.get("kg1/e0")!;
    expect(first).toHaveLength(300);
    expect(cosine(first, first)).toBeCloseTo(1, 6);
  }, 120_000);

  it("exports a value table from a literal list", async () => {
    const dir = workdir();
    fs.writeFileSync(path.join(dir, "pairs.tsv"), "alpha one\talpha 1\nbeta two\tbeta 2\ngamma three\tgamma 3\n");
    const model = path.join(dir, "model.json");
    expect(
      await main(["finetune", "--pairs", path.join(dir, "pairs.tsv"), "--model", model, "--epochs", "1"]),
    ).toBe(0);
    fs.writeFileSync(path.join(dir, "lits.txt"), "1947-11-25\nWellington\n1947-11-25\n");
    const out = path.join(dir, "values.txt");
    expect(
      await main(["export", "--model", model, "--literals", path.join(dir, "lits.txt"), "--out", out]),
    ).toBe(0);
    const table = readEmbeddingFile(out);
    expect(table.size).toBe(2); // duplicates collapse
    expect([...table.keys()].sort()).toEqual(["1947-11-25", "Wellington"]);
  }, 60_000);

  it("fails cleanly on unknown flags and missing inputs", async () => {
    expect(await main(["finetune", "--nope"])).toBe(1);
    expect(await main(["export", "--model", "/does/not/exist.json", "--out", "/tmp/x"])).toBe(1);
  });
});
