// The embedding hand-off format the alignment core loads:
//   line 1: "#dim=<N>"
//   lines:  id<TAB>v1 v2 ... vN
// Rows are L2-normalized before writing.

import * as fs from "node:fs";

export function writeEmbeddingFile(
  path: string,
  ids: string[],
  vectors: number[][],
): void {
  if (ids.length !== vectors.length) {
    throw new Error(`ids (${ids.length}) and vectors (${vectors.length}) disagree`);
  }
  const seen = new Set<string>();
  for (const id of ids) {
    if (seen.has(id)) throw new Error(`duplicate id ${JSON.stringify(id)}`);
    seen.add(id);
  }
  const dim = vectors.length > 0 ? vectors[0].length : 0;
  const lines: string[] = [`#dim=${dim}`];
  ids.forEach((id, row) => {
    const v = vectors[row];
    if (v.length !== dim) throw new Error(`row ${row} has ${v.length} dims, expected ${dim}`);
    let norm = 0;
    for (const x of v) norm += x * x;
    norm = Math.sqrt(norm);
    if (!(norm > 0)) throw new Error(`zero vector for id ${JSON.stringify(id)}`);
    lines.push(`${id}\t${v.map((x) => (x / norm).toPrecision(9)).join(" ")}`);
  });
  fs.writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}

export function readEmbeddingFile(path: string): Map<string, Float64Array> {
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  const header = lines[0];
  if (!header.startsWith("#dim=")) throw new Error(`${path}: missing #dim header`);
  const dim = Number(header.slice(5));
  const out = new Map<string, Float64Array>();
  for (let i = 1; i < lines.length; i++) {
    const line = lines[i];
    if (!line) continue;
    const tab = line.indexOf("\t");
    if (tab < 0) throw new Error(`${path}:${i + 1}: expected id<TAB>floats`);
    const id = line.slice(0, tab);
    const vec = Float64Array.from(line.slice(tab + 1).split(" "), Number);
    if (vec.length !== dim) throw new Error(`${path}:${i + 1}: expected ${dim} components`);
    out.set(id, vec);
  }
  return out;
}
