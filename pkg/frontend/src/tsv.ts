// Input readers for the two hand-off files the core produces/expects.

import * as fs from "node:fs";

/** `a<TAB>b` per line; returns the raw string pairs. */
export function readPairs(path: string): Array<[string, string]> {
  const out: Array<[string, string]> = [];
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line) return;
    const parts = line.split("\t");
    if (parts.length < 2) throw new Error(`${path}:${i + 1}: expected two tab-separated fields`);
    out.push([parts[0], parts[1]]);
  });
  return out;
}

/** `id<TAB>text` per line; duplicate ids are an error. */
export function readEntityTexts(path: string): Map<string, string> {
  const out = new Map<string, string>();
  const lines = fs.readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line) return;
    const tab = line.indexOf("\t");
    if (tab < 0) throw new Error(`${path}:${i + 1}: expected id<TAB>text`);
    const id = line.slice(0, tab);
    if (out.has(id)) throw new Error(`${path}:${i + 1}: duplicate id ${JSON.stringify(id)}`);
    out.set(id, line.slice(tab + 1));
  });
  return out;
}

/** One literal per line (id and text are the same string). */
export function readLiterals(path: string): string[] {
  const seen = new Set<string>();
  for (const line of fs.readFileSync(path, "utf-8").split("\n")) {
    if (line) seen.add(line);
  }
  return [...seen];
}
