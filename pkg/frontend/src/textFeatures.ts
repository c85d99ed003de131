// Frozen base featurizer: hashed character n-grams with the signed hashing
// trick, L2-normalized. Deterministic, language-agnostic, 768 dimensions to
// match a pooled transformer output that a drop-in base encoder would give.

export const FEATURE_DIM = 768;

const NGRAM_SIZES = [2, 3, 4];

function fnv1a(s: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < s.length; i++) {
    h ^= s.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

export function featurize(text: string, dim: number = FEATURE_DIM): Float64Array {
  const out = new Float64Array(dim);
  const s = `${text.toLowerCase().trim()}`;
  for (const n of NGRAM_SIZES) {
    for (let i = 0; i + n <= s.length; i++) {
      const h = fnv1a(`${n}:${s.slice(i, i + n)}`);
      const sign = (h & 1) === 0 ? 1 : -1;
      out[(h >>> 1) % dim] += sign;
    }
  }
  let norm = 0;
  for (let i = 0; i < dim; i++) norm += out[i] * out[i];
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let i = 0; i < dim; i++) out[i] /= norm;
  } else {
    out[0] = 1; // degenerate empty text: stable unit vector
  }
  return out;
}

export function featurizeAll(texts: string[], dim: number = FEATURE_DIM): Float64Array[] {
  return texts.map((t) => featurize(t, dim));
}

export function cosine(a: ArrayLike<number>, b: ArrayLike<number>): number {
  let dot = 0;
  let na = 0;
  let nb = 0;
  for (let i = 0; i < a.length; i++) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / Math.sqrt(na * nb);
}
