/**
 * Deterministic token encoders standing in for pretrained checkpoints.
 *
 * Each registered checkpoint maps a (token id, position) pair to a fixed
 * L2-normalized vector derived from a seeded PRNG, so exports are
 * reproducible bit-for-bit.  Unknown checkpoint identifiers are fatal.
 */

export type Style = 'colbert' | 'coil';

export interface CheckpointSpec {
  style: Style;
  /** per-token embedding dimension */
  dim: number;
  /** summary ([CLS]) dimension; 0 when the style has no summary vector */
  clsDim: number;
  seed: number;
}

const REGISTRY: Record<string, CheckpointSpec> = {
  'colbert-mini': { style: 'colbert', dim: 128, clsDim: 0, seed: 101 },
  'coil-mini': { style: 'coil', dim: 32, clsDim: 768, seed: 202 },
};

export function resolveCheckpoint(id: string, style: Style): CheckpointSpec {
  const spec = REGISTRY[id];
  if (!spec) {
    throw new Error(
      `unknown checkpoint '${id}' (available: ${Object.keys(REGISTRY).join(', ')})`,
    );
  }
  if (spec.style !== style) {
    throw new Error(`checkpoint '${id}' is ${spec.style}-style, not ${style}`);
  }
  return spec;
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** Small fast PRNG; good enough for reproducible pseudo-embeddings. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function gaussianVector(seedKey: string, dim: number): Float32Array {
  const rand = mulberry32(fnv1a(seedKey));
  const out = new Float32Array(dim);
  for (let i = 0; i < dim; i += 2) {
    // Box-Muller
    const u = Math.max(rand(), 1e-12);
    const v = rand();
    const r = Math.sqrt(-2 * Math.log(u));
    out[i] = r * Math.cos(2 * Math.PI * v);
    if (i + 1 < dim) out[i + 1] = r * Math.sin(2 * Math.PI * v);
  }
  let norm = 0;
  for (let i = 0; i < dim; i++) norm += out[i] * out[i];
  norm = Math.sqrt(norm) || 1;
  for (let i = 0; i < dim; i++) out[i] = out[i] / norm;
  return out;
}

/** Contextual token embedding: a token-identity direction plus a small
 * position-dependent perturbation, L2-normalized. */
export function encodeToken(spec: CheckpointSpec, tokenId: number, position: number): Float32Array {
  const base = gaussianVector(`${spec.seed}:tok:${tokenId}`, spec.dim);
  const jitter = gaussianVector(`${spec.seed}:tok:${tokenId}:pos:${position}`, spec.dim);
  const out = new Float32Array(spec.dim);
  let norm = 0;
  for (let i = 0; i < spec.dim; i++) {
    out[i] = base[i] + 0.12 * jitter[i];
    norm += out[i] * out[i];
  }
  norm = Math.sqrt(norm) || 1;
  for (let i = 0; i < spec.dim; i++) out[i] = out[i] / norm;
  return out;
}

/** Summary vector derived from the whole token sequence. */
export function encodeSummary(spec: CheckpointSpec, tokenIds: Uint32Array): Float32Array {
  return gaussianVector(`${spec.seed}:cls:${Array.from(tokenIds).join(',')}`, spec.clsDim);
}
