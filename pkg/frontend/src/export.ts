/**
 * Export pipeline: TSV text collections in, binary embedding files out.
 *
 * Documents keep a [CLS] [D] prefix and are truncated to their first 180
 * body tokens; queries keep a [CLS] [Q] prefix and are padded with [MASK]
 * (or truncated) to exactly 32 tokens total.  A single vocabulary covers
 * both collections and is written as a sidecar with special and stop-word
 * flags.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import {
  encodeSummary,
  encodeToken,
  resolveCheckpoint,
  Style,
} from './encoder.js';
import {
  Dtype,
  EmbeddingRecord,
  encodeEmbeddingFile,
  encodeVocabulary,
} from './format.js';
import { CLS, D_MARKER, MASK, Q_MARKER, tokenize, Vocab } from './tokenizer.js';

export interface ExportConfig {
  checkpoint: string;
  style: Style;
  maxQueryLen: number;
  maxDocLen: number;
  dtype: Dtype;
}

export const DEFAULTS = { maxQueryLen: 32, maxDocLen: 180, dtype: 'f16' as Dtype };

export interface TextRecord {
  id: bigint;
  text: string;
}

export function readTsv(filePath: string): TextRecord[] {
  const out: TextRecord[] = [];
  const lines = fs.readFileSync(filePath, 'utf-8').split('\n');
  for (const line of lines) {
    if (!line.trim()) continue;
    const tab = line.indexOf('\t');
    if (tab < 0) throw new Error(`malformed TSV line (no tab): ${line.slice(0, 40)}`);
    out.push({ id: BigInt(line.slice(0, tab)), text: line.slice(tab + 1) });
  }
  return out;
}

function docTokenIds(vocab: Vocab, text: string, maxDocLen: number): Uint32Array {
  const body = tokenize(text).slice(0, maxDocLen).map((s) => vocab.idOf(s));
  return Uint32Array.from([CLS, D_MARKER, ...body]);
}

function queryTokenIds(vocab: Vocab, text: string, maxQueryLen: number): Uint32Array {
  const budget = maxQueryLen - 2; // [CLS] [Q] prefix
  const body = tokenize(text).slice(0, budget).map((s) => vocab.idOf(s));
  const ids = [CLS, Q_MARKER, ...body];
  while (ids.length < maxQueryLen) ids.push(MASK);
  return Uint32Array.from(ids);
}

function encodeRecord(
  spec: ReturnType<typeof resolveCheckpoint>,
  id: bigint,
  tokenIds: Uint32Array,
): EmbeddingRecord {
  const n = tokenIds.length;
  const embeddings = new Float32Array(n * spec.dim);
  for (let i = 0; i < n; i++) {
    embeddings.set(encodeToken(spec, tokenIds[i], i), i * spec.dim);
  }
  const rec: EmbeddingRecord = { id, tokenIds, embeddings };
  if (spec.clsDim > 0) rec.summary = encodeSummary(spec, tokenIds);
  return rec;
}

export interface ExportResult {
  docCount: number;
  queryCount: number;
  skipped: bigint[];
  vocabSize: number;
}

export function exportCollections(
  config: ExportConfig,
  docs: TextRecord[],
  queries: TextRecord[],
  outDir: string,
): ExportResult {
  const spec = resolveCheckpoint(config.checkpoint, config.style);
  const surfaces: string[] = [];
  for (const rec of [...docs, ...queries]) surfaces.push(...tokenize(rec.text));
  const vocab = new Vocab(surfaces);

  const skipped: bigint[] = [];
  const docRecords: EmbeddingRecord[] = [];
  for (const rec of docs) {
    const ids = docTokenIds(vocab, rec.text, config.maxDocLen);
    if (ids.length <= 2) {
      // nothing but the prefix: no usable content
      console.error(`skipping document ${rec.id}: no tokens after preprocessing`);
      skipped.push(rec.id);
      continue;
    }
    docRecords.push(encodeRecord(spec, rec.id, ids));
  }
  const queryRecords: EmbeddingRecord[] = [];
  for (const rec of queries) {
    if (tokenize(rec.text).length === 0) {
      console.error(`skipping query ${rec.id}: no tokens after preprocessing`);
      skipped.push(rec.id);
      continue;
    }
    queryRecords.push(encodeRecord(spec, rec.id, queryTokenIds(vocab, rec.text, config.maxQueryLen)));
  }

  fs.mkdirSync(outDir, { recursive: true });
  fs.writeFileSync(
    path.join(outDir, 'corpus.bin'),
    encodeEmbeddingFile(docRecords, spec.dim, spec.clsDim, config.dtype),
  );
  fs.writeFileSync(
    path.join(outDir, 'queries.bin'),
    encodeEmbeddingFile(queryRecords, spec.dim, spec.clsDim, config.dtype),
  );
  fs.writeFileSync(path.join(outDir, 'vocab.tsv'), encodeVocabulary(vocab.entries()));
  return {
    docCount: docRecords.length,
    queryCount: queryRecords.length,
    skipped,
    vocabSize: vocab.size,
  };
}
