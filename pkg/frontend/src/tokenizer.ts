/**
 * Deterministic whitespace/punctuation tokenizer and vocabulary builder.
 *
 * Special tokens occupy the low ids; the remaining ids are assigned to the
 * sorted set of surfaces seen across the whole export, so the mapping is a
 * pure function of the input texts.
 */

import { VocabEntry } from './format.js';

export const SPECIAL_TOKENS = ['[CLS]', '[SEP]', '[Q]', '[D]', '[MASK]'] as const;
export const CLS = 0;
export const SEP = 1;
export const Q_MARKER = 2;
export const D_MARKER = 3;
export const MASK = 4;

// Fixed English stop-word list (surface forms).
export const STOP_WORDS = new Set([
  'a', 'an', 'and', 'are', 'as', 'at', 'be', 'but', 'by', 'for', 'from',
  'had', 'has', 'have', 'he', 'her', 'his', 'i', 'if', 'in', 'into', 'is',
  'it', 'its', 'my', 'no', 'not', 'of', 'on', 'or', 'our', 'she', 'so',
  'that', 'the', 'their', 'then', 'there', 'these', 'they', 'this', 'to',
  'was', 'we', 'were', 'what', 'when', 'which', 'who', 'will', 'with', 'you',
]);

export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[a-z0-9]+/g) ?? [];
}

export class Vocab {
  private ids = new Map<string, number>();

  constructor(surfaces: Iterable<string>) {
    SPECIAL_TOKENS.forEach((tok, i) => this.ids.set(tok, i));
    const unique = Array.from(new Set(surfaces)).sort();
    for (const surface of unique) {
      if (!this.ids.has(surface)) this.ids.set(surface, this.ids.size);
    }
  }

  get size(): number {
    return this.ids.size;
  }

  idOf(surface: string): number {
    const id = this.ids.get(surface);
    if (id === undefined) throw new Error(`surface not in vocabulary: ${surface}`);
    return id;
  }

  entries(): VocabEntry[] {
    const out: VocabEntry[] = [];
    for (const [surface, id] of this.ids) {
      out.push({
        id,
        surface,
        special: id < SPECIAL_TOKENS.length,
        stopword: STOP_WORDS.has(surface),
      });
    }
    out.sort((a, b) => a.id - b.id);
    return out;
  }
}
