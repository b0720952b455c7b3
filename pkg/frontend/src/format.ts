/**
 * Binary token-embedding file format (little-endian):
 *
 *   magic "LTIE" | u32 version=1 | u32 h | u32 h_cls | u8 dtype | u64 count
 *   per record: u64 id | u32 n | n x u32 token ids | n*h scalars | h_cls scalars
 *
 * dtype 0 = float32 payloads, dtype 1 = float16.
 */

export const MAGIC = 'LTIE';
export const VERSION = 1;

export type Dtype = 'f32' | 'f16';

export interface EmbeddingRecord {
  id: bigint;
  tokenIds: Uint32Array;
  /** row-major (n, h) */
  embeddings: Float32Array;
  /** length h_cls, required when the file carries summary vectors */
  summary?: Float32Array;
}

/** IEEE 754 binary16 encoding with round-to-nearest-even. */
export function floatToHalf(value: number): number {
  const f32 = new Float32Array(1);
  const u32 = new Uint32Array(f32.buffer);
  f32[0] = value;
  const x = u32[0];
  const sign = (x >>> 16) & 0x8000;
  const exp = (x >>> 23) & 0xff;
  const mant = x & 0x7fffff;
  if (exp === 0xff) {
    // inf / nan
    return sign | 0x7c00 | (mant ? 0x200 : 0);
  }
  let e = exp - 127 + 15;
  if (e >= 0x1f) return sign | 0x7c00; // overflow -> inf
  if (e <= 0) {
    // subnormal half: shift the full 24-bit significand into place with
    // round-to-nearest-even; a carry into bit 10 yields the smallest normal
    const shift = 14 - e;
    if (shift > 24) return sign; // underflow -> signed zero
    const m = mant | 0x800000;
    const halfBit = 1 << (shift - 1);
    const rem = m & ((1 << shift) - 1);
    let r = m >>> shift;
    if (rem > halfBit || (rem === halfBit && (r & 1))) r += 1;
    return sign | r;
  }
  const rounded = (mant + 0xfff + ((mant >>> 13) & 1)) >>> 13;
  if (rounded & 0x400) {
    // mantissa overflowed into the exponent
    e += 1;
    if (e >= 0x1f) return sign | 0x7c00;
    return sign | (e << 10);
  }
  return sign | (e << 10) | (rounded & 0x3ff);
}

export function halfToFloat(bits: number): number {
  const sign = (bits & 0x8000) ? -1 : 1;
  const exp = (bits >>> 10) & 0x1f;
  const mant = bits & 0x3ff;
  if (exp === 0) return sign * mant * 2 ** -24;
  if (exp === 0x1f) return mant ? NaN : sign * Infinity;
  return sign * (1 + mant / 1024) * 2 ** (exp - 15);
}

function scalarBytes(dtype: Dtype): number {
  return dtype === 'f32' ? 4 : 2;
}

function writeScalars(view: DataView, offset: number, values: Float32Array, dtype: Dtype): number {
  for (let i = 0; i < values.length; i++) {
    if (dtype === 'f32') {
      view.setFloat32(offset, values[i], true);
      offset += 4;
    } else {
      view.setUint16(offset, floatToHalf(values[i]), true);
      offset += 2;
    }
  }
  return offset;
}

/** Serializes a full embedding file into a Buffer. */
export function encodeEmbeddingFile(
  records: EmbeddingRecord[],
  h: number,
  hCls: number,
  dtype: Dtype,
): Buffer {
  const sb = scalarBytes(dtype);
  let size = 4 + 4 + 4 + 4 + 1 + 8;
  for (const rec of records) {
    size += 8 + 4 + rec.tokenIds.length * 4 + rec.tokenIds.length * h * sb + hCls * sb;
  }
  const buf = Buffer.alloc(size);
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  buf.write(MAGIC, 0, 'ascii');
  view.setUint32(4, VERSION, true);
  view.setUint32(8, h, true);
  view.setUint32(12, hCls, true);
  view.setUint8(16, dtype === 'f32' ? 0 : 1);
  view.setBigUint64(17, BigInt(records.length), true);
  let offset = 25;
  for (const rec of records) {
    const n = rec.tokenIds.length;
    if (rec.embeddings.length !== n * h) {
      throw new Error(`record ${rec.id}: embedding payload is not n*h`);
    }
    view.setBigUint64(offset, rec.id, true);
    offset += 8;
    view.setUint32(offset, n, true);
    offset += 4;
    for (let i = 0; i < n; i++) {
      view.setUint32(offset, rec.tokenIds[i], true);
      offset += 4;
    }
    offset = writeScalars(view, offset, rec.embeddings, dtype);
    if (hCls > 0) {
      if (!rec.summary || rec.summary.length !== hCls) {
        throw new Error(`record ${rec.id}: summary vector missing or of wrong length`);
      }
      offset = writeScalars(view, offset, rec.summary, dtype);
    }
  }
  return buf;
}

export interface VocabEntry {
  id: number;
  surface: string;
  special: boolean;
  stopword: boolean;
}

/** Vocabulary sidecar: UTF-8 lines of `id<TAB>surface<TAB>flags`. */
export function encodeVocabulary(entries: VocabEntry[]): string {
  const lines = entries.map((e) => {
    let flags = '';
    if (e.special) flags += 'S';
    if (e.stopword) flags += 'W';
    return `${e.id}\t${e.surface}\t${flags || '-'}`;
  });
  return lines.join('\n') + '\n';
}
