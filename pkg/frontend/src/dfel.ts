/**
 * DFEL binary feature files (little-endian throughout):
 *
 *   magic        4 bytes  "DFEL"
 *   version      u32
 *   n_samples    u64
 *   n_dims       u64
 *   n_classes    u32      (0 = unlabeled)
 *   provenance   u32 count; per entry u16 name length, UTF-8 name,
 *                u64 span start, u64 span end
 *   class names  u32 count (0 or n_classes); per entry u16 length, UTF-8
 *   labels       u32 x n_samples        (only when n_classes > 0)
 *   values       f32 x n_samples x n_dims, row-major
 *
 * This must stay byte-compatible with the training side, which validates
 * magic/version and rejects truncated or trailing bytes.
 */

import * as fs from "fs";

export const DFEL_MAGIC = "DFEL";
export const DFEL_VERSION = 1;

export interface ProvenanceSpan {
  name: string;
  start: number;
  end: number;
}

export interface FeatureFile {
  nSamples: number;
  nDims: number;
  values: Float32Array; // row-major
  labels: Uint32Array | null;
  classNames: string[] | null;
  provenance: ProvenanceSpan[];
}

function textBlock(name: string): Buffer {
  const raw = Buffer.from(name, "utf-8");
  if (raw.length > 0xffff) {
    throw new Error(`name too long for u16 length prefix: ${name}`);
  }
  const out = Buffer.alloc(2 + raw.length);
  out.writeUInt16LE(raw.length, 0);
  raw.copy(out, 2);
  return out;
}

export function encodeFeatureFile(file: FeatureFile): Buffer {
  const { nSamples, nDims, values, labels, classNames, provenance } = file;
  if (values.length !== nSamples * nDims) {
    throw new Error("values length disagrees with declared shape");
  }
  if (labels && labels.length !== nSamples) {
    throw new Error("labels length disagrees with n_samples");
  }
  let pos = 0;
  for (const span of provenance) {
    if (span.start !== pos || span.end <= span.start) {
      throw new Error("provenance spans must partition [0, n_dims)");
    }
    pos = span.end;
  }
  if (pos !== nDims) {
    throw new Error("provenance spans must partition [0, n_dims)");
  }

  const nClasses = labels ? (classNames ? classNames.length : Math.max(...labels) + 1) : 0;
  const parts: Buffer[] = [];

  const head = Buffer.alloc(4 + 4 + 8 + 8 + 4);
  head.write(DFEL_MAGIC, 0, "ascii");
  head.writeUInt32LE(DFEL_VERSION, 4);
  head.writeBigUInt64LE(BigInt(nSamples), 8);
  head.writeBigUInt64LE(BigInt(nDims), 16);
  head.writeUInt32LE(nClasses, 24);
  parts.push(head);

  const provCount = Buffer.alloc(4);
  provCount.writeUInt32LE(provenance.length, 0);
  parts.push(provCount);
  for (const span of provenance) {
    parts.push(textBlock(span.name));
    const spanBuf = Buffer.alloc(16);
    spanBuf.writeBigUInt64LE(BigInt(span.start), 0);
    spanBuf.writeBigUInt64LE(BigInt(span.end), 8);
    parts.push(spanBuf);
  }

  const names = labels && classNames ? classNames : [];
  const nameCount = Buffer.alloc(4);
  nameCount.writeUInt32LE(names.length, 0);
  parts.push(nameCount);
  for (const name of names) {
    parts.push(textBlock(name));
  }

  if (labels) {
    const labBuf = Buffer.alloc(4 * nSamples);
    for (let i = 0; i < nSamples; i++) {
      labBuf.writeUInt32LE(labels[i], 4 * i);
    }
    parts.push(labBuf);
  }

  const valBuf = Buffer.alloc(4 * values.length);
  for (let i = 0; i < values.length; i++) {
    valBuf.writeFloatLE(values[i], 4 * i);
  }
  parts.push(valBuf);

  return Buffer.concat(parts);
}

export function writeFeatureFile(file: FeatureFile, path: string): void {
  fs.writeFileSync(path, encodeFeatureFile(file));
}

/** Reader counterpart, used for validation and tests. */
export function decodeFeatureFile(buf: Buffer): FeatureFile {
  let off = 0;
  const take = (n: number): Buffer => {
    if (off + n > buf.length) throw new Error("file truncated");
    const chunk = buf.subarray(off, off + n);
    off += n;
    return chunk;
  };
  const text = (): string => {
    const len = take(2).readUInt16LE(0);
    return take(len).toString("utf-8");
  };

  if (take(4).toString("ascii") !== DFEL_MAGIC) {
    throw new Error("bad magic bytes (not a DFEL feature file)");
  }
  const version = take(4).readUInt32LE(0);
  if (version !== DFEL_VERSION) {
    throw new Error(`unsupported format version ${version}`);
  }
  const nSamples = Number(take(8).readBigUInt64LE(0));
  const nDims = Number(take(8).readBigUInt64LE(0));
  const nClasses = take(4).readUInt32LE(0);

  const provenance: ProvenanceSpan[] = [];
  const nSpans = take(4).readUInt32LE(0);
  for (let i = 0; i < nSpans; i++) {
    const name = text();
    const start = Number(take(8).readBigUInt64LE(0));
    const end = Number(take(8).readBigUInt64LE(0));
    provenance.push({ name, start, end });
  }

  const nNames = take(4).readUInt32LE(0);
  if (nNames !== 0 && nNames !== nClasses) {
    throw new Error("class-name count disagrees with n_classes");
  }
  const classNames: string[] | null = nNames
    ? Array.from({ length: nNames }, () => text())
    : null;

  let labels: Uint32Array | null = null;
  if (nClasses > 0) {
    const raw = take(4 * nSamples);
    labels = new Uint32Array(nSamples);
    for (let i = 0; i < nSamples; i++) {
      labels[i] = raw.readUInt32LE(4 * i);
    }
  }

  const raw = take(4 * nSamples * nDims);
  const values = new Float32Array(nSamples * nDims);
  for (let i = 0; i < values.length; i++) {
    values[i] = raw.readFloatLE(4 * i);
  }
  if (off !== buf.length) {
    throw new Error("trailing bytes after feature payload");
  }
  return { nSamples, nDims, values, labels, classNames, provenance };
}

export function readFeatureFile(path: string): FeatureFile {
  return decodeFeatureFile(fs.readFileSync(path));
}
