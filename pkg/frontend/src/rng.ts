/**
 * Deterministic weight-generation PRNG.
 *
 * Backbone stand-in weights are derived from the backbone name alone, so
 * extraction is reproducible across runs and machines without shipping
 * weight files. Uses FNV-1a to hash names and mulberry32 for the stream
 * (pure 32-bit integer math, exact in JS numbers).
 */

export function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

export class WeightStream {
  private state: number;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  /** Standard normals via Box-Muller. */
  normals(n: number): Float32Array {
    const out = new Float32Array(n);
    for (let i = 0; i < n; i += 2) {
      const u1 = this.next();
      const u2 = this.next();
      const r = Math.sqrt(-2.0 * Math.log(1.0 - u1));
      out[i] = r * Math.cos(2.0 * Math.PI * u2);
      if (i + 1 < n) {
        out[i + 1] = r * Math.sin(2.0 * Math.PI * u2);
      }
    }
    return out;
  }
}
