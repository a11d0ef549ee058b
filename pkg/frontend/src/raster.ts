// Stroke capture raster. Strokes are stamped into an in-memory grayscale
// buffer (white paper, black ink, 8 px pen) that can be exported as PNG or
// PGM without needing a 2D canvas context, so the whole draw-submit path
// also works under jsdom.

export interface StrokePoint {
  x: number;
  y: number;
  t: number;
}

export const RASTER_SIZE = 512;
export const PEN_WIDTH = 8;

export class StrokeRaster {
  readonly width = RASTER_SIZE;
  readonly height = RASTER_SIZE;
  readonly data: Uint8Array;
  readonly strokes: StrokePoint[][] = [];
  private current: StrokePoint[] | null = null;

  constructor() {
    this.data = new Uint8Array(this.width * this.height).fill(255);
  }

  beginStroke(x: number, y: number, t = 0): void {
    this.current = [{ x, y, t }];
    this.strokes.push(this.current);
    this.stampDot(x, y);
  }

  extendStroke(x: number, y: number, t = 0): void {
    if (!this.current) return;
    const last = this.current[this.current.length - 1];
    this.current.push({ x, y, t });
    this.stampSegment(last.x, last.y, x, y);
  }

  endStroke(): void {
    this.current = null;
  }

  clear(): void {
    this.data.fill(255);
    this.strokes.length = 0;
    this.current = null;
  }

  isBlank(): boolean {
    return this.data.every((v) => v === 255);
  }

  private stampDot(x: number, y: number): void {
    this.stampSegment(x, y, x, y);
  }

  private stampSegment(x0: number, y0: number, x1: number, y1: number): void {
    const half = PEN_WIDTH / 2;
    const minX = Math.max(0, Math.floor(Math.min(x0, x1) - half - 1));
    const maxX = Math.min(this.width - 1, Math.ceil(Math.max(x0, x1) + half + 1));
    const minY = Math.max(0, Math.floor(Math.min(y0, y1) - half - 1));
    const maxY = Math.min(this.height - 1, Math.ceil(Math.max(y0, y1) + half + 1));
    const dx = x1 - x0;
    const dy = y1 - y0;
    const len2 = dx * dx + dy * dy;
    for (let y = minY; y <= maxY; y++) {
      for (let x = minX; x <= maxX; x++) {
        let px = x0;
        let py = y0;
        if (len2 > 0) {
          const t = Math.max(0, Math.min(1, ((x - x0) * dx + (y - y0) * dy) / len2));
          px = x0 + t * dx;
          py = y0 + t * dy;
        }
        const d2 = (x - px) * (x - px) + (y - py) * (y - py);
        if (d2 <= half * half) this.data[y * this.width + x] = 0;
      }
    }
  }

  toPgm(): Uint8Array {
    return encodePgm(this.width, this.height, this.data);
  }

  toPng(): Uint8Array {
    return encodePng(this.width, this.height, this.data);
  }
}

export function encodePgm(width: number, height: number, gray: Uint8Array): Uint8Array {
  const header = new TextEncoder().encode(`P5\n${width} ${height}\n255\n`);
  const out = new Uint8Array(header.length + gray.length);
  out.set(header, 0);
  out.set(gray, header.length);
  return out;
}

// --- minimal grayscale PNG encoder (stored-deflate zlib stream) -------------

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(bytes: Uint8Array): number {
  let c = 0xffffffff;
  for (const b of bytes) c = CRC_TABLE[(c ^ b) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(bytes: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (const byte of bytes) {
    a = (a + byte) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

function be32(value: number): Uint8Array {
  return new Uint8Array([(value >>> 24) & 0xff, (value >>> 16) & 0xff, (value >>> 8) & 0xff, value & 0xff]);
}

function chunk(type: string, payload: Uint8Array): Uint8Array {
  const tag = new TextEncoder().encode(type);
  const body = new Uint8Array(tag.length + payload.length);
  body.set(tag, 0);
  body.set(payload, tag.length);
  const out = new Uint8Array(4 + body.length + 4);
  out.set(be32(payload.length), 0);
  out.set(body, 4);
  out.set(be32(crc32(body)), 4 + body.length);
  return out;
}

function storedZlib(raw: Uint8Array): Uint8Array {
  const blocks: Uint8Array[] = [new Uint8Array([0x78, 0x01])];
  const max = 65535;
  for (let off = 0; off < raw.length; off += max) {
    const slice = raw.subarray(off, Math.min(off + max, raw.length));
    const final = off + max >= raw.length ? 1 : 0;
    const len = slice.length;
    const head = new Uint8Array([final, len & 0xff, (len >>> 8) & 0xff, ~len & 0xff, (~len >>> 8) & 0xff]);
    blocks.push(head, slice);
  }
  blocks.push(be32(adler32(raw)));
  const total = blocks.reduce((n, b) => n + b.length, 0);
  const out = new Uint8Array(total);
  let pos = 0;
  for (const b of blocks) {
    out.set(b, pos);
    pos += b.length;
  }
  return out;
}

export function encodePng(width: number, height: number, gray: Uint8Array): Uint8Array {
  if (gray.length !== width * height) throw new Error("pixel buffer size mismatch");
  const ihdr = new Uint8Array(13);
  ihdr.set(be32(width), 0);
  ihdr.set(be32(height), 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 0; // grayscale
  // compression/filter/interlace all 0
  const raw = new Uint8Array(height * (width + 1));
  for (let y = 0; y < height; y++) {
    raw[y * (width + 1)] = 0; // filter: none
    raw.set(gray.subarray(y * width, (y + 1) * width), y * (width + 1) + 1);
  }
  const signature = new Uint8Array([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]);
  const parts = [signature, chunk("IHDR", ihdr), chunk("IDAT", storedZlib(raw)), chunk("IEND", new Uint8Array(0))];
  const out = new Uint8Array(parts.reduce((n, p) => n + p.length, 0));
  let pos = 0;
  for (const p of parts) {
    out.set(p, pos);
    pos += p.length;
  }
  return out;
}
