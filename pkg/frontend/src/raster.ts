// Tiny PNG writer for heatmap cells, embedded into the SVG as a data URI.
// 8-bit RGB, no interlace, filter 0 on every row; zlib does the rest.
import * as zlib from "node:zlib";
import { interpolateRdBu, interpolateViridis, rgb } from "d3";

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Uint8Array): Buffer {
  const head = Buffer.alloc(8);
  head.writeUInt32BE(data.length, 0);
  head.write(type, 4, "ascii");
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(Buffer.concat([head.subarray(4), data])), 0);
  return Buffer.concat([head, data, crc]);
}

export function encodePng(width: number, height: number, rgbBytes: Uint8Array): Buffer {
  if (rgbBytes.length !== width * height * 3) throw new Error("rgb buffer size mismatch");
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 2; // truecolor
  const raw = Buffer.alloc(height * (1 + width * 3));
  for (let y = 0; y < height; y++) {
    const at = y * (1 + width * 3);
    raw[at] = 0;
    raw.set(rgbBytes.subarray(y * width * 3, (y + 1) * width * 3), at + 1);
  }
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", zlib.deflateSync(raw, { level: 9 })),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

export type Colormap = (unit: number) => [number, number, number];

function fromD3(interp: (t: number) => string): Colormap {
  // sampled once; 256 steps is plenty for data this smooth
  const lut: [number, number, number][] = [];
  for (let i = 0; i < 256; i++) {
    const c = rgb(interp(i / 255));
    lut.push([c.r, c.g, c.b]);
  }
  return (unit) => lut[Math.max(0, Math.min(255, Math.round(unit * 255)))];
}

export const SEQUENTIAL: Colormap = fromD3(interpolateViridis);
// reversed so negative differences read blue and positive red
export const DIVERGING: Colormap = fromD3((t) => interpolateRdBu(1 - t));

export interface ColorScale {
  lo: number;
  hi: number;
  map: Colormap;
}

/** Shared limits across every panel of a figure. */
export function sequentialScale(datasets: ArrayLike<number>[]): ColorScale {
  let lo = Infinity;
  let hi = -Infinity;
  for (const data of datasets) {
    for (let i = 0; i < data.length; i++) {
      const v = data[i];
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  if (!(lo < hi)) hi = lo + 1; // constant field still renders
  return { lo, hi, map: SEQUENTIAL };
}

/** Symmetric about zero so the sign of the difference is legible. */
export function divergingScale(datasets: ArrayLike<number>[]): ColorScale {
  let amp = 0;
  for (const data of datasets) {
    for (let i = 0; i < data.length; i++) {
      const v = Math.abs(data[i]);
      if (v > amp) amp = v;
    }
  }
  if (amp === 0) amp = 1;
  return { lo: -amp, hi: amp, map: DIVERGING };
}

/** Rasterize a row-major grid; row 0 lands at the top of the image. */
export function rasterize(
  values: ArrayLike<number>,
  width: number,
  height: number,
  scale: ColorScale,
): string {
  if (values.length !== width * height) throw new Error("grid size mismatch");
  const bytes = new Uint8Array(width * height * 3);
  const span = scale.hi - scale.lo;
  for (let i = 0; i < values.length; i++) {
    const unit = (values[i] - scale.lo) / span;
    const [r, g, b] = scale.map(Math.max(0, Math.min(1, unit)));
    bytes[3 * i] = r;
    bytes[3 * i + 1] = g;
    bytes[3 * i + 2] = b;
  }
  const png = encodePng(width, height, bytes);
  return `data:image/png;base64,${png.toString("base64")}`;
}
