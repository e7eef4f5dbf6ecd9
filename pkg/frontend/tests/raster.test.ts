import * as zlib from "node:zlib";
import { describe, expect, it } from "vitest";
import {
  ColorScale,
  Colormap,
  DIVERGING,
  SEQUENTIAL,
  divergingScale,
  encodePng,
  rasterize,
  sequentialScale,
} from "../src/raster.js";

const PNG_SIG = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

function decode(png: Buffer): { width: number; height: number; pixels: Buffer } {
  expect(Array.from(png.subarray(0, 8))).toEqual(PNG_SIG);
  // IHDR directly after the signature
  expect(png.toString("ascii", 12, 16)).toBe("IHDR");
  const width = png.readUInt32BE(16);
  const height = png.readUInt32BE(20);
  expect(png[24]).toBe(8); // bit depth
  expect(png[25]).toBe(2); // truecolor
  const idatLen = png.readUInt32BE(33);
  expect(png.toString("ascii", 37, 41)).toBe("IDAT");
  const raw = zlib.inflateSync(png.subarray(41, 41 + idatLen));
  const stride = 1 + width * 3;
  expect(raw.length).toBe(height * stride);
  const pixels = Buffer.alloc(width * height * 3);
  for (let y = 0; y < height; y++) {
    expect(raw[y * stride]).toBe(0); // filter byte
    raw.copy(pixels, y * width * 3, y * stride + 1, (y + 1) * stride);
  }
  return { width, height, pixels };
}

describe("encodePng", () => {
  it("round-trips raw pixels through a decoder", () => {
    const rgbBytes = Uint8Array.from([255, 0, 0, 0, 255, 0, 0, 0, 255, 9, 9, 9]);
    const { width, height, pixels } = decode(encodePng(2, 2, rgbBytes));
    expect([width, height]).toEqual([2, 2]);
    expect(Array.from(pixels)).toEqual(Array.from(rgbBytes));
  });

  it("rejects a size mismatch", () => {
    expect(() => encodePng(2, 2, new Uint8Array(3))).toThrow(/size mismatch/);
  });
});

describe("rasterize", () => {
  const redRamp: Colormap = (u) => [Math.round(255 * u), 0, 0];

  it("maps values through the scale with row 0 on top", () => {
    const scale: ColorScale = { lo: 0, hi: 1, map: redRamp };
    const uri = rasterize([0, 1, 0.5, 0.5], 2, 2, scale);
    expect(uri.startsWith("data:image/png;base64,")).toBe(true);
    const png = Buffer.from(uri.slice("data:image/png;base64,".length), "base64");
    const { pixels } = decode(png);
    expect(Array.from(pixels)).toEqual([0, 0, 0, 255, 0, 0, 128, 0, 0, 128, 0, 0]);
  });

  it("clamps values outside the scale", () => {
    const scale: ColorScale = { lo: 0, hi: 1, map: redRamp };
    const uri = rasterize([-5, 7], 2, 1, scale);
    const png = Buffer.from(uri.split(",")[1], "base64");
    expect(Array.from(decode(png).pixels)).toEqual([0, 0, 0, 255, 0, 0]);
  });

  it("rejects a grid size mismatch", () => {
    expect(() => rasterize([1, 2, 3], 2, 2, { lo: 0, hi: 1, map: redRamp })).toThrow(
      /size mismatch/,
    );
  });
});

describe("color scales", () => {
  it("sequential limits span all panels", () => {
    const s = sequentialScale([Float64Array.from([0.2, 0.4]), Float64Array.from([-1, 0.3])]);
    expect(s.lo).toBe(-1);
    expect(s.hi).toBe(0.4);
    expect(s.map).toBe(SEQUENTIAL);
  });

  it("a constant field still gets a non-empty range", () => {
    const s = sequentialScale([Float64Array.from([2, 2, 2])]);
    expect(s.hi).toBeGreaterThan(s.lo);
  });

  it("diverging limits are symmetric about zero", () => {
    const s = divergingScale([Float64Array.from([-0.2, 0.05]), Float64Array.from([0.1])]);
    expect(s.lo).toBe(-0.2);
    expect(s.hi).toBe(0.2);
    expect(s.map).toBe(DIVERGING);
  });

  it("an identically zero difference still renders", () => {
    const s = divergingScale([Float64Array.from([0, 0])]);
    expect(s.lo).toBeLessThan(s.hi);
  });

  it("diverging endpoints read blue below and red above", () => {
    const [rLo, , bLo] = DIVERGING(0);
    const [rHi, , bHi] = DIVERGING(1);
    expect(bLo).toBeGreaterThan(rLo);
    expect(rHi).toBeGreaterThan(bHi);
  });
});
