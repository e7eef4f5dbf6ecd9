// SVG assembly.  Everything is plain string building; d3 supplies only
// scales and tick math, so no DOM shim is needed.
import { format, scaleLinear, scaleLog } from "d3";
import type { ScaleContinuousNumeric } from "d3";
import { ColorScale, rasterize } from "./raster.js";
import { HorizonModel } from "./figures.js";

export interface Frame {
  x: number;
  y: number;
  w: number;
  h: number;
}

export function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function fmt(v: number): string {
  // trim float noise in coordinates
  return Number.isInteger(v) ? String(v) : v.toFixed(2);
}

const sci = format(".3~g");

// d3's locale prints U+2212 for negatives; keep output plain ASCII
function ascii(s: string): string {
  return s.replace(/−/g, "-");
}

/** Tick labels that stay short for error magnitudes like 3e-12. */
export function valueLabel(t: number): string {
  return t === 0 ? "0" : ascii(sci(t));
}

export function text(
  x: number,
  y: number,
  s: string,
  anchor: "start" | "middle" | "end" = "start",
  extra = "",
): string {
  return `<text x="${fmt(x)}" y="${fmt(y)}" text-anchor="${anchor}" ${extra}>${esc(s)}</text>`;
}

type NumScale = ScaleContinuousNumeric<number, number>;

export interface AxisOptions {
  xLabel?: string;
  yLabel?: string;
  xTicks?: number;
  yTicks?: number;
  xFmt?: (t: number) => string;
  yFmt?: (t: number) => string;
}

/** Frame border, ticks and labels for both axes. */
export function drawAxes(f: Frame, xs: NumScale, ys: NumScale, opts: AxisOptions = {}): string {
  const parts: string[] = [];
  parts.push(
    `<rect x="${fmt(f.x)}" y="${fmt(f.y)}" width="${fmt(f.w)}" height="${fmt(f.h)}" fill="none" stroke="black"/>`,
  );
  const xTicks = xs.ticks(opts.xTicks ?? 5);
  const xFmt = opts.xFmt ?? xs.tickFormat(opts.xTicks ?? 5);
  for (const t of xTicks) {
    const px = xs(t);
    parts.push(
      `<line x1="${fmt(px)}" y1="${fmt(f.y + f.h)}" x2="${fmt(px)}" y2="${fmt(f.y + f.h + 4)}" stroke="black"/>`,
    );
    const label = ascii(String(xFmt(t)));
    if (label) parts.push(text(px, f.y + f.h + 16, label, "middle"));
  }
  const yTicks = ys.ticks(opts.yTicks ?? 5);
  const yFmt = opts.yFmt ?? ys.tickFormat(opts.yTicks ?? 5);
  for (const t of yTicks) {
    const py = ys(t);
    parts.push(
      `<line x1="${fmt(f.x - 4)}" y1="${fmt(py)}" x2="${fmt(f.x)}" y2="${fmt(py)}" stroke="black"/>`,
    );
    const label = ascii(String(yFmt(t)));
    if (label) parts.push(text(f.x - 6, py + 4, label, "end"));
  }
  if (opts.xLabel) {
    parts.push(text(f.x + f.w / 2, f.y + f.h + 32, opts.xLabel, "middle"));
  }
  if (opts.yLabel) {
    const cx = f.x - 40;
    const cy = f.y + f.h / 2;
    parts.push(
      text(cx, cy, opts.yLabel, "middle", `transform="rotate(-90 ${fmt(cx)} ${fmt(cy)})"`),
    );
  }
  return parts.join("\n");
}

export function panelTitle(f: Frame, title: string): string {
  return text(f.x + f.w / 2, f.y - 8, title, "middle", 'font-weight="bold"');
}

/** Heatmap cell: the raster fills the frame, one texel per sample. */
export function heatmapImage(f: Frame, values: Float64Array, width: number, height: number, scale: ColorScale): string {
  const uri = rasterize(values, width, height, scale);
  return (
    `<image x="${fmt(f.x)}" y="${fmt(f.y)}" width="${fmt(f.w)}" height="${fmt(f.h)}" ` +
    `preserveAspectRatio="none" style="image-rendering: pixelated" href="${uri}"/>`
  );
}

/** Vertical colorbar with ticks on the right edge. */
export function colorbar(f: Frame, scale: ColorScale, label: string): string {
  const n = 128;
  const column = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    // top row holds the maximum
    column[i] = scale.hi - (i / (n - 1)) * (scale.hi - scale.lo);
  }
  const parts: string[] = [heatmapImage(f, column, 1, n, scale)];
  parts.push(
    `<rect x="${fmt(f.x)}" y="${fmt(f.y)}" width="${fmt(f.w)}" height="${fmt(f.h)}" fill="none" stroke="black"/>`,
  );
  const ys = scaleLinear([scale.lo, scale.hi], [f.y + f.h, f.y]);
  for (const t of ys.ticks(5)) {
    const py = ys(t);
    parts.push(
      `<line x1="${fmt(f.x + f.w)}" y1="${fmt(py)}" x2="${fmt(f.x + f.w + 4)}" y2="${fmt(py)}" stroke="black"/>`,
    );
    parts.push(text(f.x + f.w + 6, py + 4, valueLabel(t)));
  }
  const cx = f.x + f.w + 46;
  const cy = f.y + f.h / 2;
  parts.push(text(cx, cy, label, "middle", `transform="rotate(-90 ${fmt(cx)} ${fmt(cy)})"`));
  return parts.join("\n");
}

function pathFrom(points: [number, number][], close: boolean): string {
  const d = points
    .map(([x, y], i) => `${i === 0 ? "M" : "L"}${fmt(x)},${fmt(y)}`)
    .join(" ");
  return close ? `${d} Z` : d;
}

/**
 * Restart-averaged error against horizon: mean line over a +/- one
 * standard deviation band.  x is logarithmic when all horizons are
 * positive, y stays linear because the band may cross zero.
 */
export function horizonPanel(f: Frame, model: HorizonModel, title: string): string {
  const m = model.curve.m;
  const logX = m[0] > 0;
  const xs: NumScale = logX
    ? scaleLog([m[0], m[m.length - 1]], [f.x, f.x + f.w])
    : scaleLinear([m[0], m[m.length - 1]], [f.x, f.x + f.w]);
  const lo = Math.min(0, ...model.lower);
  const hi = Math.max(...model.upper);
  const pad = (hi - lo || 1) * 0.05;
  const ys = scaleLinear([lo - pad, hi + pad], [f.y + f.h, f.y]).nice();

  const parts: string[] = [];
  if (m.length > 1) {
    const band: [number, number][] = m.map((v, i) => [xs(v), ys(model.upper[i])]);
    for (let i = m.length - 1; i >= 0; i--) band.push([xs(m[i]), ys(model.lower[i])]);
    parts.push(`<path d="${pathFrom(band, true)}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>`);
    const line: [number, number][] = m.map((v, i) => [xs(v), ys(model.curve.mean[i])]);
    parts.push(`<path d="${pathFrom(line, false)}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>`);
  }
  for (let i = 0; i < m.length; i++) {
    parts.push(`<circle cx="${fmt(xs(m[i]))}" cy="${fmt(ys(model.curve.mean[i]))}" r="2.5" fill="#1f77b4"/>`);
  }
  parts.push(
    drawAxes(f, xs, ys, {
      xLabel: "restart horizon m (steps)",
      yLabel: "relative L2 error",
      xTicks: logX ? 4 : 5,
      yFmt: valueLabel,
    }),
  );
  parts.push(panelTitle(f, title));
  return parts.join("\n");
}

export function svgDocument(width: number, height: number, body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    body +
    "\n</svg>\n"
  );
}
