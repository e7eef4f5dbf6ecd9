// Layout and file output for the three figure kinds.
import * as fs from "node:fs";
import * as path from "node:path";
import { scaleLinear } from "d3";
import {
  FigureSpec,
  HorizonOnlyModel,
  Rollout1dModel,
  Rollout2dModel,
  assembleHorizonOnly,
  assembleRollout1d,
  assembleRollout2d,
} from "./figures.js";
import { SNAPSHOT_KINDS, SnapshotKind } from "./formats.js";
import { ColorScale, divergingScale, sequentialScale } from "./raster.js";
import {
  Frame,
  colorbar,
  drawAxes,
  heatmapImage,
  horizonPanel,
  panelTitle,
  svgDocument,
  text,
  valueLabel,
} from "./svg.js";

const KIND_TITLES: Record<SnapshotKind, string> = {
  compressed: "compressed",
  reference: "dense reference",
  difference: "signed difference (compressed - reference)",
};

/** Stack per-time rows into one raster, latest time on top. */
function stackRows(rows: Float64Array[]): Float64Array {
  const nx = rows[0].length;
  const out = new Float64Array(rows.length * nx);
  for (let r = 0; r < rows.length; r++) {
    out.set(rows[rows.length - 1 - r], r * nx);
  }
  return out;
}

export function drawRollout1d(model: Rollout1dModel): string {
  const seq = sequentialScale([...model.fields.compressed, ...model.fields.reference]);
  const div = divergingScale(model.fields.difference);

  const panelW = 320;
  const panelH = 250;
  const left = 70;
  const top = 70;
  const hgap = 170;
  const vgap = 80;
  const frames: Frame[] = [
    { x: left, y: top, w: panelW, h: panelH },
    { x: left + panelW + hgap, y: top, w: panelW, h: panelH },
    { x: left, y: top + panelH + vgap, w: panelW, h: panelH },
    { x: left + panelW + hgap, y: top + panelH + vgap, w: panelW, h: panelH },
  ];
  const width = left + 2 * panelW + hgap + 110;
  const height = top + 2 * panelH + vgap + 60;

  const tLast = model.times[model.times.length - 1];
  const parts: string[] = [
    text(width / 2, 24, `${model.manifest.experiment}: rollout and restart error`, "middle", 'font-size="15" font-weight="bold"'),
  ];
  const spaceTime = (f: Frame, rows: Float64Array[], scale: ColorScale, title: string) => {
    const xs = scaleLinear([model.x0, model.x1], [f.x, f.x + f.w]);
    const ys = scaleLinear([model.times[0], tLast], [f.y + f.h, f.y]);
    parts.push(heatmapImage(f, stackRows(rows), model.nx, rows.length, scale));
    parts.push(drawAxes(f, xs, ys, { xLabel: "x", yLabel: "t" }));
    parts.push(panelTitle(f, title));
  };
  spaceTime(frames[0], model.fields.compressed, seq, KIND_TITLES.compressed);
  spaceTime(frames[1], model.fields.reference, seq, KIND_TITLES.reference);
  spaceTime(frames[2], model.fields.difference, div, KIND_TITLES.difference);
  parts.push(
    colorbar({ x: frames[1].x + panelW + 14, y: frames[1].y, w: 16, h: panelH }, seq, "field value"),
  );
  parts.push(
    colorbar({ x: frames[2].x + panelW + 14, y: frames[2].y, w: 16, h: panelH }, div, "difference"),
  );
  parts.push(horizonPanel(frames[3], model.horizon, "restart-averaged error"));
  return svgDocument(width, height, parts.join("\n"));
}

export function drawRollout2d(model: Rollout2dModel): string {
  const seq = sequentialScale(
    [...model.fields.compressed, ...model.fields.reference].map((s) => s.values),
  );
  const div = divergingScale(model.fields.difference.map((s) => s.values));

  const cols = model.matched.length;
  const cell = 150;
  const gap = 12;
  const left = 120;
  const top = 72;
  const width = left + cols * cell + (cols - 1) * gap + 130;
  const height = top + 3 * cell + 2 * gap + 44;

  const parts: string[] = [
    text(width / 2, 24, `${model.manifest.experiment}: snapshots over time`, "middle", 'font-size="15" font-weight="bold"'),
  ];
  SNAPSHOT_KINDS.forEach((kind, row) => {
    const y = top + row * (cell + gap);
    const label = kind === "difference" ? "difference" : KIND_TITLES[kind];
    const cx = left - 16;
    const cy = y + cell / 2;
    parts.push(text(cx, cy, label, "middle", `transform="rotate(-90 ${cx} ${cy})"`));
    model.fields[kind].forEach((snap, col) => {
      const f: Frame = { x: left + col * (cell + gap), y, w: cell, h: cell };
      parts.push(heatmapImage(f, snap.values, snap.ny as number, snap.nx, kind === "difference" ? div : seq));
      parts.push(
        `<rect x="${f.x}" y="${f.y}" width="${f.w}" height="${f.h}" fill="none" stroke="black"/>`,
      );
      if (row === 0) parts.push(panelTitle(f, `t = ${valueLabel(snap.t)}`));
    });
  });
  const barX = left + cols * cell + (cols - 1) * gap + 18;
  parts.push(colorbar({ x: barX, y: top, w: 16, h: 2 * cell + gap }, seq, "field value"));
  parts.push(colorbar({ x: barX, y: top + 2 * (cell + gap), w: 16, h: cell }, div, "difference"));
  parts.push(
    text(width / 2, height - 12, `bottom row: ${KIND_TITLES.difference}, symmetric scale`, "middle"),
  );
  return svgDocument(width, height, parts.join("\n"));
}

export function drawHorizonOnly(model: HorizonOnlyModel): string {
  const f: Frame = { x: 90, y: 60, w: 520, h: 360 };
  const body = [
    text(f.x + f.w / 2, 24, `${model.manifest.experiment}`, "middle", 'font-size="15" font-weight="bold"'),
    horizonPanel(f, model.horizon, "restart-averaged error vs horizon"),
  ].join("\n");
  return svgDocument(f.x + f.w + 40, f.y + f.h + 60, body);
}

export type FigureModel =
  | { kind: "rollout_1d"; model: Rollout1dModel }
  | { kind: "rollout_2d_grid"; model: Rollout2dModel }
  | { kind: "horizon_curve"; model: HorizonOnlyModel };

/** Assemble the data model and draw it; no files are written. */
export function buildFigure(spec: FigureSpec): { svg: string; figure: FigureModel } {
  switch (spec.kind) {
    case "rollout_1d": {
      const model = assembleRollout1d(spec.runDir);
      return { svg: drawRollout1d(model), figure: { kind: spec.kind, model } };
    }
    case "rollout_2d_grid": {
      const model = assembleRollout2d(spec.runDir, spec.times);
      return { svg: drawRollout2d(model), figure: { kind: spec.kind, model } };
    }
    case "horizon_curve": {
      const model = assembleHorizonOnly(spec.runDir);
      return { svg: drawHorizonOnly(model), figure: { kind: spec.kind, model } };
    }
  }
}

/** Render the figure and write it to spec.outPath. */
export function render(spec: FigureSpec): FigureModel {
  const { svg, figure } = buildFigure(spec);
  fs.mkdirSync(path.dirname(spec.outPath), { recursive: true });
  fs.writeFileSync(spec.outPath, svg);
  return figure;
}
