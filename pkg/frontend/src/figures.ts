// Figure specifications and the data assembly behind them.  Assembly is
// pure reading: the arrays in the returned model are exactly the file
// contents, so tests can compare them against an independent re-read.
import * as path from "node:path";
import {
  HorizonCurve,
  Manifest,
  Snapshot,
  SNAPSHOT_KINDS,
  SnapshotKind,
  listSnapshotSteps,
  readHorizonCsv,
  readManifest,
  readSnapshot,
  requireInputs,
  snapshotPath,
} from "./formats.js";

export const FIGURE_KINDS = ["rollout_1d", "rollout_2d_grid", "horizon_curve"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  runDir: string;
  /** Snapshot times to display (rollout_2d_grid only). */
  times?: number[];
  outPath: string;
}

export const DEFAULT_GRID_TIMES = [0, 0.25, 0.5, 0.75, 1.0];

export interface HorizonModel {
  curve: HorizonCurve;
  // band edges are mean +/- std, computed here so the drawing code
  // never touches the raw columns
  upper: number[];
  lower: number[];
}

export interface Rollout1dModel {
  manifest: Manifest;
  times: number[];
  x0: number;
  x1: number;
  nx: number;
  /** kind -> snapshot-per-row matrix, row i at times[i]. */
  fields: Record<SnapshotKind, Float64Array[]>;
  horizon: HorizonModel;
}

export interface Rollout2dModel {
  manifest: Manifest;
  requested: number[];
  matched: { step: number; t: number }[];
  nx: number;
  ny: number;
  /** fields[kind][column] is the 2D snapshot shown in that column. */
  fields: Record<SnapshotKind, Snapshot[]>;
}

export interface HorizonOnlyModel {
  manifest: Manifest;
  horizon: HorizonModel;
}

function horizonModel(runDir: string): HorizonModel {
  const curve = readHorizonCsv(path.join(runDir, "horizon.csv"));
  return {
    curve,
    upper: curve.mean.map((v, i) => v + curve.std[i]),
    lower: curve.mean.map((v, i) => v - curve.std[i]),
  };
}

function snapshotFiles(runDir: string, steps: number[]): string[] {
  const files: string[] = [];
  for (const kind of SNAPSHOT_KINDS) {
    for (const step of steps) files.push(snapshotPath(runDir, kind, step));
  }
  return files;
}

export function assembleRollout1d(runDir: string): Rollout1dModel {
  const manifestFile = path.join(runDir, "manifest.txt");
  requireInputs(runDir, [manifestFile, path.join(runDir, "horizon.csv")]);
  const manifest = readManifest(manifestFile);
  if (manifest.spatialDim !== 1) {
    throw new Error(`${runDir}: rollout_1d needs a 1D run, got ${manifest.spatialDim}D`);
  }
  const steps = listSnapshotSteps(runDir);
  requireInputs(runDir, snapshotFiles(runDir, steps));

  const fields = { compressed: [], reference: [], difference: [] } as Record<
    SnapshotKind,
    Float64Array[]
  >;
  const times: number[] = [];
  let nx = 0;
  for (const step of steps) {
    for (const kind of SNAPSHOT_KINDS) {
      const snap = readSnapshot(snapshotPath(runDir, kind, step));
      if (snap.ny !== null) throw new Error(`${runDir}: found 2D snapshots in a 1D figure`);
      if (nx === 0) nx = snap.nx;
      if (snap.nx !== nx) throw new Error(`${runDir}: snapshot sizes disagree`);
      fields[kind].push(snap.values);
      if (kind === "compressed") times.push(snap.t);
    }
  }
  return {
    manifest,
    times,
    x0: manifest.extent[0],
    x1: manifest.extent[1],
    nx,
    fields,
    horizon: horizonModel(runDir),
  };
}

/** Nearest snapshot per requested time; farther than dt/2 is an error. */
export function matchTimes(
  requested: number[],
  available: { step: number; t: number }[],
  dt: number,
): { step: number; t: number }[] {
  const out: { step: number; t: number }[] = [];
  const misses: string[] = [];
  // a requested time can land exactly between two steps, so give the
  // half-step cutoff a hair of slack
  const tol = (dt / 2) * (1 + 1e-9);
  for (const want of requested) {
    let best = available[0];
    for (const cand of available) {
      if (Math.abs(cand.t - want) < Math.abs(best.t - want)) best = cand;
    }
    if (Math.abs(best.t - want) > tol) {
      misses.push(`t=${want} (nearest snapshot at t=${best.t})`);
    } else {
      out.push(best);
    }
  }
  if (misses.length > 0) {
    throw new Error(`no snapshot within dt/2 of: ${misses.join(", ")}`);
  }
  return out;
}

export function assembleRollout2d(runDir: string, requested?: number[]): Rollout2dModel {
  const manifestFile = path.join(runDir, "manifest.txt");
  requireInputs(runDir, [manifestFile]);
  const manifest = readManifest(manifestFile);
  if (manifest.spatialDim !== 2) {
    throw new Error(`${runDir}: rollout_2d_grid needs a 2D run, got ${manifest.spatialDim}D`);
  }
  const steps = listSnapshotSteps(runDir);
  requireInputs(runDir, snapshotFiles(runDir, steps));
  const wanted = requested ?? DEFAULT_GRID_TIMES.map((f) => f * manifest.finalTime);

  const available = steps.map((step) => ({
    step,
    t: readSnapshot(snapshotPath(runDir, "compressed", step)).t,
  }));
  const matched = matchTimes(wanted, available, manifest.dt);

  const fields = { compressed: [], reference: [], difference: [] } as Record<
    SnapshotKind,
    Snapshot[]
  >;
  let nx = 0;
  let ny = 0;
  for (const { step } of matched) {
    for (const kind of SNAPSHOT_KINDS) {
      const snap = readSnapshot(snapshotPath(runDir, kind, step));
      if (snap.ny === null) throw new Error(`${runDir}: found 1D snapshots in a 2D figure`);
      if (nx === 0) {
        nx = snap.nx;
        ny = snap.ny;
      }
      if (snap.nx !== nx || snap.ny !== ny) {
        throw new Error(`${runDir}: snapshot sizes disagree`);
      }
      fields[kind].push(snap);
    }
  }
  return { manifest, requested: wanted, matched, nx, ny, fields };
}

export function assembleHorizonOnly(runDir: string): HorizonOnlyModel {
  const manifestFile = path.join(runDir, "manifest.txt");
  requireInputs(runDir, [manifestFile, path.join(runDir, "horizon.csv")]);
  return { manifest: readManifest(manifestFile), horizon: horizonModel(runDir) };
}
