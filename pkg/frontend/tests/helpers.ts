// Builders for synthetic run directories used by the unit tests.
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { SNAPSHOT_KINDS } from "../src/formats.js";

export function tmpdir(prefix: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), prefix));
}

export function writeManifest(dir: string, overrides: Record<string, string> = {}): void {
  const entries: Record<string, string> = {
    version: "1",
    "config.experiment": "synthetic",
    "config.problem.spatial_dim": "1",
    "config.problem.final_time": "1.0",
    "config.grid.extent": "0.0 1.0",
    "derived.dt": "0.25",
    "derived.num_steps": "4",
    "derived.layout": "interleaved",
    ...overrides,
  };
  const lines = Object.entries(entries).map(([k, v]) => `${k} = ${v}`);
  fs.writeFileSync(path.join(dir, "manifest.txt"), lines.join("\n") + "\n");
}

export interface HorizonRow {
  m: number;
  mean: number;
  std: number;
  n: number;
}

export function writeHorizon(dir: string, rows: HorizonRow[]): void {
  const lines = ["m,mean_rel_l2,std_rel_l2,n_restarts"];
  for (const r of rows) lines.push(`${r.m},${r.mean},${r.std},${r.n}`);
  fs.writeFileSync(path.join(dir, "horizon.csv"), lines.join("\n") + "\n");
}

function writeSnapshot1d(file: string, t: number, values: number[]): void {
  fs.writeFileSync(file, `# t=${t} nx=${values.length}\n${values.join(" ")}\n`);
}

function writeSnapshot2d(file: string, t: number, rows: number[][]): void {
  const body = rows.map((r) => r.join(" ")).join("\n");
  fs.writeFileSync(file, `# t=${t} nx=${rows.length} ny=${rows[0].length}\n${body}\n`);
}

export interface Synthetic1d {
  dir: string;
  times: number[];
  nx: number;
  compressed: number[][];
  reference: number[][];
  difference: number[][];
  horizon: HorizonRow[];
}

/** Tiny 1D run: 3 snapshots of 4 points, difference written exactly. */
export function makeRun1d(): Synthetic1d {
  const dir = tmpdir("run1d-");
  const times = [0, 0.5, 1.0];
  const nx = 4;
  const compressed = [
    [0.1, 0.2, 0.3, 0.4],
    [0.15, 0.25, 0.35, 0.45],
    [0.2, 0.3, 0.4, 0.5],
  ];
  const reference = [
    [0.1, 0.2, 0.3, 0.4],
    [0.16, 0.24, 0.36, 0.44],
    [0.22, 0.28, 0.42, 0.48],
  ];
  const difference = compressed.map((row, i) => row.map((v, j) => v - reference[i][j]));
  const horizon: HorizonRow[] = [
    { m: 1, mean: 1e-12, std: 2e-13, n: 4 },
    { m: 2, mean: 3e-12, std: 5e-13, n: 3 },
    { m: 5, mean: 9e-12, std: 2e-12, n: 2 },
  ];
  writeManifest(dir, { "derived.dt": "0.5", "derived.num_steps": "2" });
  writeHorizon(dir, horizon);
  const fields = { compressed, reference, difference };
  for (const kind of SNAPSHOT_KINDS) {
    const sub = path.join(dir, "snapshots", kind);
    fs.mkdirSync(sub, { recursive: true });
    times.forEach((t, i) => {
      writeSnapshot1d(path.join(sub, `step_${String(i).padStart(7, "0")}.txt`), t, fields[kind][i]);
    });
  }
  return { dir, times, nx, compressed, reference, difference, horizon };
}

export interface Synthetic2d {
  dir: string;
  times: number[];
  nx: number;
  ny: number;
  fields: Record<(typeof SNAPSHOT_KINDS)[number], number[][][]>;
}

/** Tiny 2D run: 5 snapshots of a 2x3 grid at steps 0..4, dt 0.25. */
export function makeRun2d(): Synthetic2d {
  const dir = tmpdir("run2d-");
  const dt = 0.25;
  const times = [0, 1, 2, 3, 4].map((k) => k * dt);
  const nx = 2;
  const ny = 3;
  const grid = (seed: number): number[][] =>
    Array.from({ length: nx }, (_, r) => Array.from({ length: ny }, (_, c) => seed + r + c / 10));
  const compressed = times.map((_, k) => grid(k));
  const reference = times.map((_, k) => grid(k + 0.001));
  const difference = compressed.map((rows, k) =>
    rows.map((row, r) => row.map((v, c) => v - reference[k][r][c])),
  );
  writeManifest(dir, {
    "config.problem.spatial_dim": "2",
    "config.problem.final_time": "1.0",
    "derived.dt": String(dt),
    "derived.num_steps": "4",
  });
  writeHorizon(dir, [{ m: 1, mean: 1e-10, std: 0, n: 1 }]);
  const fields = { compressed, reference, difference };
  for (const kind of SNAPSHOT_KINDS) {
    const sub = path.join(dir, "snapshots", kind);
    fs.mkdirSync(sub, { recursive: true });
    times.forEach((t, i) => {
      writeSnapshot2d(path.join(sub, `step_${String(i).padStart(7, "0")}.txt`), t, fields[kind][i]);
    });
  }
  return { dir, times, nx, ny, fields };
}

export function rmrf(dir: string): void {
  fs.rmSync(dir, { recursive: true, force: true });
}

/** Stable content hash of every file under a directory. */
export function dirDigest(dir: string): Map<string, string> {
  const out = new Map<string, string>();
  const walk = (d: string) => {
    for (const name of fs.readdirSync(d, { withFileTypes: true })) {
      const p = path.join(d, name.name);
      if (name.isDirectory()) walk(p);
      else out.set(p, fs.readFileSync(p).toString("base64"));
    }
  };
  walk(dir);
  return out;
}
