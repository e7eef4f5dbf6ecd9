// Readers for the run-directory file formats: flat manifest, bare CSVs,
// and whitespace-separated snapshot grids with a "# t=... nx=..." header.
import * as fs from "node:fs";
import * as path from "node:path";
import { z } from "zod";

const KEY_RE = /^[a-z][a-z0-9_.]*$/;

export function parseFlat(text: string): Record<string, string> {
  const values: Record<string, string> = {};
  const lines = text.split(/\r?\n/);
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].split("#", 1)[0].trim();
    if (!line) continue;
    const eq = line.indexOf("=");
    if (eq < 0) throw new Error(`manifest line ${i + 1}: expected 'key = value'`);
    const key = line.slice(0, eq).trim();
    const value = line.slice(eq + 1).trim().replace(/\s+/g, " ");
    if (!KEY_RE.test(key)) throw new Error(`manifest line ${i + 1}: malformed key '${key}'`);
    if (key in values) throw new Error(`manifest line ${i + 1}: duplicate key '${key}'`);
    values[key] = value;
  }
  return values;
}

const numeric = z.string().refine((s) => Number.isFinite(Number(s)), "not a number");

// only the keys the renderer consumes; everything else rides along untouched
const manifestSchema = z
  .object({
    "config.experiment": z.string(),
    "config.problem.spatial_dim": numeric,
    "config.problem.final_time": numeric,
    "config.grid.extent": z.string(),
    "derived.dt": numeric,
    "derived.num_steps": numeric,
  })
  .loose();

export interface Manifest {
  experiment: string;
  spatialDim: number;
  finalTime: number;
  extent: [number, number];
  dt: number;
  numSteps: number;
  raw: Record<string, string>;
}

export function readManifest(file: string): Manifest {
  const raw = parseFlat(fs.readFileSync(file, "ascii"));
  const parsed = manifestSchema.safeParse(raw);
  if (!parsed.success) {
    const bad = parsed.error.issues.map((i) => i.path.join(".")).join(", ");
    throw new Error(`${file}: missing or invalid manifest keys: ${bad}`);
  }
  const extentParts = raw["config.grid.extent"].split(" ").map(Number);
  if (extentParts.length !== 2 || extentParts.some((v) => !Number.isFinite(v))) {
    throw new Error(`${file}: config.grid.extent must be two numbers`);
  }
  return {
    experiment: raw["config.experiment"],
    spatialDim: Number(raw["config.problem.spatial_dim"]),
    finalTime: Number(raw["config.problem.final_time"]),
    extent: [extentParts[0], extentParts[1]],
    dt: Number(raw["derived.dt"]),
    numSteps: Number(raw["derived.num_steps"]),
    raw,
  };
}

export function readCsv(file: string): { header: string[]; rows: string[][] } {
  const lines = fs
    .readFileSync(file, "ascii")
    .split(/\r?\n/)
    .filter((l) => l.trim() !== "");
  if (lines.length === 0) throw new Error(`${file}: empty CSV`);
  return { header: lines[0].split(","), rows: lines.slice(1).map((l) => l.split(",")) };
}

export interface HorizonCurve {
  m: number[];
  mean: number[];
  std: number[];
  nRestarts: number[];
}

export function readHorizonCsv(file: string): HorizonCurve {
  const { header, rows } = readCsv(file);
  const want = ["m", "mean_rel_l2", "std_rel_l2", "n_restarts"];
  if (header.join(",") !== want.join(",")) {
    throw new Error(`${file}: unexpected header '${header.join(",")}'`);
  }
  if (rows.length === 0) throw new Error(`${file}: horizon CSV has no data rows`);
  const col = (i: number) => rows.map((r) => Number(r[i]));
  const curve = { m: col(0), mean: col(1), std: col(2), nRestarts: col(3) };
  for (const key of want.keys()) {
    if (rows.some((r) => !Number.isFinite(Number(r[key])))) {
      throw new Error(`${file}: non-numeric entry in column '${want[key]}'`);
    }
  }
  return curve;
}

export interface Snapshot {
  t: number;
  nx: number;
  ny: number | null;
  // row-major; 1D snapshots have a single row of nx values
  values: Float64Array;
}

export function readSnapshot(file: string): Snapshot {
  const text = fs.readFileSync(file, "ascii");
  const newline = text.indexOf("\n");
  const header = (newline < 0 ? text : text.slice(0, newline)).trim();
  if (!header.startsWith("# ")) throw new Error(`${file}: missing snapshot header`);
  const fields: Record<string, string> = {};
  for (const part of header.slice(2).split(/\s+/)) {
    const eq = part.indexOf("=");
    if (eq > 0) fields[part.slice(0, eq)] = part.slice(eq + 1);
  }
  if (!("t" in fields) || !("nx" in fields)) {
    throw new Error(`${file}: snapshot header needs t= and nx=`);
  }
  const t = Number(fields.t);
  const nx = Number(fields.nx);
  const ny = "ny" in fields ? Number(fields.ny) : null;
  const body =
    newline < 0
      ? []
      : text
          .slice(newline + 1)
          .split(/\s+/)
          .filter((s) => s !== "");
  const values = Float64Array.from(body, Number);
  const expect = ny === null ? nx : nx * ny;
  if (values.length !== expect) {
    throw new Error(`${file}: expected ${expect} values, found ${values.length}`);
  }
  if (values.some((v) => !Number.isFinite(v)) || !Number.isFinite(t)) {
    throw new Error(`${file}: non-finite snapshot data`);
  }
  return { t, nx, ny, values };
}

export const SNAPSHOT_KINDS = ["compressed", "reference", "difference"] as const;
export type SnapshotKind = (typeof SNAPSHOT_KINDS)[number];

export function snapshotDir(runDir: string, kind: SnapshotKind): string {
  return path.join(runDir, "snapshots", kind);
}

export function listSnapshotSteps(runDir: string): number[] {
  const dir = snapshotDir(runDir, "compressed");
  if (!fs.existsSync(dir)) throw new Error(`${dir}: no snapshots found`);
  const steps: number[] = [];
  for (const name of fs.readdirSync(dir)) {
    const hit = /^step_(\d{7})\.txt$/.exec(name);
    if (hit) steps.push(Number(hit[1]));
  }
  steps.sort((a, b) => a - b);
  if (steps.length === 0) throw new Error(`${dir}: no snapshots found`);
  return steps;
}

export function snapshotPath(runDir: string, kind: SnapshotKind, step: number): string {
  return path.join(snapshotDir(runDir, kind), `step_${String(step).padStart(7, "0")}.txt`);
}

/** Throw a single error naming every missing input for the requested figure. */
export function requireInputs(runDir: string, files: string[]): void {
  const missing = files.filter((f) => !fs.existsSync(f));
  if (missing.length > 0) {
    throw new Error(`missing inputs under ${runDir}:\n  ` + missing.join("\n  "));
  }
}
