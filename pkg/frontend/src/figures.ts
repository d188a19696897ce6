/**
 * Figure rendering from simulation output files.
 *
 * This package is a pure consumer: it reads the JSON-lines records and CSV
 * tables the simulation CLI wrote, aggregates for display, and renders SVG.
 * The only analytic ingredient is the endpoint limit curve, whose normalizer
 * is recomputed from alpha. Every render also writes a sidecar JSON with the
 * statistics shown on the plot and a manifest hashing the inputs.
 */

import { createHash } from "node:crypto";
import { readFileSync, writeFileSync } from "node:fs";

import {
  commonValue,
  numericColumn,
  parseCsvTable,
  parseRecordsJsonl,
} from "./records.js";
import {
  cAlpha1d,
  endpointLimitCdf1d,
  endpointLimitDensity1d,
  histogramFixedBins,
  ksDistanceToCdf,
} from "./stats.js";
import { renderScene, type Scene } from "./svg.js";

export type FigureKind = "endpoint-density" | "mass-vs-N" | "gap-scaling" | "scenario-scan";

export interface FigureSpec {
  kind: FigureKind;
  inputs: string[];
  out: string;
  /** Overlay parameters; endpoint-density requires alpha (d = 1 only). */
  alpha?: number;
  d?: number;
}

export interface RenderResult {
  svgPath: string;
  sidecarPath: string;
  manifestPath: string;
  sidecar: Record<string, unknown>;
}

const ENDPOINT_BINS = 50;

function sha256(path: string): string {
  return createHash("sha256").update(readFileSync(path)).digest("hex");
}

function requireInputs(spec: FigureSpec, n: number): void {
  if (spec.inputs.length !== n) {
    throw new Error(`${spec.kind} expects ${n} input file(s), got ${spec.inputs.length}`);
  }
}

function endpointDensity(spec: FigureSpec): { scene: Scene; sidecar: Record<string, unknown> } {
  requireInputs(spec, 1);
  const records = parseRecordsJsonl(spec.inputs[0]);
  const d = commonValue(records, "d");
  if (d !== 1) {
    throw new Error(`endpoint-density is defined for d = 1, records have d = ${d}`);
  }
  const alphaData = commonValue(records, "alpha");
  const alpha = spec.alpha ?? alphaData;
  if (spec.alpha !== undefined && spec.alpha !== alphaData) {
    throw new Error(`overlay alpha ${spec.alpha} does not match the records' alpha ${alphaData}`);
  }
  const kept = records.filter((r) => !r.ties_detected);
  if (kept.length === 0) {
    throw new Error(`${spec.inputs[0]}: every record is tie-flagged`);
  }
  const xs = kept.map((r) => r.w_over_N[0]);
  const bins = histogramFixedBins(xs, ENDPOINT_BINS, -1, 1);
  const width = 2 / ENDPOINT_BINS;
  const bars = bins.map((b) => ({ x0: b.binLeft, x1: b.binRight, y: b.count / (xs.length * width) }));

  const overlay: [number, number][] = [];
  for (let i = 0; i <= 200; i++) {
    const x = -1 + (2 * i) / 200;
    overlay.push([x, endpointLimitDensity1d(x, alpha)]);
  }
  const ks = ksDistanceToCdf(xs, (x) => endpointLimitCdf1d(x, alpha));
  const yMax = Math.max(cAlpha1d(alpha), ...bars.map((b) => b.y)) * 1.08;
  const scene: Scene = {
    title: `Endpoint location w/N over ${xs.length} trials (alpha = ${alpha}, N = ${commonValue(records, "N")})`,
    xLabel: "w / N",
    yLabel: "density",
    xRange: [-1, 1],
    yRange: [0, yMax],
    bars,
    series: [{ points: overlay, color: "#d62728" }],
  };
  return {
    scene,
    sidecar: {
      kind: spec.kind,
      alpha,
      d,
      N: commonValue(records, "N"),
      n_used: xs.length,
      n_excluded: records.length - xs.length,
      c_alpha: cAlpha1d(alpha),
      bins: ENDPOINT_BINS,
      ks_distance: ks,
    },
  };
}

function massVsN(spec: FigureSpec): { scene: Scene; sidecar: Record<string, unknown> } {
  requireInputs(spec, 1);
  const table = parseCsvTable(spec.inputs[0]);
  const path = spec.inputs[0];
  const Ns = numericColumn(table, "N", path);
  const median = numericColumn(table, "median_p_w", path);
  const two = numericColumn(table, "mean_two_point_mass", path);
  const yMin = Math.min(...median, ...two);
  const scene: Scene = {
    title: "Localization mass vs horizon",
    xLabel: "N",
    yLabel: "endpoint mass",
    xRange: [Math.min(...Ns), Math.max(...Ns)],
    yRange: [Math.min(0.9, yMin), 1.001],
    series: [
      { points: Ns.map((n, i) => [n, median[i]] as [number, number]), color: "#1f77b4" },
      { points: Ns.map((n, i) => [n, two[i]] as [number, number]), color: "#2ca02c", dashed: true },
    ],
  };
  const nondecreasing = median.every((v, i) => i === 0 || v >= median[i - 1] - 1e-12);
  return {
    scene,
    sidecar: {
      kind: spec.kind,
      N: Ns,
      median_p_w: median,
      mean_two_point_mass: two,
      median_nondecreasing: nondecreasing,
    },
  };
}

function gapScaling(spec: FigureSpec): { scene: Scene; sidecar: Record<string, unknown> } {
  requireInputs(spec, 1);
  const table = parseCsvTable(spec.inputs[0]);
  const path = spec.inputs[0];
  const Ns = numericColumn(table, "N", path);
  const median = numericColumn(table, "median_n_gap_z12", path);
  const q25 = numericColumn(table, "q25_n_gap_z12", path);
  const q75 = numericColumn(table, "q75_n_gap_z12", path);
  const scene: Scene = {
    title: "Spacing of the top two discounted sites: N * (Z1 - Z2)",
    xLabel: "N",
    yLabel: "N * (Z1 - Z2)",
    xRange: [Math.min(...Ns), Math.max(...Ns)],
    yRange: [Math.min(...q25) * 0.8, Math.max(...q75) * 1.25],
    logX: true,
    logY: true,
    series: [
      { points: Ns.map((n, i) => [n, median[i]] as [number, number]), color: "#1f77b4" },
      { points: Ns.map((n, i) => [n, q25[i]] as [number, number]), color: "#aec7e8", dashed: true },
      { points: Ns.map((n, i) => [n, q75[i]] as [number, number]), color: "#aec7e8", dashed: true },
    ],
  };
  const increasing = median.every((v, i) => i === 0 || v > median[i - 1]);
  return {
    scene,
    sidecar: {
      kind: spec.kind,
      N: Ns,
      median_n_gap_z12: median,
      q25_n_gap_z12: q25,
      q75_n_gap_z12: q75,
      median_strictly_increasing: increasing,
    },
  };
}

function scenarioScan(spec: FigureSpec): { scene: Scene; sidecar: Record<string, unknown> } {
  requireInputs(spec, 1);
  const table = parseCsvTable(spec.inputs[0]);
  const path = spec.inputs[0];
  const Ns = numericColumn(table, "N", path);
  const gap = numericColumn(table, "psi_gap", path);
  const dpW = numericColumn(table, "dp_w", path);
  let nStar = Number.NaN;
  for (let i = 0; i < Ns.length; i++) {
    if (gap[i] <= 0) nStar = Ns[i];
  }
  const gMax = Math.max(...gap.map(Math.abs)) * 1.1;
  const scene: Scene = {
    title: "Runner-up switch scan: discounted-value gap across the horizon window",
    xLabel: "N",
    yLabel: "psi(y) - psi(x)",
    xRange: [Math.min(...Ns), Math.max(...Ns)],
    yRange: [-gMax, gMax],
    series: [{ points: Ns.map((n, i) => [n, gap[i]] as [number, number]), color: "#1f77b4" }],
    hlines: [{ y: 0, color: "#666666" }],
    vlines: Number.isNaN(nStar) ? [] : [{ x: nStar, color: "#d62728", label: `N* = ${nStar}` }],
  };
  const confirmed = Ns.filter((_, i) => Number.isFinite(dpW[i]));
  return {
    scene,
    sidecar: {
      kind: spec.kind,
      window: [Math.min(...Ns), Math.max(...Ns)],
      N_star: nStar,
      dp_confirmed_at: confirmed,
      sign_change_found: gap[0] < 0 && gap[gap.length - 1] > 0,
    },
  };
}

export function render(spec: FigureSpec): RenderResult {
  let built: { scene: Scene; sidecar: Record<string, unknown> };
  switch (spec.kind) {
    case "endpoint-density":
      built = endpointDensity(spec);
      break;
    case "mass-vs-N":
      built = massVsN(spec);
      break;
    case "gap-scaling":
      built = gapScaling(spec);
      break;
    case "scenario-scan":
      built = scenarioScan(spec);
      break;
    default:
      throw new Error(`unknown figure kind '${(spec as FigureSpec).kind}'`);
  }
  // inputs parsed successfully: only now touch the output paths
  const svg = renderScene(built.scene);
  const sidecarPath = spec.out.replace(/\.svg$/, "") + ".stats.json";
  const manifestPath = spec.out.replace(/\.svg$/, "") + ".manifest.json";
  const manifest = {
    kind: spec.kind,
    out: spec.out,
    inputs: spec.inputs.map((p) => ({ path: p, sha256: sha256(p) })),
  };
  writeFileSync(spec.out, svg);
  writeFileSync(sidecarPath, JSON.stringify(built.sidecar, null, 2) + "\n");
  writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  return { svgPath: spec.out, sidecarPath, manifestPath, sidecar: built.sidecar };
}
