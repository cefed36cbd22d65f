/**
 * Classifiers the exporter can run.
 *
 * Every model maps a pooled-intensity feature vector to K raw scores; a
 * final softmax layer normalizes them onto the probability simplex. Two
 * sources: a JSON weights file (kind "linear-pool8") or a built-in
 * reference model whose weights derive deterministically from its name,
 * so runs are reproducible without any downloadable weights.
 */

import * as fs from "fs";
import { GrayImage } from "./images";

export const POOL_GRID = 8;
export const FEATURE_DIM = POOL_GRID * POOL_GRID;

export class ModelLoadFailure extends Error {}

export interface Classifier {
  id: string;
  classes: number;
  rawScores(features: Float64Array): Float64Array;
}

/** Mean intensity over a POOL_GRID x POOL_GRID partition, row-major. */
export function pooledFeatures(img: GrayImage, grid: number = POOL_GRID): Float64Array {
  const out = new Float64Array(grid * grid);
  const counts = new Float64Array(grid * grid);
  for (let y = 0; y < img.height; y++) {
    const gy = Math.min(grid - 1, Math.floor((y * grid) / img.height));
    for (let x = 0; x < img.width; x++) {
      const gx = Math.min(grid - 1, Math.floor((x * grid) / img.width));
      const cell = gy * grid + gx;
      out[cell] += img.pixels[y * img.width + x];
      counts[cell] += 1;
    }
  }
  for (let i = 0; i < out.length; i++) {
    out[i] = counts[i] > 0 ? out[i] / counts[i] : 0;
  }
  return out;
}

/** Softmax with max subtraction; the exporter's final normalization layer. */
export function softmaxNormalize(scores: Float64Array): number[] {
  let max = -Infinity;
  for (const s of scores) {
    if (!Number.isFinite(s)) throw new Error(`non-finite raw score ${s}`);
    if (s > max) max = s;
  }
  const exps = Array.from(scores, (s) => Math.exp(s - max));
  const sum = exps.reduce((a, b) => a + b, 0);
  return exps.map((e) => e / sum);
}

class LinearClassifier implements Classifier {
  constructor(
    public readonly id: string,
    public readonly classes: number,
    private readonly weights: Float64Array[], // classes x FEATURE_DIM
    private readonly bias: Float64Array
  ) {}

  rawScores(features: Float64Array): Float64Array {
    const out = new Float64Array(this.classes);
    for (let c = 0; c < this.classes; c++) {
      let acc = this.bias[c];
      const w = this.weights[c];
      for (let i = 0; i < w.length; i++) acc += w[i] * features[i];
      out[c] = acc;
    }
    return out;
  }
}

/** Deterministic 32-bit PRNG for built-in model weights. */
function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

function builtinClassifier(name: string, classes: number): Classifier {
  const rand = mulberry32(fnv1a(`${name}/${classes}`));
  const weights: Float64Array[] = [];
  for (let c = 0; c < classes; c++) {
    const w = new Float64Array(FEATURE_DIM);
    for (let i = 0; i < FEATURE_DIM; i++) w[i] = (rand() - 0.5) * 4;
    weights.push(w);
  }
  const bias = new Float64Array(classes);
  for (let c = 0; c < classes; c++) bias[c] = (rand() - 0.5) * 0.5;
  return new LinearClassifier(name, classes, weights, bias);
}

interface ModelFile {
  schema_version: number;
  kind: string;
  classes: number;
  weights: number[][];
  bias: number[];
}

function fileClassifier(file: string, classes: number): Classifier {
  let doc: ModelFile;
  try {
    doc = JSON.parse(fs.readFileSync(file, "utf-8"));
  } catch (e) {
    throw new ModelLoadFailure(`cannot load model ${file}: ${(e as Error).message}`);
  }
  if (doc.schema_version !== 1 || doc.kind !== "linear-pool8") {
    throw new ModelLoadFailure(
      `model ${file}: unsupported schema/kind ${doc.schema_version}/${doc.kind}`
    );
  }
  if (doc.classes !== classes) {
    throw new ModelLoadFailure(
      `model ${file} has ${doc.classes} classes, job expects ${classes}`
    );
  }
  if (
    !Array.isArray(doc.weights) ||
    doc.weights.length !== classes ||
    doc.weights.some((row) => row.length !== FEATURE_DIM) ||
    doc.bias.length !== classes
  ) {
    throw new ModelLoadFailure(`model ${file}: weight shapes do not match linear-pool8`);
  }
  const weights = doc.weights.map((row) => Float64Array.from(row));
  return new LinearClassifier(file, classes, weights, Float64Array.from(doc.bias));
}

/**
 * Resolve a model identifier: "builtin:<anything>" gives the seeded
 * reference model; any other name is a path to a JSON weights file.
 */
export function loadClassifier(name: string, classes: number): Classifier {
  if (classes < 2) {
    throw new ModelLoadFailure(`need at least 2 classes, got ${classes}`);
  }
  if (name.startsWith("builtin:")) {
    return builtinClassifier(name, classes);
  }
  return fileClassifier(name, classes);
}
