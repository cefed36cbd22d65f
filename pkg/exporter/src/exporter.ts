/**
 * Folder -> predictions CSV export.
 *
 * One row per (image, model) with probabilities on the simplex; rows
 * sorted by sample_id then model_id; the write is atomic (temp file +
 * rename). Unreadable images are skipped with a warning and listed in a
 * sidecar log next to the output; a model that fails to load is fatal.
 */

import * as fs from "fs";
import * as path from "path";
import { isImageFile, readImage, UnreadableImageError } from "./images";
import { Classifier, loadClassifier, pooledFeatures, softmaxNormalize } from "./models";

export interface ExportJob {
  imagesDir: string;
  model: string;
  classes: number;
  out: string;
  labels?: string;
}

export interface ExportResult {
  rowsWritten: number;
  skipped: string[];
  sidecarLog?: string;
}

export class ExportError extends Error {}

export function predictionHeader(k: number): string {
  const cols = ["sample_id", "model_id", "true_label"];
  for (let i = 0; i < k; i++) cols.push(`p_${i}`);
  return cols.join(",");
}

/** Shortest representation that round-trips the double exactly. */
export function formatFloat(x: number): string {
  return String(x);
}

export function atomicWrite(file: string, text: string): void {
  const tmp = `${file}.tmp`;
  fs.writeFileSync(tmp, text, "utf-8");
  fs.renameSync(tmp, file);
}

/** sample_id,label CSV; '#' comment lines skipped. */
export function readLabelsFile(file: string, classes: number): Map<string, number> {
  let text: string;
  try {
    text = fs.readFileSync(file, "utf-8");
  } catch (e) {
    throw new ExportError(`cannot read labels ${file}: ${(e as Error).message}`);
  }
  const lines = text.split("\n").filter((l) => l.trim() !== "" && !l.startsWith("#"));
  if (lines.length === 0 || lines[0].split(",")[0] !== "sample_id") {
    throw new ExportError(`labels ${file}: missing sample_id,label header`);
  }
  const out = new Map<string, number>();
  for (const line of lines.slice(1)) {
    const [sid, raw] = line.split(",");
    const label = parseInt(raw, 10);
    if (!Number.isInteger(label) || label < 0 || label >= classes) {
      throw new ExportError(`labels ${file}: bad label ${raw} for ${sid}`);
    }
    out.set(sid, label);
  }
  return out;
}

function classify(classifier: Classifier, file: string): number[] {
  const probs = softmaxNormalize(classifier.rawScores(pooledFeatures(readImage(file))));
  // Nudge the largest entry so the written doubles sum to 1 exactly;
  // re-parsed values then pass the strict simplex tolerance untouched.
  let sum = 0;
  let argmax = 0;
  for (let i = 0; i < probs.length; i++) {
    sum += probs[i];
    if (probs[i] > probs[argmax]) argmax = i;
  }
  probs[argmax] += 1 - sum;
  return probs;
}

export function runExport(job: ExportJob): ExportResult {
  let entries: string[];
  try {
    entries = fs.readdirSync(job.imagesDir);
  } catch (e) {
    throw new ExportError(`cannot list ${job.imagesDir}: ${(e as Error).message}`);
  }
  const images = entries.filter(isImageFile).sort();
  if (images.length === 0) {
    throw new ExportError(`no images (${["pgm", "ppm", "pnm", "png"].join("/")}) in ${job.imagesDir}`);
  }

  const classifier = loadClassifier(job.model, job.classes); // fatal on failure
  const labels = job.labels ? readLabelsFile(job.labels, job.classes) : new Map<string, number>();

  interface Row {
    sampleId: string;
    probs: number[];
  }
  const rows: Row[] = [];
  const skipped: string[] = [];
  for (const file of images) {
    const sampleId = path.basename(file, path.extname(file));
    try {
      rows.push({ sampleId, probs: classify(classifier, path.join(job.imagesDir, file)) });
    } catch (e) {
      if (e instanceof UnreadableImageError) {
        skipped.push(`${file}: ${e.message}`);
        process.stderr.write(`warning: skipping ${file}: ${e.message}\n`);
      } else {
        throw e;
      }
    }
  }
  if (rows.length === 0) {
    throw new ExportError(`every image in ${job.imagesDir} was unreadable`);
  }

  rows.sort((a, b) =>
    a.sampleId < b.sampleId ? -1 : a.sampleId > b.sampleId ? 1 : 0
  );
  const modelId = job.model.startsWith("builtin:")
    ? job.model.replace(":", "-")
    : path.basename(job.model, path.extname(job.model));

  const lines = [
    `# drgrade-exporter model=${modelId} classes=${job.classes}`,
    predictionHeader(job.classes),
  ];
  for (const row of rows) {
    const label = labels.has(row.sampleId) ? String(labels.get(row.sampleId)) : "";
    lines.push(
      [row.sampleId, modelId, label, ...row.probs.map(formatFloat)].join(",")
    );
  }
  atomicWrite(job.out, lines.join("\n") + "\n");

  let sidecarLog: string | undefined;
  if (skipped.length > 0) {
    sidecarLog = `${job.out}.skipped.log`;
    fs.writeFileSync(sidecarLog, skipped.join("\n") + "\n", "utf-8");
  }
  return { rowsWritten: rows.length, skipped, sidecarLog };
}
