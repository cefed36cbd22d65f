/**
 * Grayscale image loading for the exporter.
 *
 * Supports the netpbm family natively (P2/P5 PGM, P3/P6 PPM, ASCII or
 * binary, 8- or 16-bit) plus PNG via pngjs. Pixels come back as doubles
 * in [0, 1]; color inputs are collapsed with the usual luminance weights.
 */

import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";

export interface GrayImage {
  width: number;
  height: number;
  /** row-major, values in [0, 1] */
  pixels: Float64Array;
}

export class UnreadableImageError extends Error {}

export const IMAGE_EXTENSIONS = [".pgm", ".ppm", ".pnm", ".png"];

export function isImageFile(file: string): boolean {
  return IMAGE_EXTENSIONS.includes(path.extname(file).toLowerCase());
}

export function readImage(file: string): GrayImage {
  let buf: Buffer;
  try {
    buf = fs.readFileSync(file);
  } catch (e) {
    throw new UnreadableImageError(`cannot read ${file}: ${(e as Error).message}`);
  }
  const ext = path.extname(file).toLowerCase();
  try {
    if (ext === ".png") {
      return fromPng(buf);
    }
    return fromPnm(buf);
  } catch (e) {
    if (e instanceof UnreadableImageError) throw e;
    throw new UnreadableImageError(`cannot decode ${file}: ${(e as Error).message}`);
  }
}

function fromPng(buf: Buffer): GrayImage {
  const png = PNG.sync.read(buf);
  const pixels = new Float64Array(png.width * png.height);
  for (let i = 0; i < pixels.length; i++) {
    const o = i * 4;
    pixels[i] =
      (0.299 * png.data[o] + 0.587 * png.data[o + 1] + 0.114 * png.data[o + 2]) / 255;
  }
  return { width: png.width, height: png.height, pixels };
}

interface PnmHeader {
  magic: string;
  width: number;
  height: number;
  maxval: number;
  dataOffset: number;
}

/** Tokenized header scan; '#' starts a comment running to end of line. */
function parsePnmHeader(buf: Buffer): PnmHeader {
  const magic = buf.toString("latin1", 0, 2);
  if (!["P2", "P3", "P5", "P6"].includes(magic)) {
    throw new UnreadableImageError(`unsupported magic ${JSON.stringify(magic)}`);
  }
  const fields: number[] = [];
  let pos = 2;
  while (fields.length < 3) {
    if (pos >= buf.length) throw new UnreadableImageError("truncated header");
    const c = buf[pos];
    if (c === 0x23) {
      while (pos < buf.length && buf[pos] !== 0x0a) pos++;
    } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
      pos++;
    } else {
      let end = pos;
      while (end < buf.length && buf[end] >= 0x30 && buf[end] <= 0x39) end++;
      if (end === pos) throw new UnreadableImageError(`bad header byte at ${pos}`);
      fields.push(parseInt(buf.toString("latin1", pos, end), 10));
      pos = end;
    }
  }
  // exactly one whitespace byte separates the header from binary data
  pos++;
  const [width, height, maxval] = fields;
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw new UnreadableImageError(`bad dimensions ${width}x${height}/${maxval}`);
  }
  return { magic, width, height, maxval, dataOffset: pos };
}

function fromPnm(buf: Buffer): GrayImage {
  const h = parsePnmHeader(buf);
  const channels = h.magic === "P3" || h.magic === "P6" ? 3 : 1;
  const count = h.width * h.height * channels;
  const raw = new Float64Array(count);

  if (h.magic === "P2" || h.magic === "P3") {
    const text = buf.toString("latin1", h.dataOffset - 1);
    const tokens = text.split(/\s+/).filter((t) => t.length > 0);
    if (tokens.length < count) throw new UnreadableImageError("truncated pixel data");
    for (let i = 0; i < count; i++) raw[i] = parseInt(tokens[i], 10);
  } else {
    const wide = h.maxval > 255;
    const need = count * (wide ? 2 : 1);
    if (buf.length - h.dataOffset < need) {
      throw new UnreadableImageError("truncated pixel data");
    }
    for (let i = 0; i < count; i++) {
      raw[i] = wide ? buf.readUInt16BE(h.dataOffset + 2 * i) : buf[h.dataOffset + i];
    }
  }

  const pixels = new Float64Array(h.width * h.height);
  if (channels === 1) {
    for (let i = 0; i < pixels.length; i++) pixels[i] = raw[i] / h.maxval;
  } else {
    for (let i = 0; i < pixels.length; i++) {
      const o = i * 3;
      pixels[i] = (0.299 * raw[o] + 0.587 * raw[o + 1] + 0.114 * raw[o + 2]) / h.maxval;
    }
  }
  return { width: h.width, height: h.height, pixels };
}
