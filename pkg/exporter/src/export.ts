/**
 * Export operations: images -> EMB1, class features -> per-class prompt
 * EMB1 files plus a manifest the cleanselect toolkit loads directly.
 */

import { existsSync, mkdirSync, readFileSync, readdirSync, statSync } from 'node:fs';
import { basename, join } from 'node:path';

import { encodeEmb1, writeFileAtomic } from './binfmt.js';
import { Encoder, l2Normalize } from './encoder.js';
import { decodePng } from './png.js';
import { ClassFeatures, buildPrompts } from './prompts.js';

export class ExportError extends Error {}

export interface ImageExportResult {
  count: number;
  dim: number;
  files: string[];
  warnings: string[];
}

function rowsToEmb1(rows: Float64Array[], dim: number): Buffer {
  const flat = new Float32Array(rows.length * dim);
  rows.forEach((row, i) => flat.set(Float32Array.from(row), i * dim));
  return encodeEmb1(rows.length, dim, flat);
}

/**
 * One L2-normalized row per decodable image, ordered by filename
 * (lexicographic). Undecodable files are listed in warnings and skipped.
 */
export function exportImages(imageDir: string, encoder: Encoder, outPath: string): ImageExportResult {
  if (!existsSync(imageDir) || !statSync(imageDir).isDirectory()) {
    throw new ExportError(`image directory not found: ${imageDir}`);
  }
  const names = readdirSync(imageDir)
    .filter((n) => n.toLowerCase().endsWith('.png'))
    .sort();
  if (names.length === 0) throw new ExportError(`no .png files in ${imageDir}`);

  const rows: Float64Array[] = [];
  const files: string[] = [];
  const warnings: string[] = [];
  for (const name of names) {
    try {
      const image = decodePng(readFileSync(join(imageDir, name)));
      rows.push(l2Normalize(encoder.encodeImage(image)));
      files.push(name);
    } catch (e) {
      warnings.push(`${name}: ${(e as Error).message}`);
    }
  }
  if (rows.length === 0) throw new ExportError(`no decodable images in ${imageDir}`);

  writeFileAtomic(outPath, rowsToEmb1(rows, encoder.dim));
  const sidecar = { checkpoint: encoder.id, files, warnings };
  writeFileAtomic(`${outPath}.json`, JSON.stringify(sidecar, null, 2) + '\n');
  return { count: rows.length, dim: encoder.dim, files, warnings };
}

export interface PromptExportResult {
  manifestPath: string;
  prompts: { class: string; path: string; count: number }[];
}

/**
 * Embed per-class prompt strings and write one EMB1 file per class plus a
 * manifest tying them together (labels/embeddings entries are filled with
 * the given paths or placeholders for later export steps).
 */
export function exportPrompts(
  classes: ClassFeatures[],
  style: 1 | 2 | 3,
  encoder: Encoder,
  outDir: string,
  options: { embeddingsPath?: string; labelsPath?: string } = {},
): PromptExportResult {
  const prompts = buildPrompts(classes, style);
  mkdirSync(outDir, { recursive: true });

  const entries = classes.map((c, i) => {
    const texts = prompts[i];
    const rows = texts.map((t) => l2Normalize(encoder.encodeText(t)));
    const fileName = `prompts_${c.name.replace(/[^A-Za-z0-9_-]+/g, '_')}.emb1`;
    writeFileAtomic(join(outDir, fileName), rowsToEmb1(rows, encoder.dim));
    return { class: c.name, path: fileName, count: rows.length };
  });

  const manifest = {
    embeddings: options.embeddingsPath ?? 'embeddings.emb1',
    labels: options.labelsPath ?? 'labels.lab1',
    num_classes: classes.length,
    dim: encoder.dim,
    prompts: entries,
  };
  const manifestPath = join(outDir, 'manifest.json');
  writeFileAtomic(manifestPath, JSON.stringify(manifest, null, 2) + '\n');
  return { manifestPath, prompts: entries };
}

/** Point an existing manifest's embeddings entry at a new export. */
export function updateManifestEmbeddings(manifestPath: string, embeddingsPath: string, dim: number): void {
  const manifest = JSON.parse(readFileSync(manifestPath, 'utf-8'));
  if (manifest.dim !== undefined && manifest.dim !== dim) {
    throw new ExportError(`manifest dim ${manifest.dim} does not match export dim ${dim}`);
  }
  manifest.embeddings = basename(embeddingsPath);
  manifest.dim = dim;
  writeFileAtomic(manifestPath, JSON.stringify(manifest, null, 2) + '\n');
}
