import * as fs from 'fs';
import * as path from 'path';
import { Backbone, batchActivations } from './backbone';
import { writeFileAtomic } from './fsutil';
import { encodeLxfv } from './lxfv';
import { formatManifest, Manifest, ManifestEntry, readManifest } from './manifest';
import { imageFilename, wordFilename } from './names';
import { decodePpm, Ppm } from './ppm';

export interface ExportJob {
  imagesDir: string;
  manifestPath: string;
  outDir: string;
  /** pretrained multilingual embedding table, used by exportEmbeddings */
  embeddingsPath?: string;
}

export interface SkippedImage {
  word: string;
  imageId: string;
  reason: string;
}

export interface CnnExportResult {
  written: string[];
  skipped: SkippedImage[];
  /** set when any image was skipped and a corrected manifest was emitted */
  patchedManifestPath?: string;
}

export const PATCHED_MANIFEST_NAME = 'manifest.patched.tsv';

function loadImages(job: ExportJob, word: string, entries: ManifestEntry[],
                    skipped: SkippedImage[]): { images: Ppm[]; kept: ManifestEntry[] } {
  const images: Ppm[] = [];
  const kept: ManifestEntry[] = [];
  for (const entry of entries) {
    const file = path.join(job.imagesDir, imageFilename(entry.imageId));
    try {
      images.push(decodePpm(fs.readFileSync(file)));
      kept.push(entry);
    } catch (err) {
      const reason = err instanceof Error ? err.message : String(err);
      console.error(`warning: skipping ${word}/${entry.imageId}: ${reason}`);
      skipped.push({ word, imageId: entry.imageId, reason });
    }
  }
  return { images, kept };
}

/** One LXFV per manifest word, rows in manifest order. Undecodable or
 * missing images are skipped with a warning; if any were skipped, a
 * patched manifest matching the emitted row counts is written next to
 * the feature files. */
export function exportCnn(job: ExportJob, backbone: Backbone): CnnExportResult {
  const manifest = readManifest(job.manifestPath);
  fs.mkdirSync(job.outDir, { recursive: true });

  const written: string[] = [];
  const skipped: SkippedImage[] = [];
  const patched: Manifest = new Map();

  for (const [word, entries] of manifest) {
    const { images, kept } = loadImages(job, word, entries, skipped);
    patched.set(word, kept);
    const activations = batchActivations(backbone, images);
    const target = path.join(job.outDir, wordFilename(word));
    writeFileAtomic(target, encodeLxfv(activations, images.length, backbone.outputDim));
    written.push(target);
  }

  let patchedManifestPath: string | undefined;
  if (skipped.length > 0) {
    patchedManifestPath = path.join(job.outDir, PATCHED_MANIFEST_NAME);
    writeFileAtomic(patchedManifestPath, formatManifest(patched));
    console.error(`warning: ${skipped.length} image(s) skipped; ` +
                  `corrected manifest written to ${patchedManifestPath}`);
  }
  return { written, skipped, patchedManifestPath };
}
