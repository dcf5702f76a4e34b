import * as fs from 'fs';

export class BadManifest extends Error {}

/** The consumer lowercases, trims and NFC-normalizes words on load;
 * apply the same rule here so emitted file names line up. */
export function normalizeWord(raw: string): string {
  return raw.trim().toLowerCase().normalize('NFC');
}

export interface ManifestEntry {
  imageId: string;
  contentHash: string;
}

/** word -> images, preserving file order of both words and images. */
export type Manifest = Map<string, ManifestEntry[]>;

export function parseManifest(text: string, path = '<manifest>'): Manifest {
  const manifest: Manifest = new Map();
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    if (lines[i] === '') continue;
    const fields = lines[i].split('\t');
    if (fields.length !== 3) {
      throw new BadManifest(`${path}:${i + 1}: expected word<TAB>image id<TAB>hash`);
    }
    const word = normalizeWord(fields[0]);
    const [, imageId, contentHash] = fields;
    if (!manifest.has(word)) manifest.set(word, []);
    manifest.get(word)!.push({ imageId, contentHash });
  }
  return manifest;
}

export function readManifest(path: string): Manifest {
  return parseManifest(fs.readFileSync(path, 'utf-8'), path);
}

export function formatManifest(manifest: Manifest): string {
  let out = '';
  for (const [word, entries] of manifest) {
    for (const e of entries) {
      out += `${word}\t${e.imageId}\t${e.contentHash}\n`;
    }
  }
  return out;
}

/** First column of a word<TAB>pos list, unique, in file order. */
export function readWordList(path: string): string[] {
  const words: string[] = [];
  const seen = new Set<string>();
  const lines = fs.readFileSync(path, 'utf-8').split('\n');
  for (let i = 0; i < lines.length; i++) {
    if (lines[i] === '') continue;
    const fields = lines[i].split('\t');
    if (fields.length !== 2) {
      throw new BadManifest(`${path}:${i + 1}: expected word<TAB>pos`);
    }
    const word = normalizeWord(fields[0]);
    if (!seen.has(word)) {
      seen.add(word);
      words.push(word);
    }
  }
  return words;
}
