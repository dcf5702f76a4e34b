import * as fs from 'fs';
import { writeFileAtomic } from './fsutil';

export class BadEmbeddingTable extends Error {}

export const EMBEDDING_DIM = 40;

export interface EmbeddingExportResult {
  written: number;
  oov: string[];
}

/** Filter a pretrained `word v1 ... vd` table down to the given words,
 * in the given order, validating the selected rows. Words absent from
 * the source are reported on stderr and returned. */
export function exportEmbeddings(sourcePath: string, words: string[],
                                 outPath: string,
                                 dim = EMBEDDING_DIM): EmbeddingExportResult {
  const wanted = new Set(words);
  const found = new Map<string, string>();

  const lines = fs.readFileSync(sourcePath, 'utf-8').split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line === '') continue;
    const tokens = line.split(/\s+/);
    const word = tokens[0];
    if (!wanted.has(word) || found.has(word)) continue;
    const values = tokens.slice(1);
    if (values.length !== dim) {
      throw new BadEmbeddingTable(
        `${sourcePath}:${i + 1}: ${word} has ${values.length} values, expected ${dim}`);
    }
    for (const v of values) {
      if (!Number.isFinite(Number(v))) {
        throw new BadEmbeddingTable(`${sourcePath}:${i + 1}: non-numeric value ${v}`);
      }
    }
    found.set(word, `${word} ${values.join(' ')}\n`);
  }

  const oov: string[] = [];
  let out = '';
  for (const word of words) {
    const line = found.get(word);
    if (line === undefined) {
      oov.push(word);
    } else {
      out += line;
    }
  }
  for (const word of oov) {
    console.error(`oov: ${word}`);
  }
  writeFileAtomic(outPath, out);
  return { written: found.size, oov };
}
