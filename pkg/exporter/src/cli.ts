#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { BACKBONE_NAMES, loadBackbone } from './backbone';
import { exportCnn } from './exportCnn';
import { EMBEDDING_DIM, exportEmbeddings } from './exportEmbeddings';
import { readManifest, readWordList } from './manifest';

export async function main(argv: string[]): Promise<number> {
  let failed = false;
  await yargs(argv)
    .scriptName('lexiscope-export')
    .command(
      'cnn',
      'export network activations as one LXFV file per word',
      y => y
        .option('images', { type: 'string', demandOption: true,
                            describe: 'directory of <encoded image id>.ppm files' })
        .option('manifest', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('backbone', { choices: BACKBONE_NAMES, default: 'alexnet',
                              describe: '"tiny" is a smoke-test network, not a published one' })
        .option('seed', { type: 'number', default: 0,
                          describe: 'weight seed when no --weights directory is given' })
        .option('weights', { type: 'string',
                             describe: 'layers-model directory with pretrained weights' }),
      async args => {
        const backbone = await loadBackbone(args.backbone, args.seed, args.weights);
        const result = exportCnn(
          { imagesDir: args.images, manifestPath: args.manifest, outDir: args.out },
          backbone);
        console.log(`wrote ${result.written.length} feature file(s), ` +
                    `skipped ${result.skipped.length} image(s)`);
      })
    .command(
      'embeddings',
      'filter a pretrained embedding table down to the corpus words',
      y => y
        .option('source', { type: 'string', demandOption: true,
                            describe: 'pretrained word v1 ... vd table' })
        .option('manifest', { type: 'string',
                              describe: 'take the word inventory from this manifest' })
        .option('words', { type: 'string',
                           describe: 'word<TAB>pos list overriding --manifest' })
        .option('out', { type: 'string', demandOption: true })
        .option('dim', { type: 'number', default: EMBEDDING_DIM })
        .check(args => {
          if (args.words === undefined && args.manifest === undefined) {
            throw new Error('one of --words or --manifest is required');
          }
          return true;
        }),
      async args => {
        const words = args.words !== undefined
          ? readWordList(args.words)
          : [...readManifest(args.manifest!).keys()];
        const result = exportEmbeddings(args.source, words, args.out, args.dim);
        console.log(`wrote ${result.written} embedding(s), ${result.oov.length} oov`);
      })
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      console.error(err !== undefined && err !== null ? `error: ${err.message}` : msg);
      failed = true;
    })
    .parseAsync();
  return failed ? 1 : 0;
}

if (require.main === module) {
  main(hideBin(process.argv))
    .then(code => process.exit(code))
    .catch(err => {
      console.error(`error: ${err instanceof Error ? err.message : err}`);
      process.exit(1);
    });
}
