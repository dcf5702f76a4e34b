export { decodePpm, encodePpm, BadImageFile, type Ppm } from './ppm';
export { encodeLxfv, decodeLxfv, BadFeatureFile, type LxfvMatrix } from './lxfv';
export { percentEncode, wordFilename, imageFilename } from './names';
export { readManifest, parseManifest, formatManifest, readWordList, normalizeWord, BadManifest, type Manifest } from './manifest';
export { buildAlexNet, buildTinyNet, loadBackbone, saveModelToDir, loadModelFromDir, batchActivations, OUTPUT_DIM, type Backbone } from './backbone';
export { exportCnn, PATCHED_MANIFEST_NAME, type ExportJob, type CnnExportResult } from './exportCnn';
export { exportEmbeddings, EMBEDDING_DIM, BadEmbeddingTable } from './exportEmbeddings';
