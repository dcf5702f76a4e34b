// LXFV binary feature files: magic "LXFV", uint16 LE version (=1),
// uint32 LE row count and dim, then row-major float32 LE payload.

export class BadFeatureFile extends Error {}

export const LXFV_MAGIC = 'LXFV';
export const LXFV_VERSION = 1;
const HEADER_SIZE = 4 + 2 + 4 + 4;

export interface LxfvMatrix {
  rows: number;
  dim: number;
  data: Float32Array;
}

export function encodeLxfv(data: Float32Array, rows: number, dim: number): Buffer {
  if (data.length !== rows * dim) {
    throw new BadFeatureFile(`${data.length} values for ${rows}x${dim} matrix`);
  }
  for (let i = 0; i < data.length; i++) {
    if (!Number.isFinite(data[i])) {
      throw new BadFeatureFile('refusing to write non-finite feature values');
    }
  }
  const buf = Buffer.alloc(HEADER_SIZE + rows * dim * 4);
  buf.write(LXFV_MAGIC, 0, 'ascii');
  buf.writeUInt16LE(LXFV_VERSION, 4);
  buf.writeUInt32LE(rows, 6);
  buf.writeUInt32LE(dim, 10);
  for (let i = 0; i < data.length; i++) {
    buf.writeFloatLE(data[i], HEADER_SIZE + i * 4);
  }
  return buf;
}

export function decodeLxfv(buf: Buffer): LxfvMatrix {
  if (buf.length < HEADER_SIZE) {
    throw new BadFeatureFile(`file too short for an LXFV header (${buf.length} bytes)`);
  }
  if (buf.subarray(0, 4).toString('ascii') !== LXFV_MAGIC) {
    throw new BadFeatureFile('bad magic');
  }
  const version = buf.readUInt16LE(4);
  if (version !== LXFV_VERSION) {
    throw new BadFeatureFile(`unsupported LXFV version ${version}`);
  }
  const rows = buf.readUInt32LE(6);
  const dim = buf.readUInt32LE(10);
  if (buf.length - HEADER_SIZE !== rows * dim * 4) {
    throw new BadFeatureFile(`payload is ${buf.length - HEADER_SIZE} bytes, header promises ${rows * dim * 4}`);
  }
  const data = new Float32Array(rows * dim);
  for (let i = 0; i < data.length; i++) {
    data[i] = buf.readFloatLE(HEADER_SIZE + i * 4);
    if (!Number.isFinite(data[i])) {
      throw new BadFeatureFile('non-finite value in LXFV payload');
    }
  }
  return { rows, dim, data };
}
