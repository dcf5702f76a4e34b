export class BadImageFile extends Error {}

export interface Ppm {
  width: number;
  height: number;
  /** row-major RGB, 3 bytes per pixel */
  pixels: Uint8Array;
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a ||
         byte === 0x0b || byte === 0x0c || byte === 0x0d;
}

// Whitespace-separated header tokens, skipping # comments. Returns the
// offset just past the single whitespace byte closing the last token.
function readHeaderTokens(data: Buffer, count: number): { tokens: string[]; offset: number } {
  const tokens: string[] = [];
  let i = 0;
  while (tokens.length < count) {
    while (i < data.length && isSpace(data[i])) i++;
    if (i < data.length && data[i] === 0x23) {
      while (i < data.length && data[i] !== 0x0a) i++;
      continue;
    }
    const start = i;
    while (i < data.length && !isSpace(data[i])) i++;
    if (start === i) throw new BadImageFile('truncated PPM header');
    tokens.push(data.subarray(start, i).toString('ascii'));
    if (tokens.length === count) i++;
  }
  return { tokens, offset: i };
}

export function decodePpm(data: Buffer): Ppm {
  if (data.subarray(0, 2).toString('ascii') !== 'P6') {
    throw new BadImageFile('not a binary PPM (P6) file');
  }
  const { tokens, offset } = readHeaderTokens(data.subarray(2), 3);
  const [width, height, maxval] = tokens.map(t => Number(t));
  if (!Number.isInteger(width) || !Number.isInteger(height) || !Number.isInteger(maxval)) {
    throw new BadImageFile(`non-numeric PPM header fields: ${tokens}`);
  }
  if (width < 1 || height < 1) {
    throw new BadImageFile(`bad PPM dimensions ${width}x${height}`);
  }
  if (maxval !== 255) {
    throw new BadImageFile(`only 8-bit PPM supported (maxval 255), got ${maxval}`);
  }
  const raster = data.subarray(2 + offset);
  const expected = width * height * 3;
  if (raster.length < expected) {
    throw new BadImageFile(`PPM raster truncated: ${raster.length} < ${expected} bytes`);
  }
  return { width, height, pixels: new Uint8Array(raster.subarray(0, expected)) };
}

export function encodePpm(img: Ppm): Buffer {
  if (img.pixels.length !== img.width * img.height * 3) {
    throw new BadImageFile(`pixel buffer ${img.pixels.length} inconsistent with ${img.width}x${img.height}`);
  }
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, 'ascii');
  return Buffer.concat([header, Buffer.from(img.pixels)]);
}
