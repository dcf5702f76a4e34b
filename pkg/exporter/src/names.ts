// Feature and image files are named by percent-encoding the word or
// image id with no safe characters beyond RFC 3986 unreserved ones.
// This must match the consumer's naming exactly, byte for byte.

const UNRESERVED = /[A-Za-z0-9_.~-]/;

export function percentEncode(text: string): string {
  const bytes = Buffer.from(text, 'utf-8');
  let out = '';
  for (const byte of bytes) {
    const ch = String.fromCharCode(byte);
    if (byte < 0x80 && UNRESERVED.test(ch)) {
      out += ch;
    } else {
      out += '%' + byte.toString(16).toUpperCase().padStart(2, '0');
    }
  }
  return out;
}

export function wordFilename(word: string, suffix = '.lxfv'): string {
  return percentEncode(word) + suffix;
}

export function imageFilename(imageId: string): string {
  return percentEncode(imageId) + '.ppm';
}
