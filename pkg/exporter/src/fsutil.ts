import * as fs from 'fs';
import * as path from 'path';

/** Write via a temp file in the same directory, then rename. */
export function writeFileAtomic(target: string, data: Buffer | string): void {
  const dir = path.dirname(target);
  const tmp = path.join(dir, `.tmp-${process.pid}-${path.basename(target)}`);
  fs.writeFileSync(tmp, data);
  fs.renameSync(tmp, target);
}
