/**
 * Minimal reader for the preview archives: zip files whose entries are
 * stored uncompressed (the service guarantees ZIP_STORED). Walks the
 * central directory, so entry order and sizes come from authoritative
 * records rather than local-header guessing.
 */

export interface ZipEntry {
  name: string;
  data: Uint8Array;
}

const EOCD_SIG = 0x06054b50;
const CENTRAL_SIG = 0x02014b50;
const LOCAL_SIG = 0x04034b50;

export function readStoredZip(buffer: ArrayBuffer): ZipEntry[] {
  const view = new DataView(buffer);
  const bytes = new Uint8Array(buffer);

  // EOCD is at the end, possibly preceded by a comment (<= 65535 bytes)
  let eocd = -1;
  const lowest = Math.max(0, buffer.byteLength - 22 - 65535);
  for (let pos = buffer.byteLength - 22; pos >= lowest; pos--) {
    if (view.getUint32(pos, true) === EOCD_SIG) {
      eocd = pos;
      break;
    }
  }
  if (eocd < 0) {
    throw new Error("not a zip archive: end-of-central-directory not found");
  }
  const count = view.getUint16(eocd + 10, true);
  let pos = view.getUint32(eocd + 16, true);

  const entries: ZipEntry[] = [];
  for (let i = 0; i < count; i++) {
    if (view.getUint32(pos, true) !== CENTRAL_SIG) {
      throw new Error(`bad central directory record at ${pos}`);
    }
    const method = view.getUint16(pos + 10, true);
    const compressedSize = view.getUint32(pos + 20, true);
    const nameLen = view.getUint16(pos + 28, true);
    const extraLen = view.getUint16(pos + 30, true);
    const commentLen = view.getUint16(pos + 32, true);
    const localOffset = view.getUint32(pos + 42, true);
    const name = new TextDecoder().decode(bytes.subarray(pos + 46, pos + 46 + nameLen));
    if (method !== 0) {
      throw new Error(`entry ${name} is compressed (method ${method}); expected stored`);
    }
    if (view.getUint32(localOffset, true) !== LOCAL_SIG) {
      throw new Error(`bad local header for ${name}`);
    }
    const localNameLen = view.getUint16(localOffset + 26, true);
    const localExtraLen = view.getUint16(localOffset + 28, true);
    const dataStart = localOffset + 30 + localNameLen + localExtraLen;
    entries.push({ name, data: bytes.slice(dataStart, dataStart + compressedSize) });
    pos += 46 + nameLen + extraLen + commentLen;
  }
  return entries;
}
