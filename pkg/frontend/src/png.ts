/**
 * Minimal 8-bit grayscale PNG codec.
 *
 * The wire format for masks is a single-channel PNG whose pixel values
 * ARE the labels, so encoding must be lossless and canvas-free (canvas
 * APIs are unavailable in tests and may color-manage pixel values).
 * Deflate comes from the standard CompressionStream/DecompressionStream
 * ("deflate" = zlib framing, which is what PNG IDAT carries).
 */

const PNG_SIGNATURE = new Uint8Array([137, 80, 78, 71, 13, 10, 26, 10]);
const COLOR_TYPE_GRAY = 0;

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

function crc32(...parts: Uint8Array[]): number {
  let c = 0xffffffff;
  for (const part of parts) {
    for (let i = 0; i < part.length; i++) {
      c = CRC_TABLE[(c ^ part[i]) & 0xff] ^ (c >>> 8);
    }
  }
  return (c ^ 0xffffffff) >>> 0;
}

function u32be(value: number): Uint8Array {
  return new Uint8Array([(value >>> 24) & 0xff, (value >>> 16) & 0xff, (value >>> 8) & 0xff, value & 0xff]);
}

function readU32be(data: Uint8Array, offset: number): number {
  return ((data[offset] << 24) | (data[offset + 1] << 16) | (data[offset + 2] << 8) | data[offset + 3]) >>> 0;
}

async function pipeThrough(data: Uint8Array, stream: CompressionStream | DecompressionStream): Promise<Uint8Array> {
  const out = new Response(new Blob([data as BlobPart]).stream().pipeThrough(stream));
  return new Uint8Array(await out.arrayBuffer());
}

function chunk(type: string, data: Uint8Array): Uint8Array {
  const typeBytes = new TextEncoder().encode(type);
  const result = new Uint8Array(12 + data.length);
  result.set(u32be(data.length), 0);
  result.set(typeBytes, 4);
  result.set(data, 8);
  result.set(u32be(crc32(typeBytes, data)), 8 + data.length);
  return result;
}

/** Encode a row-major 8-bit grayscale raster as a PNG. */
export async function encodeGrayPng(pixels: Uint8Array, width: number, height: number): Promise<Uint8Array> {
  if (pixels.length !== width * height) {
    throw new Error(`pixel buffer ${pixels.length} does not match ${width}x${height}`);
  }
  const ihdr = new Uint8Array(13);
  ihdr.set(u32be(width), 0);
  ihdr.set(u32be(height), 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = COLOR_TYPE_GRAY;

  // one filter byte (0 = None) per scanline
  const raw = new Uint8Array(height * (width + 1));
  for (let y = 0; y < height; y++) {
    raw[y * (width + 1)] = 0;
    raw.set(pixels.subarray(y * width, (y + 1) * width), y * (width + 1) + 1);
  }
  const idat = await pipeThrough(raw, new CompressionStream("deflate"));

  const parts = [PNG_SIGNATURE, chunk("IHDR", ihdr), chunk("IDAT", idat), chunk("IEND", new Uint8Array(0))];
  const total = parts.reduce((n, p) => n + p.length, 0);
  const png = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    png.set(part, offset);
    offset += part.length;
  }
  return png;
}

export interface GrayImage {
  width: number;
  height: number;
  pixels: Uint8Array;
}

function unfilter(raw: Uint8Array, width: number, height: number): Uint8Array {
  const stride = width + 1;
  const out = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * stride];
    const row = raw.subarray(y * stride + 1, y * stride + 1 + width);
    const prev = y > 0 ? out.subarray((y - 1) * width, y * width) : null;
    const cur = out.subarray(y * width, (y + 1) * width);
    for (let x = 0; x < width; x++) {
      const a = x > 0 ? cur[x - 1] : 0; // left
      const b = prev ? prev[x] : 0; // up
      const c = x > 0 && prev ? prev[x - 1] : 0; // up-left
      let value: number;
      switch (filter) {
        case 0:
          value = row[x];
          break;
        case 1:
          value = row[x] + a;
          break;
        case 2:
          value = row[x] + b;
          break;
        case 3:
          value = row[x] + ((a + b) >> 1);
          break;
        case 4: {
          const p = a + b - c;
          const pa = Math.abs(p - a);
          const pb = Math.abs(p - b);
          const pc = Math.abs(p - c);
          value = row[x] + (pa <= pb && pa <= pc ? a : pb <= pc ? b : c);
          break;
        }
        default:
          throw new Error(`unsupported PNG filter type ${filter}`);
      }
      cur[x] = value & 0xff;
    }
  }
  return out;
}

/** Decode an 8-bit grayscale PNG (color type 0, no interlace). */
export async function decodeGrayPng(data: Uint8Array): Promise<GrayImage> {
  for (let i = 0; i < PNG_SIGNATURE.length; i++) {
    if (data[i] !== PNG_SIGNATURE[i]) throw new Error("not a PNG file");
  }
  let width = 0;
  let height = 0;
  const idatParts: Uint8Array[] = [];
  let offset = 8;
  while (offset < data.length) {
    const length = readU32be(data, offset);
    const type = String.fromCharCode(data[offset + 4], data[offset + 5], data[offset + 6], data[offset + 7]);
    const body = data.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      width = readU32be(body, 0);
      height = readU32be(body, 4);
      if (body[8] !== 8 || body[9] !== COLOR_TYPE_GRAY) {
        throw new Error(`unsupported PNG format (bit depth ${body[8]}, color type ${body[9]})`);
      }
      if (body[12] !== 0) throw new Error("interlaced PNGs are not supported");
    } else if (type === "IDAT") {
      idatParts.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length;
  }
  if (!width || !height || idatParts.length === 0) throw new Error("PNG is missing IHDR or IDAT");
  const compressed = new Uint8Array(idatParts.reduce((n, p) => n + p.length, 0));
  let pos = 0;
  for (const part of idatParts) {
    compressed.set(part, pos);
    pos += part.length;
  }
  const raw = await pipeThrough(compressed, new DecompressionStream("deflate"));
  if (raw.length !== height * (width + 1)) {
    throw new Error(`decompressed size ${raw.length} does not match ${width}x${height}`);
  }
  return { width, height, pixels: unfilter(raw, width, height) };
}

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const step = 0x8000;
  for (let i = 0; i < bytes.length; i += step) {
    binary += String.fromCharCode(...bytes.subarray(i, i + step));
  }
  return btoa(binary);
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const bytes = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) bytes[i] = binary.charCodeAt(i);
  return bytes;
}
