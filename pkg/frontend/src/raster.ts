/**
 * Minimal RGB raster canvas with a deterministic PNG encoder.
 *
 * No native dependencies: drawing is plain pixel pushing and the PNG
 * stream is built from zlib (filter 0 scanlines, fixed compression
 * level), so identical draw calls produce identical bytes.
 */

import { deflateSync } from "node:zlib";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphColumns } from "./font.js";

export type RGB = [number, number, number];

export class Canvas {
  readonly width: number;
  readonly height: number;
  private data: Uint8Array;

  constructor(width: number, height: number, background: RGB = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    this.fillRect(0, 0, width, height, background);
  }

  setPixel(x: number, y: number, color: RGB): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = color[0];
    this.data[i + 1] = color[1];
    this.data[i + 2] = color[2];
  }

  /** Alpha-blend a color onto a pixel (used for shaded bands). */
  blendPixel(x: number, y: number, color: RGB, alpha: number): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = Math.round(this.data[i] * (1 - alpha) + color[0] * alpha);
    this.data[i + 1] = Math.round(this.data[i + 1] * (1 - alpha) + color[1] * alpha);
    this.data[i + 2] = Math.round(this.data[i + 2] * (1 - alpha) + color[2] * alpha);
  }

  fillRect(x: number, y: number, w: number, h: number, color: RGB): void {
    const x1 = Math.max(0, x);
    const y1 = Math.max(0, y);
    const x2 = Math.min(this.width, x + w);
    const y2 = Math.min(this.height, y + h);
    for (let yy = y1; yy < y2; yy++) {
      for (let xx = x1; xx < x2; xx++) {
        this.setPixel(xx, yy, color);
      }
    }
  }

  blendColumn(x: number, y0: number, y1: number, color: RGB, alpha: number): void {
    const lo = Math.max(0, Math.min(y0, y1));
    const hi = Math.min(this.height - 1, Math.max(y0, y1));
    for (let y = lo; y <= hi; y++) {
      this.blendPixel(x, y, color, alpha);
    }
  }

  drawLine(x0: number, y0: number, x1: number, y1: number, color: RGB): void {
    // Bresenham; endpoints are rounded by the caller.
    let dx = Math.abs(x1 - x0);
    let dy = -Math.abs(y1 - y0);
    const sx = x0 < x1 ? 1 : -1;
    const sy = y0 < y1 ? 1 : -1;
    let err = dx + dy;
    let x = x0;
    let y = y0;
    for (;;) {
      this.setPixel(x, y, color);
      if (x === x1 && y === y1) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  text(x: number, y: number, message: string, color: RGB, size = 1): void {
    let cursor = x;
    for (const ch of message) {
      const cols = glyphColumns(ch);
      for (let cx = 0; cx < GLYPH_WIDTH; cx++) {
        for (let cy = 0; cy < GLYPH_HEIGHT; cy++) {
          if ((cols[cx] >> cy) & 1) {
            this.fillRect(cursor + cx * size, y + cy * size, size, size, color);
          }
        }
      }
      cursor += (GLYPH_WIDTH + 1) * size;
    }
  }

  static textWidth(message: string, size = 1): number {
    return message.length * (GLYPH_WIDTH + 1) * size - size;
  }

  encodePNG(): Buffer {
    const stride = this.width * 3;
    const raw = Buffer.alloc((stride + 1) * this.height);
    for (let y = 0; y < this.height; y++) {
      raw[y * (stride + 1)] = 0; // filter type 0
      raw.set(this.data.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
    }
    const ihdr = Buffer.alloc(13);
    ihdr.writeUInt32BE(this.width, 0);
    ihdr.writeUInt32BE(this.height, 4);
    ihdr[8] = 8; // bit depth
    ihdr[9] = 2; // color type: truecolor
    ihdr[10] = 0;
    ihdr[11] = 0;
    ihdr[12] = 0;
    const idat = deflateSync(raw, { level: 9 });
    return Buffer.concat([
      Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
      chunk("IHDR", ihdr),
      chunk("IDAT", idat),
      chunk("IEND", Buffer.alloc(0)),
    ]);
  }
}

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

function crc32(buf: Buffer): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, data: Buffer): Buffer {
  const out = Buffer.alloc(12 + data.length);
  out.writeUInt32BE(data.length, 0);
  out.write(type, 4, "ascii");
  data.copy(out, 8);
  out.writeUInt32BE(crc32(out.subarray(4, 8 + data.length)), 8 + data.length);
  return out;
}
