/** Software raster surface with just enough drawing for line plots. */

import { GLYPH_H, GLYPH_W, glyphFor } from "./font.js";

export type Color = [number, number, number];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    for (let i = 0; i < width * height; i++) {
      this.data.set(background, i * 3);
    }
  }

  set(x: number, y: number, c: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    this.data.set(c, (y * this.width + x) * 3);
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Color): void {
    // Bresenham
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, c);
      if (x === xe && y === ye) break;
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

  marker(x: number, y: number, c: Color, r = 2): void {
    const cx = Math.round(x);
    const cy = Math.round(y);
    for (let dy = -r; dy <= r; dy++) {
      for (let dx = -r; dx <= r; dx++) {
        if (dx * dx + dy * dy <= r * r) this.set(cx + dx, cy + dy, c);
      }
    }
  }

  text(x: number, y: number, s: string, c: Color, scale = 1): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of s) {
      const rows = glyphFor(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if ((rows[gy] >> (GLYPH_W - 1 - gx)) & 1) {
            for (let sy = 0; sy < scale; sy++) {
              for (let sx = 0; sx < scale; sx++) {
                this.set(cx + gx * scale + sx, cy + gy * scale + sy, c);
              }
            }
          }
        }
      }
      cx += (GLYPH_W + 1) * scale;
    }
  }

  textVertical(x: number, y: number, s: string, c: Color): void {
    // rotated 90 degrees counter-clockwise, drawn bottom-up
    let cy = Math.round(y);
    const cx = Math.round(x);
    for (const ch of s) {
      const rows = glyphFor(ch);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if ((rows[gy] >> (GLYPH_W - 1 - gx)) & 1) {
            this.set(cx + gy, cy - gx, c);
          }
        }
      }
      cy -= GLYPH_W + 1;
    }
  }
}
