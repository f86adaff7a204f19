/** Heatmap rendering split in two: a pure rasterizer that turns a layer into
 * RGBA pixels (unit-testable anywhere), and a thin canvas blitter that scales
 * it up with hard cell edges and draws the plan overlay.
 */

import type { Cell, LayerGrid } from "./api";
import { valueToColor } from "./colormap";

export class DimensionMismatchError extends Error {
  constructor(expected: number, got: number) {
    super(`layer carries ${got} values, grid metadata expects ${expected}`);
    this.name = "DimensionMismatchError";
  }
}

export interface Raster {
  rows: number;
  cols: number;
  pixels: Uint8ClampedArray; // rows * cols * 4, row-major RGBA
}

/** Color-map a row-major value array. Throws on any dimension mismatch so a
 * bad payload produces an error banner instead of a partial render. */
export function rasterize(values: number[], rows: number, cols: number): Raster {
  if (rows < 1 || cols < 1) {
    throw new DimensionMismatchError(rows * cols, values.length);
  }
  if (values.length !== rows * cols) {
    throw new DimensionMismatchError(rows * cols, values.length);
  }
  const pixels = new Uint8ClampedArray(rows * cols * 4);
  for (let k = 0; k < values.length; k++) {
    const [r, g, b] = valueToColor(values[k]!);
    pixels[4 * k] = r;
    pixels[4 * k + 1] = g;
    pixels[4 * k + 2] = b;
    pixels[4 * k + 3] = 255;
  }
  return { rows, cols, pixels };
}

/** Map a pointer position on the canvas to the cell under it, or null when
 * outside the drawn grid. The inverse of the blit scaling. */
export function cellAt(
  px: number,
  py: number,
  canvasWidth: number,
  canvasHeight: number,
  rows: number,
  cols: number,
): Cell | null {
  if (px < 0 || py < 0 || px >= canvasWidth || py >= canvasHeight) {
    return null;
  }
  const i = Math.floor((py / canvasHeight) * rows);
  const j = Math.floor((px / canvasWidth) * cols);
  if (i < 0 || i >= rows || j < 0 || j >= cols) {
    return null;
  }
  return [i, j];
}

/** Row-major lookup of the value shown in the tooltip. */
export function valueAt(grid: LayerGrid, cell: Cell): number {
  const [i, j] = cell;
  if (i < 0 || i >= grid.rows || j < 0 || j >= grid.cols) {
    throw new RangeError(`cell (${i}, ${j}) outside ${grid.rows}x${grid.cols} layer`);
  }
  return grid.values[i * grid.cols + j]!;
}

/** Scale the raster onto the canvas (nearest-neighbor) and overlay the plan:
 * one ring per occupied cell, site count printed when above one. */
export function drawHeatmap(
  canvas: HTMLCanvasElement,
  raster: Raster,
  planCells: [number, number, number][],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const offscreen = new ImageData(
    new Uint8ClampedArray(raster.pixels),
    raster.cols,
    raster.rows,
  );
  const scaleX = canvas.width / raster.cols;
  const scaleY = canvas.height / raster.rows;
  const stage = document.createElement("canvas");
  stage.width = raster.cols;
  stage.height = raster.rows;
  stage.getContext("2d")?.putImageData(offscreen, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(stage, 0, 0, canvas.width, canvas.height);

  ctx.lineWidth = Math.max(1.5, scaleX * 0.12);
  ctx.strokeStyle = "#ff3b30";
  ctx.fillStyle = "#ff3b30";
  ctx.font = `${Math.max(10, scaleY * 0.6)}px sans-serif`;
  ctx.textAlign = "center";
  ctx.textBaseline = "middle";
  for (const [i, j, count] of planCells) {
    const cx = (j + 0.5) * scaleX;
    const cy = (i + 0.5) * scaleY;
    ctx.beginPath();
    ctx.arc(cx, cy, Math.min(scaleX, scaleY) * 0.38, 0, 2 * Math.PI);
    ctx.stroke();
    if (count > 1) {
      ctx.fillText(String(count), cx, cy - scaleY * 0.9);
    }
  }
}
