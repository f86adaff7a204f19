import { describe, expect, it } from "vitest";

import type { LayerGrid } from "../src/api";
import { DimensionMismatchError, cellAt, rasterize, valueAt } from "../src/heatmap";

function pixel(raster: { pixels: Uint8ClampedArray }, k: number): number[] {
  return [...raster.pixels.slice(4 * k, 4 * k + 4)];
}

describe("rasterize", () => {
  it("renders a uniform 0.5 layer as a uniform mid-scale color", () => {
    const raster = rasterize(new Array(12).fill(0.5), 3, 4);
    expect(raster.rows).toBe(3);
    expect(raster.cols).toBe(4);
    expect(raster.pixels.length).toBe(12 * 4);
    for (let k = 0; k < 12; k++) {
      expect(pixel(raster, k)).toEqual([33, 145, 140, 255]);
    }
  });

  it("renders a lone maximum as the single maximal-color pixel", () => {
    const values = new Array(9).fill(0);
    values[4] = 1.0;
    const raster = rasterize(values, 3, 3);
    for (let k = 0; k < 9; k++) {
      expect(pixel(raster, k)).toEqual(k === 4 ? [253, 231, 37, 255] : [68, 1, 84, 255]);
    }
  });

  it("is fully opaque", () => {
    const raster = rasterize([0, 0.3, 0.6, 1], 2, 2);
    for (let k = 0; k < 4; k++) {
      expect(raster.pixels[4 * k + 3]).toBe(255);
    }
  });

  it("throws on a value count that does not match the grid", () => {
    expect(() => rasterize([0.1, 0.2, 0.3], 2, 2)).toThrow(DimensionMismatchError);
    expect(() => rasterize(new Array(5).fill(0), 2, 2)).toThrow(/4 values|expects 4/);
  });

  it("throws on degenerate grid shapes", () => {
    expect(() => rasterize([], 0, 4)).toThrow(DimensionMismatchError);
    expect(() => rasterize([0.5], 1, 0)).toThrow(DimensionMismatchError);
  });
});

describe("cellAt", () => {
  it("maps pointer positions to row-major cells", () => {
    // 4x4 grid drawn on a 400x400 canvas: each cell is 100px square
    expect(cellAt(50, 50, 400, 400, 4, 4)).toEqual([0, 0]);
    expect(cellAt(350, 50, 400, 400, 4, 4)).toEqual([0, 3]);
    expect(cellAt(50, 350, 400, 400, 4, 4)).toEqual([3, 0]);
    expect(cellAt(399, 399, 400, 400, 4, 4)).toEqual([3, 3]);
  });

  it("places boundary pixels in the lower-index cell until the next cell starts", () => {
    expect(cellAt(99, 0, 400, 400, 4, 4)).toEqual([0, 0]);
    expect(cellAt(100, 0, 400, 400, 4, 4)).toEqual([0, 1]);
  });

  it("returns null outside the canvas", () => {
    expect(cellAt(-1, 50, 400, 400, 4, 4)).toBeNull();
    expect(cellAt(50, -0.5, 400, 400, 4, 4)).toBeNull();
    expect(cellAt(400, 50, 400, 400, 4, 4)).toBeNull();
    expect(cellAt(50, 400, 400, 400, 4, 4)).toBeNull();
  });

  it("handles non-square grids", () => {
    expect(cellAt(10, 10, 300, 200, 2, 3)).toEqual([0, 0]);
    expect(cellAt(299, 199, 300, 200, 2, 3)).toEqual([1, 2]);
    expect(cellAt(150, 99, 300, 200, 2, 3)).toEqual([0, 1]);
  });
});

describe("valueAt", () => {
  const grid: LayerGrid = {
    layer: "demand",
    version: 0,
    rows: 2,
    cols: 3,
    values: [10, 11, 12, 20, 21, 22],
  };

  it("reads values row-major", () => {
    expect(valueAt(grid, [0, 0])).toBe(10);
    expect(valueAt(grid, [0, 2])).toBe(12);
    expect(valueAt(grid, [1, 0])).toBe(20);
    expect(valueAt(grid, [1, 2])).toBe(22);
  });

  it("rejects out-of-range cells", () => {
    expect(() => valueAt(grid, [2, 0])).toThrow(RangeError);
    expect(() => valueAt(grid, [0, 3])).toThrow(RangeError);
    expect(() => valueAt(grid, [-1, 0])).toThrow(RangeError);
  });
});
