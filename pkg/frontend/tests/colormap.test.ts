import { describe, expect, it } from "vitest";

import { cssColor, legendStops, valueToColor } from "../src/colormap";

describe("valueToColor", () => {
  it("maps the domain endpoints to the anchor colors", () => {
    expect(valueToColor(0)).toEqual([68, 1, 84]);
    expect(valueToColor(1)).toEqual([253, 231, 37]);
  });

  it("maps 0.5 to the middle anchor exactly", () => {
    expect(valueToColor(0.5)).toEqual([33, 145, 140]);
  });

  it("uses a fixed domain: out-of-range values clamp to the endpoints", () => {
    expect(valueToColor(-3)).toEqual(valueToColor(0));
    expect(valueToColor(7.5)).toEqual(valueToColor(1));
  });

  it("renders non-finite values as neutral grey", () => {
    expect(valueToColor(Number.NaN)).toEqual([128, 128, 128]);
    expect(valueToColor(Number.POSITIVE_INFINITY)).toEqual([128, 128, 128]);
    expect(valueToColor(Number.NEGATIVE_INFINITY)).toEqual([128, 128, 128]);
  });

  it("interpolates between anchors", () => {
    const quarterUp = valueToColor(0.125);
    expect(quarterUp).toEqual([Math.round(63.5), Math.round(41.5), Math.round(111.5)]);
  });

  it("increases green monotonically along the ramp", () => {
    let previous = valueToColor(0)[1];
    for (let v = 0.05; v <= 1.0001; v += 0.05) {
      const green = valueToColor(v)[1];
      expect(green).toBeGreaterThanOrEqual(previous);
      previous = green;
    }
  });
});

describe("legendStops", () => {
  it("spans 0 to 1 inclusive with evenly spaced values", () => {
    const stops = legendStops(5);
    expect(stops.map((s) => s.value)).toEqual([0, 0.25, 0.5, 0.75, 1]);
    expect(stops[0]!.color).toEqual(valueToColor(0));
    expect(stops[4]!.color).toEqual(valueToColor(1));
  });

  it("rejects fewer than two stops", () => {
    expect(() => legendStops(1)).toThrow(/at least 2/);
    expect(() => legendStops(0)).toThrow(/at least 2/);
  });
});

describe("cssColor", () => {
  it("formats an rgb() string", () => {
    expect(cssColor([33, 145, 140])).toBe("rgb(33, 145, 140)");
  });
});
