import { describe, expect, it } from "vitest";

import {
  cAlpha1d,
  endpointLimitCdf1d,
  endpointLimitDensity1d,
  histogramFixedBins,
  ksDistanceToCdf,
} from "../src/stats.js";

describe("endpoint limit law", () => {
  it("normalizer comes from alpha alone", () => {
    expect(cAlpha1d(2)).toBe(1.5);
    expect(cAlpha1d(0.5)).toBe(0.75);
  });

  it("cdf hits the anchor points", () => {
    expect(endpointLimitCdf1d(-1, 2)).toBe(0);
    expect(endpointLimitCdf1d(0, 2)).toBe(0.5);
    expect(endpointLimitCdf1d(1, 2)).toBe(1);
  });

  it("cdf is symmetric", () => {
    for (const x of [0.1, 0.35, 0.8]) {
      expect(endpointLimitCdf1d(-x, 2)).toBeCloseTo(1 - endpointLimitCdf1d(x, 2), 14);
    }
  });

  it("density integrates to one (trapezoid check)", () => {
    const n = 20000;
    let total = 0;
    for (let i = 0; i < n; i++) {
      const x = -1 + (2 * (i + 0.5)) / n;
      total += (endpointLimitDensity1d(x, 2) * 2) / n;
    }
    expect(total).toBeCloseTo(1.0, 6);
  });
});

describe("ks distance", () => {
  it("matches a hand-computed case", () => {
    // uniform cdf on [0,1], samples 0.1, 0.5, 0.9:
    // steps at 1/3, 2/3, 1; D = max(|1/3-0.1|, ..., |2/3-0.5|, ...) = 7/30
    const d = ksDistanceToCdf([0.5, 0.1, 0.9], (x) => Math.min(1, Math.max(0, x)));
    expect(d).toBeCloseTo(7 / 30, 14);
  });

  it("is zero-ish for the cdf's own quantiles", () => {
    const n = 1000;
    const xs = Array.from({ length: n }, (_, i) => (i + 0.5) / n);
    expect(ksDistanceToCdf(xs, (x) => Math.min(1, Math.max(0, x)))).toBeLessThan(1 / n);
  });

  it("rejects empty input", () => {
    expect(() => ksDistanceToCdf([], (x) => x)).toThrow("at least one");
  });
});

describe("histogram", () => {
  it("uses fixed bin edges on [-1, 1]", () => {
    const bins = histogramFixedBins([-1, -0.99, 0, 0.999, 1], 50);
    expect(bins).toHaveLength(50);
    expect(bins[0].binLeft).toBe(-1);
    expect(bins[49].binRight).toBe(1);
    expect(bins[0].count).toBe(2); // -1 and -0.99
    expect(bins[49].count).toBe(2); // 0.999 and the right edge value 1
    const total = bins.reduce((acc, b) => acc + b.count, 0);
    expect(total).toBe(5);
  });

  it("drops values outside the range", () => {
    const bins = histogramFixedBins([-2, 2, 0.5], 10);
    expect(bins.reduce((a, b) => a + b.count, 0)).toBe(1);
  });
});
