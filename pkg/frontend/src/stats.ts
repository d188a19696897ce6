/**
 * The few statistics shown on the plots. The KS distance uses the same
 * definition as the simulation pipeline (sorted samples, two-sided step
 * comparison) so independently computed values agree to floating-point
 * accuracy; the analytic overlay always recomputes its normalizer from
 * alpha and never reads it from data.
 */

export function cAlpha1d(alpha: number): number {
  return (alpha + 1) / 2;
}

/** CDF of the limiting endpoint density c_alpha (1 - |x|)^alpha on [-1, 1]. */
export function endpointLimitCdf1d(x: number, alpha: number): number {
  if (x <= -1) return 0;
  if (x >= 1) return 1;
  if (x <= 0) return 0.5 * (1 + x) ** (alpha + 1);
  return 1 - 0.5 * (1 - x) ** (alpha + 1);
}

export function endpointLimitDensity1d(x: number, alpha: number): number {
  if (x < -1 || x > 1) return 0;
  return cAlpha1d(alpha) * (1 - Math.abs(x)) ** alpha;
}

export function ksDistanceToCdf(samples: number[], cdf: (x: number) => number): number {
  const xs = [...samples].sort((a, b) => a - b);
  const n = xs.length;
  if (n === 0) {
    throw new Error("need at least one sample");
  }
  let dPlus = -Infinity;
  let dMinus = -Infinity;
  for (let i = 0; i < n; i++) {
    const f = cdf(xs[i]);
    dPlus = Math.max(dPlus, (i + 1) / n - f);
    dMinus = Math.max(dMinus, f - i / n);
  }
  return Math.max(dPlus, dMinus);
}

export interface HistogramBin {
  binLeft: number;
  binRight: number;
  count: number;
}

/** Fixed uniform binning (50 bins on [-1, 1] for endpoint densities). */
export function histogramFixedBins(
  values: number[],
  bins = 50,
  lo = -1,
  hi = 1,
): HistogramBin[] {
  const width = (hi - lo) / bins;
  const counts = new Array<number>(bins).fill(0);
  for (const v of values) {
    if (v < lo || v > hi) continue;
    const idx = Math.min(Math.floor((v - lo) / width), bins - 1);
    counts[idx]++;
  }
  return counts.map((count, i) => ({
    binLeft: lo + i * width,
    binRight: lo + (i + 1) * width,
    count,
  }));
}
