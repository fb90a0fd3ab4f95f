/** Small numeric helpers: median and ordinary least-squares slope. */

export function median(values: number[]): number {
  if (values.length === 0) {
    throw new Error("median of an empty list");
  }
  const sorted = [...values].sort((a, b) => a - b);
  const mid = Math.floor(sorted.length / 2);
  return sorted.length % 2 === 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

export interface LineFit {
  slope: number;
  intercept: number;
}

export function fitLine(x: number[], y: number[]): LineFit {
  if (x.length !== y.length) {
    throw new Error(`x and y lengths differ (${x.length} vs ${y.length})`);
  }
  if (x.length < 2) {
    throw new Error("need >= 2 points for a slope");
  }
  const n = x.length;
  const mx = x.reduce((a, b) => a + b, 0) / n;
  const my = y.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx === 0) {
    throw new Error("slope undefined: all x values coincide");
  }
  const slope = sxy / sxx;
  return { slope, intercept: my - slope * mx };
}
