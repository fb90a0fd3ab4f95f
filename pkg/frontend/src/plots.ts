/**
 * The two figure builders:
 *
 *  - normalized regret vs time: one faint curve per replicate plus an
 *    emphasized median curve (median is robust to a rare aborted or
 *    outlier replicate)
 *  - estimation error vs randomization horizon on log-log axes, with the
 *    fitted power-law slope annotated
 */

import { parseEstimationCsv, parseRegretCsv } from "./csv.js";
import { fitLine, median } from "./stats.js";
import { renderChart, Series } from "./svg.js";

const REPLICATE_COLOR = "#4878a8";
const MEDIAN_COLOR = "#c03028";
const FIT_COLOR = "#555555";

export interface EstimationPlot {
  svg: string;
  slope: number;
}

export function plotNormalizedRegret(csvText: string): string {
  const rows = parseRegretCsv(csvText);

  const byReplicate = new Map<number, Array<[number, number]>>();
  for (const row of rows) {
    const pts = byReplicate.get(row.replicate) ?? [];
    pts.push([row.T, row.normalized_regret]);
    byReplicate.set(row.replicate, pts);
  }
  const series: Series[] = [];
  for (const pts of byReplicate.values()) {
    pts.sort((a, b) => a[0] - b[0]);
    series.push({ points: pts, color: REPLICATE_COLOR, width: 1, opacity: 0.35 });
  }

  // median across replicates at each checkpoint time
  const byTime = new Map<number, number[]>();
  for (const row of rows) {
    const values = byTime.get(row.T) ?? [];
    values.push(row.normalized_regret);
    byTime.set(row.T, values);
  }
  const medianPts: Array<[number, number]> = [...byTime.entries()]
    .map(([t, values]): [number, number] => [t, median(values)])
    .sort((a, b) => a[0] - b[0]);
  series.push({ points: medianPts, color: MEDIAN_COLOR, width: 2.5, label: "median" });

  return renderChart({
    title: "Normalized regret",
    xLabel: "T",
    yLabel: "T^{-1/2} R(T)",
    xMode: "linear",
    yMode: "linear",
    series,
    annotations: [`${byReplicate.size} replicate${byReplicate.size === 1 ? "" : "s"}`],
  });
}

export function plotEstimationError(csvText: string): EstimationPlot {
  const rows = parseEstimationCsv(csvText);
  const usable = rows.filter((r) => r.gamma_n > 0 && r.est_error > 0);
  if (usable.length < 2) {
    throw new Error("need >= 2 points for a slope");
  }
  const logX = usable.map((r) => Math.log10(r.gamma_n));
  const logY = usable.map((r) => Math.log10(r.est_error));
  const fit = fitLine(logX, logY);

  const scatter: Series = {
    points: usable.map((r): [number, number] => [r.gamma_n, r.est_error]),
    color: REPLICATE_COLOR,
    width: 0,
    opacity: 0.55,
    markers: true,
  };
  const xLo = Math.min(...logX);
  const xHi = Math.max(...logX);
  const fitSeries: Series = {
    points: [xLo, xHi].map((lx): [number, number] => [
      Math.pow(10, lx),
      Math.pow(10, fit.intercept + fit.slope * lx),
    ]),
    color: FIT_COLOR,
    width: 1.8,
    label: `fit slope ${fit.slope.toFixed(3)}`,
  };

  const svg = renderChart({
    title: "Estimation error vs randomization horizon",
    xLabel: "gamma_n",
    yLabel: "||theta_n - theta*||_2",
    xMode: "log",
    yMode: "log",
    series: [scatter, fitSeries],
    annotations: [`fitted slope = ${fit.slope.toFixed(3)}`],
  });
  return { svg, slope: fit.slope };
}
