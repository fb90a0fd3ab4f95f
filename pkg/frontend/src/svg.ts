/**
 * Minimal hand-rolled SVG chart builder — no DOM, no dependencies.
 * Supports linear and log10 axes, polyline series, scatter markers and
 * free-text annotations; enough for the two figure types this package
 * produces.
 */

export type AxisMode = "linear" | "log";

export interface Series {
  points: Array<[number, number]>;
  color: string;
  width: number;
  opacity?: number;
  markers?: boolean;
  label?: string;
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xMode: AxisMode;
  yMode: AxisMode;
  series: Series[];
  annotations?: string[];
}

const W = 820;
const H = 520;
const MARGIN = { left: 78, right: 24, top: 44, bottom: 58 };

function transform(value: number, mode: AxisMode): number {
  return mode === "log" ? Math.log10(value) : value;
}

function linearTicks(lo: number, hi: number, n = 6): number[] {
  if (lo === hi) {
    return [lo];
  }
  const rawStep = (hi - lo) / (n - 1);
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => (hi - lo) / s <= n - 1) ?? rawStep;
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = start; v <= hi + 1e-12 * Math.abs(hi); v += step) {
    ticks.push(v);
  }
  return ticks;
}

function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  for (let e = Math.ceil(Math.log10(lo) - 1e-12); e <= Math.floor(Math.log10(hi) + 1e-12); e++) {
    ticks.push(Math.pow(10, e));
  }
  if (ticks.length === 0) {
    ticks.push(lo, hi);
  }
  return ticks;
}

function fmt(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 1e4 || abs < 1e-2) {
    return v.toExponential(0).replace("e+", "e");
  }
  return String(Number(v.toPrecision(4)));
}

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

export function renderChart(spec: ChartSpec): string {
  const pts = spec.series.flatMap((s) => s.points);
  if (pts.length === 0) {
    throw new Error("no points to plot");
  }
  for (const [x, y] of pts) {
    if (spec.xMode === "log" && x <= 0) throw new Error(`log x-axis cannot show x=${x}`);
    if (spec.yMode === "log" && y <= 0) throw new Error(`log y-axis cannot show y=${y}`);
  }
  let xLo = Math.min(...pts.map(([x]) => transform(x, spec.xMode)));
  let xHi = Math.max(...pts.map(([x]) => transform(x, spec.xMode)));
  let yLo = Math.min(...pts.map(([, y]) => transform(y, spec.yMode)));
  let yHi = Math.max(...pts.map(([, y]) => transform(y, spec.yMode)));
  if (xLo === xHi) [xLo, xHi] = [xLo - 0.5, xHi + 0.5];
  if (yLo === yHi) [yLo, yHi] = [yLo - 0.5, yHi + 0.5];
  const padY = 0.05 * (yHi - yLo);
  yLo -= padY;
  yHi += padY;

  const plotW = W - MARGIN.left - MARGIN.right;
  const plotH = H - MARGIN.top - MARGIN.bottom;
  const px = (x: number) => MARGIN.left + ((transform(x, spec.xMode) - xLo) / (xHi - xLo)) * plotW;
  const py = (y: number) => MARGIN.top + plotH - ((transform(y, spec.yMode) - yLo) / (yHi - yLo)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
    `<text x="${W / 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">${esc(spec.title)}</text>`
  );

  // axes frame
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" fill="none" stroke="#333" stroke-width="1"/>`
  );

  // ticks and grid
  const xTickVals =
    spec.xMode === "log"
      ? logTicks(Math.pow(10, xLo), Math.pow(10, xHi))
      : linearTicks(xLo, xHi);
  for (const v of xTickVals) {
    const x = px(v);
    if (x < MARGIN.left - 1 || x > W - MARGIN.right + 1) continue;
    parts.push(
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}" y2="${MARGIN.top + plotH}" stroke="#ddd" stroke-width="0.7"/>`,
      `<text x="${x}" y="${MARGIN.top + plotH + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">${fmt(v)}</text>`
    );
  }
  const yTickVals =
    spec.yMode === "log"
      ? logTicks(Math.pow(10, yLo), Math.pow(10, yHi))
      : linearTicks(yLo, yHi);
  for (const v of yTickVals) {
    const y = py(v);
    if (y < MARGIN.top - 1 || y > MARGIN.top + plotH + 1) continue;
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${MARGIN.left + plotW}" y2="${y}" stroke="#ddd" stroke-width="0.7"/>`,
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end" font-family="sans-serif" font-size="11">${fmt(v)}</text>`
    );
  }

  // axis labels
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${H - 14}" text-anchor="middle" font-family="sans-serif" font-size="14">${esc(spec.xLabel)}</text>`,
    `<text x="20" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-family="sans-serif" font-size="14" transform="rotate(-90 20 ${MARGIN.top + plotH / 2})">${esc(spec.yLabel)}</text>`
  );

  // series
  for (const series of spec.series) {
    const coords = series.points.map(([x, y]) => `${px(x).toFixed(2)},${py(y).toFixed(2)}`);
    const opacity = series.opacity ?? 1.0;
    if (series.markers) {
      for (const c of coords) {
        const [cx, cy] = c.split(",");
        parts.push(
          `<circle cx="${cx}" cy="${cy}" r="2.6" fill="${series.color}" fill-opacity="${opacity}"/>`
        );
      }
    }
    if (!series.markers || series.points.length > 1) {
      parts.push(
        `<polyline points="${coords.join(" ")}" fill="none" stroke="${series.color}" stroke-width="${series.width}" stroke-opacity="${opacity}"${series.markers ? ' stroke-dasharray="4 3"' : ""}/>`
      );
    }
  }

  // legend for labelled series
  let legendY = MARGIN.top + 14;
  for (const series of spec.series.filter((s) => s.label)) {
    const x0 = W - MARGIN.right - 170;
    parts.push(
      `<line x1="${x0}" y1="${legendY - 4}" x2="${x0 + 26}" y2="${legendY - 4}" stroke="${series.color}" stroke-width="${series.width}"/>`,
      `<text x="${x0 + 32}" y="${legendY}" font-family="sans-serif" font-size="12">${esc(series.label!)}</text>`
    );
    legendY += 18;
  }

  // annotations (top-left corner of the plot area)
  let annoY = MARGIN.top + 16;
  for (const note of spec.annotations ?? []) {
    parts.push(
      `<text x="${MARGIN.left + 10}" y="${annoY}" font-family="sans-serif" font-size="13">${esc(note)}</text>`
    );
    annoY += 18;
  }

  parts.push("</svg>");
  return parts.join("\n");
}
