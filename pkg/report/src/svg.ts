// Minimal deterministic SVG line-chart toolkit: linear/log scales, nice
// ticks, polylines and a legend.  No timestamps, no randomness; identical
// inputs give identical bytes.

export interface Series {
  label: string;
  color: string;
  points: Array<[number, number]>;
  dashed?: boolean;
}

export interface ChartOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  width?: number;
  height?: number;
  logY?: boolean;
}

const MARGIN = { top: 36, right: 24, bottom: 44, left: 64 };

export function fmt(v: number): string {
  if (!Number.isFinite(v)) return String(v);
  if (v === 0) return '0';
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-3) return v.toExponential(2);
  return String(Number(v.toPrecision(6)));
}

export function niceTicks(lo: number, hi: number, count = 5): number[] {
  if (!(hi > lo)) return [lo];
  const span = hi - lo;
  const step0 = span / count;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = (norm >= 5 ? 5 : norm >= 2 ? 2 : 1) * mag;
  const ticks: number[] = [];
  for (let t = Math.ceil(lo / step) * step; t <= hi + 1e-12 * span; t += step) {
    ticks.push(Math.abs(t) < step * 1e-9 ? 0 : t);
  }
  return ticks;
}

export function logTicks(lo: number, hi: number): number[] {
  const ticks: number[] = [];
  const e0 = Math.ceil(Math.log10(lo) - 1e-12);
  const e1 = Math.floor(Math.log10(hi) + 1e-12);
  for (let e = e0; e <= e1; e++) ticks.push(Math.pow(10, e));
  if (ticks.length === 0) ticks.push(lo, hi);
  return ticks;
}

function finitePoints(series: Series[], logY: boolean): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (const s of series) {
    for (const [x, y] of s.points) {
      if (!Number.isFinite(x) || !Number.isFinite(y)) continue;
      if (logY && y <= 0) continue;
      out.push([x, y]);
    }
  }
  return out;
}

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;');
}

export function renderChart(series: Series[], opts: ChartOptions): string {
  const width = opts.width ?? 640;
  const height = opts.height ?? 360;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;
  const logY = opts.logY ?? false;

  const pts = finitePoints(series, logY);
  const parts: string[] = [];
  parts.push(`<svg xmlns="http://www.w3.org/2000/svg" width="${width}" ` +
             `height="${height}" viewBox="0 0 ${width} ${height}" ` +
             `font-family="monospace" font-size="12">`);
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" ` +
             `font-size="14">${esc(opts.title)}</text>`);

  if (pts.length === 0) {
    parts.push(`<text x="${width / 2}" y="${height / 2}" ` +
               `text-anchor="middle" fill="#888">no data</text>`);
    parts.push('</svg>');
    return parts.join('\n') + '\n';
  }

  let xLo = Math.min(...pts.map((p) => p[0]));
  let xHi = Math.max(...pts.map((p) => p[0]));
  let yLo = Math.min(...pts.map((p) => p[1]));
  let yHi = Math.max(...pts.map((p) => p[1]));
  if (xHi === xLo) { xHi = xLo + 1; }
  if (yHi === yLo) { yHi = logY ? yLo * 10 : yLo + 1; }

  const sx = (x: number) =>
    MARGIN.left + ((x - xLo) / (xHi - xLo)) * plotW;
  const sy = (y: number) => {
    const t = logY
      ? (Math.log10(y) - Math.log10(yLo)) / (Math.log10(yHi) - Math.log10(yLo))
      : (y - yLo) / (yHi - yLo);
    return MARGIN.top + (1 - t) * plotH;
  };

  // axes, grid and tick labels
  const xTicks = niceTicks(xLo, xHi);
  const yTicks = logY ? logTicks(yLo, yHi) : niceTicks(yLo, yHi);
  for (const t of xTicks) {
    const x = sx(t);
    parts.push(`<line x1="${x.toFixed(2)}" y1="${MARGIN.top}" ` +
               `x2="${x.toFixed(2)}" y2="${MARGIN.top + plotH}" ` +
               `stroke="#eee"/>`);
    parts.push(`<text x="${x.toFixed(2)}" y="${MARGIN.top + plotH + 16}" ` +
               `text-anchor="middle">${fmt(t)}</text>`);
  }
  for (const t of yTicks) {
    const y = sy(t);
    parts.push(`<line x1="${MARGIN.left}" y1="${y.toFixed(2)}" ` +
               `x2="${MARGIN.left + plotW}" y2="${y.toFixed(2)}" ` +
               `stroke="#eee"/>`);
    parts.push(`<text x="${MARGIN.left - 6}" y="${(y + 4).toFixed(2)}" ` +
               `text-anchor="end">${fmt(t)}</text>`);
  }
  parts.push(`<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" ` +
             `height="${plotH}" fill="none" stroke="#333"/>`);
  parts.push(`<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" ` +
             `text-anchor="middle">${esc(opts.xLabel)}</text>`);
  parts.push(`<text x="16" y="${MARGIN.top + plotH / 2}" ` +
             `text-anchor="middle" ` +
             `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">` +
             `${esc(opts.yLabel)}</text>`);

  // series
  for (const s of series) {
    const coords = s.points
      .filter(([x, y]) => Number.isFinite(x) && Number.isFinite(y) &&
                          (!logY || y > 0))
      .map(([x, y]) => `${sx(x).toFixed(2)},${sy(y).toFixed(2)}`);
    if (coords.length === 0) continue;
    const dash = s.dashed ? ' stroke-dasharray="6 3"' : '';
    if (coords.length === 1) {
      const [cx, cy] = coords[0].split(',');
      parts.push(`<circle cx="${cx}" cy="${cy}" r="3" fill="${s.color}"/>`);
    } else {
      parts.push(`<polyline points="${coords.join(' ')}" fill="none" ` +
                 `stroke="${s.color}" stroke-width="1.5"${dash}/>`);
    }
  }

  // legend
  let ly = MARGIN.top + 6;
  for (const s of series) {
    const lx = MARGIN.left + plotW - 150;
    parts.push(`<line x1="${lx}" y1="${ly}" x2="${lx + 20}" y2="${ly}" ` +
               `stroke="${s.color}" stroke-width="1.5"` +
               `${s.dashed ? ' stroke-dasharray="6 3"' : ''}/>`);
    parts.push(`<text x="${lx + 26}" y="${ly + 4}">${esc(s.label)}</text>`);
    ly += 16;
  }

  parts.push('</svg>');
  return parts.join('\n') + '\n';
}
