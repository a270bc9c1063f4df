// The full figure set for one run directory.

import { RunData } from './csv';
import { renderChart, Series } from './svg';

export interface Figure {
  name: string;   // output file name, e.g. "mass.svg"
  title: string;
  svg: string;
}

const COLORS = {
  blue: '#1f77b4',
  orange: '#ff7f0e',
  green: '#2ca02c',
  red: '#d62728',
  purple: '#9467bd',
  gray: '#7f7f7f',
};

function column<T>(rows: T[], x: keyof T, y: keyof T):
    Array<[number, number]> {
  return rows.map((r) => [r[x] as number, r[y] as number]);
}

export function buildFigures(run: RunData): Figure[] {
  const d = run.diagnostics;
  const figures: Figure[] = [];

  const push = (name: string, series: Series[], title: string,
                xLabel: string, yLabel: string, logY = false) => {
    figures.push({
      name,
      title,
      svg: renderChart(series, { title, xLabel, yLabel, logY }),
    });
  };

  push('mass.svg', [
    { label: 'mass', color: COLORS.blue, points: column(d, 't', 'mass') },
  ], 'Total mass', 't', 'mass');

  push('mass_drift.svg', [
    { label: 'mass drift', color: COLORS.red,
      points: column(d, 't', 'mass_drift') },
  ], 'Relative mass drift', 't', '|m(t) - m(0)| / m(0)', true);

  push('functional.svg', [
    { label: 'I(t)', color: COLORS.blue,
      points: column(run.bounds, 't', 'I_expr1') },
    { label: 'lower bound', color: COLORS.green, dashed: true,
      points: column(run.bounds, 't', 'jensen_lb') },
    { label: 'upper bound', color: COLORS.red, dashed: true,
      points: column(run.bounds, 't', 'upper_ub') },
  ], 'Blow-up functional and bounds', 't', 'I');

  push('moments.svg', [
    { label: 'M', color: COLORS.blue, points: column(d, 't', 'M') },
    { label: 'F', color: COLORS.orange, points: column(d, 't', 'F') },
    { label: 'energy', color: COLORS.green,
      points: column(d, 't', 'energy') },
  ], 'Region moments', 't', 'value');

  push('vacuum.svg', [
    { label: 'vacuum fraction', color: COLORS.purple,
      points: column(d, 't', 'vac_fraction') },
  ], 'Vacuum node fraction', 't', 'fraction');

  push('vacuum_residual.svg', [
    { label: 'residual', color: COLORS.gray,
      points: column(d, 't', 'vac_residual') },
  ], 'Free-transport residual on vacuum', 't', 'Linf residual', true);

  push('norms.svg', [
    { label: 'phi H3', color: COLORS.blue, points: column(d, 't', 'phi_h3') },
    { label: 'u H3', color: COLORS.orange, points: column(d, 't', 'u_h3') },
    { label: 'wgt grad4', color: COLORS.green,
      points: column(d, 't', 'wgt_grad4') },
  ], 'Norm ladder', 't', 'norm', true);

  push('timestep.svg', [
    { label: 'dt', color: COLORS.blue, points: column(d, 't', 'dt') },
  ], 'Accepted time step', 't', 'dt', true);

  push('effort.svg', [
    { label: 'picard iters', color: COLORS.blue,
      points: column(d, 't', 'picard_iters') },
    { label: 'cg iters', color: COLORS.orange,
      points: column(d, 't', 'cg_iters') },
  ], 'Solver effort per slab', 't', 'iterations', true);

  // contraction history: one polyline per slab, iteration on x
  const slabs = new Map<number, Array<[number, number]>>();
  for (const row of run.contraction) {
    if (!slabs.has(row.slab)) slabs.set(row.slab, []);
    slabs.get(row.slab)!.push([row.iteration, row.gamma]);
  }
  const slabIds = Array.from(slabs.keys()).sort((a, b) => a - b);
  const contractionSeries: Series[] = slabIds.slice(0, 12).map((id, i) => ({
    label: i === 0 ? `slab ${id}` : `slab ${id}`,
    color: `hsl(${(i * 29) % 360} 60% 45%)`,
    points: slabs.get(id)!,
  }));
  push('contraction.svg', contractionSeries,
       'Picard increments per slab', 'iteration', 'Gamma', true);

  push('eta_gaps.svg', [
    { label: 'sup L2 gap', color: COLORS.red,
      points: run.etaGaps.map(
        (r) => [r.eta_b, r.sup_l2_gap] as [number, number]),
    },
  ], 'Continuation gaps vs eta', 'eta (target of each step)', 'sup-in-time L2 gap',
       true);

  return figures;
}

export function buildIndexHtml(figures: Figure[]): string {
  const items = figures.map((f) =>
    `    <section>\n      <h2>${f.title}</h2>\n` +
    `      <img src="${f.name}" alt="${f.title}"/>\n    </section>`);
  return [
    '<!DOCTYPE html>',
    '<html lang="en">',
    '<head>',
    '  <meta charset="utf-8"/>',
    '  <title>dnslab run report</title>',
    '  <style>',
    '    body { font-family: monospace; margin: 2em; }',
    '    section { margin-bottom: 2em; }',
    '    img { border: 1px solid #ccc; }',
    '  </style>',
    '</head>',
    '<body>',
    '  <h1>dnslab run report</h1>',
    items.join('\n'),
    '</body>',
    '</html>',
    '',
  ].join('\n');
}
