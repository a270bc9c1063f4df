// Strict readers for the dnslab run-directory CSV contract.
//
// The files are plain comma-separated numeric tables written by the solver
// with repr() floats (no quoting, no embedded commas), so a hand-rolled
// reader keeps parsing and output bytes fully deterministic.

import * as fs from 'fs';
import * as path from 'path';

export const DIAGNOSTICS_COLUMNS = [
  't', 'dt', 'eta', 'mass', 'mass_drift', 'M', 'F', 'energy',
  'I_expr1', 'I_expr2', 'jensen_lb', 'upper_ub', 'vac_fraction',
  'vac_residual', 'phi_h3', 'u_h3', 'wgt_grad4', 'picard_iters',
  'cg_iters', 'clip_count',
] as const;

export type DiagnosticsRow = Record<(typeof DIAGNOSTICS_COLUMNS)[number], number>;

export interface BoundsRow {
  t: number;
  I_expr1: number;
  jensen_lb: number;
  upper_ub: number;
}

export interface ContractionRow {
  slab: number;
  iteration: number;
  gamma: number;
  weighted_grad_increment: number;
}

export interface EtaGapRow {
  eta_a: number;
  eta_b: number;
  sup_l2_gap: number;
}

export interface RunData {
  diagnostics: DiagnosticsRow[];
  bounds: BoundsRow[];
  contraction: ContractionRow[];
  etaGaps: EtaGapRow[];
}

function parseNumber(raw: string): number {
  if (raw === 'nan') return NaN;
  if (raw === 'inf') return Infinity;
  if (raw === '-inf') return -Infinity;
  const v = Number(raw);
  if (raw.trim() === '' || Number.isNaN(v) && raw !== 'NaN') {
    throw new Error(`not a number: ${JSON.stringify(raw)}`);
  }
  return v;
}

export function parseTable(text: string, expectedHeader: readonly string[]):
    number[][] {
  // the solver's csv writer terminates lines with \r\n
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error('empty CSV file');
  }
  const header = lines[0].split(',');
  if (header.length !== expectedHeader.length ||
      header.some((h, i) => h !== expectedHeader[i])) {
    throw new Error(
      `unexpected header: got [${header.join(',')}], ` +
      `want [${expectedHeader.join(',')}]`);
  }
  const rows: number[][] = [];
  for (let i = 1; i < lines.length; i++) {
    const cells = lines[i].split(',');
    if (cells.length !== expectedHeader.length) {
      throw new Error(`row ${i}: expected ${expectedHeader.length} cells, ` +
                      `got ${cells.length}`);
    }
    rows.push(cells.map(parseNumber));
  }
  return rows;
}

function toObjects<T>(rows: number[][], columns: readonly string[]): T[] {
  return rows.map((row) => {
    const obj: Record<string, number> = {};
    columns.forEach((c, i) => { obj[c] = row[i]; });
    return obj as T;
  });
}

export function readRunDirectory(dir: string): RunData {
  const read = (name: string) =>
    fs.readFileSync(path.join(dir, name), 'utf8');
  return {
    diagnostics: toObjects<DiagnosticsRow>(
      parseTable(read('diagnostics.csv'), DIAGNOSTICS_COLUMNS),
      DIAGNOSTICS_COLUMNS),
    bounds: toObjects<BoundsRow>(
      parseTable(read('bounds.csv'), ['t', 'I_expr1', 'jensen_lb', 'upper_ub']),
      ['t', 'I_expr1', 'jensen_lb', 'upper_ub']),
    contraction: toObjects<ContractionRow>(
      parseTable(read('contraction.csv'),
                 ['slab', 'iteration', 'gamma', 'weighted_grad_increment']),
      ['slab', 'iteration', 'gamma', 'weighted_grad_increment']),
    etaGaps: toObjects<EtaGapRow>(
      parseTable(read('eta_gaps.csv'), ['eta_a', 'eta_b', 'sup_l2_gap']),
      ['eta_a', 'eta_b', 'sup_l2_gap']),
  };
}
