// Acceptance: the full figure set renders from a completed run directory
// with zero errors and deterministic output bytes.

import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { afterAll, describe, expect, it } from 'vitest';

import { generateReport } from '../src/cli';
import { readRunDirectory } from '../src/csv';
import { buildFigures, buildIndexHtml } from '../src/figures';

const FIXTURE = path.join(__dirname, 'fixtures', 'run');
const EMPTY_FIXTURE = path.join(__dirname, 'fixtures', 'empty_run');

const EXPECTED_FIGURES = [
  'mass.svg', 'mass_drift.svg', 'functional.svg', 'moments.svg',
  'vacuum.svg', 'vacuum_residual.svg', 'norms.svg', 'timestep.svg',
  'effort.svg', 'contraction.svg', 'eta_gaps.svg',
];

const tmpDirs: string[] = [];
function tmpDir(): string {
  const d = fs.mkdtempSync(path.join(os.tmpdir(), 'dnslab-report-'));
  tmpDirs.push(d);
  return d;
}

afterAll(() => {
  for (const d of tmpDirs) fs.rmSync(d, { recursive: true, force: true });
});

describe('buildFigures', () => {
  it('renders the full figure set without errors', () => {
    const run = readRunDirectory(FIXTURE);
    const figures = buildFigures(run);
    expect(figures.map((f) => f.name)).toEqual(EXPECTED_FIGURES);
    for (const fig of figures) {
      expect(fig.svg).toMatch(/^<svg /);
      expect(fig.svg.trimEnd()).toMatch(/<\/svg>$/);
    }
  });

  it('plots real data, not placeholders, for the completed run', () => {
    const run = readRunDirectory(FIXTURE);
    for (const fig of buildFigures(run)) {
      expect(fig.svg, fig.name).not.toContain('no data');
    }
  });

  it('renders placeholders, still error-free, for an aborted run', () => {
    const run = readRunDirectory(EMPTY_FIXTURE);
    const figures = buildFigures(run);
    expect(figures.length).toBe(EXPECTED_FIGURES.length);
    for (const fig of figures) {
      expect(fig.svg).toContain('no data');
    }
  });
});

describe('generateReport', () => {
  it('writes every figure plus the html index', () => {
    const out = tmpDir();
    const written = generateReport(FIXTURE, out);
    expect(written).toEqual([...EXPECTED_FIGURES, 'index.html']);
    for (const name of written) {
      expect(fs.existsSync(path.join(out, name)), name).toBe(true);
    }
    const html = fs.readFileSync(path.join(out, 'index.html'), 'utf8');
    for (const name of EXPECTED_FIGURES) {
      expect(html).toContain(`src="${name}"`);
    }
  });

  it('output bytes are deterministic across runs', () => {
    const outA = tmpDir();
    const outB = tmpDir();
    generateReport(FIXTURE, outA);
    generateReport(FIXTURE, outB);
    for (const name of [...EXPECTED_FIGURES, 'index.html']) {
      const a = fs.readFileSync(path.join(outA, name));
      const b = fs.readFileSync(path.join(outB, name));
      expect(a.equals(b), name).toBe(true);
    }
  });

  it('index lists figures in a stable order', () => {
    const figures = buildFigures(readRunDirectory(FIXTURE));
    const html = buildIndexHtml(figures);
    const positions = EXPECTED_FIGURES.map((n) => html.indexOf(n));
    expect([...positions].sort((a, b) => a - b)).toEqual(positions);
  });
});
