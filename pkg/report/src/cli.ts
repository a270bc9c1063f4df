// Render the figure set for a completed run directory.
//
//   node dist/cli.js --in RUN_DIR --out FIG_DIR

import * as fs from 'fs';
import * as path from 'path';

import { readRunDirectory } from './csv';
import { buildFigures, buildIndexHtml } from './figures';

function parseArgs(argv: string[]): { inDir: string; outDir: string } {
  let inDir = '';
  let outDir = '';
  for (let i = 0; i < argv.length; i++) {
    if (argv[i] === '--in') inDir = argv[++i];
    else if (argv[i] === '--out') outDir = argv[++i];
    else {
      throw new Error(`unknown argument: ${argv[i]}`);
    }
  }
  if (!inDir || !outDir) {
    throw new Error('usage: cli.js --in RUN_DIR --out FIG_DIR');
  }
  return { inDir, outDir };
}

export function generateReport(inDir: string, outDir: string): string[] {
  const run = readRunDirectory(inDir);
  const figures = buildFigures(run);
  fs.mkdirSync(outDir, { recursive: true });
  const written: string[] = [];
  for (const fig of figures) {
    const p = path.join(outDir, fig.name);
    fs.writeFileSync(p, fig.svg, 'utf8');
    written.push(fig.name);
  }
  const indexPath = path.join(outDir, 'index.html');
  fs.writeFileSync(indexPath, buildIndexHtml(figures), 'utf8');
  written.push('index.html');
  return written;
}

export function main(argv: string[]): number {
  let args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(String(err instanceof Error ? err.message : err));
    return 1;
  }
  try {
    const written = generateReport(args.inDir, args.outDir);
    console.log(`wrote ${written.length} files to ${args.outDir}`);
    return 0;
  } catch (err) {
    console.error(`report failed: ${err instanceof Error ? err.message : err}`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(main(process.argv.slice(2)));
}
