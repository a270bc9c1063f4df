export { readRunDirectory, parseTable, RunData } from './csv';
export { renderChart, niceTicks, logTicks, fmt, Series } from './svg';
export { buildFigures, buildIndexHtml, Figure } from './figures';
export { generateReport } from './cli';
