/** Full conformance report: condition rows with their evidence paths. */

import type { ConformanceReport } from '../types.js';
import { escapeHtml } from './helpers.js';

export function renderConformanceView(report: ConformanceReport): string {
  const rows = report.conditions.map((c) => {
    const evidence = c.evidence.map((path) =>
      `<li><a href="#vault/${encodeURIComponent(path)}">${escapeHtml(path)}</a></li>`).join('');
    return [
      `<article class="condition ${c.passed ? 'pass' : 'fail'}" data-condition="${c.condition}">`,
      `<h3>${c.condition} — ${escapeHtml(c.title)}: ${c.passed ? 'pass' : 'FAIL'}</h3>`,
      `<p class="note">${escapeHtml(c.note)}</p>`,
      evidence ? `<ul class="evidence">${evidence}</ul>` : '',
      '</article>',
    ].filter(Boolean).join('\n');
  });
  return [
    `<section class="view conformance ${report.overall ? 'pass' : 'fail'}">`,
    `<header>${report.overall ? 'all six conditions hold' : `failing: ${report.failing.join(', ')}`}</header>`,
    rows.join('\n'),
    '</section>',
  ].join('\n');
}
