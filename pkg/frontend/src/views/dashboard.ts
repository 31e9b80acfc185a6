/** Dashboard: entropy line, share bars, verdict timeline, conformance lights.
 *
 * Every number shown is taken verbatim from an API payload; exact values
 * ride along in data attributes so equality with the API is checkable.
 */

import type {
  ConformanceReport,
  EntropyPoint,
  Verdict,
  WeeklyShares,
} from '../types.js';
import { escapeHtml } from './helpers.js';

const WIDTH = 560;
const HEIGHT = 180;
const PAD = 30;

export function renderEntropyChart(points: EntropyPoint[]): string {
  if (points.length === 0) {
    return '<div class="chart entropy empty"><p class="placeholder">no archetype events yet</p></div>';
  }
  const maxBits = Math.max(...points.map((p) => p.entropy_bits), 1);
  const step = points.length > 1 ? (WIDTH - 2 * PAD) / (points.length - 1) : 0;
  const coords = points.map((p, i) => {
    const x = PAD + i * step;
    const y = HEIGHT - PAD - (p.entropy_bits / maxBits) * (HEIGHT - 2 * PAD);
    return { x, y, p };
  });
  const polyline = points.length > 1
    ? `<polyline fill="none" stroke="currentColor" points="${coords.map((c) => `${c.x.toFixed(1)},${c.y.toFixed(1)}`).join(' ')}" />`
    : '';
  const dots = coords.map((c) =>
    `<circle cx="${c.x.toFixed(1)}" cy="${c.y.toFixed(1)}" r="3" ` +
    `data-week="${escapeHtml(c.p.iso_week)}" data-bits="${c.p.entropy_bits}" ` +
    `data-events="${c.p.event_count}"><title>${escapeHtml(c.p.iso_week)}: ` +
    `${c.p.entropy_bits.toFixed(2)} bits</title></circle>`).join('\n');
  const labels = coords.map((c) =>
    `<text x="${c.x.toFixed(1)}" y="${HEIGHT - 8}" text-anchor="middle">` +
    `${escapeHtml(c.p.iso_week.slice(5))}</text>`).join('\n');
  return [
    '<div class="chart entropy">',
    `<svg viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="weekly archetype entropy">`,
    polyline, dots, labels,
    '</svg>',
    '<ul class="readout">',
    ...points.map((p) =>
      `<li data-week="${escapeHtml(p.iso_week)}" data-bits="${p.entropy_bits}">` +
      `${escapeHtml(p.iso_week)}: ${p.entropy_bits.toFixed(2)} bits ` +
      `(${p.event_count} events)</li>`),
    '</ul>',
    '</div>',
  ].join('\n');
}

export function renderShareBars(weeks: WeeklyShares): string {
  const names = Object.keys(weeks).sort();
  if (names.length === 0) {
    return '<div class="chart shares empty"><p class="placeholder">no invocations yet</p></div>';
  }
  const rows = names.map((week) => {
    const counts = weeks[week];
    const total = Object.values(counts).reduce((a, b) => a + b, 0) || 1;
    const segments = Object.keys(counts).sort().filter((n) => counts[n] > 0)
      .map((name) => {
        const share = counts[name] / total;
        return `<span class="seg" data-archetype="${escapeHtml(name)}" ` +
          `data-count="${counts[name]}" style="width:${(share * 100).toFixed(1)}%" ` +
          `title="${escapeHtml(name)}: ${counts[name]}"></span>`;
      }).join('');
    return `<div class="bar-row" data-week="${escapeHtml(week)}">` +
      `<label>${escapeHtml(week)}</label><div class="bar">${segments}</div></div>`;
  });
  return `<div class="chart shares">${rows.join('\n')}</div>`;
}

export function renderVerdictTimeline(verdicts: Verdict[]): string {
  if (verdicts.length === 0) {
    return '<div class="chart verdicts empty"><p class="placeholder">no improve runs yet</p></div>';
  }
  const items = verdicts.map((v) => {
    const cls = v.assessment === 'insufficient_data' ? 'null-verdict' : v.assessment;
    return `<li class="verdict ${cls}" data-run="${escapeHtml(v.run_id)}" ` +
      `data-assessment="${escapeHtml(v.assessment)}" data-delta="${v.delta}">` +
      `<span class="when">${escapeHtml(v.ts)}</span> ${escapeHtml(v.run_id)} ` +
      `delta=${v.delta} <em>${escapeHtml(v.assessment)}</em></li>`;
  });
  return `<ol class="chart verdicts">${items.join('\n')}</ol>`;
}

export function renderConformanceBadge(report: ConformanceReport): string {
  const lights = report.conditions.map((c) =>
    `<span class="light ${c.passed ? 'pass' : 'fail'}" data-condition="${c.condition}" ` +
    `title="${escapeHtml(c.title)}: ${escapeHtml(c.note)}">${c.condition}</span>`).join('');
  const overall = report.overall ? 'humorphic: all six conditions hold' : 'not conformant';
  return `<div class="badge conformance ${report.overall ? 'pass' : 'fail'}">` +
    `${lights}<span class="overall">${escapeHtml(overall)}</span></div>`;
}

export function renderDashboard(points: EntropyPoint[], weeks: WeeklyShares,
                                verdicts: Verdict[],
                                report: ConformanceReport | null): string {
  return [
    '<section class="view dashboard">',
    '<h2>Weekly entropy</h2>', renderEntropyChart(points),
    '<h2>Archetype shares</h2>', renderShareBars(weeks),
    '<h2>Improve verdicts</h2>', renderVerdictTimeline(verdicts),
    '<h2>Conformance</h2>',
    report ? renderConformanceBadge(report)
           : '<p class="placeholder">conformance not computed</p>',
    '</section>',
  ].join('\n');
}
