/** Vault reader: browse documents by kind, read one in place. */

import type { VaultDoc } from '../types.js';
import { escapeHtml } from './helpers.js';

export const BROWSABLE_KINDS = [
  'self_portrait', 'self_profile', 'partner_profile', 'delta',
  'scout_digest', 'constitution', 'growth_journal', 'adr',
];

export function renderDocList(kind: string, docs: VaultDoc[]): string {
  const items = docs.map((d) => {
    const week = d.frontmatter['iso_week'] ?? '';
    return `<li><a href="#vault/${encodeURIComponent(d.path)}" data-path="${escapeHtml(d.path)}">` +
      `${escapeHtml(d.path)}</a> <span class="meta">${escapeHtml(String(week))}` +
      ` · ${escapeHtml(String(d.frontmatter['author'] ?? ''))}</span></li>`;
  });
  return [
    `<div class="doc-list" data-kind="${escapeHtml(kind)}">`,
    items.length ? `<ul>${items.join('\n')}</ul>`
                 : '<p class="placeholder">no documents of this kind yet</p>',
    '</div>',
  ].join('\n');
}

export function renderDoc(doc: VaultDoc): string {
  const meta = Object.entries(doc.frontmatter)
    .map(([k, v]) => `<dt>${escapeHtml(k)}</dt><dd>${escapeHtml(String(v))}</dd>`)
    .join('');
  return [
    `<article class="doc" data-path="${escapeHtml(doc.path)}" data-kind="${escapeHtml(doc.kind)}">`,
    `<h3>${escapeHtml(doc.path)}</h3>`,
    `<dl class="frontmatter">${meta}</dl>`,
    `<pre class="body">${escapeHtml(doc.body)}</pre>`,
    '</article>',
  ].join('\n');
}

export function renderVaultView(kind: string, docs: VaultDoc[],
                                open: VaultDoc | null): string {
  const tabs = BROWSABLE_KINDS.map((k) =>
    `<a class="tab${k === kind ? ' active' : ''}" href="#vault?kind=${k}">${k}</a>`).join('');
  return [
    '<section class="view vault">',
    `<nav class="kinds">${tabs}</nav>`,
    renderDocList(kind, docs),
    open ? renderDoc(open) : '',
    '</section>',
  ].filter(Boolean).join('\n');
}
