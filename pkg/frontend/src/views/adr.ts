/** ADR review: proposed amendments with adopt/reject, version surfaced. */

import type { VaultDoc } from '../types.js';
import { escapeHtml } from './helpers.js';

export function renderAdrView(adrs: VaultDoc[], constitutionVersion: string,
                              notice = ''): string {
  const cards = adrs.map((adr) => {
    const status = String(adr.frontmatter['status'] ?? 'proposed');
    const id = adr.path.replace(/^ADRs\//, '').replace(/\.md$/, '');
    const buttons = status === 'proposed'
      ? `<button class="adopt" data-adr="${escapeHtml(id)}">adopt</button>` +
        `<button class="reject" data-adr="${escapeHtml(id)}">reject</button>`
      : `<span class="decided">${escapeHtml(status)}</span>`;
    return [
      `<article class="adr ${escapeHtml(status)}" data-adr="${escapeHtml(id)}" data-status="${escapeHtml(status)}">`,
      `<h3>${escapeHtml(String(adr.frontmatter['title'] ?? id))}</h3>`,
      `<pre class="body">${escapeHtml(adr.body)}</pre>`,
      `<footer>${buttons}</footer>`,
      '</article>',
    ].join('\n');
  });
  return [
    '<section class="view adr">',
    `<header>constitution <span class="version" data-version="${escapeHtml(constitutionVersion)}">v${escapeHtml(constitutionVersion)}</span></header>`,
    notice ? `<div class="banner notice">${escapeHtml(notice)}</div>` : '',
    cards.length ? cards.join('\n')
                 : '<p class="placeholder">no amendment proposals</p>',
    '</section>',
  ].filter(Boolean).join('\n');
}
