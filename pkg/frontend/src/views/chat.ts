/** Chat transcript rendering: one exchange per turn, badge and flags intact. */

import type { InteractionRecord } from '../types.js';
import { escapeHtml } from './helpers.js';

export function renderExchange(record: InteractionRecord): string {
  const badge = record.archetype
    ? `<span class="badge archetype" data-archetype="${escapeHtml(record.archetype)}">${escapeHtml(record.archetype)}</span>`
    : '<span class="badge archetype none">—</span>';
  const truncation = record.truncated
    ? '<span class="marker truncated" title="response was cut off">[truncated]</span>'
    : '';
  const error = record.error
    ? `<div class="turn error">gateway error: ${escapeHtml(record.error)}</div>`
    : '';
  return [
    `<article class="exchange" data-interaction="${escapeHtml(record.interaction_id)}">`,
    `<div class="turn human">${escapeHtml(record.human_text)}</div>`,
    `<div class="turn agent">${badge} ${escapeHtml(record.agent_text)} ${truncation}</div>`,
    error,
    '</article>',
  ].filter(Boolean).join('\n');
}

export function renderChatView(records: InteractionRecord[], live: boolean): string {
  const feed = records.map(renderExchange).join('\n') ||
    '<p class="placeholder">No exchanges yet; say something below.</p>';
  const liveDot = `<span class="dot ${live ? 'live' : 'dead'}"></span>`;
  return [
    `<section class="view chat" data-live="${live}">`,
    `<header>${liveDot} chat</header>`,
    `<div class="feed">${feed}</div>`,
    '<form id="chat-form"><input id="chat-input" autocomplete="off" ' +
      `placeholder="message the agent"${live ? '' : ' disabled'}>` +
      `<button type="submit"${live ? '' : ' disabled'}>send</button></form>`,
    '</section>',
  ].join('\n');
}
