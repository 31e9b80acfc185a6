export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function offlineBanner(reason: string): string {
  return `<div class="banner offline" role="alert">daemon unreachable — ${escapeHtml(reason)}</div>`;
}
