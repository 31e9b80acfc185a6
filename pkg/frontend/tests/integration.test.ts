/** Console against a live scripted daemon.
 *
 * The daemon serves a vault rebuilt from the bundled replay scenario, so
 * every completion the chat needs is scripted and the ADR under review is
 * the one the weekly scout proposed.
 */

import { execFile, spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, resolve } from 'node:path';
import { promisify } from 'node:util';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient, ApiError } from '../src/api.js';
import { EventFeed } from '../src/sse.js';
import { renderExchange } from '../src/views/chat.js';
import { renderEntropyChart } from '../src/views/dashboard.js';
import { renderAdrView } from '../src/views/adr.js';

const execFileAsync = promisify(execFile);

const REPO_ROOT = resolve(__dirname, '..', '..');
const SCENARIO = join(REPO_ROOT, 'fixtures', 'paper_trace.json');
const ADR_ID = 'adr-2026-w18-deep-middleware-vs-thin-harness-debate';
const PORT = 8473 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;

let daemon: ChildProcess;
let api: ApiClient;

async function waitForDaemon(timeoutMs = 40_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/constitution`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('daemon did not come up');
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  const workdir = mkdtempSync(join(tmpdir(), 'covault-console-'));
  const vault = join(workdir, 'vault');
  await execFileAsync('python3', ['-m', 'covault.cli', 'replay',
                                  '--scenario', SCENARIO, '--out', vault]);
  daemon = spawn('python3', ['-m', 'covault.cli', '--vault', vault, 'daemon',
                             '--host', '127.0.0.1', '--port', String(PORT),
                             '--no-schedulers'],
                 { stdio: 'ignore' });
  api = new ApiClient(BASE);
  await waitForDaemon();
}, 60_000);

afterAll(() => {
  daemon?.kill('SIGTERM');
});

describe('console integration', () => {
  it('chat round-trip renders the archetype badge', async () => {
    const record = await api.chat('Narrate what I am becoming.');
    expect(record.archetype).toBe('Beatrice');
    expect(record.truncated).toBe(false);
    const html = renderExchange(record);
    expect(html).toContain('data-archetype="Beatrice"');
    expect(html).toContain(record.agent_text);
  });

  it('dashboard entropy chart matches the analytics payload exactly', async () => {
    const points = await api.entropy();
    expect(points.length).toBeGreaterThan(0);
    const html = renderEntropyChart(points);
    for (const p of points) {
      expect(html).toContain(
        `data-week="${p.iso_week}" data-bits="${p.entropy_bits}" data-events="${p.event_count}"`);
    }
  });

  it('adopting the scout ADR bumps the constitution version visibly', async () => {
    const before = await api.constitution();
    expect(before.version).toBe('1.0');
    const adrsBefore = await api.docs('adr');
    expect(renderAdrView(adrsBefore, before.version))
      .toContain(`data-adr="${ADR_ID}"`);

    const decision = await api.adoptAdr(ADR_ID);
    expect(decision.constitution_version).toBe('1.1');

    const after = await api.constitution();
    expect(after.version).toBe('1.1');
    const adrsAfter = await api.docs('adr');
    const html = renderAdrView(adrsAfter, after.version);
    expect(html).toContain('data-version="1.1"');
    expect(html).toContain('data-status="adopted"');

    // A second adopt conflicts and surfaces as 409.
    await expect(api.adoptAdr(ADR_ID)).rejects.toMatchObject({ status: 409 });
  });

  it('receives live records over SSE while chatting', async () => {
    const feed = new EventFeed(`${BASE}/events`);
    const seen: string[] = [];
    const subscription = feed.subscribe((event) => {
      seen.push(event.stream);
    });
    await new Promise((r) => setTimeout(r, 300));
    expect(feed.live).toBe(true);
    await api.chat('Help me recall the vault note on fences.');
    const deadline = Date.now() + 5000;
    while (seen.length === 0 && Date.now() < deadline) {
      await new Promise((r) => setTimeout(r, 100));
    }
    feed.close();
    await subscription.catch(() => undefined);
    expect(seen).toContain('interactions');
  }, 20_000);
});
