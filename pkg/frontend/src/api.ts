/** Thin typed client over the daemon's HTTP endpoints.
 *
 * The console never computes analytics itself: every number it renders
 * came out of one of these calls.
 */

import type {
  AdrDecision,
  ConformanceReport,
  Constitution,
  EntropyPoint,
  InteractionRecord,
  StreamRecord,
  VaultDoc,
  Verdict,
  WeeklyShares,
} from './types.js';

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class ApiClient {
  constructor(private baseUrl: string,
              private fetchImpl: typeof fetch = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, {
        method,
        headers: body !== undefined ? { 'content-type': 'application/json' } : undefined,
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new ApiError(0, `daemon unreachable: ${String(err)}`);
    }
    if (!response.ok) {
      const detail = await response.text();
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  chat(text: string, surface = 'console'): Promise<InteractionRecord> {
    return this.request<InteractionRecord>('POST', '/chat', { text, surface });
  }

  async stream(name: string, sinceSeq?: number): Promise<StreamRecord[]> {
    const query = sinceSeq !== undefined ? `?since_seq=${sinceSeq}` : '';
    const body = await this.request<{ records: StreamRecord[] }>(
      'GET', `/streams/${name}${query}`);
    return body.records;
  }

  async docs(kind: string, week?: string): Promise<VaultDoc[]> {
    const query = week ? `&week=${encodeURIComponent(week)}` : '';
    const body = await this.request<{ docs: VaultDoc[] }>(
      'GET', `/docs?kind=${encodeURIComponent(kind)}${query}`);
    return body.docs;
  }

  async entropy(): Promise<EntropyPoint[]> {
    const body = await this.request<{ points: EntropyPoint[] }>(
      'GET', '/analytics/entropy');
    return body.points;
  }

  async shares(): Promise<WeeklyShares> {
    const body = await this.request<{ weeks: WeeklyShares }>(
      'GET', '/analytics/shares');
    return body.weeks;
  }

  async verdicts(): Promise<Verdict[]> {
    const body = await this.request<{ verdicts: Verdict[] }>(
      'GET', '/analytics/verdicts');
    return body.verdicts;
  }

  conformance(): Promise<ConformanceReport> {
    return this.request<ConformanceReport>('GET', '/analytics/conformance');
  }

  constitution(): Promise<Constitution> {
    return this.request<Constitution>('GET', '/constitution');
  }

  adoptAdr(adrId: string): Promise<AdrDecision> {
    return this.request<AdrDecision>('POST', `/adr/${adrId}/adopt`);
  }

  rejectAdr(adrId: string): Promise<AdrDecision> {
    return this.request<AdrDecision>('POST', `/adr/${adrId}/reject`);
  }

  journal(text: string): Promise<{ path: string }> {
    return this.request<{ path: string }>('POST', '/journal', { text });
  }
}
