/** Minimal server-sent-events reader over fetch streams.
 *
 * Works in browsers and Node 20 without the EventSource global; the
 * daemon's /events feed only uses `data:` lines, so that is all this
 * parses.
 */

import type { StreamRecord } from './types.js';

export interface SseEvent extends StreamRecord {
  stream: string;
}

export class EventFeed {
  private controller: AbortController | null = null;
  live = false;

  constructor(private url: string,
              private fetchImpl: typeof fetch = fetch) {}

  async subscribe(onRecord: (event: SseEvent) => void,
                  onStateChange?: (live: boolean) => void): Promise<void> {
    this.controller = new AbortController();
    let response: Response;
    try {
      response = await this.fetchImpl(this.url, {
        signal: this.controller.signal,
        headers: { accept: 'text/event-stream' },
      });
    } catch (err) {
      this.setLive(false, onStateChange);
      throw err;
    }
    if (!response.ok || response.body === null) {
      this.setLive(false, onStateChange);
      throw new Error(`event stream failed: ${response.status}`);
    }
    this.setLive(true, onStateChange);
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = '';
    try {
      for (;;) {
        const { done, value } = await reader.read();
        if (done) break;
        buffer += decoder.decode(value, { stream: true });
        let index: number;
        while ((index = buffer.indexOf('\n\n')) >= 0) {
          const frame = buffer.slice(0, index);
          buffer = buffer.slice(index + 2);
          for (const line of frame.split('\n')) {
            if (line.startsWith('data: ')) {
              onRecord(JSON.parse(line.slice(6)) as SseEvent);
            }
          }
        }
      }
    } catch (err) {
      if (!this.controller.signal.aborted) throw err;
    } finally {
      this.setLive(false, onStateChange);
    }
  }

  close(): void {
    this.controller?.abort();
    this.live = false;
  }

  private setLive(value: boolean, onStateChange?: (live: boolean) => void): void {
    this.live = value;
    onStateChange?.(value);
  }
}
