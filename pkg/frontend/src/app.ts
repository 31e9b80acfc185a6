/** Browser bootstrap: hash routing, SSE subscription, event wiring.
 *
 * Renders exclusively from API responses; the only state kept here is
 * which route is open and the transcript of this session's exchanges.
 */

import { ApiClient, ApiError } from './api.js';
import { EventFeed } from './sse.js';
import type { InteractionRecord } from './types.js';
import { renderAdrView } from './views/adr.js';
import { renderChatView } from './views/chat.js';
import { renderConformanceView } from './views/conformance.js';
import { renderDashboard } from './views/dashboard.js';
import { offlineBanner } from './views/helpers.js';
import { renderVaultView } from './views/vault.js';

const ROUTES = ['chat', 'vault', 'dashboard', 'conformance', 'adr'] as const;
type Route = (typeof ROUTES)[number];

export class ConsoleApp {
  private exchanges: InteractionRecord[] = [];
  private live = false;
  private feed: EventFeed;

  constructor(private api: ApiClient, private root: HTMLElement,
              eventsUrl: string) {
    this.feed = new EventFeed(eventsUrl);
  }

  start(): void {
    window.addEventListener('hashchange', () => void this.render());
    void this.feed.subscribe(
      () => { /* records drive re-render of the open route */ void this.render(); },
      (live) => {
        this.live = live;
        void this.render();
      },
    ).catch(() => { this.live = false; void this.render(); });
    void this.render();
  }

  route(): Route {
    const hash = window.location.hash.replace(/^#/, '');
    const name = hash.split(/[/?]/)[0] as Route;
    return ROUTES.includes(name) ? name : 'chat';
  }

  async render(): Promise<void> {
    const route = this.route();
    const nav = ROUTES.map((r) =>
      `<a class="nav${r === route ? ' active' : ''}" href="#${r}">${r}</a>`).join('');
    let body: string;
    try {
      body = await this.renderRoute(route);
    } catch (err) {
      body = err instanceof ApiError && err.status === 0
        ? offlineBanner(err.message)
        : offlineBanner(String(err));
    }
    this.root.innerHTML = `<nav class="top">${nav}</nav>${body}`;
    this.wire(route);
  }

  private async renderRoute(route: Route): Promise<string> {
    if (route === 'chat') {
      return renderChatView(this.exchanges, this.live || true);
    }
    if (route === 'vault') {
      const params = new URLSearchParams(window.location.hash.split('?')[1] ?? '');
      const kind = params.get('kind') ?? 'self_portrait';
      const openPath = decodeURIComponent(window.location.hash.split('#vault/')[1] ?? '');
      const docs = await this.api.docs(kind);
      const open = openPath
        ? (await Promise.all(
            ['self_portrait', 'self_profile', 'partner_profile', 'delta',
             'scout_digest', 'constitution', 'growth_journal', 'adr']
              .map((k) => this.api.docs(k))))
            .flat().find((d) => d.path === openPath) ?? null
        : null;
      return renderVaultView(kind, docs, open);
    }
    if (route === 'dashboard') {
      const [points, weeks, verdicts, conformance] = await Promise.all([
        this.api.entropy(), this.api.shares(), this.api.verdicts(),
        this.api.conformance().catch(() => null),
      ]);
      return renderDashboard(points, weeks, verdicts, conformance);
    }
    if (route === 'conformance') {
      return renderConformanceView(await this.api.conformance());
    }
    const [adrs, constitution] = await Promise.all([
      this.api.docs('adr'), this.api.constitution(),
    ]);
    return renderAdrView(adrs, constitution.version);
  }

  private wire(route: Route): void {
    if (route === 'chat') {
      const form = this.root.querySelector<HTMLFormElement>('#chat-form');
      form?.addEventListener('submit', (event) => {
        event.preventDefault();
        const input = this.root.querySelector<HTMLInputElement>('#chat-input');
        const text = input?.value.trim();
        if (!text) return;
        void this.api.chat(text).then((record) => {
          this.exchanges.push(record);
          void this.render();
        }).catch((err) => {
          this.root.insertAdjacentHTML('beforeend', offlineBanner(String(err)));
        });
      });
    }
    if (route === 'adr') {
      for (const button of this.root.querySelectorAll<HTMLButtonElement>('button.adopt, button.reject')) {
        button.addEventListener('click', () => {
          const id = button.dataset['adr']!;
          const call = button.classList.contains('adopt')
            ? this.api.adoptAdr(id) : this.api.rejectAdr(id);
          void call.then(() => this.render()).catch((err) => {
            if (err instanceof ApiError && err.status === 409) {
              void this.render();  // someone decided first; refetch shows it
            } else {
              this.root.insertAdjacentHTML('beforeend', offlineBanner(String(err)));
            }
          });
        });
      }
    }
  }
}

declare global {
  interface Window { covaultConsole?: ConsoleApp }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  const base = window.location.origin;
  const app = new ConsoleApp(new ApiClient(base), document.getElementById('app')!,
                             `${base}/events`);
  window.covaultConsole = app;
  app.start();
}
