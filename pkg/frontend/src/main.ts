import { ApiError, SessionApi } from './api.js';
import { metricsToSeries, renderChart } from './chart.js';
import { metricsLabel, selectionInOrder, toggleSelection, viewFromSession, type RoundView } from './state.js';
import { STRATEGIES, type Transcript } from './types.js';

/** Wires the 3x6 proposal grid, SUBMIT/END controls, and the metrics
 * panel to the session service. All state lives in `view`. */
export class App {
  private api: SessionApi;
  private view: RoundView | null = null;
  private transcript: Transcript | null = null;

  constructor(
    private readonly root: Document,
    baseUrl: string,
    fetchImpl?: typeof fetch,
  ) {
    this.api = new SessionApi(baseUrl, fetchImpl);
  }

  mount(): void {
    const picker = this.root.getElementById('strategy') as HTMLSelectElement;
    picker.innerHTML = STRATEGIES.map((s) => `<option value="${s}">${s}</option>`).join('');
    picker.value = 'everything';
    this.bind('start', () => this.start());
    this.bind('submit', () => this.submit());
    this.bind('end', () => this.end());
    this.bind('retry', () => this.start());
  }

  private bind(id: string, handler: () => void): void {
    const el = this.root.getElementById(id);
    el?.addEventListener('click', () => {
      void handler();
    });
  }

  async start(): Promise<void> {
    const strategy = (this.root.getElementById('strategy') as HTMLSelectElement).value;
    const seedRaw = (this.root.getElementById('seed') as HTMLInputElement).value.trim();
    const seed = seedRaw === '' ? undefined : Number(seedRaw);
    this.banner('');
    try {
      const session = await this.api.createSession(strategy, seed);
      this.transcript = null;
      this.view = viewFromSession(session);
      (this.root.getElementById('seed') as HTMLInputElement).value = String(session.seed);
      this.render();
    } catch (err) {
      this.banner(this.describe(err), true);
    }
  }

  onTileClick(tileId: string): void {
    if (!this.view) return;
    this.view = toggleSelection(this.view, tileId);
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.view || this.view.status !== 'active' || this.view.inFlight) return;
    const view = this.view;
    this.view = { ...view, inFlight: true };
    this.render();
    try {
      const next = await this.api.submitFeedback(
        view.sessionId,
        view.round,
        selectionInOrder(view),
      );
      this.view = viewFromSession(next);
      this.render();
    } catch (err) {
      // Stale round or ended session: re-sync with the server's view.
      if (err instanceof ApiError && (err.status === 409 || err.status === 422)) {
        const fresh = await this.api.getSession(view.sessionId);
        this.view = viewFromSession(fresh);
        this.render();
        this.banner(`out of sync with service (${err.detail}); refreshed`, true);
        return;
      }
      this.view = { ...view, inFlight: false };
      this.render();
      this.banner(this.describe(err), true);
    }
  }

  async end(): Promise<void> {
    if (!this.view) return;
    try {
      const transcript = await this.api.endSession(this.view.sessionId);
      this.transcript = transcript;
      this.view = { ...this.view, status: 'ended', inFlight: false };
      this.render();
      this.offerDownload(transcript);
    } catch (err) {
      this.banner(this.describe(err), true);
    }
  }

  /** Offer the transcript as a JSON file download. */
  private offerDownload(transcript: Transcript): void {
    const link = this.root.getElementById('download') as HTMLAnchorElement;
    const payload = JSON.stringify(transcript, null, 1);
    link.href = 'data:application/json;charset=utf-8,' + encodeURIComponent(payload);
    link.download = `${transcript.session_id}.json`;
    link.hidden = false;
    link.textContent = `download transcript (${transcript.rounds.length} rounds)`;
  }

  render(): void {
    const grid = this.root.getElementById('grid') as HTMLElement;
    const view = this.view;
    if (!view) return;

    grid.innerHTML = '';
    for (const tileId of view.tiles) {
      const tile = this.root.createElement('div');
      tile.className = 'tile' + (view.selected.has(tileId) ? ' selected' : '');
      tile.setAttribute('data-id', tileId);
      const img = this.root.createElement('img');
      img.src = this.api.imageUrl(`/designs/${tileId}/image`);
      img.alt = tileId;
      tile.appendChild(img);
      tile.addEventListener('click', () => this.onTileClick(tileId));
      grid.appendChild(tile);
    }

    (this.root.getElementById('round') as HTMLElement).textContent =
      view.status === 'ended' ? `ended after ${view.metrics.length} rounds` : `round ${view.round}`;

    const submit = this.root.getElementById('submit') as HTMLButtonElement;
    const end = this.root.getElementById('end') as HTMLButtonElement;
    submit.disabled = view.status !== 'active' || view.inFlight;
    end.disabled = view.status !== 'active';

    const history = this.root.getElementById('history') as HTMLElement;
    history.innerHTML = view.metrics
      .map((m) => `<li>${metricsLabel(m)}</li>`)
      .join('');
    (this.root.getElementById('chart') as HTMLElement).innerHTML = renderChart(
      metricsToSeries(view.metrics),
    );
  }

  private banner(text: string, isError = false): void {
    const el = this.root.getElementById('banner') as HTMLElement;
    el.textContent = text;
    el.className = isError ? 'banner error' : 'banner';
    (this.root.getElementById('retry') as HTMLElement).hidden = !isError || this.view !== null;
  }

  private describe(err: unknown): string {
    return err instanceof ApiError ? err.message : String(err);
  }

  /** Test hook: current view snapshot. */
  get currentView(): RoundView | null {
    return this.view;
  }

  get currentTranscript(): Transcript | null {
    return this.transcript;
  }
}

export function boot(doc: Document, baseUrl?: string): App {
  const url =
    baseUrl ??
    (doc.querySelector('meta[name="service-base-url"]') as HTMLMetaElement | null)?.content ??
    'http://127.0.0.1:8000';
  const app = new App(doc, url);
  app.mount();
  return app;
}
