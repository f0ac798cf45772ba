import type { ApiSession, Transcript } from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = typeof fetch;

/** Thin typed client for the session service; all mutation goes through
 * the two POST endpoints and DELETE, mirroring the server contract. */
export class SessionApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  imageUrl(path: string): string {
    return this.baseUrl + path;
  }

  async createSession(strategy: string, seed?: number): Promise<ApiSession> {
    return this.request('POST', '/sessions', {
      strategy,
      ...(seed !== undefined ? { seed } : {}),
    });
  }

  async getSession(sessionId: string): Promise<ApiSession> {
    return this.request('GET', `/sessions/${sessionId}`);
  }

  async submitFeedback(
    sessionId: string,
    round: number,
    selected: string[],
  ): Promise<ApiSession> {
    return this.request('POST', `/sessions/${sessionId}/feedback`, { selected, round });
  }

  async endSession(sessionId: string): Promise<Transcript> {
    return this.request('DELETE', `/sessions/${sessionId}`);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.baseUrl + path, {
        method,
        headers: body !== undefined ? { 'Content-Type': 'application/json' } : undefined,
        body: body !== undefined ? JSON.stringify(body) : undefined,
      });
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = JSON.parse(text).detail ?? text;
      } catch {
        /* plain-text error body */
      }
      throw new ApiError(response.status, String(detail));
    }
    return JSON.parse(text) as T;
  }
}
