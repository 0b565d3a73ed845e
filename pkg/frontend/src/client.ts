import type {
  EventRequest,
  HealthResponse,
  PolicyResponse,
  SessionResponse,
  SuggestionsResponse,
} from './types.js';

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface ServiceClientOptions {
  baseUrl: string;
  /** Injectable for tests; defaults to the global fetch. */
  fetchImpl?: FetchLike;
}

async function postJson<T>(
  fetchImpl: FetchLike,
  url: string,
  body: unknown,
): Promise<T> {
  const resp = await fetchImpl(url, {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify(body),
  });
  if (!resp.ok) {
    const text = await resp.text().catch(() => '');
    throw new Error(`HTTP ${resp.status}: ${text.slice(0, 200)}`);
  }
  return (await resp.json()) as T;
}

/**
 * Typed client for the suggestion service.
 *
 * Accept/reject events go through a FIFO retry queue: a lost reject would
 * bias logged rewards upward, so events survive transient network failures
 * and are re-posted in order on the next flush. Suggestion requests are not
 * queued — a stale suggestion set is worthless to the user.
 */
export class ServiceClient {
  private readonly baseUrl: string;
  private readonly fetchImpl: FetchLike;
  private queue: EventRequest[] = [];
  private flushing = false;

  constructor(opts: ServiceClientOptions) {
    this.baseUrl = opts.baseUrl.replace(/\/$/, '');
    this.fetchImpl = opts.fetchImpl ?? ((url, init) => fetch(url, init));
  }

  async createSession(clientToken?: string): Promise<string> {
    const body = clientToken ? { client_token: clientToken } : {};
    const resp = await postJson<SessionResponse>(
      this.fetchImpl,
      `${this.baseUrl}/session`,
      body,
    );
    return resp.session_id;
  }

  async requestSuggestions(
    sessionId: string,
    contextTokens: string[],
    prefix = '',
  ): Promise<SuggestionsResponse> {
    return postJson<SuggestionsResponse>(this.fetchImpl, `${this.baseUrl}/suggestions`, {
      session_id: sessionId,
      context_tokens: contextTokens,
      prefix,
    });
  }

  /** Queue an accept/reject event and try to deliver everything queued. */
  async postEvent(event: EventRequest): Promise<boolean> {
    this.queue.push(event);
    return this.flush();
  }

  /**
   * Deliver queued events in order; stops at the first network failure,
   * keeping the remainder queued. Returns true when the queue drained.
   * Events the server rejects outright (4xx, e.g. an already-flushed
   * request id) are dropped rather than retried forever.
   */
  async flush(): Promise<boolean> {
    if (this.flushing) return this.queue.length === 0;
    this.flushing = true;
    try {
      while (this.queue.length > 0) {
        const event = this.queue[0];
        try {
          await postJson(this.fetchImpl, `${this.baseUrl}/events`, event);
        } catch (err) {
          if (err instanceof Error && /^HTTP 4\d\d/.test(err.message)) {
            this.queue.shift(); // permanently rejected; retrying cannot help
            continue;
          }
          return false; // transient: keep the event and everything behind it
        }
        this.queue.shift();
      }
      return true;
    } finally {
      this.flushing = false;
    }
  }

  pendingEvents(): number {
    return this.queue.length;
  }

  async health(): Promise<HealthResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/health`);
    if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
    return (await resp.json()) as HealthResponse;
  }

  async policy(): Promise<PolicyResponse> {
    const resp = await this.fetchImpl(`${this.baseUrl}/policy`);
    if (!resp.ok) throw new Error(`HTTP ${resp.status}`);
    return (await resp.json()) as PolicyResponse;
  }
}
