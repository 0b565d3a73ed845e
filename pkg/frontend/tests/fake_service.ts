import type { FetchLike } from '../src/client.js';
import type { EventRequest } from '../src/types.js';

interface PendingSet {
  requestId: string;
  context: string[];
  suggestions: string[][];
}

export interface LoggedSetOutcome {
  requestId: string;
  context: string[];
  suggestions: string[][];
  acceptedSlot: number | null;
  wordsAccepted: number;
}

/**
 * In-memory stand-in for the suggestion service, faithful to its protocol:
 * one pending set per session, superseded sets auto-rejected, 409 on settled
 * request ids, 422 on invalid accepts. Suggestions are deterministic; for
 * mid-word requests the first word of every slot completes the prefix.
 */
export class FakeService {
  readonly outcomes: LoggedSetOutcome[] = [];
  offline = false;
  private sessions = new Map<string, PendingSet | null>();
  private counter = 0;
  private readonly k: number;
  private readonly length: number;

  constructor(k = 3, length = 6) {
    this.k = k;
    this.length = length;
  }

  fetch: FetchLike = async (url, init) => {
    if (this.offline) throw new TypeError('fetch failed');
    const path = new URL(url, 'http://fake').pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : {};
    if (path === '/session') return json(200, { session_id: this.createSession() });
    if (path === '/suggestions') return this.handleSuggestions(body);
    if (path === '/events') return this.handleEvent(body as EventRequest);
    if (path === '/health') return json(200, { status: 'ok', model_loaded: true });
    if (path === '/policy')
      return json(200, { policy_tag: 'sha256:fake', k: this.k, length: this.length });
    return json(404, { detail: 'not found' });
  };

  private createSession(): string {
    const sid = `sess-${++this.counter}`;
    this.sessions.set(sid, null);
    return sid;
  }

  private handleSuggestions(body: {
    session_id: string;
    context_tokens?: string[];
    prefix?: string;
  }): Response {
    if (!this.sessions.has(body.session_id)) return json(404, { detail: 'unknown session' });
    const prior = this.sessions.get(body.session_id);
    if (prior) this.settle(prior, null, 0); // supersession = implicit reject
    const prefix = (body.prefix ?? '').toLowerCase();
    const suggestions: string[][] = [];
    for (let slot = 0; slot < this.k; slot++) {
      const words: string[] = [];
      for (let i = 0; i < this.length; i++) {
        const stem = i === 0 && prefix !== '' ? prefix : `w${slot}`;
        words.push(i === 0 ? `${stem}${slot}x` : `${stem}n${i}`);
      }
      suggestions.push(words);
    }
    const pending: PendingSet = {
      requestId: `req-${++this.counter}`,
      context: body.context_tokens ?? [],
      suggestions,
    };
    this.sessions.set(body.session_id, pending);
    return json(200, {
      request_id: pending.requestId,
      suggestions: suggestions.map((words) => ({
        words,
        display_text: words.join(' '),
      })),
    });
  }

  private handleEvent(event: EventRequest): Response {
    const pending = this.sessions.get(event.session_id);
    if (pending === undefined) return json(404, { detail: 'unknown session' });
    if (!pending || pending.requestId !== event.request_id) {
      return json(409, { detail: 'no pending suggestions for request_id' });
    }
    if (event.action === 'reject') {
      this.settle(pending, null, 0);
      this.sessions.set(event.session_id, null);
      return json(200, { ok: true });
    }
    if (event.action !== 'accept') return json(422, { detail: 'unknown action' });
    if (
      event.slot == null ||
      event.slot < 0 ||
      event.slot >= this.k ||
      event.words_accepted == null ||
      event.words_accepted < 1 ||
      event.words_accepted > this.length
    ) {
      return json(422, { detail: 'invalid accept' });
    }
    this.settle(pending, event.slot, event.words_accepted);
    this.sessions.set(event.session_id, null);
    return json(200, { ok: true });
  }

  private settle(pending: PendingSet, slot: number | null, words: number): void {
    this.outcomes.push({
      requestId: pending.requestId,
      context: pending.context,
      suggestions: pending.suggestions,
      acceptedSlot: slot,
      wordsAccepted: words,
    });
  }
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}
