import { ServiceClient } from './client.js';
import {
  applyAcceptedWords,
  applyBackspace,
  applyKey,
  contextTokens,
  partialWordOf,
} from './text.js';
import type { DisplayedSuggestions, JournalEntry, UiState } from './types.js';

export type TapMode = 'word' | 'phrase';

export interface ControllerOptions {
  /** Phrase length served by the policy; used to cap per-slot acceptance. */
  phraseLength?: number;
}

/**
 * The keyboard's event-loop core, free of DOM concerns.
 *
 * Protocol invariants it maintains:
 *  - at most one outstanding suggestion request (stale responses dropped);
 *  - every acknowledged suggestion set ends in exactly one accept or reject
 *    event (client-side; the service's supersession/timeout paths back this
 *    up, and the client drops events the server has already settled);
 *  - an acceptance in progress is finalized — accept posted with the final
 *    word count — by the next keystroke, a slot switch, or completing the
 *    phrase.
 */
export class KeyboardController {
  readonly state: UiState = {
    sessionId: null,
    composedText: '',
    partialWord: '',
    displayed: null,
    connection: 'connected',
    acceptedRanges: [],
  };
  /** Replayable record of the session's typed characters and acceptances. */
  readonly journal: JournalEntry[] = [];

  private readonly client: ServiceClient;
  private readonly phraseLength: number;
  private requestSeq = 0;

  constructor(client: ServiceClient, opts: ControllerOptions = {}) {
    this.client = client;
    this.phraseLength = opts.phraseLength ?? 6;
  }

  async start(clientToken?: string): Promise<void> {
    this.state.sessionId = await this.client.createSession(clientToken);
    await this.refreshSuggestions();
  }

  /** Handle one keyboard key: a printable character or 'Backspace'. */
  async onKey(key: string): Promise<void> {
    await this.settleDisplayed();
    if (key === 'Backspace') {
      this.editText(applyBackspace(this.state.composedText));
      this.journal.push({ type: 'backspace' });
    } else {
      this.editText(applyKey(this.state.composedText, key));
      this.journal.push({ type: 'key', char: key });
    }
    await this.refreshSuggestions();
  }

  /** Tap a suggestion slot: accept its next word, or the whole phrase. */
  async onTapSuggestion(slot: number, mode: TapMode = 'word'): Promise<void> {
    const displayed = this.state.displayed;
    if (!displayed || slot < 0 || slot >= displayed.slots.length) return;
    if (displayed.activeSlot !== null && displayed.activeSlot !== slot) {
      // switching slots ends the acceptance; the set is consumed, so the
      // tap lands on the fresh set requested here
      await this.settleDisplayed();
      await this.refreshSuggestions();
      return;
    }
    const slotState = displayed.slots[slot];
    const remaining = slotState.words.slice(slotState.wordsAccepted);
    if (remaining.length === 0) return;
    const words = mode === 'phrase' ? remaining : [remaining[0]];
    const midWord = slotState.wordsAccepted === 0 && this.state.partialWord !== '';

    const before = this.state.composedText.length;
    const replaced = midWord ? this.state.partialWord.length : 0;
    this.editText(applyAcceptedWords(this.state.composedText, words, midWord));
    this.state.acceptedRanges.push({
      start: before - replaced,
      end: this.state.composedText.length,
    });
    this.journal.push({ type: 'accept_words', slot, words, midWord });

    slotState.wordsAccepted += words.length;
    displayed.activeSlot = slot;
    if (slotState.wordsAccepted >= Math.min(slotState.words.length, this.phraseLength)) {
      await this.settleDisplayed();
      await this.refreshSuggestions();
    }
  }

  /** Flush any delivery-queued events (call on reconnect or a timer). */
  async retryQueuedEvents(): Promise<void> {
    const drained = await this.client.flush();
    this.state.connection = drained ? 'connected' : 'disconnected';
  }

  // -- internals -----------------------------------------------------------

  private editText(next: string): void {
    this.state.composedText = next;
    this.state.partialWord = partialWordOf(next);
    // edits can eat into highlighted spans from the end
    this.state.acceptedRanges = this.state.acceptedRanges
      .map((r) => ({ start: r.start, end: Math.min(r.end, next.length) }))
      .filter((r) => r.end > r.start);
  }

  /** Post the one accept-or-reject outcome of the displayed set, if any. */
  private async settleDisplayed(): Promise<void> {
    const displayed = this.state.displayed;
    if (!displayed || this.state.sessionId === null) return;
    this.state.displayed = null;
    const active = displayed.activeSlot;
    const delivered = await this.client.postEvent(
      active !== null
        ? {
            session_id: this.state.sessionId,
            request_id: displayed.requestId,
            action: 'accept',
            slot: active,
            words_accepted: displayed.slots[active].wordsAccepted,
          }
        : {
            session_id: this.state.sessionId,
            request_id: displayed.requestId,
            action: 'reject',
          },
    );
    this.state.connection = delivered ? 'connected' : 'disconnected';
  }

  private async refreshSuggestions(): Promise<void> {
    if (this.state.sessionId === null) return;
    const seq = ++this.requestSeq;
    const context = contextTokens(this.state.composedText);
    try {
      const resp = await this.client.requestSuggestions(
        this.state.sessionId,
        context,
        this.state.partialWord,
      );
      if (seq !== this.requestSeq) return; // a newer request superseded this one
      const displayed: DisplayedSuggestions = {
        requestId: resp.request_id,
        slots: resp.suggestions.map((s) => ({
          words: s.words,
          displayText: s.display_text,
          wordsAccepted: 0,
        })),
        activeSlot: null,
      };
      this.state.displayed = displayed;
      this.state.connection = 'connected';
    } catch {
      if (seq !== this.requestSeq) return;
      this.state.displayed = null; // bar empties; typing keeps working
      this.state.connection = 'disconnected';
    }
  }
}
