/** Wire types of the suggestion service HTTP API. */

export interface SessionResponse {
  session_id: string;
}

export interface SuggestionPayload {
  words: string[];
  display_text: string;
}

export interface SuggestionsResponse {
  request_id: string;
  suggestions: SuggestionPayload[];
}

export interface EventRequest {
  session_id: string;
  request_id: string;
  action: 'accept' | 'reject';
  slot?: number;
  words_accepted?: number;
}

export interface HealthResponse {
  status: string;
  model_loaded: boolean;
}

export interface PolicyResponse {
  policy_tag: string;
  k: number;
  length: number;
}

/** One displayed suggestion slot plus its acceptance progress. */
export interface DisplayedSlot {
  words: string[];
  displayText: string;
  /** Words already inserted from this slot (0 = untouched). */
  wordsAccepted: number;
}

/** The latest acknowledged suggestion set, if any. */
export interface DisplayedSuggestions {
  requestId: string;
  slots: DisplayedSlot[];
  /** Slot with an acceptance in progress, or null. */
  activeSlot: number | null;
}

export type ConnectionStatus = 'connected' | 'disconnected';

export interface UiState {
  sessionId: string | null;
  composedText: string;
  /** Characters of the word currently being typed (no space yet). */
  partialWord: string;
  displayed: DisplayedSuggestions | null;
  connection: ConnectionStatus;
  /** [start, end) ranges of composedText that came from accepted suggestions. */
  acceptedRanges: Array<{ start: number; end: number }>;
}

/** Client-side journal entries; a session is replayable from these alone. */
export type JournalEntry =
  | { type: 'key'; char: string }
  | { type: 'backspace' }
  | { type: 'accept_words'; slot: number; words: string[]; midWord: boolean };
