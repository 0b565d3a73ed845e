import {
  applyAcceptedWords,
  applyBackspace,
  applyKey,
} from './text.js';
import type { JournalEntry } from './types.js';

/**
 * Reconstruct the composed text from a session journal.
 *
 * Folds the same pure text primitives the live controller uses, so a
 * faithfully recorded session replays to the identical final text.
 */
export function replayJournal(entries: JournalEntry[]): string {
  let text = '';
  for (const entry of entries) {
    switch (entry.type) {
      case 'key':
        text = applyKey(text, entry.char);
        break;
      case 'backspace':
        text = applyBackspace(text);
        break;
      case 'accept_words':
        text = applyAcceptedWords(text, entry.words, entry.midWord);
        break;
    }
  }
  return text;
}

/** Parse a JSONL journal dump (one entry per line). */
export function parseJournal(jsonl: string): JournalEntry[] {
  return jsonl
    .split('\n')
    .filter((line) => line.trim() !== '')
    .map((line) => JSON.parse(line) as JournalEntry);
}

/** Serialize a journal as JSONL. */
export function dumpJournal(entries: JournalEntry[]): string {
  return entries.map((e) => JSON.stringify(e)).join('\n') + (entries.length ? '\n' : '');
}
