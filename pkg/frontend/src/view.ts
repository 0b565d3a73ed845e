import type { UiState } from './types.js';

const KEY_ROWS = [
  ['q', 'w', 'e', 'r', 't', 'y', 'u', 'i', 'o', 'p'],
  ['a', 's', 'd', 'f', 'g', 'h', 'j', 'k', 'l'],
  ['z', 'x', 'c', 'v', 'b', 'n', 'm', '.', '!', '?'],
  ['Space', 'Backspace'],
];

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/**
 * Composed text with accepted spans wrapped for highlighting, so words that
 * came from suggestions keep their colored background as typing continues.
 */
export function renderComposedHtml(state: UiState): string {
  const { composedText, acceptedRanges } = state;
  const ranges = [...acceptedRanges].sort((a, b) => a.start - b.start);
  let html = '';
  let pos = 0;
  for (const r of ranges) {
    if (r.start > pos) html += escapeHtml(composedText.slice(pos, r.start));
    html += `<span class="accepted">${escapeHtml(composedText.slice(r.start, r.end))}</span>`;
    pos = r.end;
  }
  html += escapeHtml(composedText.slice(pos));
  return html;
}

/** Suggestion bar: always 3 slots, empty placeholders when none served. */
export function renderSuggestionBarHtml(state: UiState, slots = 3): string {
  const displayed = state.displayed;
  const cells: string[] = [];
  for (let i = 0; i < slots; i++) {
    const slot = displayed?.slots[i];
    if (!slot) {
      cells.push(`<button class="slot empty" data-slot="${i}" disabled></button>`);
      continue;
    }
    const remaining = slot.words.slice(slot.wordsAccepted).join(' ');
    const active = displayed!.activeSlot === i ? ' active' : '';
    cells.push(
      `<button class="slot${active}" data-slot="${i}">${escapeHtml(remaining)}</button>`,
    );
  }
  return `<div class="suggestion-bar">${cells.join('')}</div>`;
}

export function renderKeyboardHtml(): string {
  const rows = KEY_ROWS.map(
    (row) =>
      `<div class="key-row">${row
        .map((k) => `<button class="key" data-key="${escapeHtml(k)}">${escapeHtml(k)}</button>`)
        .join('')}</div>`,
  );
  return `<div class="keyboard">${rows.join('')}</div>`;
}

export function renderStatusHtml(state: UiState): string {
  if (state.connection === 'disconnected') {
    return '<div class="banner offline">offline — events queued for retry</div>';
  }
  return '';
}

/** Full view; the bootstrap assigns this to a container's innerHTML. */
export function renderAppHtml(state: UiState): string {
  return [
    renderStatusHtml(state),
    `<div class="composed">${renderComposedHtml(state)}<span class="caret"></span></div>`,
    renderSuggestionBarHtml(state),
    renderKeyboardHtml(),
  ].join('');
}
