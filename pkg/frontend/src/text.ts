/**
 * Pure text-composition primitives.
 *
 * The controller and the journal replayer both apply these, which is what
 * makes a session reconstructible from its journal alone: the composed text
 * is a fold of journal entries over the same functions.
 */

const WORD_OR_PUNCT = /[\w']+|[^\w\s]/g;
const TRAILING_WORD = /[\w']+$/;

/** The partially typed word at the end of the text, or ''. */
export function partialWordOf(text: string): string {
  const m = TRAILING_WORD.exec(text);
  return m ? m[0] : '';
}

/** Lowercased word/punctuation tokens of the full text. */
export function tokenize(text: string): string[] {
  return text.toLowerCase().match(WORD_OR_PUNCT) ?? [];
}

/** Context tokens to request suggestions for: the text minus any partial word. */
export function contextTokens(text: string): string[] {
  const partial = partialWordOf(text);
  return tokenize(text.slice(0, text.length - partial.length));
}

export function applyKey(text: string, char: string): string {
  return text + char;
}

export function applyBackspace(text: string): string {
  return text.slice(0, -1);
}

/**
 * Insert accepted suggestion words. When the acceptance started mid-word,
 * the first word replaces the partial prefix (it is a completion of it);
 * subsequent words are appended space-separated.
 */
export function applyAcceptedWords(
  text: string,
  words: string[],
  midWord: boolean,
): string {
  let out = text;
  words.forEach((word, i) => {
    if (i === 0 && midWord) {
      out = out.slice(0, out.length - partialWordOf(out).length) + word;
    } else if (out === '' || out.endsWith(' ')) {
      out += word;
    } else {
      out += ' ' + word;
    }
  });
  return out;
}
