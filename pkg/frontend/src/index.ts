export { ServiceClient } from './client.js';
export type { FetchLike, ServiceClientOptions } from './client.js';
export { KeyboardController } from './state.js';
export type { TapMode, ControllerOptions } from './state.js';
export { replayJournal, parseJournal, dumpJournal } from './replay.js';
export {
  applyAcceptedWords,
  applyBackspace,
  applyKey,
  contextTokens,
  partialWordOf,
  tokenize,
} from './text.js';
export {
  renderAppHtml,
  renderComposedHtml,
  renderKeyboardHtml,
  renderStatusHtml,
  renderSuggestionBarHtml,
} from './view.js';
export type * from './types.js';
