import { ServiceClient } from './client.js';
import { KeyboardController } from './state.js';
import { renderAppHtml } from './view.js';

const LONG_PRESS_MS = 450;

/**
 * Mount the keyboard demo into a container element.
 *
 * Tap a suggestion slot to accept its next word; hold it to accept the whole
 * remaining phrase. Returns the controller for programmatic driving.
 */
export async function mountKeyboard(
  container: HTMLElement,
  baseUrl: string,
): Promise<KeyboardController> {
  const client = new ServiceClient({ baseUrl });
  const length = await client
    .policy()
    .then((p) => p.length)
    .catch(() => 6);
  const controller = new KeyboardController(client, { phraseLength: length });

  const rerender = () => {
    container.innerHTML = renderAppHtml(controller.state);
  };

  container.addEventListener('pointerdown', (ev) => {
    const target = (ev.target as HTMLElement).closest('[data-slot]');
    if (!(target instanceof HTMLElement) || target.hasAttribute('disabled')) return;
    const slot = Number(target.dataset.slot);
    let longPress = false;
    const timer = setTimeout(() => {
      longPress = true;
      void controller.onTapSuggestion(slot, 'phrase').then(rerender);
    }, LONG_PRESS_MS);
    const up = () => {
      clearTimeout(timer);
      target.removeEventListener('pointerup', up);
      if (!longPress) void controller.onTapSuggestion(slot, 'word').then(rerender);
    };
    target.addEventListener('pointerup', up);
  });

  container.addEventListener('click', (ev) => {
    const target = (ev.target as HTMLElement).closest('[data-key]');
    if (!(target instanceof HTMLElement)) return;
    const key = target.dataset.key!;
    const char = key === 'Space' ? ' ' : key;
    void controller.onKey(char === 'Backspace' ? 'Backspace' : char).then(rerender);
  });

  window.setInterval(() => {
    void controller.retryQueuedEvents().then(rerender);
  }, 5000);

  await controller.start();
  rerender();
  return controller;
}
