import { execFileSync, spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ServiceClient } from '../src/client.js';
import { KeyboardController } from '../src/state.js';

/**
 * End-to-end exactly-once accounting against the real suggestion service.
 *
 * Setup trains a small language model, writes reference policy weights, and
 * spawns `suggestkit serve` with a 1-second idle timeout. The test drives a
 * 500+-event scripted session through the keyboard controller over real HTTP,
 * plus a second session abandoned mid-set to exercise the idle-timeout sweep,
 * then audits the service's JSONL log: every suggestion slot ever served is
 * logged exactly once, event indices are contiguous per session, and positive
 * rewards match the accepts that were actually delivered.
 */

const PORT = 8791;
const BASE = `http://127.0.0.1:${PORT}`;

const MAKE_CORPUS = `
import pathlib, sys
from suggestkit import corpus
lines = corpus.bundled_corpus_path().read_text(encoding="utf-8").splitlines()
pathlib.Path(sys.argv[1]).write_text("\\n".join(lines[:120]) + "\\n", encoding="utf-8")
`;

const MAKE_WEIGHTS = `
import sys
from suggestkit.policy import reference_weights, save_weights
save_weights(sys.argv[1], reference_weights(0.5))
`;

interface LoggedRecord {
  session_id: string;
  event_index: number;
  context: string[];
  words: string[];
  word_props: number[];
  propensity: number;
  reward: number;
  policy_tag: string;
  timestamp: number;
  mid_word: boolean;
}

function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

async function waitForHealth(deadlineMs: number): Promise<void> {
  const until = Date.now() + deadlineMs;
  for (;;) {
    try {
      const resp = await fetch(`${BASE}/health`);
      if (resp.ok && (await resp.json()).model_loaded) return;
    } catch {
      // server not up yet
    }
    if (Date.now() > until) throw new Error('service did not become healthy');
    await new Promise((r) => setTimeout(r, 250));
  }
}

describe('live service accounting', () => {
  let workDir: string;
  let logPath: string;
  let server: ChildProcess | null = null;

  // what the client actually saw, for auditing against the log
  const slotsServed: number[] = []; // per successful /suggestions response
  const acceptsDelivered: number[] = []; // words_accepted of each 200 accept

  const recordingFetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const resp = await fetch(url, init);
    const path = new URL(url).pathname;
    if (resp.ok && path === '/suggestions') {
      const body = await resp.clone().json();
      slotsServed.push(body.suggestions.length);
    }
    if (resp.ok && path === '/events' && init?.body) {
      const event = JSON.parse(String(init.body));
      if (event.action === 'accept') acceptsDelivered.push(event.words_accepted);
    }
    return resp;
  };

  beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), 'suggestkit-e2e-'));
    const corpusPath = join(workDir, 'mini.txt');
    const weightsPath = join(workDir, 'weights.txt');
    logPath = join(workDir, 'service_logs.jsonl');
    execFileSync('python3', ['-c', MAKE_CORPUS, corpusPath]);
    execFileSync('suggestkit', ['train-lm', corpusPath, '--out', workDir, '--seed', '7']);
    execFileSync('python3', ['-c', MAKE_WEIGHTS, weightsPath]);
    server = spawn(
      'suggestkit',
      [
        'serve',
        '--model', join(workDir, 'lm.bin'),
        '--weights', weightsPath,
        '--log', logPath,
        '--port', String(PORT),
        '--timeout', '1',
      ],
      { stdio: 'ignore' },
    );
    await waitForHealth(60_000);
  }, 180_000);

  afterAll(() => {
    server?.kill('SIGTERM');
    rmSync(workDir, { recursive: true, force: true });
  });

  it(
    'logs every served set exactly once across a 500-event session',
    async () => {
      // Session A: leave a suggestion set pending and go idle; the sweep
      // triggered by later traffic must reject it for us.
      const clientA = new ServiceClient({ baseUrl: BASE, fetchImpl: recordingFetch });
      const controllerA = new KeyboardController(clientA, { phraseLength: 6 });
      await controllerA.start();
      await controllerA.onKey('t');
      await controllerA.onKey('h');
      const sessionA = controllerA.state.sessionId!;
      await new Promise((r) => setTimeout(r, 1300));

      // Session B: the scripted 500+-event typing session.
      const clientB = new ServiceClient({ baseUrl: BASE, fetchImpl: recordingFetch });
      const controllerB = new KeyboardController(clientB, { phraseLength: 6 });
      await controllerB.start();
      const sessionB = controllerB.state.sessionId!;

      const rng = mulberry32(42);
      const letters = 'etaoinshr';
      let ops = 0;
      while (controllerB.journal.length < 510 && ops < 2000) {
        const r = rng();
        if (r < 0.55) {
          await controllerB.onKey(letters[Math.floor(rng() * letters.length)]);
        } else if (r < 0.75) {
          await controllerB.onKey(' ');
        } else if (r < 0.85) {
          await controllerB.onTapSuggestion(Math.floor(rng() * 3), 'word');
        } else if (r < 0.9) {
          await controllerB.onTapSuggestion(Math.floor(rng() * 3), 'phrase');
        } else if (r < 0.95) {
          await controllerB.onKey('Backspace');
        } else {
          await controllerB.onKey('.');
        }
        ops += 1;
      }
      expect(controllerB.journal.length).toBeGreaterThanOrEqual(500);

      // Settle the final still-displayed set so nothing is left pending.
      const last = controllerB.state.displayed;
      if (last) {
        await clientB.postEvent({
          session_id: sessionB,
          request_id: last.requestId,
          action: 'reject',
        });
      }
      expect(clientB.pendingEvents()).toBe(0);

      const records: LoggedRecord[] = readFileSync(logPath, 'utf-8')
        .split('\n')
        .filter((line) => line.trim() !== '')
        .map((line) => JSON.parse(line));

      // Exactly once: one record per served slot, no extras, no omissions.
      const totalSlots = slotsServed.reduce((a, b) => a + b, 0);
      expect(records.length).toBe(totalSlots);

      // Per-session event indices are 0..n-1 with no gaps or duplicates.
      const bySession = new Map<string, number[]>();
      for (const rec of records) {
        const got = bySession.get(rec.session_id) ?? [];
        got.push(rec.event_index);
        bySession.set(rec.session_id, got);
      }
      expect([...bySession.keys()].sort()).toEqual([sessionA, sessionB].sort());
      for (const indices of bySession.values()) {
        const sorted = [...indices].sort((a, b) => a - b);
        expect(sorted).toEqual(sorted.map((_, i) => i));
      }

      // Session A's abandoned set was swept: logged, all rewards zero.
      const sweptA = records.filter((rec) => rec.session_id === sessionA);
      expect(sweptA.length).toBeGreaterThan(0);
      expect(sweptA.every((rec) => rec.reward === 0)).toBe(true);

      // Positive rewards line up one-to-one with the accepts delivered.
      const positives = records
        .filter((rec) => rec.reward > 0)
        .map((rec) => rec.reward)
        .sort((a, b) => a - b);
      expect(positives).toEqual([...acceptsDelivered].sort((a, b) => a - b));

      // Each settled set (same session + settle timestamp) logged at most
      // one acceptance, and record internals are consistent.
      const groups = new Map<string, LoggedRecord[]>();
      for (const rec of records) {
        const key = `${rec.session_id}|${rec.timestamp}`;
        const got = groups.get(key) ?? [];
        got.push(rec);
        groups.set(key, got);
      }
      for (const group of groups.values()) {
        expect(group.length).toBeLessThanOrEqual(3);
        expect(group.filter((rec) => rec.reward > 0).length).toBeLessThanOrEqual(1);
      }
      for (const rec of records) {
        const product = rec.word_props.reduce((a, b) => a * b, 1);
        expect(Math.abs(rec.propensity - product)).toBeLessThanOrEqual(
          1e-12 * Math.max(1, Math.abs(product)),
        );
        expect(rec.words.length).toBe(6);
        expect(rec.policy_tag.startsWith('sha256:')).toBe(true);
      }
    },
    240_000,
  );
});
