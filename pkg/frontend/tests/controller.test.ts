import { describe, expect, it } from 'vitest';

import { ActionOutcome, NextItem, SurveyApi } from '../src/api.js';
import { SurveyController } from '../src/controller.js';

function item(overrides: Partial<NextItem> = {}): NextItem {
  return {
    scenario_index: 0,
    level: 1,
    payload: { text: 'report', image_uri: null },
    options: [
      { action: 0, label: 'informative', available: true },
      { action: 1, label: 'not informative', available: true },
      { action: 2, label: 'Gather Additional Data', available: true },
    ],
    credits_remaining: 5,
    is_training: true,
    scenario_score: 0,
    scored_scenarios_completed: 0,
    can_finish: false,
    ...overrides,
  };
}

function outcome(overrides: Partial<ActionOutcome> = {}): ActionOutcome {
  return {
    event: 'correct',
    reward: 1,
    scenario_score: 1,
    scenario_done: false,
    credits_remaining: 5,
    is_training: true,
    feedback: 'Correct decision.',
    scored_scenarios_completed: 0,
    can_finish: false,
    ...overrides,
  };
}

interface Call {
  url: string;
  method: string;
  body?: unknown;
}

/** fetch stub: routes by "METHOD path-suffix", records every call. */
function fakeFetch(routes: Record<string, () => unknown>) {
  const calls: Call[] = [];
  const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const method = init?.method ?? 'GET';
    calls.push({ url, method, body: init?.body ? JSON.parse(String(init.body)) : undefined });
    for (const [key, producer] of Object.entries(routes)) {
      const [m, suffix] = key.split(' ');
      if (method === m && url.endsWith(suffix)) {
        const value = producer();
        if (value instanceof Error) throw value;
        if (typeof value === 'object' && value !== null && 'status' in (value as object)
            && 'detail' in (value as object)) {
          const v = value as { status: number; detail: string };
          return new Response(JSON.stringify({ detail: v.detail }), { status: v.status });
        }
        return new Response(JSON.stringify(value), { status: 200 });
      }
    }
    throw new Error(`no route for ${method} ${url}`);
  }) as typeof fetch;
  return { fn, calls };
}

function makeController(routes: Record<string, () => unknown>) {
  const { fn, calls } = fakeFetch(routes);
  const ctrl = new SurveyController(new SurveyApi('http://test', fn));
  return { ctrl, calls };
}

describe('phase flow', () => {
  it('starts into the tutorial and only moves forward', async () => {
    const { ctrl } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item(),
    });
    expect(ctrl.phase).toBe('intro');
    await ctrl.start('victim');
    expect(ctrl.sessionId).toBe('s1');
    expect(ctrl.phase).toBe('tutorial');
    expect(ctrl.item?.options).toHaveLength(3);
  });

  it('moves to playing when the server stops flagging training', async () => {
    let calls = 0;
    const { ctrl } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () =>
        item({ is_training: calls++ === 0, scenario_index: calls > 1 ? 1 : 0 }),
      'POST /sessions/s1/action': () => outcome({ scenario_done: true }),
    });
    await ctrl.start('victim');
    expect(ctrl.phase).toBe('tutorial');
    await ctrl.submit(0);
    // is_training flips false on the refreshed item
    expect(ctrl.item?.is_training).toBe(false);
  });

  it('start is a no-op outside intro', async () => {
    const { ctrl, calls } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item(),
    });
    await ctrl.start('victim');
    const before = calls.length;
    await ctrl.start('volunteer');
    expect(calls.length).toBe(before);
  });
});

describe('submission', () => {
  it('passes server numbers through untouched', async () => {
    const { ctrl } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item(),
      'POST /sessions/s1/action': () => outcome({ reward: -5, event: 'wrong',
                                                  scenario_score: -4 }),
    });
    await ctrl.start('victim');
    const result = await ctrl.submit(1);
    expect(result?.reward).toBe(-5);
    expect(ctrl.feedback).toEqual({ event: 'wrong', reward: -5,
                                    text: 'Correct decision.' });
  });

  it('double submit produces exactly one POST', async () => {
    const { ctrl, calls } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item(),
      'POST /sessions/s1/action': () => outcome(),
    });
    await ctrl.start('victim');
    await Promise.all([ctrl.submit(0), ctrl.submit(0)]);
    const posts = calls.filter(c => c.method === 'POST' && c.url.endsWith('/action'));
    expect(posts).toHaveLength(1);
  });

  it('network failure offers retry without double submission', async () => {
    let fail = true;
    const { ctrl, calls } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item(),
      'POST /sessions/s1/action': () => {
        if (fail) { fail = false; return new TypeError('fetch failed'); }
        return outcome();
      },
    });
    await ctrl.start('victim');
    await ctrl.submit(0);
    expect(ctrl.error).toContain('retry');
    expect(ctrl.canRetry).toBe(true);
    await ctrl.retry();
    expect(ctrl.error).toBeNull();
    const posts = calls.filter(c => c.method === 'POST' && c.url.endsWith('/action'));
    expect(posts).toHaveLength(2); // the failed attempt and its single retry
  });

  it('server rejection surfaces the detail and keeps the phase', async () => {
    const { ctrl } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item({ is_training: false }),
      'POST /sessions/s1/finish': () => ({ status: 409,
                                           detail: 'complete at least 2 scenarios' }),
    });
    await ctrl.start('victim');
    await ctrl.finish();
    expect(ctrl.phase).toBe('playing');
    expect(ctrl.error).toContain('at least 2');
    expect(ctrl.canRetry).toBe(false); // a refusal is not a network hiccup
  });
});

describe('finish', () => {
  it('lands on results with the server summary', async () => {
    const summary = {
      session_id: 's1', role: 'victim',
      per_scenario: [{ tree_score: 5, is_correct: 1, is_wrong: 0,
                       gather_rate: 0, levels_attempted: 5 }],
      totals: { total_score: 5, tree_score_mean: 5, is_correct_mean: 1,
                is_wrong_mean: 0, gather_rate_mean: 0 },
      insights: { per_level: {} },
    };
    const { ctrl } = makeController({
      'POST /sessions': () => ({ session_id: 's1' }),
      'GET /sessions/s1/next': () => item({ is_training: false, can_finish: true }),
      'POST /sessions/s1/finish': () => summary,
    });
    await ctrl.start('victim');
    await ctrl.finish();
    expect(ctrl.phase).toBe('results');
    expect(ctrl.summary?.totals.total_score).toBe(5);
  });
});
