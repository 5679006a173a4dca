// @vitest-environment happy-dom
import { describe, expect, it } from 'vitest';

import { NextItem, SurveyApi } from '../src/api.js';
import { SurveyController } from '../src/controller.js';
import { render } from '../src/render.js';

function controllerAt(phase: 'intro' | 'tutorial' | 'playing',
                      item: NextItem | null): SurveyController {
  const ctrl = new SurveyController(new SurveyApi('http://unused',
    (async () => new Response('{}')) as typeof fetch));
  ctrl.phase = phase;
  ctrl.item = item;
  return ctrl;
}

function level2Item(overrides: Partial<NextItem> = {}): NextItem {
  return {
    scenario_index: 1,
    level: 2,
    payload: { text: 'flooded road near the depot', image_uri: '/static/x.png' },
    options: [
      { action: 0, label: 'affected individuals', available: true },
      { action: 1, label: 'infrastructure and utility damage', available: true },
      { action: 2, label: 'other relevant information', available: true },
      { action: 3, label: 'rescue and volunteering efforts', available: true },
      { action: 4, label: 'Gather Additional Data', available: true },
    ],
    credits_remaining: 5,
    is_training: false,
    scenario_score: 1,
    scored_scenarios_completed: 0,
    can_finish: false,
    ...overrides,
  };
}

function mount(ctrl: SurveyController): HTMLElement {
  document.body.innerHTML = '<main id="app"></main>';
  const root = document.getElementById('app') as HTMLElement;
  render(ctrl, root);
  return root;
}

describe('intro screen', () => {
  it('offers the three roles and a start control', () => {
    const root = mount(controllerAt('intro', null));
    const select = root.querySelector('select#role-select') as HTMLSelectElement;
    expect(Array.from(select.options).map(o => o.value))
      .toEqual(['stakeholder', 'volunteer', 'victim']);
    expect(root.querySelector('button.start')).toBeTruthy();
  });
});

describe('level screen', () => {
  it('renders one button per class plus gather', () => {
    const root = mount(controllerAt('playing', level2Item()));
    const buttons = root.querySelectorAll('button.option');
    expect(buttons).toHaveLength(5);
    const gather = buttons[4] as HTMLButtonElement;
    expect(gather.textContent).toContain('Gather Additional Data');
    expect(gather.textContent).toContain('5 credits left');
    expect(gather.disabled).toBe(false);
  });

  it('disables gather at zero credits', () => {
    const item = level2Item({ credits_remaining: 0 });
    item.options[4].available = false;
    const root = mount(controllerAt('playing', item));
    const gather = root.querySelectorAll('button.option')[4] as HTMLButtonElement;
    expect(gather.disabled).toBe(true);
    const classButton = root.querySelectorAll('button.option')[0] as HTMLButtonElement;
    expect(classButton.disabled).toBe(false);
  });

  it('locks every button while a submission is in flight', () => {
    const ctrl = controllerAt('playing', level2Item());
    ctrl.busy = true;
    const root = mount(ctrl);
    for (const button of root.querySelectorAll('button.option')) {
      expect((button as HTMLButtonElement).disabled).toBe(true);
    }
  });

  it('uses payload text as image alt text', () => {
    const root = mount(controllerAt('playing', level2Item()));
    const img = root.querySelector('img') as HTMLImageElement;
    expect(img.alt).toBe('flooded road near the depot');
    expect(root.querySelector('.payload-text')?.textContent)
      .toBe('flooded road near the depot');
  });

  it('image-only payload for the satellite level', () => {
    const item = level2Item({
      level: 4,
      payload: { image_uri: '/static/sat.png' },
      options: [
        { action: 0, label: 'no damage', available: true },
        { action: 1, label: 'major damage', available: true },
        { action: 2, label: 'Gather Additional Data', available: true },
      ],
    });
    const root = mount(controllerAt('playing', item));
    expect(root.querySelectorAll('button.option')).toHaveLength(3);
    expect(root.querySelector('.payload-text')).toBeNull();
    expect((root.querySelector('img') as HTMLImageElement).alt)
      .toBe('Level 4 imagery');
  });

  it('swaps a failed image for a placeholder with retry', () => {
    const root = mount(controllerAt('playing', level2Item()));
    const img = root.querySelector('img') as HTMLImageElement;
    img.dispatchEvent(new Event('error'));
    expect(root.querySelector('img')).toBeNull();
    const placeholder = root.querySelector('.image-placeholder');
    expect(placeholder?.textContent).toContain('Image unavailable');
    expect(placeholder?.querySelector('button.image-retry')).toBeTruthy();
  });

  it('marks the tutorial and shows the finish control only when allowed', () => {
    let root = mount(controllerAt('tutorial', level2Item({ is_training: true })));
    expect(root.textContent).toContain('Tutorial - not scored');
    expect(root.querySelector('button.finish')).toBeNull();

    root = mount(controllerAt('playing',
                              level2Item({ can_finish: true,
                                           scored_scenarios_completed: 2 })));
    expect(root.querySelector('button.finish')).toBeTruthy();
  });

  it('feedback banner shows the server event and reward', () => {
    const ctrl = controllerAt('playing', level2Item());
    ctrl.feedback = { event: 'gathered', reward: -1,
                      text: 'Additional data gathered.' };
    const root = mount(ctrl);
    expect(root.querySelector('.feedback.gathered')?.textContent)
      .toContain('Additional data gathered. (-1)');
  });
});

describe('error banner', () => {
  it('renders the message and a retry button when retryable', async () => {
    const ctrl = controllerAt('playing', level2Item());
    ctrl.error = 'Connection problem. Check your network and retry.';
    const root = mount(ctrl);
    expect(root.querySelector('.error-banner')?.textContent)
      .toContain('Connection problem');
  });
});
