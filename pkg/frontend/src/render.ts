// DOM rendering: one function of the controller state. Buttons are real
// <button> elements (keyboard operable); images fall back to a
// placeholder with a retry control when they fail to load.

import { NextItem } from './api.js';
import { SurveyController } from './controller.js';

const ROLES = ['stakeholder', 'volunteer', 'victim'] as const;

export function render(ctrl: SurveyController, root: HTMLElement): void {
  root.textContent = '';
  switch (ctrl.phase) {
    case 'intro':
      root.appendChild(renderIntro(ctrl));
      break;
    case 'tutorial':
    case 'playing':
      root.appendChild(renderPlay(ctrl));
      break;
    case 'results':
      root.appendChild(renderResults(ctrl));
      break;
  }
  if (ctrl.error) {
    const banner = el('div', 'error-banner', ctrl.error);
    if (ctrl.canRetry) {
      const retry = el('button', 'retry', 'Retry');
      retry.addEventListener('click', () => void ctrl.retry());
      banner.appendChild(retry);
    }
    root.appendChild(banner);
  }
}

function renderIntro(ctrl: SurveyController): HTMLElement {
  const section = el('section', 'intro');
  section.appendChild(el('h1', '', 'Disaster decision survey'));
  section.appendChild(el('p', '', [
    'You will walk through disaster scenarios, five decisions each.',
    'Correct answers score +1, wrong answers -5, and requesting',
    'additional data costs 1 of the 5 credits available at every step.',
    'The first scenario is a tutorial and is not scored.',
  ].join(' ')));
  const form = el('form', 'role-form');
  form.addEventListener('submit', event => event.preventDefault());
  const label = el('label', '', 'I took part in a disaster response as:');
  label.setAttribute('for', 'role-select');
  const select = document.createElement('select');
  select.id = 'role-select';
  for (const role of ROLES) {
    const option = document.createElement('option');
    option.value = role;
    option.textContent = role;
    select.appendChild(option);
  }
  const start = el('button', 'start', 'Start the tutorial');
  start.addEventListener('click', () =>
    void ctrl.start(select.value as (typeof ROLES)[number]));
  start.toggleAttribute('disabled', ctrl.busy);
  form.append(label, select, start);
  section.appendChild(form);
  return section;
}

function renderPlay(ctrl: SurveyController): HTMLElement {
  const item = ctrl.item!;
  const section = el('section', 'play');
  const head = el('header', 'status');
  if (item.is_training) {
    head.appendChild(el('span', 'badge training', 'Tutorial - not scored'));
  } else {
    head.appendChild(el('span', 'badge', `Scenario ${item.scenario_index}`));
  }
  head.appendChild(el('span', 'level', `Level ${item.level} of 5`));
  head.appendChild(el('span', 'score', `Scenario score: ${item.scenario_score}`));
  section.appendChild(head);

  section.appendChild(renderPayload(item));

  if (ctrl.feedback) {
    const sign = ctrl.feedback.reward > 0 ? '+' : '';
    section.appendChild(el(
      'div', `feedback ${ctrl.feedback.event}`,
      `${ctrl.feedback.text} (${sign}${ctrl.feedback.reward})`,
    ));
  }

  const options = el('div', 'options');
  for (const option of item.options) {
    const button = el('button', 'option', option.label) as HTMLButtonElement;
    button.dataset.action = String(option.action);
    if (option.label === 'Gather Additional Data') {
      button.classList.add('gather');
      button.appendChild(el('span', 'credits-badge',
                            ` (${item.credits_remaining} credits left)`));
    }
    button.disabled = ctrl.busy || !option.available;
    button.addEventListener('click', () => void ctrl.submit(option.action));
    options.appendChild(button);
  }
  section.appendChild(options);

  const footer = el('footer', 'session-progress');
  footer.appendChild(el('span', '',
    `Scored scenarios completed: ${item.scored_scenarios_completed}`));
  if (item.can_finish) {
    const finish = el('button', 'finish', 'End survey and see results');
    finish.toggleAttribute('disabled', ctrl.busy);
    finish.addEventListener('click', () => void ctrl.finish());
    footer.appendChild(finish);
  }
  section.appendChild(footer);
  return section;
}

function renderPayload(item: NextItem): HTMLElement {
  const payload = el('div', 'payload');
  if (item.payload.text) {
    payload.appendChild(el('p', 'payload-text', item.payload.text));
  }
  if (item.payload.image_uri) {
    const img = document.createElement('img');
    img.src = item.payload.image_uri;
    img.alt = item.payload.text ?? `Level ${item.level} imagery`;
    img.addEventListener('error', () => {
      const placeholder = el('div', 'image-placeholder',
                             'Image unavailable. ');
      const retry = el('button', 'image-retry', 'Retry');
      retry.addEventListener('click', () => {
        const src = img.src;
        img.src = '';
        img.src = src;
        placeholder.replaceWith(img);
      });
      placeholder.appendChild(retry);
      img.replaceWith(placeholder);
    });
    payload.appendChild(img);
  }
  if (!item.payload.text && !item.payload.image_uri) {
    payload.appendChild(el('p', 'payload-text',
                           'No preview available for this record.'));
  }
  return payload;
}

function renderResults(ctrl: SurveyController): HTMLElement {
  const summary = ctrl.summary!;
  const section = el('section', 'results');
  section.appendChild(el('h1', '', 'Your results'));
  section.appendChild(el('p', 'totals',
    `Total score ${summary.totals.total_score} over `
    + `${summary.per_scenario.length} scored scenarios `
    + `(mean ${fmt(summary.totals.tree_score_mean)}).`));
  section.appendChild(el('p', '',
    `Correct decisions: ${pct(summary.totals.is_correct_mean)}; `
    + `wrong: ${pct(summary.totals.is_wrong_mean)}; `
    + `data requests: ${pct(summary.totals.gather_rate_mean)}.`));
  const list = el('ol', 'scenario-list');
  for (const row of summary.per_scenario) {
    list.appendChild(el('li', '',
      `tree score ${row.tree_score}, correct ${pct(row.is_correct)}`));
  }
  section.appendChild(list);
  section.appendChild(el('p', 'thanks',
    'Thank you for taking part. You can close this window.'));
  return section;
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function fmt(value: number): string {
  return value.toFixed(4);
}

function pct(value: number): string {
  return `${(100 * value).toFixed(1)}%`;
}
