// Survey state machine. Phases only ever move forward
// (intro -> tutorial -> playing -> results) and at most one request is
// in flight per session: submit() while busy is a no-op, so a double
// click produces exactly one submitted action.

import { ActionOutcome, ApiError, NextItem, Role, SessionSummary, SurveyApi } from './api.js';

export type Phase = 'intro' | 'tutorial' | 'playing' | 'results';

const ORDER: Phase[] = ['intro', 'tutorial', 'playing', 'results'];

export interface Feedback {
  event: string;
  reward: number;
  text: string;
}

export class SurveyController {
  phase: Phase = 'intro';
  sessionId: string | null = null;
  role: Role | null = null;
  item: NextItem | null = null;
  feedback: Feedback | null = null;
  summary: SessionSummary | null = null;
  busy = false;
  error: string | null = null;

  private retryFn: (() => Promise<void>) | null = null;

  constructor(
    private api: SurveyApi,
    private onChange: () => void = () => {},
  ) {}

  private advanceTo(phase: Phase) {
    if (ORDER.indexOf(phase) >= ORDER.indexOf(this.phase)) {
      this.phase = phase;
    }
  }

  private notify() {
    this.onChange();
  }

  private async guarded(work: () => Promise<void>): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    this.error = null;
    this.notify();
    try {
      await work();
      this.retryFn = null;
    } catch (err) {
      if (err instanceof ApiError) {
        this.error = err.message;
      } else {
        // network failure: keep state, offer a retry, never double-submit
        this.error = 'Connection problem. Check your network and retry.';
        this.retryFn = work;
      }
    } finally {
      this.busy = false;
      this.notify();
    }
  }

  get canRetry(): boolean {
    return this.retryFn !== null;
  }

  async retry(): Promise<void> {
    const work = this.retryFn;
    if (!work) return;
    this.retryFn = null;
    await this.guarded(work);
  }

  async start(role: Role): Promise<void> {
    if (this.phase !== 'intro') return;
    await this.guarded(async () => {
      const { session_id } = await this.api.createSession(role);
      this.sessionId = session_id;
      this.role = role;
      await this.refreshItem();
    });
  }

  private async refreshItem(): Promise<void> {
    if (!this.sessionId) return;
    this.item = await this.api.nextItem(this.sessionId);
    this.advanceTo(this.item.is_training ? 'tutorial' : 'playing');
  }

  async submit(action: number): Promise<ActionOutcome | null> {
    if (this.busy || !this.sessionId || (this.phase !== 'tutorial' && this.phase !== 'playing')) {
      return null;
    }
    let outcome: ActionOutcome | null = null;
    await this.guarded(async () => {
      outcome = await this.api.submitAction(this.sessionId!, action);
      this.feedback = {
        event: outcome.event,
        reward: outcome.reward,
        text: outcome.feedback,
      };
      await this.refreshItem();
    });
    return outcome;
  }

  async finish(): Promise<void> {
    if (!this.sessionId || this.phase === 'results') return;
    await this.guarded(async () => {
      this.summary = await this.api.finishSession(this.sessionId!);
      this.advanceTo('results');
    });
  }
}
