// Typed client for the operator-service HTTP API. The UI talks to the
// backend exclusively through this module and never computes any score
// itself; every number shown comes out of these responses.

export type Role = 'stakeholder' | 'volunteer' | 'victim';

export interface OptionInfo {
  action: number;
  label: string;
  available: boolean;
}

export interface Payload {
  text?: string | null;
  image_uri?: string | null;
}

export interface NextItem {
  scenario_index: number;
  level: number;
  payload: Payload;
  options: OptionInfo[];
  credits_remaining: number;
  is_training: boolean;
  scenario_score: number;
  scored_scenarios_completed: number;
  can_finish: boolean;
}

export interface ActionOutcome {
  event: string;
  reward: number;
  scenario_score: number;
  scenario_done: boolean;
  credits_remaining: number;
  is_training: boolean;
  feedback: string;
  scored_scenarios_completed: number;
  can_finish: boolean;
}

export interface ScenarioRow {
  tree_score: number;
  is_correct: number;
  is_wrong: number;
  gather_rate: number;
  levels_attempted: number;
}

export interface SessionSummary {
  session_id: string;
  role: string;
  per_scenario: ScenarioRow[];
  totals: Record<string, number>;
  insights: { per_level: Record<string, { correct: number; wrong: number; gathers: number }> };
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export class SurveyApi {
  constructor(
    private baseUrl: string = '',
    private fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const doc = await response.json();
        detail = typeof doc.detail === 'string' ? doc.detail : JSON.stringify(doc);
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  createSession(role: Role): Promise<{ session_id: string }> {
    return this.request('POST', '/sessions', { role });
  }

  nextItem(sessionId: string): Promise<NextItem> {
    return this.request('GET', `/sessions/${sessionId}/next`);
  }

  submitAction(sessionId: string, action: number): Promise<ActionOutcome> {
    return this.request('POST', `/sessions/${sessionId}/action`, { action });
  }

  finishSession(sessionId: string): Promise<SessionSummary> {
    return this.request('POST', `/sessions/${sessionId}/finish`);
  }
}
