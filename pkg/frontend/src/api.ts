// Thin typed client for the draft service.  The fetch implementation is
// injectable so tests can run without a server.

import type { DraftState, StrengthEntry } from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseBody(response: Response): Promise<any> {
  try {
    return await response.json();
  } catch {
    return {};
  }
}

export class DraftApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await parseBody(response);
    if (!response.ok) {
      throw new ApiError(response.status, body.error ?? `HTTP ${response.status}`);
    }
    return body;
  }

  private post(path: string, payload: unknown): Promise<any> {
    return this.request(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  async strengths(): Promise<StrengthEntry[]> {
    const body = await this.request('/strengths');
    return body.strengths as StrengthEntry[];
  }

  async draftState(): Promise<DraftState> {
    const body = await this.request('/draft/state');
    return { picked: body.picked, available: body.available, alliances: body.alliances };
  }

  async pick(robot: string, alliance: number): Promise<DraftState> {
    const body = await this.post('/draft/pick', { robot, alliance });
    return { picked: body.picked, available: body.available, alliances: body.alliances };
  }

  async undo(): Promise<DraftState> {
    const body = await this.post('/draft/undo', {});
    return { picked: body.picked, available: body.available, alliances: body.alliances };
  }

  async predict(blue: string[], red: string[]): Promise<number> {
    const body = await this.post('/predict', { blue, red });
    return body.p_red_win as number;
  }
}
