// DOM wiring: renders the view state, forwards picks/undo/what-if calls to
// the service, and polls for changes.  The app never mutates draft state
// locally; every render uses the last server responses.

import { ApiError, DraftApi } from './api.js';
import { buildView, matchupReady, verdict } from './state.js';
import type { DraftViewState, MatchupPrediction, StrengthEntry } from './types.js';

const NUM_ALLIANCES = 8;
const BAND_COUNT = 8; // color classes band-0..band-7, reused cyclically

export interface AppOptions {
  pollMs?: number;
}

export class DraftApp {
  private strengths: StrengthEntry[] = [];
  private view: DraftViewState | null = null;
  private selectedAlliance = 1;
  private whatifBlue: string[] = [];
  private whatifRed: string[] = [];
  private lastPrediction: MatchupPrediction | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private readonly pollMs: number;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: DraftApi,
    options: AppOptions = {},
  ) {
    this.pollMs = options.pollMs ?? 2000;
    this.root.innerHTML = this.skeleton();
    this.bindStaticHandlers();
  }

  async start(): Promise<void> {
    await this.refresh();
    this.timer = setInterval(() => void this.refresh(), this.pollMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async refresh(): Promise<void> {
    try {
      if (this.strengths.length === 0) {
        this.strengths = await this.api.strengths();
      }
      const draft = await this.api.draftState();
      this.view = buildView(this.strengths, draft, 'live', this.lastPrediction);
    } catch {
      // Keep the last board frozen and flag the connection.
      if (this.view) {
        this.view = { ...this.view, connection: 'stale' };
      }
    }
    this.render();
  }

  currentView(): DraftViewState | null {
    return this.view;
  }

  async pickRobot(robot: string, alliance: number): Promise<void> {
    try {
      const draft = await this.api.pick(robot, alliance);
      this.view = buildView(this.strengths, draft, 'live', this.lastPrediction);
    } catch (error) {
      this.toast(error instanceof ApiError ? error.message : 'pick failed');
    }
    this.render();
  }

  async undo(): Promise<void> {
    try {
      const draft = await this.api.undo();
      this.view = buildView(this.strengths, draft, 'live', this.lastPrediction);
    } catch (error) {
      this.toast(error instanceof ApiError ? error.message : 'undo failed');
    }
    this.render();
  }

  toggleWhatif(robot: string, side: 'blue' | 'red'): void {
    const pool = side === 'blue' ? this.whatifBlue : this.whatifRed;
    const other = side === 'blue' ? this.whatifRed : this.whatifBlue;
    const position = pool.indexOf(robot);
    if (position >= 0) {
      pool.splice(position, 1);
    } else {
      const elsewhere = other.indexOf(robot);
      if (elsewhere >= 0) {
        other.splice(elsewhere, 1);
      }
      if (pool.length < 3) {
        pool.push(robot);
      }
    }
    this.render();
  }

  async predict(): Promise<void> {
    if (!matchupReady(this.whatifBlue, this.whatifRed)) {
      return;
    }
    try {
      const p = await this.api.predict(this.whatifBlue, this.whatifRed);
      this.lastPrediction = {
        blue: [...this.whatifBlue],
        red: [...this.whatifRed],
        pRedWin: p,
      };
      if (this.view) {
        this.view = { ...this.view, lastPrediction: this.lastPrediction };
      }
    } catch (error) {
      this.toast(error instanceof ApiError ? error.message : 'prediction failed');
    }
    this.render();
  }

  toast(message: string): void {
    const host = this.root.querySelector('#toasts') as HTMLElement;
    const node = document.createElement('div');
    node.className = 'toast';
    node.textContent = message;
    host.appendChild(node);
    setTimeout(() => node.remove(), 4000);
  }

  private skeleton(): string {
    const allianceOptions = Array.from(
      { length: NUM_ALLIANCES },
      (_, i) => `<option value="${i + 1}">Alliance ${i + 1}</option>`,
    ).join('');
    return `
      <header>
        <h1>Alliance draft board</h1>
        <span id="connection" class="connection live">live</span>
      </header>
      <div id="toasts"></div>
      <main>
        <section class="panel">
          <div class="controls">
            <label>Pick into
              <select id="alliance-select">${allianceOptions}</select>
            </label>
            <button id="undo">Undo last pick</button>
          </div>
          <table id="board">
            <thead>
              <tr><th>Robot</th><th>Strength</th><th>Cluster</th><th>FRC rank</th>
                  <th>What-if</th><th></th></tr>
            </thead>
            <tbody></tbody>
          </table>
        </section>
        <section class="panel">
          <h2>Alliances</h2>
          <div id="alliances"></div>
        </section>
        <section class="panel">
          <h2>What-if matchup</h2>
          <div id="whatif-pools"></div>
          <button id="predict" disabled>Predict</button>
          <div id="prediction"></div>
        </section>
      </main>`;
  }

  private bindStaticHandlers(): void {
    const select = this.root.querySelector('#alliance-select') as HTMLSelectElement;
    select.addEventListener('change', () => {
      this.selectedAlliance = Number(select.value);
    });
    (this.root.querySelector('#undo') as HTMLElement).addEventListener('click', () =>
      void this.undo(),
    );
    (this.root.querySelector('#predict') as HTMLElement).addEventListener('click', () =>
      void this.predict(),
    );
  }

  private render(): void {
    const connection = this.root.querySelector('#connection') as HTMLElement;
    const state = this.view;
    connection.textContent = state?.connection ?? 'stale';
    connection.className = `connection ${state?.connection ?? 'stale'}`;
    if (!state) {
      return;
    }

    const tbody = this.root.querySelector('#board tbody') as HTMLElement;
    tbody.innerHTML = '';
    for (const entry of state.board) {
      const row = document.createElement('tr');
      row.className = `band-${entry.band % BAND_COUNT}`;
      row.dataset.robot = entry.robot;
      row.innerHTML = `
        <td>${entry.robot}</td>
        <td>${entry.beta.toFixed(2)}</td>
        <td>${entry.cluster}</td>
        <td>${entry.frc_rank}</td>
        <td>
          <button class="whatif-blue">B</button>
          <button class="whatif-red">R</button>
        </td>
        <td><button class="pick">Pick</button></td>`;
      (row.querySelector('.pick') as HTMLElement).addEventListener('click', () =>
        void this.pickRobot(entry.robot, this.selectedAlliance),
      );
      (row.querySelector('.whatif-blue') as HTMLElement).addEventListener('click', () =>
        this.toggleWhatif(entry.robot, 'blue'),
      );
      (row.querySelector('.whatif-red') as HTMLElement).addEventListener('click', () =>
        this.toggleWhatif(entry.robot, 'red'),
      );
      tbody.appendChild(row);
    }

    const alliances = this.root.querySelector('#alliances') as HTMLElement;
    alliances.innerHTML = state.alliances
      .map(
        (alliance, i) => `
        <div class="alliance" data-alliance="${i + 1}">
          <strong>Alliance ${i + 1}</strong>
          <ul>${alliance.map((robot) => `<li>${robot}</li>`).join('')}</ul>
        </div>`,
      )
      .join('');

    const pools = this.root.querySelector('#whatif-pools') as HTMLElement;
    pools.innerHTML = `
      <div>Blue: ${this.whatifBlue.join(', ') || '(pick 3)'}</div>
      <div>Red: ${this.whatifRed.join(', ') || '(pick 3)'}</div>`;
    const predictButton = this.root.querySelector('#predict') as HTMLButtonElement;
    predictButton.disabled = !matchupReady(this.whatifBlue, this.whatifRed);

    const prediction = this.root.querySelector('#prediction') as HTMLElement;
    if (state.lastPrediction) {
      const { blue, red, pRedWin } = state.lastPrediction;
      const winner = verdict(pRedWin);
      prediction.innerHTML = `
        <p>P(red wins) = <strong id="p-red">${pRedWin.toFixed(3)}</strong></p>
        <p>Verdict: <strong id="verdict" class="${winner}">${winner}</strong>
           (${red.join(', ')} vs ${blue.join(', ')})</p>`;
    } else {
      prediction.textContent = '';
    }
  }
}
