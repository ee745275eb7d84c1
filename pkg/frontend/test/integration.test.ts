// End-to-end check against the real Python service.  Regenerates the
// fixtures if needed, boots `frcstrength serve` on a spare port, then runs
// the scripted draft session through the typed client and the view layer.
// Skips when the Python package is not available on this machine.

import { spawn, spawnSync, type ChildProcess } from 'node:child_process';
import { existsSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { DraftApi } from '../src/api.js';
import { buildView } from '../src/state.js';

const HERE = dirname(fileURLToPath(import.meta.url));
const FIXTURES = join(HERE, 'fixtures');
const PORT = 8473;
const BASE = `http://127.0.0.1:${PORT}`;

function pythonAvailable(): boolean {
  const probe = spawnSync('python3', ['-c', 'import frcstrength'], { timeout: 20000 });
  return probe.status === 0;
}

async function waitForServer(api: DraftApi, tries = 50): Promise<boolean> {
  for (let i = 0; i < tries; i += 1) {
    try {
      await api.strengths();
      return true;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 200));
    }
  }
  return false;
}

const available = pythonAvailable();
const maybe = available ? describe : describe.skip;

maybe('live service integration', () => {
  let server: ChildProcess;
  const api = new DraftApi(BASE);

  beforeAll(async () => {
    if (!existsSync(join(FIXTURES, 'fit.json'))) {
      const made = spawnSync('python3', [join(HERE, '..', 'scripts', 'make_fixture.py')], {
        timeout: 120000,
      });
      if (made.status !== 0) {
        throw new Error(`fixture generation failed: ${made.stderr}`);
      }
    }
    server = spawn('python3', [
      '-m',
      'frcstrength.cli',
      'serve',
      '--snapshot',
      join(FIXTURES, 'snapshot.json'),
      '--fit',
      join(FIXTURES, 'fit.json'),
      '--port',
      String(PORT),
    ]);
    if (!(await waitForServer(api))) {
      throw new Error('service did not come up');
    }
  }, 60000);

  afterAll(() => {
    server?.kill();
  });

  it('runs the scripted session: 24 picks, one undo, three what-ifs', async () => {
    const strengths = await api.strengths();
    expect(strengths.length).toBe(24);

    const log: Array<{ robot: string; alliance: number }> = [];
    const order = strengths.map((entry) => entry.robot);
    for (let round = 0; round < 3; round += 1) {
      for (let alliance = 1; alliance <= 8; alliance += 1) {
        const robot = order.find((r) => !log.some((e) => e.robot === r))!;
        await api.pick(robot, alliance);
        log.push({ robot, alliance });
      }
    }

    // Conflicting re-pick must 409 and leave state untouched.
    await expect(api.pick(log[0].robot, 5)).rejects.toMatchObject({ status: 409 });

    // One undo followed by a re-pick into another alliance.
    const undone = log.pop()!;
    await api.undo();
    const midState = await api.draftState();
    expect(midState.available).toContain(undone.robot);
    await api.pick(undone.robot, 1);
    log.push({ robot: undone.robot, alliance: 1 });

    // Server state must be consistent with the event log.
    const state = await api.draftState();
    expect(state.picked).toEqual(log.map((e) => e.robot));
    for (let alliance = 1; alliance <= 8; alliance += 1) {
      expect(state.alliances[alliance - 1]).toEqual(
        log.filter((e) => e.alliance === alliance).map((e) => e.robot),
      );
    }
    expect(new Set([...state.picked, ...state.available]).size).toBe(24);

    // Three what-if predictions, each in [0, 1] and stable across repeats.
    const pool = [...state.picked, ...state.available];
    for (let i = 0; i < 3; i += 1) {
      const six = pool.slice(6 * i, 6 * i + 6);
      const p = await api.predict(six.slice(0, 3), six.slice(3));
      expect(p).toBeGreaterThanOrEqual(0);
      expect(p).toBeLessThanOrEqual(1);
      expect(await api.predict(six.slice(0, 3), six.slice(3))).toBe(p);
    }

    // Cold reload: a fresh client derives the identical board.
    const again = new DraftApi(BASE);
    const viewA = buildView(strengths, state);
    const viewB = buildView(await again.strengths(), await again.draftState());
    expect(viewB).toEqual(viewA);
  }, 60000);
});
