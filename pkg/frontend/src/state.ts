// Pure view-state derivation.  The server is the single source of truth:
// the view is a function of the latest /strengths and /draft/state
// responses, so a cold reload reproduces the identical board.

import type {
  BoardEntry,
  Connection,
  DraftState,
  DraftViewState,
  MatchupPrediction,
  StrengthEntry,
} from './types.js';

// Robots in the same cluster share one visual band: a clustered fit rates
// them identically and the board must not imply an order inside a band.
export function assignBands(strengths: StrengthEntry[]): Map<number, number> {
  const bands = new Map<number, number>();
  for (const entry of strengths) {
    if (!bands.has(entry.cluster)) {
      bands.set(entry.cluster, bands.size);
    }
  }
  return bands;
}

export function buildView(
  strengths: StrengthEntry[],
  draft: DraftState,
  connection: Connection = 'live',
  lastPrediction: MatchupPrediction | null = null,
): DraftViewState {
  const bands = assignBands(strengths);
  const available = new Set(draft.available);
  const board: BoardEntry[] = strengths
    .filter((entry) => available.has(entry.robot))
    .map((entry) => ({ ...entry, band: bands.get(entry.cluster) ?? 0 }));
  return {
    board,
    picked: [...draft.picked],
    alliances: draft.alliances.map((alliance) => [...alliance]),
    lastPrediction,
    connection,
  };
}

// Red is called the winner exactly when its probability exceeds one half.
export function verdict(pRedWin: number): 'red' | 'blue' {
  return pRedWin > 0.5 ? 'red' : 'blue';
}

export function matchupReady(blue: string[], red: string[]): boolean {
  const chosen = [...blue, ...red].filter((robot) => robot !== '');
  return blue.length === 3 && red.length === 3 && new Set(chosen).size === 6;
}
