// Wire types for the draft service JSON API.  Every number the UI shows
// comes straight from one of these fields; nothing is re-derived locally.

export interface StrengthEntry {
  robot: string;
  beta: number;
  cluster: number;
  frc_rank: number;
}

export interface DraftState {
  picked: string[];
  available: string[];
  alliances: string[][];
}

export type Connection = 'live' | 'stale';

export interface BoardEntry extends StrengthEntry {
  band: number;
}

export interface MatchupPrediction {
  blue: string[];
  red: string[];
  pRedWin: number;
}

export interface DraftViewState {
  board: BoardEntry[];
  picked: string[];
  alliances: string[][];
  lastPrediction: MatchupPrediction | null;
  connection: Connection;
}
