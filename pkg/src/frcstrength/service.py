"""Draft-assistant HTTP service.

Serves a fitted division over a small JSON API: the strength board, a
single live draft (eight alliances, picks and undo), ranked pick
recommendations, and what-if win probabilities.  Draft mutations are
serialized behind one lock; reads are lock-free snapshots of immutable
state.  Every response carries ``schema_version``.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .domain import DivisionSnapshot
from .errors import InvalidArgument, UnknownRobot
from .evaluation import model_top_ranking
from .ingestion import SCHEMA_VERSION
from .reports import FitReport
from .selection import win_probability

NUM_ALLIANCES = 8


class PickRequest(BaseModel):
    robot: str
    alliance: int


class PredictRequest(BaseModel):
    blue: list[str]
    red: list[str]


@dataclass
class _Pick:
    robot: str
    alliance: int


class DraftBoard:
    """Mutable draft state: ordered picks into eight alliances."""

    def __init__(self, roster_keys: list[str]):
        self._roster = set(roster_keys)
        self._picks: list[_Pick] = []
        self._lock = threading.Lock()

    def state(self, board_order: list[str]) -> dict:
        picked = [p.robot for p in self._picks]
        picked_set = set(picked)
        alliances: list[list[str]] = [[] for _ in range(NUM_ALLIANCES)]
        for pick in self._picks:
            alliances[pick.alliance - 1].append(pick.robot)
        return {
            "picked": picked,
            "available": [key for key in board_order if key not in picked_set],
            "alliances": alliances,
        }

    def pick(self, robot: str, alliance: int) -> str | None:
        """Record a pick; returns an error code or None on success."""
        with self._lock:
            if robot not in self._roster:
                return "unknown_robot"
            if not 1 <= alliance <= NUM_ALLIANCES:
                return "bad_alliance"
            if any(p.robot == robot for p in self._picks):
                return "already_picked"
            self._picks.append(_Pick(robot, alliance))
            return None

    def undo(self) -> str | None:
        with self._lock:
            if not self._picks:
                return "nothing_to_undo"
            self._picks.pop()
            return None


def create_app(snapshot: DivisionSnapshot, fit: FitReport) -> FastAPI:
    """Build the service application for one snapshot/fit pair."""
    fit.check_snapshot(snapshot)
    beta_tilde = fit.beta_tilde(snapshot)
    assignment = fit.assignment_array(snapshot)
    cdf = fit.cdf()
    ranking = model_top_ranking(snapshot, beta_tilde)
    board_order = [r.key for r in ranking]
    strengths = [
        {
            "robot": r.key,
            "beta": float(beta_tilde[r.index]),
            "cluster": int(assignment[r.index]),
            "frc_rank": int(-snapshot.frc_ratings[r.index]),
        }
        for r in ranking
    ]

    board = DraftBoard(board_order)
    app = FastAPI(title="frcstrength draft service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def respond(payload: dict, status_code: int = 200) -> JSONResponse:
        payload = {"schema_version": SCHEMA_VERSION, **payload}
        return JSONResponse(payload, status_code=status_code)

    @app.get("/strengths")
    def get_strengths():
        return respond({"division_key": snapshot.division_key, "strengths": strengths})

    @app.get("/draft/state")
    def get_state():
        return respond(board.state(board_order))

    @app.post("/draft/pick")
    def post_pick(request: PickRequest):
        error = board.pick(request.robot, request.alliance)
        if error == "unknown_robot":
            return respond({"error": f"unknown robot {request.robot!r}"}, 404)
        if error == "bad_alliance":
            return respond({"error": f"alliance must be 1..{NUM_ALLIANCES}"}, 400)
        if error == "already_picked":
            return respond({"error": f"{request.robot} is already picked"}, 409)
        return respond(board.state(board_order))

    @app.post("/draft/undo")
    def post_undo():
        error = board.undo()
        if error:
            return respond({"error": "nothing to undo"}, 409)
        return respond(board.state(board_order))

    @app.get("/draft/recommendations")
    def get_recommendations(alliance: int = 1, n: int = 8):
        if n < 1:
            return respond({"error": "n must be >= 1"}, 400)
        state = board.state(board_order)
        picks = [
            entry for entry in strengths if entry["robot"] in set(state["available"])
        ][:n]
        return respond({"alliance": alliance, "recommendations": picks})

    @app.post("/predict")
    def post_predict(request: PredictRequest):
        try:
            blue = [snapshot.robot(key) for key in request.blue]
            red = [snapshot.robot(key) for key in request.red]
            p_red = win_probability(beta_tilde, cdf, blue, red)
        except UnknownRobot as exc:
            return respond({"error": str(exc)}, 404)
        except InvalidArgument as exc:
            return respond({"error": str(exc)}, 400)
        return respond({"p_red_win": p_red})

    return app
