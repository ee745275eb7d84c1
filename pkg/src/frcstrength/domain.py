"""Validated data model for a division: robots, matches, snapshots.

All types are immutable after validation and safe to share across threads.
A :class:`DivisionSnapshot` is the single source of truth consumed by the
design builders, estimators, and evaluation code.

Conventions
-----------
* Robots are indexed 0..K-1 by roster order; the index is assigned during
  validation and is a pure function of that order.
* Match margins are always red minus blue.
* ``frc_ratings`` stores the official standing as a real score where larger
  means better (ingestion negates the official rank), because every
  agreement metric downstream depends only on the ordering.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import (
    DuplicateMatchNo,
    DuplicateRobot,
    MalformedAlliance,
    NegativeScore,
    UnknownRobotInMatch,
    ValidationFailed,
)

ALLIANCE_SIZE = 3


class Stage(enum.Enum):
    QUALIFICATION = "qualification"
    PLAYOFF = "playoff"


class ModelKind(enum.Enum):
    """The two supported strength models.

    OPR regresses each alliance score on its own members; WMPR regresses the
    match margin on both alliances under a sum-to-zero constraint.  The
    clustered variants are the same kinds fitted with fewer than K distinct
    strengths.
    """

    OPR = "OPR"
    WMPR = "WMPR"


@dataclass(frozen=True, order=True)
class RobotId:
    """A roster entry: opaque team key plus its 0-based roster index."""

    index: int
    key: str


@dataclass(frozen=True)
class MatchRecord:
    """One played match: two disjoint triples of robots and their scores."""

    match_no: int
    stage: Stage
    blue: frozenset[RobotId]
    red: frozenset[RobotId]
    blue_score: int
    red_score: int

    @property
    def margin(self) -> int:
        """Red score minus blue score."""
        return self.red_score - self.blue_score

    def blue_sorted(self) -> list[RobotId]:
        return sorted(self.blue)

    def red_sorted(self) -> list[RobotId]:
        return sorted(self.red)


@dataclass(frozen=True)
class DivisionSnapshot:
    """All recorded data for one division.

    ``frc_ratings`` is aligned with ``roster``.  ``playoff_roster`` lists the
    robots that advanced, the first eight being the alliance captains in
    official rank order.
    """

    division_key: str
    roster: tuple[RobotId, ...]
    qual_matches: tuple[MatchRecord, ...]
    playoff_matches: tuple[MatchRecord, ...]
    frc_ratings: tuple[float, ...]
    playoff_roster: tuple[RobotId, ...]

    @property
    def num_robots(self) -> int:
        return len(self.roster)

    @property
    def num_qual_matches(self) -> int:
        return len(self.qual_matches)

    def robot(self, key: str) -> RobotId:
        robot = self._by_key().get(key)
        if robot is None:
            from .errors import UnknownRobot

            raise UnknownRobot(key)
        return robot

    def _by_key(self) -> dict[str, RobotId]:
        # Cached on first use; the dataclass is frozen so this is safe.
        cache = getattr(self, "_key_cache", None)
        if cache is None:
            cache = {r.key: r for r in self.roster}
            object.__setattr__(self, "_key_cache", cache)
        return cache

    def rating_of(self, robot: RobotId) -> float:
        return self.frc_ratings[robot.index]


def _as_alliance(
    keys: Iterable[str], match_no: int, side: str, by_key: Mapping[str, RobotId]
) -> frozenset[RobotId]:
    keys = list(keys)
    if len(keys) != ALLIANCE_SIZE or len(set(keys)) != ALLIANCE_SIZE:
        raise MalformedAlliance(
            match_no, f"{side} alliance has {len(set(keys))} distinct robots, expected 3"
        )
    robots = []
    for key in keys:
        robot = by_key.get(str(key))
        if robot is None:
            raise UnknownRobotInMatch(match_no, str(key))
        robots.append(robot)
    return frozenset(robots)


def _validate_match(raw: Mapping, stage: Stage, by_key: Mapping[str, RobotId]) -> MatchRecord:
    match_no = int(raw["match_no"])
    if match_no < 1:
        raise ValidationFailed(f"match_no {match_no} must be >= 1")
    blue = _as_alliance(raw["blue"], match_no, "blue", by_key)
    red = _as_alliance(raw["red"], match_no, "red", by_key)
    if blue & red:
        overlap = sorted(r.key for r in blue & red)
        raise MalformedAlliance(match_no, f"robots {overlap} appear on both alliances")
    blue_score = int(raw["blue_score"])
    red_score = int(raw["red_score"])
    for score in (blue_score, red_score):
        if score < 0:
            raise NegativeScore(match_no, score)
    return MatchRecord(match_no, stage, blue, red, blue_score, red_score)


def _match_to_raw(match: MatchRecord) -> dict:
    return {
        "match_no": match.match_no,
        "stage": match.stage.value,
        "blue": [r.key for r in match.blue_sorted()],
        "red": [r.key for r in match.red_sorted()],
        "blue_score": match.blue_score,
        "red_score": match.red_score,
    }


def snapshot_to_raw(snapshot: DivisionSnapshot) -> dict:
    """The plain-dict form of a snapshot, as stored in snapshot files."""
    return {
        "division_key": snapshot.division_key,
        "roster": [r.key for r in snapshot.roster],
        "frc_ratings": {r.key: snapshot.frc_ratings[r.index] for r in snapshot.roster},
        "qual_matches": [_match_to_raw(m) for m in snapshot.qual_matches],
        "playoff_matches": [_match_to_raw(m) for m in snapshot.playoff_matches],
        "playoff_roster": [r.key for r in snapshot.playoff_roster],
    }


def validate_snapshot(raw: Mapping | DivisionSnapshot) -> DivisionSnapshot:
    """Build a validated :class:`DivisionSnapshot` from a raw record.

    Accepts either a plain mapping (the snapshot-file payload) or an
    existing snapshot, which is re-validated; validation is idempotent.
    Robots are indexed by roster order, matches are sorted by ``match_no``
    within each stage, and every invariant of the data model is enforced.

    Raises
    ------
    DuplicateRobot, MalformedAlliance, UnknownRobotInMatch, NegativeScore,
    DuplicateMatchNo, ValidationFailed
    """
    if isinstance(raw, DivisionSnapshot):
        raw = snapshot_to_raw(raw)

    roster_keys = [str(k) for k in raw["roster"]]
    seen: set[str] = set()
    for key in roster_keys:
        if key in seen:
            raise DuplicateRobot(key)
        seen.add(key)
    roster = tuple(RobotId(i, key) for i, key in enumerate(roster_keys))
    by_key = {r.key: r for r in roster}

    ratings_raw = raw["frc_ratings"]
    ratings = []
    for robot in roster:
        if robot.key not in ratings_raw:
            raise ValidationFailed(f"frc_ratings missing robot {robot.key!r}")
        value = float(ratings_raw[robot.key])
        if not math.isfinite(value):
            raise ValidationFailed(f"frc_ratings for {robot.key!r} is not finite")
        ratings.append(value)

    def validate_stage(entries: Sequence[Mapping], stage: Stage) -> tuple[MatchRecord, ...]:
        matches = [_validate_match(entry, stage, by_key) for entry in entries]
        numbers: set[int] = set()
        for match in matches:
            if match.match_no in numbers:
                raise DuplicateMatchNo(match.match_no, stage.value)
            numbers.add(match.match_no)
        return tuple(sorted(matches, key=lambda m: m.match_no))

    qual = validate_stage(raw["qual_matches"], Stage.QUALIFICATION)
    playoff = validate_stage(raw.get("playoff_matches", []), Stage.PLAYOFF)

    playoff_keys = [str(k) for k in raw.get("playoff_roster", [])]
    playoff_roster = []
    seen_po: set[str] = set()
    for key in playoff_keys:
        if key not in by_key:
            raise ValidationFailed(f"playoff_roster robot {key!r} is not in the roster")
        if key in seen_po:
            raise DuplicateRobot(key)
        seen_po.add(key)
        playoff_roster.append(by_key[key])

    return DivisionSnapshot(
        division_key=str(raw["division_key"]),
        roster=roster,
        qual_matches=qual,
        playoff_matches=playoff,
        frc_ratings=tuple(ratings),
        playoff_roster=tuple(playoff_roster),
    )
