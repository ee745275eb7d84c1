"""Snapshot files, CSV import, and The Blue Alliance API client.

Snapshot files are single self-describing JSON documents (schema_version 1)
written canonically so that fixtures diff cleanly and identical inputs
produce identical bytes.  Network access happens only in
:func:`fetch_division`; everything else works offline.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Mapping

from .domain import DivisionSnapshot, snapshot_to_raw, validate_snapshot
from .errors import (
    AuthFailed,
    DuplicateMatchNo,
    EventNotFound,
    ParseError,
    RateLimited,
    SchemaDrift,
    SchemaVersionMismatch,
    SnapshotIoError,
)

SCHEMA_VERSION = 1
TBA_BASE_URL = "https://www.thebluealliance.com/api/v3"
AUTH_HEADER = "X-TBA-Auth-Key"
MAX_ATTEMPTS = 3
BACKOFF_SECONDS = 0.5

# (status, headers, parsed JSON body)
HttpGet = Callable[[str, Mapping[str, str]], tuple[int, Mapping[str, str], object]]


@dataclass(eq=False)
class SnapshotFile:
    """A snapshot plus its file-level envelope."""

    snapshot: DivisionSnapshot
    fetched_at: str | None = None
    rankings_raw: list | None = None

    def to_payload(self) -> dict:
        payload: dict = {"schema_version": SCHEMA_VERSION}
        payload["division_key"] = self.snapshot.division_key
        payload["fetched_at"] = self.fetched_at
        raw = snapshot_to_raw(self.snapshot)
        for field in ("roster", "frc_ratings", "qual_matches", "playoff_matches", "playoff_roster"):
            payload[field] = raw[field]
        payload["rankings_raw"] = self.rankings_raw
        return payload


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def snapshot_digest(snapshot: DivisionSnapshot) -> str:
    """Stable content hash of the domain payload (envelope fields excluded)."""
    raw = snapshot_to_raw(snapshot)
    blob = json.dumps(raw, sort_keys=True, ensure_ascii=False).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_snapshot(snapshot: DivisionSnapshot | SnapshotFile, path: str | os.PathLike) -> None:
    """Write a snapshot file atomically (temp file + rename)."""
    if isinstance(snapshot, DivisionSnapshot):
        snapshot = SnapshotFile(snapshot=snapshot)
    text = canonical_json(snapshot.to_payload())
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
    os.replace(tmp, path)


def load_snapshot(path: str | os.PathLike) -> DivisionSnapshot:
    """Load and validate a snapshot file.

    Raises :class:`SnapshotIoError` (with the byte offset for decode
    failures) and :class:`SchemaVersionMismatch` for unsupported versions;
    domain validation errors propagate as-is.
    """
    path = os.fspath(path)
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise SnapshotIoError(f"cannot read {path}: {exc}") from exc
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotIoError(
            f"{path} is not valid JSON at byte offset {exc.pos}: {exc.msg}", offset=exc.pos
        ) from exc
    if not isinstance(payload, dict):
        raise SnapshotIoError(f"{path} does not contain a JSON object")
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(version, SCHEMA_VERSION)
    return validate_snapshot(payload)


# --- CSV import ----------------------------------------------------------

MATCH_COLUMNS = (
    "match_no",
    "stage",
    "blue1",
    "blue2",
    "blue3",
    "red1",
    "red2",
    "red3",
    "blue_score",
    "red_score",
)
RANKING_COLUMNS = ("team", "rank")


def _parse_int(value: str, row: int, column: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ParseError(row, column, f"expected an integer, got {value!r}") from None


def import_csv(
    matches_path: str | os.PathLike,
    rankings_path: str | os.PathLike,
    division_key: str = "csv-import",
) -> DivisionSnapshot:
    """Build a validated snapshot from local match and ranking CSV files."""
    with open(rankings_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(RANKING_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(0, ",".join(sorted(missing)), "missing rankings column(s)")
        ranked: list[tuple[int, str]] = []
        for row_no, row in enumerate(reader, start=2):
            rank = _parse_int(row["rank"], row_no, "rank")
            ranked.append((rank, row["team"].strip()))
    ranked.sort(key=lambda pair: pair[0])
    roster = [team for _, team in ranked]
    ratings = {team: -float(rank) for rank, team in ranked}

    qual: list[dict] = []
    playoff: list[dict] = []
    seen: dict[str, set[int]] = {"qualification": set(), "playoff": set()}
    with open(matches_path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.DictReader(handle)
        missing = set(MATCH_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ParseError(0, ",".join(sorted(missing)), "missing matches column(s)")
        for row_no, row in enumerate(reader, start=2):
            stage = row["stage"].strip().lower()
            if stage not in ("qualification", "playoff"):
                raise ParseError(row_no, "stage", f"unknown stage {row['stage']!r}")
            match_no = _parse_int(row["match_no"], row_no, "match_no")
            if match_no in seen[stage]:
                raise DuplicateMatchNo(match_no, stage)
            seen[stage].add(match_no)
            record = {
                "match_no": match_no,
                "stage": stage,
                "blue": [row["blue1"].strip(), row["blue2"].strip(), row["blue3"].strip()],
                "red": [row["red1"].strip(), row["red2"].strip(), row["red3"].strip()],
                "blue_score": _parse_int(row["blue_score"], row_no, "blue_score"),
                "red_score": _parse_int(row["red_score"], row_no, "red_score"),
            }
            (qual if stage == "qualification" else playoff).append(record)

    return validate_snapshot(
        {
            "division_key": division_key,
            "roster": roster,
            "frc_ratings": ratings,
            "qual_matches": qual,
            "playoff_matches": playoff,
            "playoff_roster": [],
        }
    )


# --- The Blue Alliance API -----------------------------------------------


def _default_http_get(url: str, headers: Mapping[str, str]):
    import requests

    response = requests.get(url, headers=dict(headers), timeout=30)
    try:
        body = response.json()
    except ValueError:
        body = None
    return response.status_code, response.headers, body


def _get_with_retries(http_get: HttpGet, url: str, headers: Mapping[str, str], sleep) -> object:
    last_exc: Exception | None = None
    for attempt in range(MAX_ATTEMPTS):
        status, resp_headers, body = http_get(url, headers)
        if status == 200:
            return body
        if status == 401:
            raise AuthFailed(f"authentication rejected for {url}")
        if status == 404:
            raise EventNotFound(url.rsplit("/event/", 1)[-1].split("/", 1)[0])
        if status == 429 or 500 <= status < 600:
            retry_after = None
            try:
                retry_after = float(resp_headers.get("Retry-After", ""))
            except (TypeError, ValueError):
                pass
            last_exc = RateLimited(retry_after) if status == 429 else SchemaDrift(
                f"upstream error {status} for {url}"
            )
            if attempt + 1 < MAX_ATTEMPTS:
                sleep(retry_after if retry_after else BACKOFF_SECONDS * 2**attempt)
                continue
            raise last_exc
        raise SchemaDrift(f"unexpected status {status} for {url}")
    raise last_exc  # pragma: no cover - loop always returns or raises


_LEVEL_ORDER = {"ef": 0, "qf": 1, "sf": 2, "f": 3}


def _require(mapping, key: str, context: str):
    if not isinstance(mapping, Mapping) or key not in mapping:
        raise SchemaDrift(f"missing field {key!r} in {context}")
    return mapping[key]


def _played_score(alliance, context: str) -> int | None:
    score = _require(alliance, "score", context)
    if score is None or (isinstance(score, (int, float)) and score < 0):
        return None  # unplayed matches are reported with score -1
    return int(score)


def fetch_division(
    event_key: str,
    auth_token: str,
    http_get: HttpGet | None = None,
    now: datetime | None = None,
    sleep=time.sleep,
) -> SnapshotFile:
    """Fetch matches, rankings, and alliances for one division event.

    ``http_get`` may be injected for fixture replay; given identical
    responses and a fixed ``now`` the resulting snapshot file is
    byte-identical.  Official ranks become ratings by negation (larger is
    better); playoff matches are renumbered in bracket order; the playoff
    roster lists the eight captains first.
    """
    if not auth_token:
        raise AuthFailed("no API token supplied (set TBA_AUTH_KEY)")
    http_get = http_get or _default_http_get
    headers = {AUTH_HEADER: auth_token}

    matches = _get_with_retries(http_get, f"{TBA_BASE_URL}/event/{event_key}/matches", headers, sleep)
    rankings = _get_with_retries(http_get, f"{TBA_BASE_URL}/event/{event_key}/rankings", headers, sleep)
    alliances = _get_with_retries(http_get, f"{TBA_BASE_URL}/event/{event_key}/alliances", headers, sleep)

    if not isinstance(matches, list):
        raise SchemaDrift("matches payload is not a list")
    ranking_rows = _require(rankings, "rankings", "rankings payload")
    if not isinstance(ranking_rows, list) or not ranking_rows:
        raise SchemaDrift("rankings payload has no rankings")

    ranked = []
    for row in ranking_rows:
        ranked.append((int(_require(row, "rank", "ranking row")), str(_require(row, "team_key", "ranking row"))))
    ranked.sort(key=lambda pair: pair[0])
    roster = [team for _, team in ranked]
    ratings = {team: -float(rank) for rank, team in ranked}

    qual: list[dict] = []
    playoff_raw: list[tuple[tuple[int, int, int], dict]] = []
    for entry in matches:
        level = _require(entry, "comp_level", "match")
        alliance_block = _require(entry, "alliances", "match")
        blue = _require(alliance_block, "blue", "match alliances")
        red = _require(alliance_block, "red", "match alliances")
        blue_score = _played_score(blue, "blue alliance")
        red_score = _played_score(red, "red alliance")
        if blue_score is None or red_score is None:
            continue
        record = {
            "stage": "qualification" if level == "qm" else "playoff",
            "blue": [str(k) for k in _require(blue, "team_keys", "blue alliance")],
            "red": [str(k) for k in _require(red, "team_keys", "red alliance")],
            "blue_score": blue_score,
            "red_score": red_score,
        }
        match_number = int(_require(entry, "match_number", "match"))
        if level == "qm":
            record["match_no"] = match_number
            qual.append(record)
        else:
            if level not in _LEVEL_ORDER:
                raise SchemaDrift(f"unknown comp_level {level!r}")
            set_number = int(_require(entry, "set_number", "match"))
            playoff_raw.append(((_LEVEL_ORDER[level], set_number, match_number), record))

    playoff_raw.sort(key=lambda pair: pair[0])
    playoff = []
    for number, (_, record) in enumerate(playoff_raw, start=1):
        record["match_no"] = number
        playoff.append(record)

    if not isinstance(alliances, list):
        raise SchemaDrift("alliances payload is not a list")
    captains: list[str] = []
    later_picks: list[str] = []
    for alliance in alliances:
        picks = _require(alliance, "picks", "alliance")
        if not picks:
            raise SchemaDrift("alliance with no picks")
        captains.append(str(picks[0]))
        later_picks.extend(str(k) for k in picks[1:])
    playoff_roster = captains + later_picks

    snapshot = validate_snapshot(
        {
            "division_key": event_key,
            "roster": roster,
            "frc_ratings": ratings,
            "qual_matches": qual,
            "playoff_matches": playoff,
            "playoff_roster": playoff_roster,
        }
    )
    fetched_at = (now or datetime.now(timezone.utc)).strftime("%Y-%m-%dT%H:%M:%SZ")
    return SnapshotFile(snapshot=snapshot, fetched_at=fetched_at, rankings_raw=ranking_rows)
