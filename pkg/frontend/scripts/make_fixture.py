"""Generate a deterministic snapshot + fit fixture for the UI tests.

Builds a 24-robot division with two strength tiers, fits the clustered
margin model, and writes snapshot.json / fit.json into test/fixtures/.
"""

import pathlib
import sys

import numpy as np

from frcstrength.domain import ModelKind, validate_snapshot
from frcstrength.ingestion import save_snapshot
from frcstrength.reports import fit_report_from_result, save_report
from frcstrength.selection import method1

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures"
K = 24
ROUNDS = 8
STRENGTHS = [60.0] * 12 + [20.0] * 12


def build_schedule(rng: np.random.Generator):
    matches = []
    plays = np.zeros(K)
    while len(matches) < ROUNDS * K // 6:
        for _ in range(500):
            weights = 1.0 / (1.0 + plays - plays.min())
            weights /= weights.sum()
            chosen = rng.choice(K, size=6, replace=False, p=weights)
            blue, red = [int(i) for i in chosen[:3]], [int(i) for i in chosen[3:]]
            margin = sum(STRENGTHS[i] for i in red) - sum(STRENGTHS[i] for i in blue)
            if margin != 0:
                break
        else:
            raise RuntimeError("schedule draw failed")
        plays[blue] += 1
        plays[red] += 1
        matches.append((blue, red))
    return matches


def main() -> int:
    rng = np.random.default_rng(20180418)
    records = []
    for no, (blue, red) in enumerate(build_schedule(rng), start=1):
        records.append(
            {
                "match_no": no,
                "stage": "qualification",
                "blue": [f"frc{i}" for i in blue],
                "red": [f"frc{i}" for i in red],
                "blue_score": max(0, round(sum(STRENGTHS[i] for i in blue) + rng.normal(0, 6))),
                "red_score": max(0, round(sum(STRENGTHS[i] for i in red) + rng.normal(0, 6))),
            }
        )
    order = sorted(range(K), key=lambda i: (-STRENGTHS[i], i))
    snapshot = validate_snapshot(
        {
            "division_key": "uifixture",
            "roster": [f"frc{i}" for i in range(K)],
            "frc_ratings": {f"frc{i}": -(order.index(i) + 1) for i in range(K)},
            "qual_matches": records,
            "playoff_matches": [],
            "playoff_roster": [f"frc{i}" for i in order[:16]],
        }
    )
    result = method1(snapshot, ModelKind.WMPR, "pr")
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    save_snapshot(snapshot, OUT_DIR / "snapshot.json")
    save_report(
        fit_report_from_result(snapshot, "wmprc1", result).to_payload(),
        OUT_DIR / "fit.json",
    )
    print(f"wrote fixtures to {OUT_DIR} (c_hat={result.c_hat})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
