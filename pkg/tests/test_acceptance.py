"""Acceptance suite: one test per release criterion, at pinned tolerances.

Each criterion prints a [PASS]/[FAIL] line (visible under ``pytest -v -s``).
Synthetic cluster-recovery divisions are *separable*: schedules avoid
matches whose alliances tie in total true strength, since dead-even
pairings are coin flips that no selection criterion can call.
"""

import os
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from frcstrength.clustering import canonical_labels
from frcstrength.design import (
    build_design,
    collapse_design,
    match_count,
    partition_count,
    singleton_assignment,
)
from frcstrength.domain import ModelKind
from frcstrength.errors import LeverageSingular, RankDeficient
from frcstrength.estimators import fit_model
from frcstrength.evaluation import precision_recall, rank_correlation, stability_suite
from frcstrength.ingestion import fetch_division, load_snapshot, save_snapshot
from frcstrength.selection import cross_validate, loo_step, method1, method2
from frcstrength.service import create_app
from frcstrength.reports import fit_report_from_result

from synth import cluster_strengths, synthetic_snapshot
from test_design import bell_triangle
from test_estimators import constrained_lse, normal_equations_lse, random_assignment
from test_ingestion import FIXED_NOW, fixture_get, tba_fixtures
from test_selection import refit_opr_without_match, refit_wmpr_without_match


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\n[FAIL] {name}")
        raise
    print(f"\n[PASS] {name}")


def test_schedule_arithmetic():
    with criterion("schedule arithmetic: Carver division figures"):
        assert match_count(68, 1) == 12
        assert match_count(68, 2) == 23
        assert match_count(68, 3) == 34
        assert match_count(68, 10) == 114


def test_partition_magnitudes():
    with criterion("partition magnitudes: Bell numbers at K=67,68"):
        for k in range(1, 21):
            assert partition_count(k) == bell_triangle(k)
        # Published magnitudes truncate the mantissa to three digits
        # (B_67 = 1.6765e69 appears as 1.67e69).
        for k, mantissa, exponent in ((67, "1.67", 69), (68, "3.66", 70)):
            digits = str(partition_count(k))
            assert len(digits) - 1 == exponent
            assert f"{digits[0]}.{digits[1:3]}" == mantissa


def test_loo_oracle_equivalence():
    with criterion("leave-one-match-out closed forms match refit oracles (50 divisions)"):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for division in range(50):
            k = int(rng.integers(8, 15))
            max_rounds = max(6, (30 * 6) // k)
            rounds = int(rng.integers(6, max_rounds + 1))
            snapshot = synthetic_snapshot(
                rng.uniform(5, 30, size=k),
                rounds=min(rounds, 30 * 6 // k),
                noise_sd=float(rng.uniform(2, 9)),
                rng=rng,
                division_key=f"loo{division}",
            )
            assert snapshot.num_qual_matches <= 30
            for kind in ModelKind:
                base = build_design(snapshot, kind)
                for c in sorted({1, 2, int(rng.integers(2, k + 1)), k}):
                    assignment = (
                        singleton_assignment(k) if c == k else random_assignment(rng, k, c)
                    )
                    try:
                        fit = fit_model(collapse_design(base, assignment, c))
                    except RankDeficient:
                        continue  # infeasible count for this draw
                    collapsed = fit.design
                    for s in range(collapsed.num_matches):
                        try:
                            step = loo_step(fit, s)
                        except LeverageSingular:
                            continue
                        if kind is ModelKind.OPR:
                            oracle = refit_opr_without_match(collapsed, s)
                        elif c == 1:
                            oracle = np.zeros(1)
                        else:
                            oracle = refit_wmpr_without_match(collapsed, s)
                        pred_oracle = float(collapsed.margin_x_c[s] @ oracle)
                        worst = max(
                            worst,
                            float(np.max(np.abs(step.beta_c - oracle))),
                            abs(step.margin_pred - pred_oracle),
                        )
        assert worst <= 1e-8, f"worst deviation {worst:.3e}"


def test_degenerate_fits():
    with criterion("degenerate fits: WMPRC c=1 zero; c=K equals plain LSEs"):
        rng = np.random.default_rng(77)
        snapshot = synthetic_snapshot(
            rng.uniform(5, 30, size=12), rounds=10, noise_sd=7, rng=rng
        )
        wmpr = build_design(snapshot, ModelKind.WMPR)
        single = fit_model(collapse_design(wmpr, np.ones(12, dtype=int), 1))
        assert np.all(single.beta_c == 0.0) and np.all(single.beta_tilde == 0.0)

        opr = build_design(snapshot, ModelKind.OPR)
        fit_o = fit_model(collapse_design(opr, singleton_assignment(12), 12))
        plain_o = normal_equations_lse(opr.x, opr.y)
        np.testing.assert_allclose(fit_o.beta_tilde, plain_o, rtol=1e-10)

        fit_w = fit_model(collapse_design(wmpr, singleton_assignment(12), 12))
        plain_w = constrained_lse(wmpr.x, wmpr.y, np.ones(12))
        np.testing.assert_allclose(fit_w.beta_tilde, plain_w, rtol=1e-10, atol=1e-12)


CLUSTER_CONFIGS = (
    ("two clusters", [6, 6], [50.0, 10.0], 10),
    ("three clusters", [4, 4, 4], [90.0, 50.0, 10.0], 12),
)


@pytest.mark.parametrize("label,sizes,values,rounds", CLUSTER_CONFIGS)
def test_cluster_recovery(label, sizes, values, rounds):
    with criterion(f"cluster recovery ({label}, 100 replications, noise 20% of gap)"):
        gap = min(b - a for a, b in zip(sorted(values), sorted(values)[1:]))
        strengths = cluster_strengths(sizes, values)
        truth = canonical_labels(np.repeat(np.arange(1, len(sizes) + 1), sizes))
        k = len(strengths)
        for kind in ModelKind:
            for run in (method1, method2):
                recovered = 0
                improved = 0
                for seed in range(100):
                    snapshot = synthetic_snapshot(
                        strengths,
                        rounds=rounds,
                        noise_sd=0.2 * gap,
                        rng=np.random.default_rng(seed),
                        forbid_tied_margins=True,
                    )
                    result = run(snapshot, kind, "pr")
                    hit = result.c_hat == len(sizes) and np.array_equal(
                        result.assignment, truth
                    )
                    recovered += hit
                    if hit:
                        pr_chosen = result.report.entry(result.c_hat).pr
                        pr_full = result.report.entry(k).pr
                        improved += pr_chosen >= pr_full
                assert recovered >= 90, f"{kind} {run.__name__}: {recovered}/100 recovered"
                assert improved >= 0.9 * recovered, (
                    f"{kind} {run.__name__}: PR(c_hat) >= PR(K) in {improved}/{recovered}"
                )


def test_live_division_directional_claim():
    data_dir = os.environ.get("FRCSTRENGTH_DATA_DIR", "data")
    snapshots = sorted(Path(data_dir).glob("*.json")) if Path(data_dir).is_dir() else []
    if not snapshots:
        pytest.skip(
            "no division snapshots available offline; fetch 2018 division events "
            "into ./data (or $FRCSTRENGTH_DATA_DIR) to run the directional check"
        )
    with criterion("live divisions: clustered PR beats unclustered PR per division"):
        for path in snapshots:
            snapshot = load_snapshot(path)
            k = snapshot.num_robots
            for kind in ModelKind:
                result = method1(snapshot, kind, "pr")
                pr_chosen = result.report.entry(result.c_hat).pr
                pr_full = result.report.entry(k).pr
                assert pr_chosen > pr_full, f"{path.name} {kind}: {pr_chosen} <= {pr_full}"


def test_metric_identities():
    with criterion("metric identities: rank correlation, precision/recall, tie branch"):
        a = np.array([4.0, 1.0, 3.0, 2.0])
        assert rank_correlation(a, 2 * a) == 1.0
        assert rank_correlation(a, -a) == 0.0
        assert rank_correlation(a, np.zeros(4)) == 0.5

        rng = np.random.default_rng(66)
        names = [f"r{i}" for i in range(40)]
        for _ in range(100):
            top = set(rng.choice(names, size=8, replace=False))
            ranking = list(rng.permutation(names))
            n = int(rng.integers(1, 41))
            pr, re = precision_recall(top, ranking, n)
            assert re == pytest.approx(pr * n / 8, abs=1e-12)

        tied = synthetic_snapshot(np.full(12, 10.0), rounds=8, rng=np.random.default_rng(67))
        assert all(m.margin == 0 for m in tied.qual_matches)
        design = build_design(tied, ModelKind.WMPR)
        fit = fit_model(collapse_design(design, singleton_assignment(12), 12))
        assert cross_validate(fit).pr == 0.5


def test_stability_self_consistency():
    with criterion("stability suite: final row bit-for-bit; zero-noise RC = 1"):
        strengths = cluster_strengths([6, 6], [50.0, 10.0])
        snapshot = synthetic_snapshot(
            strengths,
            rounds=8,
            noise_sd=5,
            rng=np.random.default_rng(68),
            forbid_tied_margins=True,
        )
        assert snapshot.num_qual_matches == match_count(12, 8)
        report = stability_suite(snapshot, ModelKind.WMPR, "method1", "pr")
        result = method1(snapshot, ModelKind.WMPR, "pr")
        assert report.rows[-1].value == result.report.entry(result.c_hat).pr

        distinct = np.array(
            [31.0, 5.0, 17.0, 42.0, 9.0, 24.0, 13.0, 37.0, 20.0, 7.0, 28.0, 11.0]
        )
        noiseless = synthetic_snapshot(distinct, rounds=8, rng=np.random.default_rng(69))
        full_report = stability_suite(noiseless, ModelKind.OPR, "full", "pr")
        assert all(value == 1.0 for _, value in full_report.rc_rows)
        assert all(value == 1.0 for _, value in full_report.rc_top8_rows)


def test_ingestion_round_trip(tmp_path):
    with criterion("ingestion: 100 round trips; byte-identical fixture fetch"):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            k = int(rng.integers(6, 24))
            snapshot = synthetic_snapshot(
                rng.uniform(0, 40, size=k),
                rounds=int(rng.integers(1, 6)),
                noise_sd=float(rng.uniform(0, 10)),
                rng=rng,
                division_key=f"rt{seed}",
                playoff_matches=int(rng.integers(0, 5)) if k >= 8 else 0,
            )
            path = tmp_path / f"s{seed}.json"
            save_snapshot(snapshot, path)
            assert load_snapshot(path) == snapshot

        fixtures = tba_fixtures()
        blobs = []
        for run in range(2):
            snapshot_file = fetch_division(
                "2018test", "token", http_get=fixture_get(fixtures), now=FIXED_NOW
            )
            path = tmp_path / f"fetch{run}.json"
            save_snapshot(snapshot_file, path)
            blobs.append(path.read_bytes())
        assert blobs[0] == blobs[1]


def test_draft_flow_secondary():
    from fastapi.testclient import TestClient

    with criterion("draft flow: scripted session consistent; /predict full precision"):
        strengths = cluster_strengths([12, 12], [60.0, 20.0])
        snapshot = synthetic_snapshot(
            strengths,
            rounds=8,
            noise_sd=6,
            rng=np.random.default_rng(70),
            rating_noise_sd=5.0,
            playoff_matches=4,
            playoff_size=16,
            forbid_tied_margins=True,
        )
        result = method1(snapshot, ModelKind.WMPR, "pr")
        fit = fit_report_from_result(snapshot, "wmprc1", result)
        client = TestClient(create_app(snapshot, fit))

        board = [e["robot"] for e in client.get("/strengths").json()["strengths"]]
        log = []
        for round_no in range(3):
            for alliance in range(1, 9):
                robot = next(r for r in board if r not in {x[0] for x in log})
                assert (
                    client.post("/draft/pick", json={"robot": robot, "alliance": alliance}).status_code
                    == 200
                )
                log.append((robot, alliance))
        undone = log.pop()
        assert client.post("/draft/undo").status_code == 200
        assert client.post("/draft/pick", json={"robot": undone[0], "alliance": 3}).status_code == 200
        log.append((undone[0], 3))

        state = client.get("/draft/state").json()
        assert state["picked"] == [r for r, _ in log]
        for alliance in range(1, 9):
            assert state["alliances"][alliance - 1] == [r for r, a in log if a == alliance]

        from frcstrength.selection import win_probability

        beta = fit.beta_tilde(snapshot)
        cdf = fit.cdf()
        rng = np.random.default_rng(3)
        for _ in range(3):
            chosen = rng.choice(snapshot.num_robots, size=6, replace=False)
            blue = [snapshot.roster[i] for i in chosen[:3]]
            red = [snapshot.roster[i] for i in chosen[3:]]
            response = client.post(
                "/predict", json={"blue": [r.key for r in blue], "red": [r.key for r in red]}
            )
            assert response.json()["p_red_win"] == win_probability(beta, cdf, blue, red)
