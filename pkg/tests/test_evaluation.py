import numpy as np
import pytest

from frcstrength.design import build_design, collapse_design, match_count, singleton_assignment
from frcstrength.domain import ModelKind
from frcstrength.errors import EmptyPlayoff, InsufficientMatches, LengthMismatch
from frcstrength.estimators import fit_model
from frcstrength.evaluation import (
    agreement_report,
    model_top_ranking,
    playoff_metrics,
    precision_recall,
    rank_correlation,
    stability_suite,
)
from frcstrength.selection import empirical_cdf, method1

from synth import cluster_strengths, synthetic_snapshot


class TestRankCorrelation:
    def test_identical_strict_orders(self):
        a = np.array([3.0, 1.0, 2.0, 5.0])
        assert rank_correlation(a, a * 7 + 2) == 1.0

    def test_reversed_orders(self):
        a = np.array([3.0, 1.0, 2.0, 5.0])
        assert rank_correlation(a, -a) == 0.0

    def test_constant_second_argument(self):
        a = np.array([3.0, 1.0, 2.0, 5.0])
        assert rank_correlation(a, np.zeros(4)) == 0.5

    def test_invariant_under_increasing_transforms(self):
        rng = np.random.default_rng(71)
        a = rng.normal(size=15)
        b = rng.normal(size=15)
        base = rank_correlation(a, b)
        assert rank_correlation(np.exp(a), b) == base
        assert rank_correlation(a, b**3) == base
        assert rank_correlation(2 * a + 5, np.arctan(b)) == base

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rank_correlation(np.zeros(3), np.zeros(4))


class TestPrecisionRecall:
    def test_identical_sets(self):
        top = [f"r{i}" for i in range(8)]
        assert precision_recall(set(top), top, 8) == (1.0, 1.0)

    def test_disjoint_sets(self):
        top = {f"r{i}" for i in range(8)}
        model = [f"x{i}" for i in range(8)]
        assert precision_recall(top, model, 8) == (0.0, 0.0)

    def test_wide_ranking_contains_all(self):
        top = {f"r{i}" for i in range(8)}
        model = [f"x{i}" for i in range(8)] + [f"r{i}" for i in range(8)]
        pr, re = precision_recall(top, model, 16)
        assert (pr, re) == (0.5, 1.0)

    def test_identity_on_random_sets(self):
        rng = np.random.default_rng(72)
        names = [f"r{i}" for i in range(30)]
        for _ in range(50):
            top = set(rng.choice(names, size=8, replace=False))
            ranking = list(rng.permutation(names))
            for n in (4, 8, 16, 30):
                pr, re = precision_recall(top, ranking, n)
                assert re == pytest.approx(pr * n / 8)


class TestModelTopRanking:
    def test_strict_sort(self):
        rng = np.random.default_rng(73)
        snapshot = synthetic_snapshot(rng.uniform(5, 30, size=12), rounds=4, rng=rng)
        beta = np.arange(12, dtype=float)
        ranking = model_top_ranking(snapshot, beta)
        assert [r.index for r in ranking] == list(range(11, -1, -1))

    def test_tie_break_by_official_rating(self):
        rng = np.random.default_rng(74)
        strengths = np.concatenate([np.full(10, 20.0), [5.0, 4.0]])
        snapshot = synthetic_snapshot(strengths, rounds=4, rng=rng, rating_noise_sd=1.0)
        beta = np.where(np.arange(12) < 10, 7.0, 1.0)
        ranking = model_top_ranking(snapshot, beta)
        tied = ranking[:10]
        ratings = [snapshot.frc_ratings[r.index] for r in tied]
        assert ratings == sorted(ratings, reverse=True)

    def test_all_equal_follows_rating_order(self):
        rng = np.random.default_rng(75)
        snapshot = synthetic_snapshot(rng.uniform(5, 30, size=12), rounds=4, rng=rng)
        ranking = model_top_ranking(snapshot, np.zeros(12))
        ratings = [snapshot.frc_ratings[r.index] for r in ranking]
        assert ratings == sorted(ratings, reverse=True)


class TestPlayoffMetrics:
    def make_fitted(self, snapshot, kind=ModelKind.OPR):
        design = build_design(snapshot, kind)
        k = snapshot.num_robots
        return fit_model(collapse_design(design, singleton_assignment(k), k))

    def test_exact_reproduction_gets_full_credit(self):
        strengths = np.array([12.0, 5.0, 9.0, 20.0, 3.0, 7.0] + [11.0, 16.0, 2.0, 18.0, 6.0, 13.0])
        snapshot = synthetic_snapshot(
            strengths, rounds=6, rng=np.random.default_rng(76), playoff_matches=6
        )
        fit = self.make_fitted(snapshot)
        cdf = empirical_cdf(fit.residuals)
        pr, mspe = playoff_metrics(snapshot, fit, cdf)
        ties = sum(1 for m in snapshot.playoff_matches if m.margin == 0)
        expected_pr = (len(snapshot.playoff_matches) - ties + 0.5 * ties) / len(
            snapshot.playoff_matches
        )
        assert pr == expected_pr
        assert mspe <= 1e-16

    def test_playoff_copy_of_qualification_matches_in_sample_rate(self):
        rng = np.random.default_rng(77)
        strengths = rng.uniform(5, 30, size=12)
        snapshot = synthetic_snapshot(strengths, rounds=8, noise_sd=6, rng=rng)
        playoff_copy = [
            {
                "match_no": i + 1,
                "stage": "playoff",
                "blue": [r.key for r in m.blue_sorted()],
                "red": [r.key for r in m.red_sorted()],
                "blue_score": m.blue_score,
                "red_score": m.red_score,
            }
            for i, m in enumerate(snapshot.qual_matches)
        ]
        from frcstrength.domain import snapshot_to_raw, validate_snapshot

        raw = snapshot_to_raw(snapshot)
        raw["playoff_matches"] = playoff_copy
        raw["playoff_roster"] = raw["roster"]
        snapshot = validate_snapshot(raw)
        fit = self.make_fitted(snapshot)
        cdf = empirical_cdf(fit.residuals)
        pr, _ = playoff_metrics(snapshot, fit, cdf)
        # In-sample rate computed directly from the full-fit predictions.
        credits = []
        for match in snapshot.qual_matches:
            pred = sum(fit.beta_tilde[r.index] for r in match.red) - sum(
                fit.beta_tilde[r.index] for r in match.blue
            )
            count = np.sum(fit.residuals <= -pred)
            product = np.sign(match.margin) * np.sign(cdf.size - 2 * count)
            credits.append(1.0 if product > 0 else (0.5 if product == 0 else 0.0))
        assert pr == pytest.approx(np.mean(credits))

    def test_tied_playoff_score_gets_half(self):
        strengths = np.full(12, 10.0)
        snapshot = synthetic_snapshot(
            strengths, rounds=6, rng=np.random.default_rng(78), playoff_matches=4
        )
        assert all(m.margin == 0 for m in snapshot.playoff_matches)
        fit = self.make_fitted(snapshot, ModelKind.WMPR)
        cdf = empirical_cdf(fit.residuals)
        pr, _ = playoff_metrics(snapshot, fit, cdf)
        assert pr == 0.5

    def test_empty_playoff(self):
        snapshot = synthetic_snapshot(
            np.full(12, 10.0), rounds=6, rng=np.random.default_rng(79)
        )
        fit = self.make_fitted(snapshot)
        with pytest.raises(EmptyPlayoff):
            playoff_metrics(snapshot, fit, empirical_cdf(fit.residuals))


class TestAgreementReport:
    def test_perfect_agreement(self):
        rng = np.random.default_rng(80)
        strengths = np.linspace(30, 5, 16)  # strictly decreasing, rank = index + 1
        snapshot = synthetic_snapshot(strengths, rounds=6, rng=rng, playoff_size=16)
        report = agreement_report(snapshot, strengths)
        assert report.rc_all == 1.0
        assert report.rc_playoff == 1.0
        assert report.rc_top8 == 1.0
        assert report.precision_at[8] == 1.0 and report.recall_at[8] == 1.0
        assert report.precision_at[16] == 0.5 and report.recall_at[16] == 1.0

    def test_identity_between_recall_and_precision(self):
        rng = np.random.default_rng(81)
        strengths = rng.uniform(5, 30, size=16)
        snapshot = synthetic_snapshot(
            strengths, rounds=6, rng=rng, rating_noise_sd=6.0, playoff_size=16
        )
        beta = rng.normal(size=16)
        report = agreement_report(snapshot, beta)
        for n in (8, 16):
            assert report.recall_at[n] == pytest.approx(report.precision_at[n] * n / 8)
            assert 0.0 <= report.rc_all <= 1.0


class TestStabilitySuite:
    def test_final_row_matches_full_data_report(self):
        rng = np.random.default_rng(82)
        strengths = cluster_strengths([6, 6], [50.0, 10.0])
        snapshot = synthetic_snapshot(strengths, rounds=8, noise_sd=6, rng=rng)
        assert snapshot.num_qual_matches == match_count(12, 8)
        report = stability_suite(snapshot, ModelKind.OPR, "method1", "pr")
        result = method1(snapshot, ModelKind.OPR, "pr")
        final = report.rows[-1]
        assert final.rounds == 8
        assert final.num_matches == snapshot.num_qual_matches
        assert final.value == result.report.entry(result.c_hat).pr  # bit-for-bit

    def test_row_and_rc_counts(self):
        rng = np.random.default_rng(83)
        snapshot = synthetic_snapshot(
            cluster_strengths([6, 6], [50.0, 10.0]), rounds=10, noise_sd=6, rng=rng
        )
        report = stability_suite(snapshot, ModelKind.OPR, "method1", "pr")
        assert [row.rounds for row in report.rows] == [6, 7, 8, 9, 10]
        assert [r for r, _ in report.rc_rows] == [6, 7, 8, 9]
        assert len(report.rc_top8_rows) == 4

    def test_zero_noise_consecutive_rc_is_one(self):
        # Distinct strengths under the plain per-robot model: every prefix
        # recovers the same strict ordering exactly.
        strengths = np.array(
            [31.0, 5.0, 17.0, 42.0, 9.0, 24.0, 13.0, 37.0, 20.0, 7.0, 28.0, 11.0]
        )
        snapshot = synthetic_snapshot(strengths, rounds=8, rng=np.random.default_rng(84))
        report = stability_suite(snapshot, ModelKind.OPR, "full", "pr")
        assert report.c_hat == 12
        assert all(value == 1.0 for _, value in report.rc_rows)
        assert all(value == 1.0 for _, value in report.rc_top8_rows)

    def test_zero_noise_clustered_rc_constant_with_tie_credit(self):
        # A clustered fit duplicates strengths within clusters, so identical
        # vectors score 1 minus half the tied-pair fraction, constant per level.
        strengths = cluster_strengths([6, 6], [50.0, 10.0])
        snapshot = synthetic_snapshot(
            strengths, rounds=8, rng=np.random.default_rng(84), forbid_tied_margins=True
        )
        report = stability_suite(snapshot, ModelKind.OPR, "method1", "pr")
        assert report.c_hat == 2
        tied_pairs = 2 * 6 * 5
        expected = (132 - tied_pairs + 0.5 * tied_pairs) / 132
        assert all(value == expected for _, value in report.rc_rows)

    def test_rc_matches_independent_recomputation(self):
        rng = np.random.default_rng(85)
        snapshot = synthetic_snapshot(
            rng.uniform(5, 30, size=12), rounds=8, noise_sd=6, rng=rng
        )
        report = stability_suite(snapshot, ModelKind.WMPR, "method1", "pr")
        result = method1(snapshot, ModelKind.WMPR, "pr")
        for rounds, value in report.rc_rows:
            betas = []
            for r in (rounds, rounds + 1):
                prefix = snapshot.qual_matches[: match_count(12, r)]
                design = build_design(snapshot, ModelKind.WMPR, prefix)
                fit = fit_model(collapse_design(design, result.assignment, result.c_hat))
                betas.append(fit.beta_tilde)
            assert value == rank_correlation(betas[0], betas[1])

    def test_insufficient_matches(self):
        rng = np.random.default_rng(86)
        snapshot = synthetic_snapshot(rng.uniform(5, 30, size=12), rounds=4, rng=rng)
        with pytest.raises(InsufficientMatches):
            stability_suite(snapshot, ModelKind.OPR, "method1", "pr")
