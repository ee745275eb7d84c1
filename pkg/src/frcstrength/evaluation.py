"""Agreement with official ratings, playoff metrics, and stability checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .design import build_design, collapse_design, match_count, rounds_completed
from .domain import DivisionSnapshot, ModelKind, RobotId
from .errors import (
    EmptyPlayoff,
    FitError,
    InsufficientMatches,
    InsufficientRanking,
    InvalidArgument,
    LengthMismatch,
    UnknownRobot,
)
from .estimators import FittedModel, fit_model
from .selection import (
    Criterion,
    EmpiricalCdf,
    _sign,
    cross_validate,
    fit_plain,
    method1,
    method2,
)

TOP_SET_SIZE = 8


def rank_correlation(a: Sequence[float], b: Sequence[float]) -> float:
    """Pairwise concordance of two ratings in [0, 1], half credit for ties.

    Over all ordered pairs i != j, counts pairs where the two ratings move
    in the same direction; a tie in either rating contributes 0.5.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"shapes {a.shape} and {b.shape} differ")
    k = a.shape[0]
    if k < 2:
        raise LengthMismatch("need at least two entries")
    sign_a = np.sign(a[:, None] - a[None, :])
    sign_b = np.sign(b[:, None] - b[None, :])
    product = sign_a * sign_b
    off = ~np.eye(k, dtype=bool)
    concordant = np.sum(product[off] > 0)
    tied = np.sum(product[off] == 0)
    return (concordant + 0.5 * tied) / (k * (k - 1))


def precision_recall(
    top_frc: set[str] | Sequence[str], model_top: Sequence[str], n: int
) -> tuple[float, float]:
    """Overlap of the official top-8 with the first ``n`` model-ranked robots."""
    if n < 1:
        raise InsufficientRanking(f"N must be >= 1, got {n}")
    if len(model_top) < n:
        raise InsufficientRanking(f"model ranking has {len(model_top)} < {n} entries")
    top_frc = set(top_frc)
    hits = len(top_frc & set(model_top[:n]))
    return hits / n, hits / TOP_SET_SIZE


def model_top_ranking(snapshot: DivisionSnapshot, beta_tilde: np.ndarray) -> list[RobotId]:
    """Roster sorted by estimated strength, best first.

    Clustered fits make exact strength ties generic, so ties break by the
    official rating (larger better), then by roster index.
    """
    if beta_tilde.shape[0] != snapshot.num_robots:
        raise LengthMismatch("beta_tilde does not match the roster")
    return sorted(
        snapshot.roster,
        key=lambda r: (-beta_tilde[r.index], -snapshot.frc_ratings[r.index], r.index),
    )


@dataclass(eq=False)
class AgreementReport:
    """Rank correlations and top-set precision/recall against FRC ratings."""

    rc_all: float
    rc_playoff: float
    rc_top8: float
    precision_at: dict[int, float]
    recall_at: dict[int, float]


def agreement_report(
    snapshot: DivisionSnapshot, beta_tilde: np.ndarray, top_n: Sequence[int] = (8, 16)
) -> AgreementReport:
    """Agreement between official ratings and estimated strengths.

    The official top-8 is the first eight robots of the playoff roster (the
    alliance captains).
    """
    if len(snapshot.playoff_roster) < TOP_SET_SIZE:
        raise InsufficientRanking(
            f"playoff roster has {len(snapshot.playoff_roster)} < {TOP_SET_SIZE} robots"
        )
    ratings = np.asarray(snapshot.frc_ratings)
    rc_all = rank_correlation(ratings, beta_tilde)

    po_idx = [r.index for r in snapshot.playoff_roster]
    rc_playoff = rank_correlation(ratings[po_idx], beta_tilde[po_idx])
    top_idx = po_idx[:TOP_SET_SIZE]
    rc_top8 = rank_correlation(ratings[top_idx], beta_tilde[top_idx])

    top_frc = {snapshot.roster[i].key for i in top_idx}
    ranking = [r.key for r in model_top_ranking(snapshot, beta_tilde)]
    precision_at: dict[int, float] = {}
    recall_at: dict[int, float] = {}
    for n in top_n:
        pr, re = precision_recall(top_frc, ranking, n)
        precision_at[n] = pr
        recall_at[n] = re
    return AgreementReport(rc_all, rc_playoff, rc_top8, precision_at, recall_at)


def playoff_metrics(
    snapshot: DivisionSnapshot, fit: FittedModel | np.ndarray, cdf: EmpiricalCdf
) -> tuple[float, float]:
    """Prediction rate and MSPE on playoff matches, qualification fit as-is.

    No retraining: margins are predicted from the qualification strengths
    with the same cluster mapping, and win calls use the qualification
    residual CDF.  ``fit`` may be a fitted model or a bare strength vector.
    """
    matches = snapshot.playoff_matches
    if not matches:
        raise EmptyPlayoff("snapshot has no playoff matches")
    beta = fit if isinstance(fit, np.ndarray) else fit.beta_tilde
    if beta.shape[0] != snapshot.num_robots:
        raise UnknownRobot("fit does not cover the snapshot roster")

    credits = []
    sq_errors = []
    m_cdf = cdf.size
    for match in matches:
        pred = float(
            sum(beta[r.index] for r in match.red) - sum(beta[r.index] for r in match.blue)
        )
        count = cdf.count_leq(-pred)
        sign_pred = _sign(m_cdf - 2 * count)
        sign_actual = _sign(match.margin)
        product = sign_actual * sign_pred
        credits.append(1.0 if product > 0 else (0.5 if product == 0 else 0.0))
        sq_errors.append((match.margin - pred) ** 2)
    return float(np.mean(credits)), float(np.mean(sq_errors))


@dataclass(eq=False)
class StabilityRow:
    """Metrics refit on the schedule prefix covering ``rounds`` plays per robot."""

    rounds: int
    num_matches: int
    value: float | None
    error: str | None = None


@dataclass(eq=False)
class StabilityReport:
    """How estimates and prediction quality evolve with schedule length.

    ``rows`` hold the cross-validated criterion per prefix; ``rc_rows`` the
    rank correlation of strengths on consecutive prefixes, and
    ``rc_top8_rows`` the same restricted to the model-based top-8 robots.
    """

    kind: ModelKind
    procedure: str
    criterion: Criterion
    c_hat: int
    rows: tuple[StabilityRow, ...]
    rc_rows: tuple[tuple[int, float | None], ...]
    rc_top8_rows: tuple[tuple[int, float | None], ...]
    beta_by_round: dict[int, np.ndarray]


MIN_STABILITY_ROUNDS = 6

Top8Mode = Literal["full", "per_level"]


def stability_suite(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    procedure: str = "method1",
    criterion: Criterion = "pr",
    top8: Top8Mode = "full",
) -> StabilityReport:
    """Refit on nested schedule prefixes with the full-data clustering fixed.

    The cluster count and assignment are estimated once on all matches;
    each prefix (6 plays per robot up to the full schedule) is then refit
    with that clustering and scored by the same cross-validation.
    ``procedure="full"`` skips clustering and tracks the plain per-robot
    model instead.  The top-8 restriction uses the robots ranked top-8 by
    the full-data fit (``top8="per_level"`` re-selects them per prefix).
    """
    runners = {"method1": method1, "method2": method2, "full": fit_plain}
    if procedure not in runners:
        raise InvalidArgument(f"unknown procedure {procedure!r}")

    k = snapshot.num_robots
    m = snapshot.num_qual_matches
    m0 = rounds_completed(k, m)
    if m0 < MIN_STABILITY_ROUNDS:
        raise InsufficientMatches(
            f"{m} matches cover only {m0} rounds; need {MIN_STABILITY_ROUNDS}"
        )
    result = runners[procedure](snapshot, kind, criterion)

    rows: list[StabilityRow] = []
    betas: dict[int, np.ndarray] = {}
    tops: dict[int, list[int]] = {}
    for rounds in range(MIN_STABILITY_ROUNDS, m0 + 1):
        m_ell = match_count(k, rounds)
        prefix = snapshot.qual_matches[:m_ell]
        try:
            base = build_design(snapshot, kind, prefix)
            fit = fit_model(collapse_design(base, result.assignment, result.c_hat))
            outcome = cross_validate(fit)
        except FitError as exc:
            rows.append(StabilityRow(rounds, m_ell, None, error=str(exc)))
            continue
        value = outcome.pr if criterion == "pr" else outcome.mspe
        rows.append(StabilityRow(rounds, m_ell, value))
        betas[rounds] = fit.beta_tilde
        if top8 == "per_level":
            ranking = model_top_ranking(snapshot, fit.beta_tilde)
            tops[rounds] = [r.index for r in ranking[:TOP_SET_SIZE]]

    full_ranking = model_top_ranking(snapshot, result.fit.beta_tilde)
    full_top8 = [r.index for r in full_ranking[:TOP_SET_SIZE]]

    rc_rows: list[tuple[int, float | None]] = []
    rc_top8_rows: list[tuple[int, float | None]] = []
    for rounds in range(MIN_STABILITY_ROUNDS, m0):
        if rounds in betas and (rounds + 1) in betas:
            rc = rank_correlation(betas[rounds], betas[rounds + 1])
            idx = tops[rounds] if top8 == "per_level" else full_top8
            rc_top = rank_correlation(betas[rounds][idx], betas[rounds + 1][idx])
            rc_rows.append((rounds, rc))
            rc_top8_rows.append((rounds, rc_top))
        else:
            rc_rows.append((rounds, None))
            rc_top8_rows.append((rounds, None))

    return StabilityReport(
        kind=kind,
        procedure=procedure,
        criterion=criterion,
        c_hat=result.c_hat,
        rows=tuple(rows),
        rc_rows=tuple(rc_rows),
        rc_top8_rows=tuple(rc_top8_rows),
        beta_by_round=betas,
    )
