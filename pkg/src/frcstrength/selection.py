"""Cluster-count selection by leave-one-match-out cross-validation.

The per-match deletion estimates are computed in closed form from
hat-matrix entries rather than by refitting:

* OPR deletes the two rows of a match (blue and red).  With the 2x2
  leverage block H of those rows and their residuals e, the coefficient
  update is  beta - (X^T X)^{-1} X_S^T (I - H)^{-1} e,  expanded explicitly
  below so the determinant guard is visible.
* WMPR deletes a single margin row; the update is the classic
  Sherman-Morrison one-row downdate on the constrained design.

The held-out win probability uses the empirical CDF of the remaining M-1
margin residuals recomputed under the deleted-match coefficients.  Tie
handling is exact: both the realized margin sign and the "probability
equals one half" comparison are evaluated in integer arithmetic, and each
contributes the same half credit to the prediction rate.

Two end-to-end procedures choose the cluster count.  Both start from the
full least-squares fit; the first clusters it once and re-cuts the
hierarchy at every count, the second re-clusters the refitted strengths one
merge at a time.  The optimal count maximizes the estimated prediction rate
or minimizes the estimated mean squared prediction error, ties broken
toward fewer clusters.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .clustering import centroid_hierarchy, closest_pair, cluster_centroids, merge_centroids, canonical_labels
from .design import build_design, collapse_design, singleton_assignment
from .domain import DivisionSnapshot, ModelKind, RobotId
from .errors import FitError, InvalidArgument, LeverageSingular, UnknownRobot
from .estimators import FittedModel, fit_model

LEVERAGE_TOL = 1e-10

Criterion = Literal["pr", "mspe"]


@dataclass(eq=False)
class EmpiricalCdf:
    """Step-function CDF of fit residuals: F(v) = #{e <= v} / M."""

    sorted_residuals: np.ndarray

    @classmethod
    def from_residuals(cls, residuals: np.ndarray) -> "EmpiricalCdf":
        residuals = np.asarray(residuals, dtype=float)
        if residuals.ndim != 1 or residuals.size < 1:
            raise InvalidArgument("need at least one residual")
        return cls(np.sort(residuals))

    @property
    def size(self) -> int:
        return self.sorted_residuals.shape[0]

    def count_leq(self, v: float) -> int:
        return int(np.searchsorted(self.sorted_residuals, v, side="right"))

    def value(self, v: float) -> float:
        return self.count_leq(v) / self.size


def empirical_cdf(residuals: np.ndarray) -> EmpiricalCdf:
    return EmpiricalCdf.from_residuals(residuals)


def _margin_statistic(
    beta_tilde: np.ndarray, blue: Sequence[RobotId], red: Sequence[RobotId]
) -> float:
    k = beta_tilde.shape[0]
    ids = list(blue) + list(red)
    if len(ids) != 6 or len({r.index for r in ids}) != 6:
        raise InvalidArgument("need six distinct robots, three per alliance")
    for robot in ids:
        if not 0 <= robot.index < k:
            raise UnknownRobot(robot.key)
    return float(
        sum(beta_tilde[r.index] for r in red) - sum(beta_tilde[r.index] for r in blue)
    )


def win_probability(
    beta_tilde: np.ndarray,
    cdf: EmpiricalCdf,
    blue: Sequence[RobotId],
    red: Sequence[RobotId],
) -> float:
    """Probability that red beats blue: 1 - F(-margin statistic).

    Red is predicted to win exactly when the returned value exceeds 0.5.
    """
    m = _margin_statistic(beta_tilde, blue, red)
    return 1.0 - cdf.value(-m)


def predict_win_prob(
    fit: FittedModel, cdf: EmpiricalCdf, blue: Sequence[RobotId], red: Sequence[RobotId]
) -> float:
    """:func:`win_probability` for a fitted model."""
    return win_probability(fit.beta_tilde, cdf, blue, red)


@dataclass(eq=False)
class LooStep:
    """Closed-form deletion estimate for one match."""

    beta_c: np.ndarray
    margin_pred: float


def loo_fit_opr(fit: FittedModel, s: int) -> LooStep:
    """Delete match ``s`` (both its rows) from an OPR fit, in closed form.

    Raises :class:`LeverageSingular` when the 2x2 deletion determinant falls
    below tolerance, meaning the match is pivotal for identifiability.
    """
    design = fit.design
    solution = fit.solution
    assert design is not None and solution is not None and fit.residual_rows is not None
    m = design.num_matches
    i1, i2 = s, m + s
    h11 = solution.leverage(i1, i1)
    h22 = solution.leverage(i2, i2)
    h12 = solution.leverage(i2, i1)
    det = (1.0 - h11) * (1.0 - h22) - h12 * h12
    if det <= LEVERAGE_TOL:
        raise LeverageSingular(s)
    e1 = fit.residual_rows[i1]
    e2 = fit.residual_rows[i2]
    a = (1.0 - h22) * e1 + h12 * e2
    b = (1.0 - h11) * e2 + h12 * e1
    delta = (solution.gram_inv_row(i1) * a + solution.gram_inv_row(i2) * b) / det
    beta_minus = fit.beta_c - delta
    margin_pred = float((design.x_c[i2] - design.x_c[i1]) @ beta_minus)
    return LooStep(beta_c=beta_minus, margin_pred=margin_pred)


def loo_fit_wmpr(fit: FittedModel, s: int) -> LooStep:
    """Delete match ``s`` from a constrained WMPR fit, in closed form."""
    design = fit.design
    assert design is not None
    if fit.c == 1:
        return LooStep(beta_c=fit.beta_c.copy(), margin_pred=0.0)
    solution = fit.solution
    assert solution is not None and design.x_bar is not None
    h = solution.leverage(s, s)
    if 1.0 - h <= LEVERAGE_TOL:
        raise LeverageSingular(s)
    e = fit.residuals[s]
    beta_star_minus = fit.beta_star - solution.gram_inv_row(s) * (e / (1.0 - h))
    margin_pred = float(design.x_bar[s] @ fit.beta_star - h * e / (1.0 - h))

    sizes = design.cluster_sizes
    labels = design.x_bar_labels
    drop = design.constrained_drop
    assert labels is not None and drop is not None
    beta_minus = np.empty(fit.c)
    weighted = 0.0
    for pos, label in enumerate(labels):
        beta_minus[label - 1] = beta_star_minus[pos]
        weighted += sizes[label - 1] * beta_star_minus[pos]
    beta_minus[drop - 1] = -weighted / sizes[drop - 1]
    return LooStep(beta_c=beta_minus, margin_pred=margin_pred)


def loo_step(fit: FittedModel, s: int) -> LooStep:
    if fit.kind is ModelKind.OPR:
        return loo_fit_opr(fit, s)
    return loo_fit_wmpr(fit, s)


def _sign(x: int | float) -> int:
    return (x > 0) - (x < 0)


@dataclass(eq=False)
class CvOutcome:
    """Cross-validation summary for one cluster count."""

    pr: float
    mspe: float | None
    n_mspe_excluded: int
    loo_margins: np.ndarray
    loo_probs: np.ndarray


def cross_validate(fit: FittedModel) -> CvOutcome:
    """Leave-one-match-out prediction rate and MSPE for a fitted model.

    A pivotal (leverage-singular) match cannot be scored: it contributes
    the half tie credit to the prediction rate and is excluded from the
    MSPE with a warning.
    """
    design = fit.design
    assert design is not None
    m = design.num_matches
    margin_x = design.margin_x_c
    margin_y = design.base.margin_y
    actual_margins = np.array([match.margin for match in design.base.matches], dtype=int)

    credits = np.empty(m)
    loo_margins = np.full(m, np.nan)
    loo_probs = np.full(m, np.nan)
    sq_errors = []
    excluded = 0

    for s in range(m):
        try:
            step = loo_step(fit, s)
        except LeverageSingular:
            excluded += 1
            credits[s] = 0.5
            continue
        held_out = margin_y - margin_x @ step.beta_c
        held_out = np.delete(held_out, s)
        count = int(np.searchsorted(np.sort(held_out), -step.margin_pred, side="right"))
        # p - 0.5 has the sign of (M-1) - 2*count; integers keep ties exact.
        sign_pred = _sign((m - 1) - 2 * count)
        sign_actual = _sign(int(actual_margins[s]))
        product = sign_actual * sign_pred
        credits[s] = 1.0 if product > 0 else (0.5 if product == 0 else 0.0)
        loo_margins[s] = step.margin_pred
        loo_probs[s] = 1.0 - count / (m - 1) if m > 1 else float("nan")
        sq_errors.append((float(actual_margins[s]) - step.margin_pred) ** 2)

    if excluded:
        warnings.warn(
            f"{excluded} pivotal match(es) excluded from the MSPE and scored as ties",
            RuntimeWarning,
            stacklevel=2,
        )
    mspe = float(np.mean(sq_errors)) if sq_errors else None
    return CvOutcome(
        pr=float(np.mean(credits)),
        mspe=mspe,
        n_mspe_excluded=excluded,
        loo_margins=loo_margins,
        loo_probs=loo_probs,
    )


def cv_prediction_rate(
    snapshot: DivisionSnapshot, kind: ModelKind, assignment: np.ndarray, c: int
) -> float:
    """PR estimate for one cluster assignment (convenience wrapper)."""
    base = build_design(snapshot, kind)
    fit = fit_model(collapse_design(base, assignment, c))
    return cross_validate(fit).pr


def cv_mspe(
    snapshot: DivisionSnapshot, kind: ModelKind, assignment: np.ndarray, c: int
) -> float | None:
    """MSPE estimate for one cluster assignment (convenience wrapper)."""
    base = build_design(snapshot, kind)
    fit = fit_model(collapse_design(base, assignment, c))
    return cross_validate(fit).mspe


@dataclass(eq=False)
class CvEntry:
    """Per-cluster-count row of a cross-validation report."""

    c: int
    pr: float | None
    mspe: float | None
    n_mspe_excluded: int = 0
    error: str | None = None


@dataclass(eq=False)
class CvReport:
    """Criterion table over cluster counts plus held-out predictions.

    ``loo_margins``/``loo_probs`` are the per-match deletion predictions at
    the chosen cluster count for the active criterion.
    """

    entries: tuple[CvEntry, ...]
    chosen_c_pr: int | None
    chosen_c_mspe: int | None
    criterion: Criterion
    loo_margins: np.ndarray | None = None
    loo_probs: np.ndarray | None = None

    def entry(self, c: int) -> CvEntry:
        for entry in self.entries:
            if entry.c == c:
                return entry
        raise InvalidArgument(f"no entry for c={c}")

    def chosen_c(self) -> int | None:
        return self.chosen_c_pr if self.criterion == "pr" else self.chosen_c_mspe


@dataclass(eq=False)
class SelectionResult:
    """Outcome of an end-to-end estimation procedure.

    ``level_assignments`` keeps the partition evaluated at every cluster
    count (refinement-nested in c for both procedures).
    """

    kind: ModelKind
    procedure: str
    criterion: Criterion
    c_hat: int
    assignment: np.ndarray
    fit: FittedModel
    report: CvReport
    level_assignments: dict[int, np.ndarray] | None = None


def _choose(entries: Sequence[CvEntry], criterion: Criterion) -> int | None:
    best_c = None
    best_value = None
    for entry in entries:  # ascending c: ties keep the smaller count
        value = entry.pr if criterion == "pr" else entry.mspe
        if value is None:
            continue
        better = (
            best_value is None
            or (criterion == "pr" and value > best_value)
            or (criterion == "mspe" and value < best_value)
        )
        if better:
            best_value = value
            best_c = entry.c
    return best_c


def _run_procedure(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    criterion: Criterion,
    procedure: str,
    matches=None,
) -> SelectionResult:
    base = build_design(snapshot, kind, matches)
    k = snapshot.num_robots
    full_fit = fit_model(collapse_design(base, singleton_assignment(k), k))

    entries: dict[int, CvEntry] = {}
    fits: dict[int, FittedModel] = {}
    outcomes: dict[int, CvOutcome] = {}
    assignments: dict[int, np.ndarray] = {k: full_fit.assignment}

    outcome = cross_validate(full_fit)
    entries[k] = CvEntry(k, outcome.pr, outcome.mspe, outcome.n_mspe_excluded)
    fits[k] = full_fit
    outcomes[k] = outcome

    if procedure == "method1":
        hierarchy = centroid_hierarchy(full_fit.beta_tilde)
        level_assignments = {c: hierarchy.assignment(c) for c in range(1, k)}

        def next_assignment(c: int) -> np.ndarray:
            return level_assignments[c]

    else:
        # Re-cluster the refitted strengths one merge at a time.  When a
        # level's fit fails the merged centroids carry forward in its place.
        state = {"centroids": None, "sizes": None, "assignment": full_fit.assignment}
        centroids, sizes = cluster_centroids(full_fit.assignment, full_fit.beta_tilde)
        state["centroids"], state["sizes"] = centroids, sizes

        def next_assignment(c: int) -> np.ndarray:
            i, j = closest_pair(state["centroids"])
            merged = np.where(state["assignment"] == j + 1, i + 1, state["assignment"])
            assignment = canonical_labels(merged)
            state["assignment"] = assignment
            state["centroids"], state["sizes"] = merge_centroids(
                state["centroids"], state["sizes"], i, j
            )
            return assignment

    for c in range(k - 1, 0, -1):
        assignment = next_assignment(c)
        assignments[c] = assignment
        try:
            fit = fit_model(collapse_design(base, assignment, c))
            outcome = cross_validate(fit)
        except FitError as exc:
            entries[c] = CvEntry(c, None, None, error=str(exc))
            continue
        entries[c] = CvEntry(c, outcome.pr, outcome.mspe, outcome.n_mspe_excluded)
        fits[c] = fit
        outcomes[c] = outcome
        if procedure == "method2":
            state["assignment"] = assignment
            state["centroids"], state["sizes"] = cluster_centroids(
                assignment, fit.beta_tilde
            )

    ordered = tuple(entries[c] for c in sorted(entries))
    chosen_pr = _choose(ordered, "pr")
    chosen_mspe = _choose(ordered, "mspe")
    c_hat = chosen_pr if criterion == "pr" else chosen_mspe
    if c_hat is None:
        raise FitError("no cluster count produced a feasible fit")
    report = CvReport(
        entries=ordered,
        chosen_c_pr=chosen_pr,
        chosen_c_mspe=chosen_mspe,
        criterion=criterion,
        loo_margins=outcomes[c_hat].loo_margins,
        loo_probs=outcomes[c_hat].loo_probs,
    )
    return SelectionResult(
        kind=kind,
        procedure=procedure,
        criterion=criterion,
        c_hat=c_hat,
        assignment=assignments[c_hat],
        fit=fits[c_hat],
        report=report,
        level_assignments=assignments,
    )


def method1(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    criterion: Criterion = "pr",
    matches=None,
) -> SelectionResult:
    """Cluster the full least-squares strengths once, evaluate every cut.

    Fits the full model, builds the centroid hierarchy of its strengths,
    then refits and cross-validates each cluster count 1..K, returning the
    criterion optimum (smallest count on ties).  Cluster counts whose fit
    fails are recorded in the report and skipped.
    """
    return _run_procedure(snapshot, kind, criterion, "method1", matches)


def method2(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    criterion: Criterion = "pr",
    matches=None,
) -> SelectionResult:
    """Descend from K clusters, re-clustering refitted strengths each level.

    At each level the two closest refitted strengths merge, the model is
    refit, and the criterion recorded; shares its first step (c=K) with
    :func:`method1`.
    """
    return _run_procedure(snapshot, kind, criterion, "method2", matches)


def fit_plain(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    criterion: Criterion = "pr",
    matches=None,
) -> SelectionResult:
    """Fit and cross-validate the unclustered model (every robot its own cluster)."""
    base = build_design(snapshot, kind, matches)
    k = snapshot.num_robots
    fit = fit_model(collapse_design(base, singleton_assignment(k), k))
    outcome = cross_validate(fit)
    entries = (CvEntry(k, outcome.pr, outcome.mspe, outcome.n_mspe_excluded),)
    report = CvReport(
        entries=entries,
        chosen_c_pr=k,
        chosen_c_mspe=k,
        criterion=criterion,
        loo_margins=outcome.loo_margins,
        loo_probs=outcome.loo_probs,
    )
    return SelectionResult(
        kind=kind,
        procedure="full",
        criterion=criterion,
        c_hat=k,
        assignment=fit.assignment,
        fit=fit,
        report=report,
    )
