"""Least-squares fitting of robot strengths, plain and clustered.

All solves go through a singular-value decomposition rather than normal
equations: the row-to-column ratios seen in real divisions are small enough
that conditioning matters.  Singular values below 1e-10 of the largest are
treated as zero and reported as a :class:`RankDeficient` error instead of
silently falling back to a pseudo-inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .design import CollapsedDesign
from .domain import DivisionSnapshot, MatchRecord, ModelKind
from .errors import RankDeficient, RobotNeverPlayed

RANK_RTOL = 1e-10


@dataclass(eq=False)
class LstsqSolution:
    """Thin-SVD least-squares solution with leverage helpers.

    Keeps the factors needed by the closed-form leave-one-match-out
    downdates: individual hat-matrix entries and rows of (X^T X)^{-1} X^T.
    """

    beta: np.ndarray
    rank: int
    u: np.ndarray  # m x r
    s: np.ndarray  # r
    v: np.ndarray  # n x r

    def leverage(self, i: int, j: int) -> float:
        """Hat-matrix entry H_ij = u_i . u_j."""
        return float(self.u[i] @ self.u[j])

    def gram_inv_row(self, i: int) -> np.ndarray:
        """(X^T X)^{-1} X_i^T for row i, via V diag(1/s) u_i."""
        return self.v @ (self.u[i] / self.s)


def solve_lstsq(x: np.ndarray, y: np.ndarray, column_labels: Sequence) -> LstsqSolution:
    """Full-column-rank least squares via SVD.

    Raises :class:`RankDeficient` naming the columns that participate in the
    numerical null space when rank < n.
    """
    m, n = x.shape
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if n == 0:
        return LstsqSolution(beta=np.zeros(0), rank=0, u=u, s=s, v=vt.T)
    tol = RANK_RTOL * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if rank < n:
        null_rows = vt[rank:]
        bad = np.flatnonzero(np.any(np.abs(null_rows) > 1e-8, axis=0))
        raise RankDeficient([column_labels[j] for j in bad])
    beta = vt.T @ ((u.T @ y) / s)
    return LstsqSolution(beta=beta, rank=rank, u=u, s=s, v=vt.T)


@dataclass(eq=False)
class FittedModel:
    """A fitted (possibly clustered) strength model.

    ``beta_c`` holds one coefficient per cluster; ``beta_tilde`` expands it
    to one strength per robot.  ``residuals`` are per-match margin
    residuals (red minus blue); for OPR the 2M per-row score residuals are
    kept as well because the match-deletion downdate needs them.
    """

    kind: ModelKind
    c: int
    assignment: np.ndarray
    beta_c: np.ndarray
    beta_tilde: np.ndarray
    residuals: np.ndarray
    sigma2_hat: float
    residual_rows: np.ndarray | None = None
    design: CollapsedDesign | None = field(default=None, repr=False)
    solution: LstsqSolution | None = field(default=None, repr=False)
    # WMPR only: reduced coefficients, their cluster labels, dropped label.
    beta_star: np.ndarray | None = field(default=None, repr=False)

    @property
    def num_matches(self) -> int:
        return self.residuals.shape[0]


def average_score(
    snapshot: DivisionSnapshot, matches: Sequence[MatchRecord] | None = None
) -> np.ndarray:
    """Per-robot average score: summed alliance scores over 3x matches played."""
    if matches is None:
        matches = snapshot.qual_matches
    totals = np.zeros(snapshot.num_robots)
    played = np.zeros(snapshot.num_robots, dtype=int)
    for match in matches:
        for robot in match.blue:
            totals[robot.index] += match.blue_score
            played[robot.index] += 1
        for robot in match.red:
            totals[robot.index] += match.red_score
            played[robot.index] += 1
    for robot in snapshot.roster:
        if played[robot.index] == 0:
            raise RobotNeverPlayed(robot.key)
    return totals / (3.0 * played)


def _expand(beta_c: np.ndarray, assignment: np.ndarray) -> np.ndarray:
    return beta_c[assignment - 1]


def _sigma2(rss: float, m_star: int, rank: int) -> float:
    dof = m_star - rank
    return rss / dof if dof > 0 else float("nan")


def fit_opr_clustered(design: CollapsedDesign) -> FittedModel:
    """Least squares on the collapsed OPR design.

    With c=K and singleton clusters this is the plain per-robot fit.  Margin
    residuals are derived from the row residuals for downstream
    cross-validation.
    """
    if design.kind is not ModelKind.OPR:
        raise ValueError("fit_opr_clustered requires an OPR design")
    labels = list(range(1, design.c + 1))
    solution = solve_lstsq(design.x_c, design.base.y, labels)
    beta_c = solution.beta
    residual_rows = design.base.y - design.x_c @ beta_c
    m = design.num_matches
    margin_residuals = residual_rows[m:] - residual_rows[:m]
    rss = float(residual_rows @ residual_rows)
    return FittedModel(
        kind=ModelKind.OPR,
        c=design.c,
        assignment=design.assignment,
        beta_c=beta_c,
        beta_tilde=_expand(beta_c, design.assignment),
        residuals=margin_residuals,
        residual_rows=residual_rows,
        sigma2_hat=_sigma2(rss, design.base.m_star, solution.rank),
        design=design,
        solution=solution,
    )


def fit_wmpr_clustered(design: CollapsedDesign) -> FittedModel:
    """Constrained least squares on the collapsed WMPR design.

    Solves the reduced system with the dropped-cluster column removed, then
    recovers the dropped coefficient from the size-weighted sum-to-zero
    constraint, so the expanded per-robot strengths always sum to zero.
    c=1 short-circuits to all-zero strengths (the margin model has no
    identifiable signal with a single cluster).
    """
    if design.kind is not ModelKind.WMPR:
        raise ValueError("fit_wmpr_clustered requires a WMPR design")
    m = design.num_matches
    y = design.base.y

    if design.c == 1:
        beta_c = np.zeros(1)
        residuals = y.copy()
        rss = float(residuals @ residuals)
        return FittedModel(
            kind=ModelKind.WMPR,
            c=1,
            assignment=design.assignment,
            beta_c=beta_c,
            beta_tilde=_expand(beta_c, design.assignment),
            residuals=residuals,
            sigma2_hat=_sigma2(rss, m, 0),
            design=design,
            solution=None,
            beta_star=np.zeros(0),
        )

    assert design.x_bar is not None and design.x_bar_labels is not None
    solution = solve_lstsq(design.x_bar, y, design.x_bar_labels)
    beta_star = solution.beta

    sizes = design.cluster_sizes
    drop = design.constrained_drop
    assert drop is not None
    weighted = sum(
        sizes[label - 1] * beta_star[pos] for pos, label in enumerate(design.x_bar_labels)
    )
    beta_c = np.empty(design.c)
    for pos, label in enumerate(design.x_bar_labels):
        beta_c[label - 1] = beta_star[pos]
    beta_c[drop - 1] = -weighted / sizes[drop - 1]

    residuals = y - design.x_bar @ beta_star
    rss = float(residuals @ residuals)
    return FittedModel(
        kind=ModelKind.WMPR,
        c=design.c,
        assignment=design.assignment,
        beta_c=beta_c,
        beta_tilde=_expand(beta_c, design.assignment),
        residuals=residuals,
        sigma2_hat=_sigma2(rss, m, solution.rank),
        design=design,
        solution=solution,
        beta_star=beta_star,
    )


def fit_model(design: CollapsedDesign) -> FittedModel:
    if design.kind is ModelKind.OPR:
        return fit_opr_clustered(design)
    return fit_wmpr_clustered(design)
