"""Schedule arithmetic and design-matrix construction.

Builds the response vector and covariate matrix for each model kind:

* OPR: 2M rows (blue scores stacked over red scores), entries 0/1, each row
  marking the three robots of one alliance.
* WMPR: M rows of margins (red minus blue), entries -1/0/+1, each row
  marking the red robots +1 and the blue robots -1; rows always sum to 0.

Cluster-collapsed designs sum the columns of robots sharing a cluster.  For
WMPR the collapsed columns still sum to zero, so a constrained design with
one column dropped is built alongside; the dropped cluster is the one
containing the highest-index robot, and its coefficient is recovered from
the size-weighted sum-to-zero constraint (the per-robot strengths, not the
per-cluster coefficients, sum to zero).  The retained columns are adjusted
by the size ratio so that the reduced regression is an exact
reparameterization of the constrained model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .domain import DivisionSnapshot, MatchRecord, ModelKind
from .errors import EmptyCluster, EmptySelection, InvalidArgument, LabelOutOfRange

ROBOTS_PER_MATCH = 6


def match_count(num_robots: int, rounds: int) -> int:
    """Matches needed so every robot plays ``rounds`` times: ceil(rounds*K/6)."""
    if num_robots < ROBOTS_PER_MATCH:
        raise InvalidArgument(f"a division needs at least 6 robots, got {num_robots}")
    if rounds < 1:
        raise InvalidArgument(f"rounds must be >= 1, got {rounds}")
    return -((-rounds * num_robots) // ROBOTS_PER_MATCH)


def rounds_completed(num_robots: int, num_matches: int) -> int:
    """Largest number of full rounds covered by ``num_matches`` matches.

    Inverse of :func:`match_count`: the largest ``m`` with
    ``match_count(num_robots, m) <= num_matches`` (0 when even one round
    does not fit).
    """
    if num_robots < ROBOTS_PER_MATCH:
        raise InvalidArgument(f"a division needs at least 6 robots, got {num_robots}")
    m = (num_matches * ROBOTS_PER_MATCH) // num_robots
    while m > 0 and match_count(num_robots, m) > num_matches:
        m -= 1
    return m


def partition_count(num_robots: int) -> int:
    """Number of candidate cluster models: all set partitions of K robots.

    Exact arbitrary-precision sum over cluster counts of the Stirling
    numbers of the second kind, i.e. the Bell number B_K.
    """
    if num_robots < 1:
        raise InvalidArgument(f"need at least one robot, got {num_robots}")
    total = 0
    for c in range(1, num_robots + 1):
        inner = sum(
            (-1) ** j * math.comb(c, j) * (c - j) ** num_robots for j in range(c + 1)
        )
        total += inner // math.factorial(c)
    return total


@dataclass(eq=False)
class DesignSystem:
    """Response vector and covariate matrix for one model kind.

    ``y`` has ``m_star`` entries (2M for OPR, M for WMPR) and ``x`` is
    ``m_star`` x K.  ``matches`` keeps the source records in row order.
    """

    kind: ModelKind
    y: np.ndarray
    x: np.ndarray
    matches: tuple[MatchRecord, ...]
    num_robots: int

    @property
    def m_star(self) -> int:
        return self.y.shape[0]

    @property
    def num_matches(self) -> int:
        return len(self.matches)

    def row_indices(self, s: int) -> tuple[int, ...]:
        """Rows of match ``s``: (s, M+s) for OPR, (s,) for WMPR."""
        if self.kind is ModelKind.OPR:
            return (s, self.num_matches + s)
        return (s,)

    @property
    def margin_y(self) -> np.ndarray:
        """Per-match margins, red minus blue."""
        if self.kind is ModelKind.OPR:
            m = self.num_matches
            return self.y[m:] - self.y[:m]
        return self.y

    @property
    def margin_x(self) -> np.ndarray:
        """Per-match margin covariates: red row minus blue row."""
        if self.kind is ModelKind.OPR:
            m = self.num_matches
            return self.x[m:] - self.x[:m]
        return self.x


@dataclass(eq=False)
class CollapsedDesign:
    """A design with robot columns summed within clusters.

    ``assignment`` maps robot index -> cluster label in 1..c.  For WMPR,
    ``x_bar`` is the constrained design with the column of
    ``constrained_drop`` removed and the remaining columns adjusted by
    -K_j/K_drop times the dropped column; ``x_bar_labels`` lists the cluster
    label of each retained column.
    """

    base: DesignSystem
    c: int
    assignment: np.ndarray
    x_c: np.ndarray
    cluster_sizes: np.ndarray
    x_bar: np.ndarray | None = None
    x_bar_labels: tuple[int, ...] | None = None
    constrained_drop: int | None = None

    @property
    def kind(self) -> ModelKind:
        return self.base.kind

    @property
    def num_matches(self) -> int:
        return self.base.num_matches

    @property
    def margin_x_c(self) -> np.ndarray:
        if self.kind is ModelKind.OPR:
            m = self.num_matches
            return self.x_c[m:] - self.x_c[:m]
        return self.x_c


def build_design(
    snapshot: DivisionSnapshot,
    kind: ModelKind,
    matches: Sequence[MatchRecord] | None = None,
) -> DesignSystem:
    """Assemble the response and covariate matrix for ``kind``.

    ``matches`` defaults to the snapshot's qualification matches; pass an
    explicit subset (e.g. a schedule prefix) to restrict the data.
    """
    if matches is None:
        matches = snapshot.qual_matches
    matches = tuple(matches)
    if not matches:
        raise EmptySelection("no matches selected")
    num_robots = snapshot.num_robots
    m = len(matches)

    blue = np.zeros((m, num_robots))
    red = np.zeros((m, num_robots))
    for s, match in enumerate(matches):
        for robot in match.blue:
            blue[s, robot.index] = 1.0
        for robot in match.red:
            red[s, robot.index] = 1.0

    blue_scores = np.array([match.blue_score for match in matches], dtype=float)
    red_scores = np.array([match.red_score for match in matches], dtype=float)

    if kind is ModelKind.OPR:
        y = np.concatenate([blue_scores, red_scores])
        x = np.vstack([blue, red])
    else:
        y = red_scores - blue_scores
        x = red - blue
    return DesignSystem(kind=kind, y=y, x=x, matches=matches, num_robots=num_robots)


def singleton_assignment(num_robots: int) -> np.ndarray:
    """The c=K assignment: robot i in its own cluster i+1."""
    return np.arange(1, num_robots + 1)


def _check_assignment(assignment: np.ndarray, c: int, num_robots: int) -> np.ndarray:
    assignment = np.asarray(assignment, dtype=int)
    if assignment.shape != (num_robots,):
        raise InvalidArgument(
            f"assignment length {assignment.shape} does not match {num_robots} robots"
        )
    for label in assignment:
        if label < 1 or label > c:
            raise LabelOutOfRange(int(label), c)
    sizes = np.bincount(assignment, minlength=c + 1)[1:]
    for label, size in enumerate(sizes, start=1):
        if size == 0:
            raise EmptyCluster(label)
    return assignment


def collapse_design(base: DesignSystem, assignment: np.ndarray, c: int) -> CollapsedDesign:
    """Sum robot columns within clusters; build the constrained WMPR design.

    The constrained design drops the cluster containing the highest-index
    robot.  Retained column j becomes ``X_(j) - (K_j/K_drop) X_(drop)`` so
    that solving the reduced system and recovering the dropped coefficient
    from the size-weighted sum-to-zero constraint reproduces the constrained
    least-squares fit exactly.
    """
    assignment = _check_assignment(assignment, c, base.num_robots)
    sizes = np.bincount(assignment, minlength=c + 1)[1:]

    x_c = np.zeros((base.x.shape[0], c))
    for j in range(1, c + 1):
        cols = np.flatnonzero(assignment == j)
        x_c[:, j - 1] = base.x[:, cols].sum(axis=1)

    x_bar = None
    x_bar_labels = None
    drop = None
    if base.kind is ModelKind.WMPR:
        drop = int(assignment[base.num_robots - 1])
        keep = [j for j in range(1, c + 1) if j != drop]
        x_bar_labels = tuple(keep)
        drop_col = x_c[:, drop - 1]
        k_drop = sizes[drop - 1]
        x_bar = np.empty((base.x.shape[0], c - 1))
        for pos, j in enumerate(keep):
            x_bar[:, pos] = x_c[:, j - 1] - (sizes[j - 1] / k_drop) * drop_col

    return CollapsedDesign(
        base=base,
        c=c,
        assignment=assignment,
        x_c=x_c,
        cluster_sizes=sizes,
        x_bar=x_bar,
        x_bar_labels=x_bar_labels,
        constrained_drop=drop,
    )
