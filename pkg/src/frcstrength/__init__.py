"""Robot strength estimation and alliance-selection tooling for FRC divisions.

The public surface, by layer:

* :mod:`frcstrength.domain` - validated snapshots of a division.
* :mod:`frcstrength.design` - schedule arithmetic and design matrices.
* :mod:`frcstrength.estimators` - plain and clustered least-squares fits.
* :mod:`frcstrength.clustering` - centroid-linkage hierarchies of strengths.
* :mod:`frcstrength.selection` - cluster-count selection by match-deletion
  cross-validation, win-probability prediction.
* :mod:`frcstrength.evaluation` - agreement, playoff, and stability metrics.
* :mod:`frcstrength.ingestion` - snapshot files, CSV import, API client.
* :mod:`frcstrength.cli` / :mod:`frcstrength.service` - command line and
  draft-assistant HTTP service.
"""

__version__ = "0.1.0"

from .clustering import ClusterHierarchy, centroid_hierarchy, single_merge
from .design import (
    CollapsedDesign,
    DesignSystem,
    build_design,
    collapse_design,
    match_count,
    partition_count,
    singleton_assignment,
)
from .domain import (
    DivisionSnapshot,
    MatchRecord,
    ModelKind,
    RobotId,
    Stage,
    validate_snapshot,
)
from .estimators import FittedModel, average_score, fit_model, fit_opr_clustered, fit_wmpr_clustered
from .evaluation import (
    AgreementReport,
    StabilityReport,
    agreement_report,
    model_top_ranking,
    playoff_metrics,
    precision_recall,
    rank_correlation,
    stability_suite,
)
from .ingestion import SnapshotFile, fetch_division, import_csv, load_snapshot, save_snapshot
from .selection import (
    CvReport,
    EmpiricalCdf,
    SelectionResult,
    cv_mspe,
    cv_prediction_rate,
    empirical_cdf,
    fit_plain,
    loo_fit_opr,
    loo_fit_wmpr,
    method1,
    method2,
    predict_win_prob,
    win_probability,
)

__all__ = [
    "__version__",
    "AgreementReport",
    "ClusterHierarchy",
    "CollapsedDesign",
    "CvReport",
    "DesignSystem",
    "DivisionSnapshot",
    "EmpiricalCdf",
    "FittedModel",
    "MatchRecord",
    "ModelKind",
    "RobotId",
    "SelectionResult",
    "SnapshotFile",
    "StabilityReport",
    "Stage",
    "agreement_report",
    "average_score",
    "build_design",
    "centroid_hierarchy",
    "collapse_design",
    "cv_mspe",
    "cv_prediction_rate",
    "empirical_cdf",
    "fetch_division",
    "fit_model",
    "fit_opr_clustered",
    "fit_plain",
    "fit_wmpr_clustered",
    "import_csv",
    "load_snapshot",
    "loo_fit_opr",
    "loo_fit_wmpr",
    "match_count",
    "method1",
    "method2",
    "model_top_ranking",
    "partition_count",
    "playoff_metrics",
    "precision_recall",
    "predict_win_prob",
    "rank_correlation",
    "save_snapshot",
    "single_merge",
    "singleton_assignment",
    "stability_suite",
    "validate_snapshot",
    "win_probability",
]
