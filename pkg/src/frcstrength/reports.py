"""JSON report formats produced by the CLI and consumed by the service.

A fit report carries everything needed to evaluate or serve a fitted model
without refitting: per-robot strengths and clusters, the cross-validation
table, and the sorted margin residuals that define the win-probability CDF.
Reports embed the snapshot's division key and content digest so a mismatched
fit/snapshot pair is detected instead of silently miscomputed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .domain import DivisionSnapshot, ModelKind
from .errors import RosterMismatch, SchemaVersionMismatch, SnapshotIoError
from .ingestion import SCHEMA_VERSION, canonical_json, snapshot_digest
from .selection import CvEntry, EmpiricalCdf, SelectionResult

MODEL_NAMES = ("opr", "wmpr", "oprc1", "oprc2", "wmprc1", "wmprc2")


def model_kind(model: str) -> ModelKind:
    return ModelKind.OPR if model.startswith("opr") else ModelKind.WMPR


def model_procedure(model: str) -> str | None:
    """method1/method2 for the clustered model names, None for the plain ones."""
    if model in ("opr", "wmpr"):
        return None
    return "method1" if model.endswith("1") else "method2"


@dataclass(eq=False)
class FitReport:
    division_key: str
    snapshot_digest: str
    model: str
    kind: ModelKind
    procedure: str | None
    criterion: str
    c_hat: int
    assignment: dict[str, int]
    beta: dict[str, float]
    sigma2_hat: float
    residuals_sorted: list[float]
    cv_entries: list[dict]
    chosen_c_pr: int | None
    chosen_c_mspe: int | None
    loo_margins: list[float] = field(default_factory=list)
    loo_probs: list[float] = field(default_factory=list)

    def to_payload(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "division_key": self.division_key,
            "snapshot_digest": self.snapshot_digest,
            "model": self.model,
            "kind": self.kind.value,
            "procedure": self.procedure,
            "criterion": self.criterion,
            "c_hat": self.c_hat,
            "assignment": self.assignment,
            "beta": self.beta,
            "sigma2_hat": self.sigma2_hat,
            "residuals_sorted": self.residuals_sorted,
            "cv": {
                "entries": self.cv_entries,
                "chosen_c_pr": self.chosen_c_pr,
                "chosen_c_mspe": self.chosen_c_mspe,
            },
            "loo": {"margins": self.loo_margins, "probs": self.loo_probs},
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "FitReport":
        version = payload.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatch(version, SCHEMA_VERSION)
        cv = payload.get("cv", {})
        loo = payload.get("loo", {})
        return cls(
            division_key=payload["division_key"],
            snapshot_digest=payload["snapshot_digest"],
            model=payload["model"],
            kind=ModelKind(payload["kind"]),
            procedure=payload.get("procedure"),
            criterion=payload["criterion"],
            c_hat=int(payload["c_hat"]),
            assignment={k: int(v) for k, v in payload["assignment"].items()},
            beta={k: float(v) for k, v in payload["beta"].items()},
            sigma2_hat=float(payload["sigma2_hat"]),
            residuals_sorted=[float(v) for v in payload["residuals_sorted"]],
            cv_entries=list(cv.get("entries", [])),
            chosen_c_pr=cv.get("chosen_c_pr"),
            chosen_c_mspe=cv.get("chosen_c_mspe"),
            loo_margins=[float(v) for v in loo.get("margins", [])],
            loo_probs=[float(v) for v in loo.get("probs", [])],
        )

    # --- reconstruction against a snapshot --------------------------------

    def check_snapshot(self, snapshot: DivisionSnapshot) -> None:
        if self.division_key != snapshot.division_key:
            raise RosterMismatch(
                f"fit is for {self.division_key!r}, snapshot is {snapshot.division_key!r}"
            )
        if self.snapshot_digest != snapshot_digest(snapshot):
            raise RosterMismatch("snapshot content differs from the one the fit was made on")

    def beta_tilde(self, snapshot: DivisionSnapshot) -> np.ndarray:
        try:
            return np.array([self.beta[r.key] for r in snapshot.roster])
        except KeyError as exc:
            raise RosterMismatch(f"fit has no strength for robot {exc.args[0]!r}") from exc

    def assignment_array(self, snapshot: DivisionSnapshot) -> np.ndarray:
        try:
            return np.array([self.assignment[r.key] for r in snapshot.roster], dtype=int)
        except KeyError as exc:
            raise RosterMismatch(f"fit has no cluster for robot {exc.args[0]!r}") from exc

    def cdf(self) -> EmpiricalCdf:
        return EmpiricalCdf(np.asarray(self.residuals_sorted, dtype=float))


def _entry_payload(entry: CvEntry) -> dict:
    return {
        "c": entry.c,
        "pr": entry.pr,
        "mspe": entry.mspe,
        "n_mspe_excluded": entry.n_mspe_excluded,
        "error": entry.error,
    }


def _float_list(values) -> list[float]:
    if values is None:
        return []
    return [float(v) for v in np.asarray(values)]


def fit_report_from_result(
    snapshot: DivisionSnapshot, model: str, result: SelectionResult
) -> FitReport:
    fit = result.fit
    return FitReport(
        division_key=snapshot.division_key,
        snapshot_digest=snapshot_digest(snapshot),
        model=model,
        kind=result.kind,
        procedure=model_procedure(model),
        criterion=result.criterion,
        c_hat=result.c_hat,
        assignment={r.key: int(result.assignment[r.index]) for r in snapshot.roster},
        beta={r.key: float(fit.beta_tilde[r.index]) for r in snapshot.roster},
        sigma2_hat=float(fit.sigma2_hat),
        residuals_sorted=sorted(float(v) for v in fit.residuals),
        cv_entries=[_entry_payload(e) for e in result.report.entries],
        chosen_c_pr=result.report.chosen_c_pr,
        chosen_c_mspe=result.report.chosen_c_mspe,
        loo_margins=_float_list(result.report.loo_margins),
        loo_probs=_float_list(result.report.loo_probs),
    )


def save_report(payload: dict, path: str | os.PathLike) -> None:
    path = os.fspath(path)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(canonical_json(payload))
    os.replace(tmp, path)


def load_fit_report(path: str | os.PathLike) -> FitReport:
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
    return FitReport.from_payload(payload)
