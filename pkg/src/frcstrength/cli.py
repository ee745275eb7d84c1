"""Command-line entry point: fetch, fit, evaluate, stability, serve.

All report-producing commands are deterministic given their input files.
Exit codes: 0 success, 2 authentication failure, 3 output exists without
--force, 4 rank-deficient fit, 1 any other error.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__
from .errors import AuthFailed, FrcStrengthError, PortInUse, RankDeficient
from .evaluation import agreement_report, playoff_metrics, stability_suite
from .ingestion import SCHEMA_VERSION, fetch_division, load_snapshot, save_snapshot
from .reports import (
    MODEL_NAMES,
    fit_report_from_result,
    load_fit_report,
    model_kind,
    model_procedure,
    save_report,
)
from .selection import fit_plain, method1, method2

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AUTH = 2
EXIT_EXISTS = 3
EXIT_RANK = 4


def _cmd_fetch(args) -> int:
    if os.path.exists(args.out) and not args.force:
        print(f"refusing to overwrite {args.out} (use --force)", file=sys.stderr)
        return EXIT_EXISTS
    token = args.token or os.environ.get("TBA_AUTH_KEY", "")
    snapshot_file = fetch_division(args.event, token)
    save_snapshot(snapshot_file, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _run_model(snapshot, model: str, criterion: str):
    kind = model_kind(model)
    procedure = model_procedure(model)
    if procedure is None:
        return fit_plain(snapshot, kind, criterion)
    run = method1 if procedure == "method1" else method2
    return run(snapshot, kind, criterion)


def _cmd_fit(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    result = _run_model(snapshot, args.model, args.criterion)
    report = fit_report_from_result(snapshot, args.model, result)
    save_report(report.to_payload(), args.out)
    print(f"wrote {args.out} (c_hat={result.c_hat})")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    fit = load_fit_report(args.fit)
    fit.check_snapshot(snapshot)
    beta_tilde = fit.beta_tilde(snapshot)
    agreement = agreement_report(snapshot, beta_tilde)
    playoff_pr, playoff_mspe = playoff_metrics(snapshot, beta_tilde, fit.cdf())
    payload = {
        "schema_version": SCHEMA_VERSION,
        "division_key": snapshot.division_key,
        "snapshot_digest": fit.snapshot_digest,
        "model": fit.model,
        "rc_all": agreement.rc_all,
        "rc_playoff": agreement.rc_playoff,
        "rc_top8": agreement.rc_top8,
        "precision": {str(n): v for n, v in agreement.precision_at.items()},
        "recall": {str(n): v for n, v in agreement.recall_at.items()},
        "playoff_pr": playoff_pr,
        "playoff_mspe": playoff_mspe,
    }
    save_report(payload, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_stability(args) -> int:
    snapshot = load_snapshot(args.snapshot)
    kind = model_kind(args.model)
    procedure = model_procedure(args.model) or "full"
    report = stability_suite(snapshot, kind, procedure, args.criterion)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "division_key": snapshot.division_key,
        "model": args.model,
        "criterion": report.criterion,
        "c_hat": report.c_hat,
        "rows": [
            {
                "rounds": row.rounds,
                "matches": row.num_matches,
                "value": row.value,
                "error": row.error,
            }
            for row in report.rows
        ],
        "rc": [{"rounds": r, "value": v} for r, v in report.rc_rows],
        "rc_top8": [{"rounds": r, "value": v} for r, v in report.rc_top8_rows],
    }
    save_report(payload, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    snapshot = load_snapshot(args.snapshot)
    fit = load_fit_report(args.fit)
    app = create_app(snapshot, fit)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except OSError as exc:
        if exc.errno == 98:  # EADDRINUSE
            raise PortInUse(args.port) from exc
        raise
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frcstrength",
        description="Estimate FRC robot strengths, predict matches, assist drafts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fetch = sub.add_parser("fetch", help="download a division snapshot from The Blue Alliance")
    fetch.add_argument("--event", required=True, help="event key, e.g. 2018carv")
    fetch.add_argument("--out", required=True)
    fetch.add_argument("--force", action="store_true", help="overwrite an existing file")
    fetch.add_argument("--token", help="API token (defaults to $TBA_AUTH_KEY)")
    fetch.set_defaults(func=_cmd_fetch)

    fit = sub.add_parser("fit", help="fit a strength model and write a fit report")
    fit.add_argument("--snapshot", required=True)
    fit.add_argument("--model", required=True, choices=MODEL_NAMES)
    fit.add_argument("--criterion", choices=("pr", "mspe"), default="pr")
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=_cmd_fit)

    evaluate = sub.add_parser("evaluate", help="agreement and playoff metrics for a fit")
    evaluate.add_argument("--snapshot", required=True)
    evaluate.add_argument("--fit", required=True)
    evaluate.add_argument("--out", required=True)
    evaluate.set_defaults(func=_cmd_evaluate)

    stability = sub.add_parser("stability", help="schedule-length stability table")
    stability.add_argument("--snapshot", required=True)
    stability.add_argument("--model", required=True, choices=MODEL_NAMES)
    stability.add_argument("--criterion", choices=("pr", "mspe"), default="pr")
    stability.add_argument("--out", required=True)
    stability.set_defaults(func=_cmd_stability)

    serve = sub.add_parser("serve", help="run the draft-assistant HTTP service")
    serve.add_argument("--snapshot", required=True)
    serve.add_argument("--fit", required=True)
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--host", default="127.0.0.1")
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AuthFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_AUTH
    except RankDeficient as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except FrcStrengthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
