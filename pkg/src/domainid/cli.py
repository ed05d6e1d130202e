"""Command-line front end: convert, validate, cluster, fit, evaluate, report.

Exit codes are stable for scripting: 0 success, 1 I/O or parse failure,
2 domain-validation failure (scenario violations, unmet preconditions).
Human-readable results go to stdout; machine artifacts are only written when
``--output`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classifiers import (
    ModelFormatError,
    TrainConfig,
    TrainingError,
    fit_linear_head,
    fit_ncm,
    fit_ncm_finch,
    load_model,
    save_model,
)
from .finch import finch
from .protocol import (
    APPROACHES,
    EvaluationReport,
    ManifestError,
    evaluate_with_model,
    load_manifest,
    render_report_table,
    run_scenario,
    validate_manifest,
)
from .store import StoreFormatError, detect_format, load_store, save_store

EXIT_OK = 0
EXIT_IO = 1
EXIT_DOMAIN = 2


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (StoreFormatError, ModelFormatError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ManifestError as exc:
        for violation in exc.violations:
            print(violation)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (TrainingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="domainid",
        description="In-domain vs out-of-domain separation over stored feature vectors.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("convert", help="translate a store between CSV and the binary format")
    p.add_argument("input", help="store file, format detected from its content")
    p.add_argument("output", help="destination path")
    p.add_argument("--format", choices=["binary", "csv"], required=True,
                   help="format to write")
    p.set_defaults(handler=_cmd_convert)

    p = sub.add_parser("validate", help="check a scenario manifest against a store")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("cluster", help="write the full first-neighbor partition hierarchy")
    p.add_argument("--store", required=True)
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    p.add_argument("--output", help="hierarchy JSON destination")
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("fit", help="fit a classifier and save it")
    p.add_argument("--id-store", required=True, help="in-domain training store")
    p.add_argument("--ood-store", required=True, help="out-of-domain training store")
    p.add_argument("--approach", choices=list(APPROACHES), required=True)
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True, help="model file destination")
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("evaluate", help="run one scenario end to end and score it")
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--approach", choices=list(APPROACHES), required=True)
    p.add_argument("--metric", choices=["euclidean", "cosine"], default="euclidean")
    p.add_argument("--seed", type=int, default=None,
                   help="overrides the manifest seed; default falls back to the manifest, then 0")
    p.add_argument("--backbone", default="unspecified", help="backbone tag recorded in the report")
    p.add_argument("--model", help="previously fitted model file; skips fitting")
    p.add_argument("--output", help="report JSON destination")
    p.add_argument("--override-validation", action="store_true",
                   help="run despite known benign class overlaps")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("report", help="render evaluation reports as a grouped table")
    p.add_argument("reports", nargs="+", help="report JSON files")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.add_argument("--output", help="write the table here instead of stdout")
    p.set_defaults(handler=_cmd_report)

    return parser


def _cmd_convert(args) -> int:
    store = load_store(args.input, detect_format(args.input))
    save_store(store, args.output, args.format)
    print(f"wrote {args.output} ({store.n_rows} rows, {store.n_dims} dims)")
    return EXIT_OK


def _cmd_validate(args) -> int:
    store = load_store(args.store, detect_format(args.store))
    manifest = load_manifest(args.manifest)
    violations = validate_manifest(manifest, store)
    for violation in violations:
        print(violation)
    if violations:
        return EXIT_DOMAIN
    print(f"manifest {manifest.name!r} is valid against {args.store}")
    return EXIT_OK


def _cmd_cluster(args) -> int:
    store = load_store(args.store, detect_format(args.store))
    hierarchy = finch(store.features, args.metric)
    doc = {
        "n_rows": store.n_rows,
        "metric": args.metric,
        "k_sequence": list(hierarchy.k_sequence),
        "partitions": [
            {"k": p.k, "assignment": p.assignment.tolist()} for p in hierarchy.partitions
        ],
    }
    if args.output:
        Path(args.output).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print("k_sequence=" + ",".join(str(k) for k in hierarchy.k_sequence))
    return EXIT_OK


def _cmd_fit(args) -> int:
    id_store = load_store(args.id_store, detect_format(args.id_store))
    ood_store = load_store(args.ood_store, detect_format(args.ood_store))
    if args.approach == "ncm":
        model = fit_ncm(id_store, ood_store)
    elif args.approach == "ncm_finch":
        model = fit_ncm_finch(id_store, ood_store, args.metric)
    else:
        model = fit_linear_head(id_store, ood_store, args.approach, TrainConfig(seed=args.seed))
    save_model(model, args.output)
    print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    store = load_store(args.store, detect_format(args.store))
    manifest = load_manifest(args.manifest)
    if args.model:
        report = evaluate_with_model(
            manifest,
            store,
            load_model(args.model),
            args.approach,
            metric=args.metric,
            backbone=args.backbone,
            override_validation=args.override_validation,
        )
    else:
        report = run_scenario(
            manifest,
            store,
            args.approach,
            metric=args.metric,
            seed=args.seed,
            backbone=args.backbone,
            override_validation=args.override_validation,
        )
    if args.output:
        Path(args.output).write_text(report.to_json(), encoding="utf-8")
    print(f"baccu={report.baccu:.4f}")
    return EXIT_OK


def _cmd_report(args) -> int:
    reports = []
    for path in args.reports:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            reports.append(EvaluationReport.from_dict(doc))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            print(f"error: {path}: invalid report file: {exc}", file=sys.stderr)
            return EXIT_IO
    table = render_report_table(reports, args.format)
    if args.output:
        Path(args.output).write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
