"""Extractor command line: ``extract`` writes stores, ``verify`` checks them."""

from __future__ import annotations

import argparse
import logging
import sys

from .backbones import BACKBONES, UnknownBackboneError
from .emb1 import Emb1FormatError, verify_store
from .extract import ExtractionJob, extract


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    parser = argparse.ArgumentParser(
        prog="embextract",
        description="Frozen-backbone image feature extraction into EMB1 stores.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("extract", help="embed an image folder (one subfolder per class)")
    p.add_argument("--backbone", choices=sorted(BACKBONES), required=True)
    p.add_argument("--input", required=True, help="image folder; its basename becomes dataset_name")
    p.add_argument("--output", required=True, help="EMB1 destination")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--device", default="cpu")
    p.add_argument("--untrained", action="store_true",
                   help="random weights (offline pipeline checks; features are meaningless)")
    p.add_argument("--seed", type=int, default=0, help="weight init seed with --untrained")
    p.set_defaults(handler=_cmd_extract)

    p = sub.add_parser("verify", help="validate an EMB1 file and print a census")
    p.add_argument("store", help="EMB1 file")
    p.set_defaults(handler=_cmd_verify)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except Emb1FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UnknownBackboneError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _cmd_extract(args) -> int:
    job = ExtractionJob(
        backbone=args.backbone,
        input_dir=args.input,
        output_path=args.output,
        batch_size=args.batch_size,
        device=args.device,
        pretrained=not args.untrained,
        seed=args.seed,
    )
    result = extract(job)
    skipped = f", {result.skipped} skipped" if result.skipped else ""
    print(f"wrote {args.output} ({result.n_rows} rows, {result.n_dims} dims{skipped})")
    return 0


def _cmd_verify(args) -> int:
    summary = verify_store(args.store)
    print(summary.render())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
