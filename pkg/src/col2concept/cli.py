"""Command line interface: c2 build-index | annotate | evaluate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 index error.
Output files are written to a temp file and renamed, so a consumer
never sees partial output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from ._files import atomic_write_text
from .errors import C2Error, DataError, IndexStoreError
from .estimator import Annotator, EstimatorConfig
from .evaluate import evaluate_cases, load_cases, load_synonym_lookup
from .ingest import CorpusManifest, read_table
from .store import IndexBundle, build_indexes, load_bundle, save_bundle

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INDEX = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; this CLI reserves 2 for data errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="c2", description="Concept annotation for table columns")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    build = sub.add_parser("build-index", help="build all indexes from a corpus manifest")
    build.add_argument("--manifest", required=True, help="corpus manifest JSON")
    build.add_argument("--out", required=True, help="output index directory")

    annotate = sub.add_parser("annotate", help="annotate the columns of one table")
    annotate.add_argument("--index", required=True, help="index directory")
    annotate.add_argument("--table", required=True, help="delimited table with a header row")
    annotate.add_argument("--topk", type=int, default=3, help="reported candidates per column")
    annotate.add_argument("--format", choices=("jsonl", "tsv"), default="jsonl")
    annotate.add_argument("--out", default=None, help="output file (default stdout)")
    annotate.add_argument("--seed", type=int, default=None, help="override the index seed")
    annotate.add_argument("--no-belief-sharing", action="store_true")
    annotate.add_argument("--no-tuple-validation", action="store_true")

    evaluate = sub.add_parser("evaluate", help="score annotations against ground truth")
    evaluate.add_argument("--index", required=True, help="index directory")
    evaluate.add_argument("--cases", required=True, help="evaluation cases JSON")
    evaluate.add_argument("--synonyms", default=None, help="synonym sets tsv for scoring")
    evaluate.add_argument("--out", default=None, help="output file (default stdout)")
    evaluate.add_argument("--seed", type=int, default=None)
    evaluate.add_argument("--no-belief-sharing", action="store_true")
    evaluate.add_argument("--no-tuple-validation", action="store_true")
    return parser


def _config_for(bundle: IndexBundle, args) -> EstimatorConfig:
    """Defaults, overlaid by index metadata, overlaid by flags."""
    config = EstimatorConfig(source_weights=bundle.source_weights())
    metadata_seed = bundle.metadata.get("seed")
    if metadata_seed is not None:
        config.seed = int(metadata_seed)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "no_belief_sharing", False):
        config.use_belief_sharing = False
    if getattr(args, "no_tuple_validation", False):
        config.use_tuple_validation = False
    return config


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write_text(Path(out), text)


def _cmd_build_index(args) -> int:
    manifest = CorpusManifest.load(args.manifest)
    bundle, summary = build_indexes(manifest)
    save_bundle(bundle, args.out)
    for line in summary.lines():
        print(line)
    print(f"index written to {args.out}")
    return EXIT_OK


def _annotation_text(records: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    lines = []
    for r in records:
        candidates = "|".join(
            f"{c['concept']}={c['logScore']!r}" for c in r["candidates"]
        )
        lines.append(
            "\t".join(
                [
                    str(r["columnIndex"]),
                    r["header"] or "",
                    r["kind"],
                    r["jointChoice"] or "",
                    candidates,
                ]
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def _cmd_annotate(args) -> int:
    bundle = load_bundle(args.index)
    table = read_table(args.table)  # parsed before any output is opened
    config = _config_for(bundle, args)
    result = Annotator.from_bundle(bundle, config).annotate(table)
    records = result.to_records(topk=args.topk)
    _emit(_annotation_text(records, args.format), args.out)
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    bundle = load_bundle(args.index)
    cases = load_cases(args.cases)
    synonyms = load_synonym_lookup(args.synonyms) if args.synonyms else None
    config = _config_for(bundle, args)
    report = evaluate_cases(bundle, cases, synonyms=synonyms, config=config)
    _emit(json.dumps(report, sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "build-index": _cmd_build_index,
    "annotate": _cmd_annotate,
    "evaluate": _cmd_evaluate,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except IndexStoreError as exc:
        print(f"c2: index error: {exc}", file=sys.stderr)
        return EXIT_INDEX
    except DataError as exc:
        print(f"c2: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except C2Error as exc:
        print(f"c2: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
