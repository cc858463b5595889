"""Synonym-aware top-k evaluation of annotations against ground truth.

A prediction at rank r is correct when it equals the ground-truth
concept or any member of that concept's synonym set, all labels
normalized. accuracy@k is the fraction of ground-truth columns with a
correct concept in the top k, so accuracy@1 <= accuracy@2 <= accuracy@3
by construction.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .belief import load_synonym_sets
from .errors import DataError, EmptyCaseSet
from .estimator import Annotator, EstimatorConfig
from .ingest import read_table
from .model import normalize_concept
from .store import IndexBundle

REPORT_KS = (1, 2, 3)


@dataclass(frozen=True)
class EvaluationCase:
    table_path: str
    truth: tuple[tuple[int, str], ...]  # (column index, concept label)


def load_cases(path: Path | str) -> list[EvaluationCase]:
    """Cases manifest: {"cases": [{"table": ..., "truth": [{"column": i, "concept": c}]}]}.

    Table paths are resolved relative to the manifest file.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text("utf-8"))
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read cases manifest {path}: {exc}") from exc
    cases = []
    for entry in raw.get("cases", []):
        table = entry.get("table")
        if not table:
            raise DataError("case entry is missing 'table'")
        table_path = Path(table)
        if not table_path.is_absolute():
            table_path = path.parent / table_path
        truth = tuple(
            (int(t["column"]), normalize_concept(t["concept"]))
            for t in entry.get("truth", [])
        )
        if truth:
            cases.append(EvaluationCase(str(table_path), truth))
    if not cases:
        raise EmptyCaseSet(f"no usable cases in {path}")
    return cases


def load_synonym_lookup(path: Path | str) -> dict[str, frozenset[str]]:
    """Map each label to its synonym set (including itself)."""
    lookup: dict[str, frozenset[str]] = {}
    for members in load_synonym_sets(path):
        group = frozenset(members)
        for member in group:
            lookup[member] = lookup.get(member, frozenset()) | group
    return lookup


def evaluate_cases(
    bundle: IndexBundle,
    cases: list[EvaluationCase],
    synonyms: Optional[dict[str, frozenset[str]]] = None,
    config: Optional[EstimatorConfig] = None,
) -> dict:
    """Annotate every case table and score top-1/2/3 accuracy."""
    if not cases:
        raise EmptyCaseSet("no cases to evaluate")
    synonyms = synonyms or {}
    annotator = Annotator.from_bundle(bundle, config)
    started = time.perf_counter()

    units = 0
    hits = {k: 0 for k in REPORT_KS}
    by_kind: dict[str, dict[str, int]] = {}
    details = []
    for case in cases:
        try:
            table = read_table(case.table_path)
            result = annotator.annotate(table)
        except DataError as exc:
            for column_index, truth in case.truth:
                units += 1
                details.append(
                    {
                        "table": case.table_path,
                        "column": column_index,
                        "truth": truth,
                        "kind": "unknown",
                        "predictions": [],
                        "correctRank": None,
                        "error": str(exc),
                    }
                )
            continue
        for column_index, truth in case.truth:
            units += 1
            if not 0 <= column_index < len(result.columns):
                details.append(
                    {
                        "table": case.table_path,
                        "column": column_index,
                        "truth": truth,
                        "kind": "unknown",
                        "predictions": [],
                        "correctRank": None,
                        "error": "ground-truth column index out of range",
                    }
                )
                continue
            annotation = result.columns[column_index]
            kind = annotation.kind.value if annotation.kind else "unknown"
            accepted = {truth} | set(synonyms.get(truth, ()))
            predictions = [c for c, _ in annotation.candidates[: max(REPORT_KS)]]
            rank = next(
                (r for r, pred in enumerate(predictions, start=1) if pred in accepted),
                None,
            )
            for k in REPORT_KS:
                if rank is not None and rank <= k:
                    hits[k] += 1
            tally = by_kind.setdefault(
                kind, {"cases": 0, **{f"top{k}": 0 for k in REPORT_KS}}
            )
            tally["cases"] += 1
            for k in REPORT_KS:
                if rank is not None and rank <= k:
                    tally[f"top{k}"] += 1
            details.append(
                {
                    "table": case.table_path,
                    "column": column_index,
                    "truth": truth,
                    "kind": kind,
                    "predictions": predictions,
                    "correctRank": rank,
                    "error": None,
                }
            )

    report = {
        "cases": units,
        "accuracy": {f"top{k}": hits[k] / units for k in REPORT_KS},
        "byKind": {
            kind: {
                "cases": tally["cases"],
                **{
                    f"top{k}": tally[f"top{k}"] / tally["cases"]
                    for k in REPORT_KS
                },
            }
            for kind, tally in sorted(by_kind.items())
        },
        "details": details,
        "wallClockSeconds": time.perf_counter() - started,
    }
    return report
