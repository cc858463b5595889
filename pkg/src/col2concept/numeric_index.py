"""Interval count structure for numeric column ranges.

For each concept the historical [min, max] column ranges are stored as
two sorted endpoint arrays. The number of stored intervals [a, b] that
intersect a closed query range [lo, hi] is

    total - |{b < lo}| - |{a > hi}|

which two binary searches answer exactly in O(log n). Candidate
concepts are scored as Pr(range | concept) * Pr(concept), where the
prior is the concept's share of all numeric column ranges seen.
"""

from __future__ import annotations

import json
import struct
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from ._files import atomic_write_text, canonical_json, concept_hash
from .errors import CorruptIndex, InvalidRange
from .ingest import NumericColumnRange
from .model import UNNORMALIZED_SCORES, ConceptDistribution


class IntervalCountStructure:
    def __init__(
        self,
        starts: dict[str, np.ndarray],
        ends: dict[str, np.ndarray],
        column_counts: dict[str, int],
        column_total: int,
    ):
        self._starts = starts
        self._ends = ends
        self._column_counts = column_counts
        self._column_total = column_total

    @classmethod
    def build(cls, records: Iterable[NumericColumnRange]) -> "IntervalCountStructure":
        by_concept: dict[str, list[tuple[float, float]]] = defaultdict(list)
        for record in records:
            by_concept[record.concept].append((record.low, record.high))
        return cls.from_ranges(by_concept)

    @classmethod
    def from_ranges(
        cls,
        ranges: Mapping[str, Iterable[tuple[float, float]]],
        column_counts: Optional[Mapping[str, int]] = None,
        column_total: Optional[int] = None,
    ) -> "IntervalCountStructure":
        """Direct construction; column counts default to the ranges stored."""
        starts: dict[str, np.ndarray] = {}
        ends: dict[str, np.ndarray] = {}
        counts: dict[str, int] = {}
        for concept, pairs in ranges.items():
            pairs = list(pairs)
            for low, high in pairs:
                if low > high:
                    raise InvalidRange(f"{concept}: min {low} exceeds max {high}")
            starts[concept] = np.sort(np.array([p[0] for p in pairs], dtype=np.float64))
            ends[concept] = np.sort(np.array([p[1] for p in pairs], dtype=np.float64))
            counts[concept] = len(pairs)
        if column_counts is not None:
            counts = dict(column_counts)
        total = sum(counts.values()) if column_total is None else column_total
        return cls(starts, ends, counts, total)

    def concepts(self) -> list[str]:
        return sorted(self._starts)

    def interval_count(self, concept: str) -> int:
        return len(self._starts.get(concept, ()))

    def column_count(self, concept: str) -> int:
        return self._column_counts.get(concept, 0)

    def column_total(self) -> int:
        return self._column_total

    def count_intersecting(self, concept: str, low: float, high: float) -> int:
        """Exact count of stored intervals intersecting [low, high]."""
        if low > high:
            raise InvalidRange(f"query min {low} exceeds max {high}")
        starts = self._starts.get(concept)
        if starts is None or len(starts) == 0:
            return 0
        ends = self._ends[concept]
        n = len(starts)
        ends_below = int(np.searchsorted(ends, low, side="left"))
        starts_above = n - int(np.searchsorted(starts, high, side="right"))
        return n - ends_below - starts_above

    def score_concepts(
        self,
        low: float,
        high: float,
        candidates: Optional[Iterable[str]] = None,
    ) -> ConceptDistribution:
        """Unnormalized Pr(range | concept) * Pr(concept) per candidate.

        Concepts with no stored intervals score 0. When candidates is
        None every stored concept is scored.
        """
        if low > high:
            raise InvalidRange(f"query min {low} exceeds max {high}")
        names = sorted(set(candidates)) if candidates is not None else self.concepts()
        scores: dict[str, float] = {}
        for concept in names:
            intervals = self.interval_count(concept)
            if intervals == 0 or self._column_total == 0:
                scores[concept] = 0.0
                continue
            pr_range = self.count_intersecting(concept, low, high) / intervals
            prior = self._column_counts.get(concept, 0) / self._column_total
            scores[concept] = pr_range * prior
        return ConceptDistribution(scores, UNNORMALIZED_SCORES)

    # -- persistence: one binary endpoint file per concept plus a directory

    def persist(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        entries = {}
        for concept in self.concepts():
            starts = self._starts[concept]
            n = len(starts)
            payload = (
                struct.pack("<Q", n)
                + starts.astype("<f8").tobytes()
                + self._ends[concept].astype("<f8").tobytes()
            )
            file_name = f"{concept_hash(concept)}.bin"
            with open(directory / file_name, "wb") as handle:
                handle.write(payload)
            entries[concept] = {
                "file": file_name,
                "ranges": n,
                "columns": self._column_counts.get(concept, n),
            }
        meta = {"concepts": entries, "total_columns": self._column_total}
        atomic_write_text(directory / "directory.json", canonical_json(meta))

    @classmethod
    def load(cls, directory: Path | str) -> "IntervalCountStructure":
        directory = Path(directory)
        meta_path = directory / "directory.json"
        if not meta_path.exists():
            raise CorruptIndex(f"missing {meta_path}")
        try:
            meta = json.loads(meta_path.read_text("utf-8"))
            entries = meta["concepts"]
            total = int(meta["total_columns"])
        except (ValueError, KeyError) as exc:
            raise CorruptIndex(f"bad directory {meta_path}: {exc}") from exc
        starts: dict[str, np.ndarray] = {}
        ends: dict[str, np.ndarray] = {}
        counts: dict[str, int] = {}
        for concept, entry in entries.items():
            file_path = directory / entry["file"]
            if not file_path.exists():
                raise CorruptIndex(f"missing {file_path}")
            payload = file_path.read_bytes()
            if len(payload) < 8:
                raise CorruptIndex(f"truncated {file_path}")
            (n,) = struct.unpack("<Q", payload[:8])
            if n != entry["ranges"] or len(payload) != 8 + 16 * n:
                raise CorruptIndex(f"size mismatch in {file_path}")
            body = np.frombuffer(payload, dtype="<f8", offset=8)
            starts[concept] = body[:n].astype(np.float64)
            ends[concept] = body[n:].astype(np.float64)
            counts[concept] = int(entry["columns"])
        return cls(starts, ends, counts, total)
