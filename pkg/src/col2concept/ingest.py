"""Corpus ingestion: delimited reference tables and knowledge-graph triples.

Each corpus file is reduced to a stream of small records (entity
mentions, numeric column ranges, pattern columns, tuple mentions) from
which the four indexes are built. Ingestion tolerates noise: a file
that cannot be parsed is skipped with a warning, and a triple line with
the wrong shape is counted and dropped. All sampling is driven by a
per-file generator seeded from the manifest, so record emission is
deterministic given the file bytes and the manifest.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import DataError, EmptyUniverse, MalformedFile
from .model import (
    Column,
    ColumnKind,
    Table,
    classify_column,
    normalize_concept,
    normalize_entity,
    parse_number,
)
from .errors import AllEmpty

logger = logging.getLogger(__name__)

TABLES_KIND = "tables"
KG_KIND = "kg"

MAX_PATTERN_SAMPLE = 1000  # values kept per mixed corpus column
MAX_TUPLES_PER_PAIR = 10000  # tuple mentions per (file, column pair)
KG_NUMERIC_BATCH = 100  # numeric kg objects per emitted range

_SOURCE_ID_RE = re.compile(r"[A-Za-z0-9_.-]+")
_DELIMITERS = (",", "\t", ";")


@dataclass(frozen=True)
class EntityMention:
    source: str
    entity: str
    concept: str


@dataclass(frozen=True)
class NumericColumnRange:
    source: str
    concept: str
    low: float
    high: float

    def __post_init__(self):
        if self.low > self.high:
            raise DataError(f"range min {self.low} exceeds max {self.high}")


@dataclass(frozen=True)
class PatternColumn:
    source: str
    concept: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class TupleMention:
    source: str
    concept_a: str
    concept_b: str
    value_a: str
    value_b: str
    # identifies the originating (file, column pair) so the co-occurrence
    # index can count distinct column pairs from a flat record stream
    pair_id: str


IndexRecord = Union[EntityMention, NumericColumnRange, PatternColumn, TupleMention]


@dataclass(frozen=True)
class ManifestSource:
    id: str
    kind: str
    path: Path
    weight: float = 1.0


@dataclass(frozen=True)
class CorpusManifest:
    sources: tuple[ManifestSource, ...]
    min_concept_frequency: int = 100
    seed: int = 0
    synonyms: Optional[Path] = None
    hierarchy: Optional[Path] = None
    embeddings: Optional[Path] = None

    def __post_init__(self):
        if not self.sources:
            raise DataError("manifest must list at least one source")
        ids = [s.id for s in self.sources]
        if len(set(ids)) != len(ids):
            raise DataError("source ids must be unique within one build")

    @classmethod
    def load(cls, path: Path | str) -> "CorpusManifest":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise DataError(f"cannot read manifest {path}: {exc}") from exc
        base = path.parent

        def resolve(p: Optional[str]) -> Optional[Path]:
            if p is None:
                return None
            resolved = (base / p).resolve() if not Path(p).is_absolute() else Path(p)
            if not resolved.exists():
                raise DataError(f"manifest path does not exist: {resolved}")
            return resolved

        sources = []
        for entry in raw.get("sources", []):
            sid = entry.get("id", "")
            if not _SOURCE_ID_RE.fullmatch(sid or ""):
                raise DataError(f"invalid source id: {sid!r}")
            kind = entry.get("kind")
            if kind not in (TABLES_KIND, KG_KIND):
                raise DataError(f"source {sid}: kind must be 'tables' or 'kg'")
            weight = float(entry.get("weight", 1.0))
            if not weight > 0:
                raise DataError(f"source {sid}: weight must be positive")
            sources.append(ManifestSource(sid, kind, resolve(entry.get("path")), weight))
        return cls(
            sources=tuple(sources),
            min_concept_frequency=int(raw.get("minConceptFrequency", 100)),
            seed=int(raw.get("seed", 0)),
            synonyms=resolve(raw.get("synonyms")),
            hierarchy=resolve(raw.get("hierarchy")),
            embeddings=resolve(raw.get("embeddings")),
        )


def detect_delimiter(first_line: str) -> str:
    """Pick the delimiter with the highest count on the first line."""
    counts = [(first_line.count(d), -i) for i, d in enumerate(_DELIMITERS)]
    best = max(range(len(_DELIMITERS)), key=lambda i: counts[i])
    return _DELIMITERS[best]


def read_table(path: Path | str) -> Table:
    """Read a delimited UTF-8 table with a header row.

    Raises MalformedFile when the file cannot be decoded, is empty, or
    has no data rows. Short rows are padded, long rows truncated.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    if not text.strip():
        raise MalformedFile(f"{path}: file is empty")
    delimiter = detect_delimiter(text.splitlines()[0])
    try:
        rows = list(csv.reader(io.StringIO(text), delimiter=delimiter))
    except csv.Error as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise MalformedFile(f"{path}: need a header row and at least one data row")
    header = [cell.strip() for cell in rows[0]]
    m = len(header)
    if m == 0 or all(not h for h in header):
        raise MalformedFile(f"{path}: header row is empty")
    columns = []
    for i in range(m):
        values = []
        for row in rows[1:]:
            values.append(row[i].strip() if i < len(row) else "")
        columns.append(Column(header=header[i] or None, values=tuple(values)))
    return Table(tuple(columns))


def _file_rng(seed: int, source: str, name: str) -> random.Random:
    return random.Random(f"{seed}:{source}:{name}")


def ingest_table_file(path: Path | str, source: str, seed: int = 0) -> list[IndexRecord]:
    """Emit index records for one reference table.

    Header cells become concept labels. Categorical columns yield one
    entity mention per non-empty cell, numeric columns one [min, max]
    range, mixed columns one sampled pattern column. Every unordered
    column pair with at least one categorical side yields tuple
    mentions, capped per pair.
    """
    path = Path(path)
    table = read_table(path)
    rng = _file_rng(seed, source, path.name)
    records: list[IndexRecord] = []

    concepts: list[Optional[str]] = []
    kinds: list[Optional[ColumnKind]] = []
    for column in table.columns:
        concept = normalize_concept(column.header) if column.header else ""
        if not concept:
            concepts.append(None)
            kinds.append(None)
            continue
        concepts.append(concept)
        try:
            kinds.append(classify_column(column.values))
        except AllEmpty:
            kinds.append(None)

    for i, column in enumerate(table.columns):
        concept, kind = concepts[i], kinds[i]
        if concept is None or kind is None:
            continue
        if kind is ColumnKind.CATEGORICAL:
            for value in column.values:
                key = normalize_entity(value)
                if key:
                    records.append(EntityMention(source, key, concept))
        elif kind is ColumnKind.NUMERIC:
            parsed = [parse_number(v) for v in column.values if v.strip()]
            numbers = [x for x in parsed if x is not None]
            if numbers:
                records.append(
                    NumericColumnRange(source, concept, min(numbers), max(numbers))
                )
        else:
            pool = [normalize_entity(v) for v in column.values]
            pool = [p for p in pool if p]
            if pool:
                if len(pool) > MAX_PATTERN_SAMPLE:
                    pool = rng.sample(pool, MAX_PATTERN_SAMPLE)
                records.append(PatternColumn(source, concept, tuple(pool)))

    for i in range(table.n_cols):
        if concepts[i] is None or kinds[i] is None:
            continue
        for j in range(i + 1, table.n_cols):
            if concepts[j] is None or kinds[j] is None:
                continue
            if ColumnKind.CATEGORICAL not in (kinds[i], kinds[j]):
                continue
            pairs = []
            for a, b in zip(table.columns[i].values, table.columns[j].values):
                va, vb = normalize_entity(a), normalize_entity(b)
                if va and vb:
                    pairs.append((va, vb))
            if not pairs:
                continue
            if len(pairs) > MAX_TUPLES_PER_PAIR:
                keep = sorted(rng.sample(range(len(pairs)), MAX_TUPLES_PER_PAIR))
                pairs = [pairs[k] for k in keep]
            pair_id = f"{source}:{path.name}:{i}:{j}"
            for va, vb in pairs:
                records.append(
                    TupleMention(source, concepts[i], concepts[j], va, vb, pair_id)
                )
    return records


def ingest_kg_file(path: Path | str, source: str) -> tuple[list[IndexRecord], int]:
    """Emit index records for a tab-separated (subject, predicate, object) file.

    Non-typeOf triples map the object to the predicate label; typeOf
    triples map the subject to its class. Numeric objects additionally
    accumulate per-predicate ranges, one per contiguous batch of
    KG_NUMERIC_BATCH values (a trailing partial batch is also emitted).
    Returns (records, malformed line count).
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise MalformedFile(f"{path}: {exc}") from exc
    records: list[IndexRecord] = []
    batches: dict[str, list[float]] = {}
    malformed = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            malformed += 1
            continue
        subject, predicate, obj = (normalize_entity(p) for p in parts)
        if not subject or not predicate or not obj:
            malformed += 1
            continue
        if predicate == "typeof":
            records.append(EntityMention(source, subject, obj))
            continue
        records.append(EntityMention(source, obj, predicate))
        number = parse_number(obj)
        if number is not None:
            batch = batches.setdefault(predicate, [])
            batch.append(number)
            if len(batch) == KG_NUMERIC_BATCH:
                records.append(
                    NumericColumnRange(source, predicate, min(batch), max(batch))
                )
                batch.clear()
    for predicate in sorted(batches):
        batch = batches[predicate]
        if batch:
            records.append(
                NumericColumnRange(source, predicate, min(batch), max(batch))
            )
    return records, malformed


@dataclass
class IngestResult:
    records: list[IndexRecord] = field(default_factory=list)
    files_read: int = 0
    skipped_files: list[tuple[str, str]] = field(default_factory=list)
    malformed_lines: int = 0


def _source_files(path: Path) -> list[Path]:
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.is_file())
    return [path]


def ingest_manifest(manifest: CorpusManifest) -> IngestResult:
    """Ingest every file of every source; unparseable files are skipped."""
    result = IngestResult()
    for source in manifest.sources:
        for file_path in _source_files(source.path):
            try:
                if source.kind == TABLES_KIND:
                    result.records.extend(
                        ingest_table_file(file_path, source.id, manifest.seed)
                    )
                else:
                    records, malformed = ingest_kg_file(file_path, source.id)
                    result.records.extend(records)
                    result.malformed_lines += malformed
                result.files_read += 1
            except MalformedFile as exc:
                logger.warning("skipping corpus file: %s", exc)
                result.skipped_files.append((str(file_path), str(exc)))
    return result


def build_concept_universe(
    records: Iterable[IndexRecord], manifest: CorpusManifest
) -> set[str]:
    """Derive the concept universe from the full record stream.

    Concepts from kg sources always qualify; concepts from table
    sources qualify when their record-level mention count (entity
    mentions, numeric ranges, pattern columns) reaches the manifest
    threshold. Tuple mentions restate other records and are not counted.
    """
    kinds = {s.id: s.kind for s in manifest.sources}
    table_counts: Counter[str] = Counter()
    kg_concepts: set[str] = set()
    for record in records:
        if isinstance(record, TupleMention):
            continue
        concept = record.concept
        if kinds.get(record.source, TABLES_KIND) == KG_KIND:
            kg_concepts.add(concept)
        else:
            table_counts[concept] += 1
    universe = kg_concepts | {
        c for c, n in table_counts.items() if n >= manifest.min_concept_frequency
    }
    if not universe:
        raise EmptyUniverse("no concept qualified for the universe")
    return universe
