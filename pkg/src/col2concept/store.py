"""Build, persist, and load the full index bundle.

Layout under an index directory:

    index.json          build metadata (seed, sources, universe size)
    entity/             per-source entity tsv files + checksummed manifest
    numeric/            per-concept endpoint arrays + directory.json
    pattern/            tree.json + per-concept pattern files
    cooccur/            pairs.tsv + per-pair tuple files
    belief/             copies of synonym / hierarchy / embedding files
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ._files import atomic_write_text, canonical_json
from .belief import ConceptRelations
from .cooccur_index import CooccurrenceIndex
from .entity_index import EntityConceptIndex
from .errors import CorruptIndex
from .ingest import (
    CorpusManifest,
    EntityMention,
    NumericColumnRange,
    PatternColumn,
    TupleMention,
    build_concept_universe,
    ingest_manifest,
)
from .numeric_index import IntervalCountStructure
from .pattern_index import PatternTree

INDEX_META = "index.json"
FORMAT_VERSION = 1

_BELIEF_FILES = {"synonyms": "synonyms.tsv", "hierarchy": "hierarchy.tsv", "embeddings": "embeddings.txt"}


@dataclass
class IndexBundle:
    entity: EntityConceptIndex
    numeric: IntervalCountStructure
    pattern: PatternTree
    cooccur: CooccurrenceIndex
    relations: Optional[ConceptRelations] = None
    metadata: dict = field(default_factory=dict)

    def source_weights(self) -> dict[str, float]:
        return {
            s["id"]: float(s.get("weight", 1.0))
            for s in self.metadata.get("sources", [])
        }


@dataclass
class BuildSummary:
    files_read: int
    skipped_files: list[tuple[str, str]]
    malformed_lines: int
    record_counts: dict[str, int]
    filtered_out: int
    universe_size: int
    source_count: int

    def lines(self) -> list[str]:
        out = [
            f"sources: {self.source_count}",
            f"files read: {self.files_read}",
            f"files skipped: {len(self.skipped_files)}",
            f"malformed triple lines: {self.malformed_lines}",
            f"concept universe size: {self.universe_size}",
            f"records dropped by universe filter: {self.filtered_out}",
        ]
        for name in sorted(self.record_counts):
            out.append(f"records [{name}]: {self.record_counts[name]}")
        for path, reason in self.skipped_files:
            out.append(f"skipped: {path} ({reason})")
        return out


def build_indexes(manifest: CorpusManifest) -> tuple[IndexBundle, BuildSummary]:
    """Ingest the corpus, derive the universe, and build all four indexes.

    Records whose concept falls outside the universe are dropped before
    index construction; tuple mentions need both concepts inside.
    """
    ingested = ingest_manifest(manifest)
    universe = build_concept_universe(ingested.records, manifest)

    mentions, ranges, patterns, tuples = [], [], [], []
    filtered_out = 0
    for record in ingested.records:
        if isinstance(record, EntityMention):
            if record.concept in universe:
                mentions.append(record)
            else:
                filtered_out += 1
        elif isinstance(record, NumericColumnRange):
            if record.concept in universe:
                ranges.append(record)
            else:
                filtered_out += 1
        elif isinstance(record, PatternColumn):
            if record.concept in universe:
                patterns.append(record)
            else:
                filtered_out += 1
        elif isinstance(record, TupleMention):
            if record.concept_a in universe and record.concept_b in universe:
                tuples.append(record)
            else:
                filtered_out += 1

    bundle = IndexBundle(
        entity=EntityConceptIndex.build(mentions),
        numeric=IntervalCountStructure.build(ranges),
        pattern=PatternTree.build(patterns, seed=manifest.seed),
        cooccur=CooccurrenceIndex.build(tuples),
        relations=ConceptRelations.load(
            manifest.synonyms, manifest.hierarchy, manifest.embeddings
        ),
        metadata={
            "format_version": FORMAT_VERSION,
            "seed": manifest.seed,
            "min_concept_frequency": manifest.min_concept_frequency,
            "universe_size": len(universe),
            "sources": [
                {"id": s.id, "kind": s.kind, "weight": s.weight}
                for s in sorted(manifest.sources, key=lambda s: s.id)
            ],
            "belief_sources": {
                "synonyms": str(manifest.synonyms) if manifest.synonyms else None,
                "hierarchy": str(manifest.hierarchy) if manifest.hierarchy else None,
                "embeddings": str(manifest.embeddings) if manifest.embeddings else None,
            },
        },
    )
    summary = BuildSummary(
        files_read=ingested.files_read,
        skipped_files=ingested.skipped_files,
        malformed_lines=ingested.malformed_lines,
        record_counts={
            "entity mentions": len(mentions),
            "numeric ranges": len(ranges),
            "pattern columns": len(patterns),
            "tuple mentions": len(tuples),
        },
        filtered_out=filtered_out,
        universe_size=len(universe),
        source_count=len(manifest.sources),
    )
    return bundle, summary


def save_bundle(bundle: IndexBundle, out_dir: Path | str) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bundle.entity.persist(out_dir / "entity")
    bundle.numeric.persist(out_dir / "numeric")
    bundle.pattern.persist(out_dir / "pattern")
    bundle.cooccur.persist(out_dir / "cooccur")

    metadata = dict(bundle.metadata)
    belief_sources = metadata.pop("belief_sources", {})
    belief_files = {}
    for key, file_name in _BELIEF_FILES.items():
        source_path = belief_sources.get(key)
        if source_path:
            (out_dir / "belief").mkdir(parents=True, exist_ok=True)
            shutil.copyfile(source_path, out_dir / "belief" / file_name)
            belief_files[key] = f"belief/{file_name}"
        else:
            belief_files[key] = None
    metadata["belief"] = belief_files
    atomic_write_text(out_dir / INDEX_META, canonical_json(metadata))


def load_bundle(index_dir: Path | str) -> IndexBundle:
    index_dir = Path(index_dir)
    meta_path = index_dir / INDEX_META
    if not meta_path.exists():
        raise CorruptIndex(f"missing {meta_path}")
    try:
        metadata = json.loads(meta_path.read_text("utf-8"))
    except ValueError as exc:
        raise CorruptIndex(f"bad {meta_path}: {exc}") from exc
    belief = metadata.get("belief", {})

    def belief_path(key: str) -> Optional[Path]:
        rel = belief.get(key)
        return index_dir / rel if rel else None

    return IndexBundle(
        entity=EntityConceptIndex.load(index_dir / "entity"),
        numeric=IntervalCountStructure.load(index_dir / "numeric"),
        pattern=PatternTree.load(index_dir / "pattern"),
        cooccur=CooccurrenceIndex.load(index_dir / "cooccur"),
        relations=ConceptRelations.load(
            belief_path("synonyms"), belief_path("hierarchy"), belief_path("embeddings")
        ),
        metadata=metadata,
    )
