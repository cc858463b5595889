"""Inverted index from entity key to per-source (concept, count) lists."""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable

from ._files import atomic_write_text, canonical_json, sha256_bytes
from .errors import CorruptIndex, UnknownSource
from .ingest import EntityMention
from .model import normalize_entity

ConceptCountList = list[tuple[str, int]]


class EntityConceptIndex:
    """Exact aggregation of entity mentions, kept separately per source.

    Lookups are plain dictionary reads; the index is immutable once
    built, so any number of readers can share it.
    """

    def __init__(self, data: dict[str, dict[str, tuple[tuple[str, int], ...]]]):
        self._data = data

    @classmethod
    def build(cls, records: Iterable[EntityMention]) -> "EntityConceptIndex":
        counts: dict[str, dict[str, Counter]] = defaultdict(
            lambda: defaultdict(Counter)
        )
        for record in records:
            counts[record.source][record.entity][record.concept] += 1
        data = {}
        for source, entities in counts.items():
            data[source] = {
                entity: tuple(
                    sorted(concepts.items(), key=lambda cn: (-cn[1], cn[0]))
                )
                for entity, concepts in entities.items()
            }
        return cls(data)

    def sources(self) -> list[str]:
        return sorted(self._data)

    def entity_count(self, source: str) -> int:
        if source not in self._data:
            raise UnknownSource(source)
        return len(self._data[source])

    def lookup(self, entity: str, source: str) -> ConceptCountList:
        """(concept, count) pairs for an entity in one source, highest first."""
        if source not in self._data:
            raise UnknownSource(source)
        key = normalize_entity(entity)
        return list(self._data[source].get(key, ()))

    # -- persistence: one sorted tsv per source plus a checksummed manifest

    def persist(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {}
        for source in self.sources():
            lines = []
            for entity in sorted(self._data[source]):
                for concept, count in sorted(self._data[source][entity]):
                    lines.append(f"{entity}\t{concept}\t{count}")
            content = "\n".join(lines) + ("\n" if lines else "")
            file_name = f"{source}.tsv"
            atomic_write_text(directory / file_name, content)
            manifest[source] = {
                "file": file_name,
                "lines": len(lines),
                "sha256": sha256_bytes(content.encode("utf-8")),
            }
        atomic_write_text(directory / "manifest.json", canonical_json({"sources": manifest}))

    @classmethod
    def load(cls, directory: Path | str) -> "EntityConceptIndex":
        directory = Path(directory)
        manifest_path = directory / "manifest.json"
        if not manifest_path.exists():
            raise CorruptIndex(f"missing {manifest_path}")
        try:
            manifest = json.loads(manifest_path.read_text("utf-8"))
            sources = manifest["sources"]
        except (ValueError, KeyError) as exc:
            raise CorruptIndex(f"bad manifest {manifest_path}: {exc}") from exc
        data: dict[str, dict[str, tuple[tuple[str, int], ...]]] = {}
        for source, meta in sources.items():
            file_path = directory / meta["file"]
            if not file_path.exists():
                raise CorruptIndex(f"missing {file_path}")
            raw = file_path.read_bytes()
            if sha256_bytes(raw) != meta["sha256"]:
                raise CorruptIndex(f"checksum mismatch for {file_path}")
            text = raw.decode("utf-8")
            lines = text.splitlines()
            if len(lines) != meta["lines"]:
                raise CorruptIndex(f"line count mismatch for {file_path}")
            entities: dict[str, Counter] = defaultdict(Counter)
            for line in lines:
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorruptIndex(f"bad line in {file_path}: {line!r}")
                entity, concept, count_text = parts
                try:
                    count = int(count_text)
                except ValueError as exc:
                    raise CorruptIndex(f"bad count in {file_path}: {line!r}") from exc
                if count < 1:
                    raise CorruptIndex(f"non-positive count in {file_path}: {line!r}")
                entities[entity][concept] += count
            data[source] = {
                entity: tuple(
                    sorted(concepts.items(), key=lambda cn: (-cn[1], cn[0]))
                )
                for entity, concepts in entities.items()
            }
        return cls(data)
