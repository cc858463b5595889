"""Belief sharing across synonymous, hierarchical, and similar concepts.

Counts fetched from the entity index treat concept labels as
independent, which undercounts concepts that different sources name
differently. Sharing adjusts a belief map in three exclusive tiers per
unordered concept pair:

  1. synonyms: every present member of a synonym set is replaced by the
     set's summed count;
  2. hierarchy: a parent passes its full count to its present children
     in proportion to their counts, and each child passes half of its
     count to the parent, all sides retaining their own;
  3. similarity: remaining pairs at or above the threshold gain each
     other's count scaled by the similarity.

All transfer amounts are computed from the counts as they stood before
sharing, so the result does not depend on pair order, and no count ever
decreases. The adjusted counts are not a probability distribution.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .errors import CyclicHierarchy, DataError
from .model import normalize_concept

DEFAULT_SIMILARITY_THRESHOLD = 0.4


@dataclass(frozen=True)
class SharedBelief:
    """Adjusted concept counts; every input concept is present."""

    entries: dict[str, float] = field(default_factory=dict)

    def __getitem__(self, concept: str) -> float:
        return self.entries[concept]

    def as_probabilities(self, original_total: float) -> dict[str, float]:
        """Adjusted counts over the pre-sharing total (may sum past 1)."""
        return {c: v / original_total for c, v in self.entries.items()}


class ConceptRelations:
    """Synonym sets, a parent/child hierarchy, and label embeddings."""

    def __init__(
        self,
        synonym_sets: Iterable[Iterable[str]] = (),
        hierarchy_edges: Iterable[tuple[str, str]] = (),
        embeddings: Optional[Mapping[str, np.ndarray]] = None,
    ):
        self._group_of: dict[str, frozenset[str]] = {}
        for raw_set in synonym_sets:
            members = {normalize_concept(m) for m in raw_set}
            members = {m for m in members if m}
            if len(members) < 2:
                continue
            # merge overlapping sets so synonym sets stay disjoint
            for member in list(members):
                if member in self._group_of:
                    members |= self._group_of[member]
            group = frozenset(members)
            for member in group:
                self._group_of[member] = group

        self._children: dict[str, set[str]] = defaultdict(set)
        self._parents: dict[str, set[str]] = defaultdict(set)
        for parent, child in hierarchy_edges:
            parent, child = normalize_concept(parent), normalize_concept(child)
            if not parent or not child or parent == child:
                raise DataError(f"bad hierarchy edge: {parent!r} -> {child!r}")
            self._children[parent].add(child)
            self._parents[child].add(parent)
        self._check_acyclic()

        self._embeddings = dict(embeddings or {})
        self._vector_cache: dict[str, Optional[np.ndarray]] = {}
        self._sim_cache: dict[tuple[str, str], float] = {}

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(node: str) -> None:
            state[node] = 1
            for child in self._children.get(node, ()):
                mark = state.get(child)
                if mark == 1:
                    raise CyclicHierarchy(f"cycle through {child!r}")
                if mark is None:
                    visit(child)
            state[node] = 2

        for node in list(self._children):
            if state.get(node) is None:
                visit(node)

    @classmethod
    def load(
        cls,
        synonyms_path: Optional[Path | str] = None,
        hierarchy_path: Optional[Path | str] = None,
        embeddings_path: Optional[Path | str] = None,
    ) -> "ConceptRelations":
        synonym_sets = (
            load_synonym_sets(synonyms_path) if synonyms_path is not None else []
        )
        edges = (
            load_hierarchy_edges(hierarchy_path) if hierarchy_path is not None else []
        )
        embeddings = (
            load_embeddings(embeddings_path) if embeddings_path is not None else None
        )
        return cls(synonym_sets, edges, embeddings)

    @property
    def is_empty(self) -> bool:
        return not self._group_of and not self._children and not self._embeddings

    def synonym_set(self, concept: str) -> Optional[frozenset[str]]:
        return self._group_of.get(concept)

    def children(self, concept: str) -> frozenset[str]:
        return frozenset(self._children.get(concept, ()))

    def parents(self, concept: str) -> frozenset[str]:
        return frozenset(self._parents.get(concept, ()))

    def has_hierarchy_edge(self, a: str, b: str) -> bool:
        return b in self._children.get(a, ()) or a in self._children.get(b, ())

    def _vector(self, label: str) -> Optional[np.ndarray]:
        if label in self._vector_cache:
            return self._vector_cache[label]
        vectors = [self._embeddings[t] for t in label.split() if t in self._embeddings]
        result = np.mean(vectors, axis=0) if vectors else None
        self._vector_cache[label] = result
        return result

    def similarity(self, a: str, b: str) -> float:
        """Cosine similarity of label vectors; out-of-vocabulary gives 0."""
        if a == b:
            return 1.0 if self._vector(a) is not None else 0.0
        key = (a, b) if a <= b else (b, a)
        cached = self._sim_cache.get(key)
        if cached is not None:
            return cached
        va, vb = self._vector(a), self._vector(b)
        if va is None or vb is None:
            value = 0.0
        else:
            denom = float(np.linalg.norm(va) * np.linalg.norm(vb))
            value = float(np.dot(va, vb) / denom) if denom > 0 else 0.0
            value = max(-1.0, min(1.0, value))
        self._sim_cache[key] = value
        return value


def load_synonym_sets(path: Path | str) -> list[set[str]]:
    """One synonym set per line, tab-separated labels."""
    sets = []
    for line in Path(path).read_text("utf-8").splitlines():
        members = {normalize_concept(p) for p in line.split("\t")}
        members = {m for m in members if m}
        if len(members) >= 2:
            sets.append(members)
    return sets


def load_hierarchy_edges(path: Path | str) -> list[tuple[str, str]]:
    """Lines of "parent<TAB>child"."""
    edges = []
    for line in Path(path).read_text("utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"bad hierarchy line: {line!r}")
        edges.append((parts[0], parts[1]))
    return edges


def load_embeddings(path: Path | str) -> dict[str, np.ndarray]:
    """Text embeddings, one "token v1 v2 ... vD" line per token.

    A leading "count dim" header line (word2vec text convention) is
    skipped. All vectors must share one dimension.
    """
    embeddings: dict[str, np.ndarray] = {}
    dimension: Optional[int] = None
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines()):
        parts = line.split()
        if not parts:
            continue
        if line_no == 0 and len(parts) == 2:
            try:
                int(parts[0]), int(parts[1])
                continue
            except ValueError:
                pass
        token = normalize_concept(parts[0])
        try:
            vector = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise DataError(f"bad embedding line {line_no + 1}: {line!r}") from exc
        if vector.size == 0:
            raise DataError(f"embedding line {line_no + 1} has no components")
        if dimension is None:
            dimension = vector.size
        elif vector.size != dimension:
            raise DataError(
                f"embedding dimension mismatch on line {line_no + 1}: "
                f"{vector.size} != {dimension}"
            )
        embeddings[token] = vector
    return embeddings


def share(
    beliefs: Mapping[str, float],
    relations: Optional[ConceptRelations],
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> SharedBelief:
    """Redistribute counts across related concepts (see module docstring)."""
    original = {c: float(n) for c, n in beliefs.items()}
    concepts = sorted(original)
    base = dict(original)
    if relations is None or relations.is_empty or len(concepts) < 2:
        return SharedBelief(base)

    consumed: set[frozenset[str]] = set()

    # tier 1: synonym groups replace every present member with the group sum
    seen_groups: set[frozenset[str]] = set()
    for concept in concepts:
        group = relations.synonym_set(concept)
        if group is None or group in seen_groups:
            continue
        seen_groups.add(group)
        present = [c for c in concepts if c in group]
        if len(present) < 2:
            continue
        merged = sum(original[c] for c in present)
        for member in present:
            base[member] = merged
        for i, a in enumerate(present):
            for b in present[i + 1 :]:
                consumed.add(frozenset((a, b)))

    # tiers 2 and 3 add transfers computed from the original counts
    delta: dict[str, float] = defaultdict(float)
    for parent in concepts:
        kids = [
            child
            for child in sorted(relations.children(parent))
            if child in original and frozenset((parent, child)) not in consumed
        ]
        if not kids:
            continue
        kid_total = sum(original[k] for k in kids)
        for kid in kids:
            if kid_total > 0:
                delta[kid] += original[parent] * (original[kid] / kid_total)
            delta[parent] += original[kid] / 2.0
            consumed.add(frozenset((parent, kid)))

    for i, a in enumerate(concepts):
        for b in concepts[i + 1 :]:
            pair = frozenset((a, b))
            if pair in consumed or relations.has_hierarchy_edge(a, b):
                continue
            similarity = relations.similarity(a, b)
            if similarity >= threshold:
                delta[a] += similarity * original[b]
                delta[b] += similarity * original[a]

    return SharedBelief({c: base[c] + delta[c] for c in concepts})
