"""Column annotation pipeline, from per-cell evidence to a table assignment.

Stages, in order: classify each column's kind; rank concepts for
categorical columns from the per-source entity evidence (belief-shared,
add-one smoothed, log-likelihood ensembled across sources); scope the
numeric and mixed columns to concepts that co-occur with the
categorical candidates; score those columns against their indexes;
validate candidate concept pairs against historical row tuples; and
finally pick the combination of concepts that best explains the whole
table. Every sampled choice draws from a generator seeded per column,
so a fixed (table, indexes, config) always produces the same result.
"""

from __future__ import annotations

import heapq
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .belief import ConceptRelations, share
from .cooccur_index import CooccurrenceIndex
from .entity_index import EntityConceptIndex
from .errors import (
    AllEmpty,
    EmptyTable,
    InvalidEpsilon,
    NoEvidence,
    NoParseableValues,
)
from .model import (
    CELL_LEVEL,
    COLUMN_LEVEL,
    Column,
    ColumnKind,
    ConceptDistribution,
    Table,
    classify_column,
    normalize_entity,
    parse_number,
)
from .numeric_index import IntervalCountStructure
from .pattern_index import PatternTree


@dataclass
class EstimatorConfig:
    source_weights: dict[str, float] = field(default_factory=dict)
    entity_sample_size: int = 200
    tuple_sample_rows: int = 10
    epsilon: float = 0.1
    numeric_scope_k: int = 25
    similarity_threshold: float = 0.4
    beam_width: int = 3
    seed: int = 0
    topk_internal: int = 10
    pattern_sample_size: int = 100
    max_joint_evaluations: int = 10000
    use_belief_sharing: bool = True
    use_tuple_validation: bool = True
    use_smoothing: bool = True  # test hook; never disabled in production use

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise InvalidEpsilon(f"epsilon must be in [0, 1), got {self.epsilon}")
        if self.beam_width < 1:
            raise ValueError("beam_width must be at least 1")


@dataclass
class ColumnCandidates:
    """Ranked (concept, log score) list for one column."""

    column_index: int
    kind: Optional[ColumnKind]
    ranked: list[tuple[str, float]] = field(default_factory=list)
    unannotated_reason: Optional[str] = None

    @property
    def annotated(self) -> bool:
        return bool(self.ranked)


@dataclass
class ColumnAnnotation:
    column_index: int
    header: Optional[str]
    kind: Optional[ColumnKind]
    candidates: list[tuple[str, float]]
    joint_choice: Optional[str]
    unannotated_reason: Optional[str] = None

    def to_record(self, topk: int = 3) -> dict:
        return {
            "columnIndex": self.column_index,
            "header": self.header,
            "kind": self.kind.value if self.kind else "unknown",
            "candidates": [
                {"concept": c, "logScore": s} for c, s in self.candidates[:topk]
            ],
            "jointChoice": self.joint_choice,
            "unannotated": not self.candidates,
            "reason": self.unannotated_reason,
        }


@dataclass
class AnnotationResult:
    """Per-column ranked lists plus the jointly re-ranked assignment."""

    columns: list[ColumnAnnotation]

    def to_records(self, topk: int = 3) -> list[dict]:
        return [c.to_record(topk) for c in self.columns]

    def joint_assignment(self) -> list[Optional[str]]:
        return [c.joint_choice for c in self.columns]


def _ranked_sort(scores: Iterable[tuple[str, float]]) -> list[tuple[str, float]]:
    return sorted(scores, key=lambda cs: (-cs[1], cs[0]))


class Annotator:
    """Runs the estimation pipeline against a fixed set of indexes."""

    def __init__(
        self,
        entity_index: EntityConceptIndex,
        numeric_index: Optional[IntervalCountStructure] = None,
        pattern_tree: Optional[PatternTree] = None,
        cooccur_index: Optional[CooccurrenceIndex] = None,
        relations: Optional[ConceptRelations] = None,
        config: Optional[EstimatorConfig] = None,
    ):
        self.entity_index = entity_index
        self.numeric_index = numeric_index or IntervalCountStructure.build([])
        self.pattern_tree = pattern_tree or PatternTree.build([])
        self.cooccur_index = cooccur_index or CooccurrenceIndex.build([])
        self.relations = relations
        self.config = config or EstimatorConfig()

    @classmethod
    def from_bundle(cls, bundle, config: Optional[EstimatorConfig] = None) -> "Annotator":
        return cls(
            entity_index=bundle.entity,
            numeric_index=bundle.numeric,
            pattern_tree=bundle.pattern,
            cooccur_index=bundle.cooccur,
            relations=bundle.relations,
            config=config,
        )

    def _rng(self, *parts) -> random.Random:
        return random.Random(":".join([str(self.config.seed), *map(str, parts)]))

    # -- per-cell evidence ---------------------------------------------------

    def cell_distribution(
        self, entity_key: str, source: str, candidate_universe: Iterable[str]
    ) -> ConceptDistribution:
        """Fetched counts, belief-shared, smoothed over the universe, normalized.

        Every universe concept missing from the (shared) fetched list is
        added with count 1 so unseen entities keep each candidate alive.
        An empty fetch therefore yields the uniform distribution.
        """
        fetched = self.entity_index.lookup(entity_key, source)
        counts = {concept: float(count) for concept, count in fetched}
        if self.config.use_belief_sharing and self.relations is not None and counts:
            counts = dict(
                share(counts, self.relations, self.config.similarity_threshold).entries
            )
        fill = 1.0 if self.config.use_smoothing else 0.0
        for concept in candidate_universe:
            counts.setdefault(concept, fill)
        total = sum(counts.values())
        if total > 0:
            probabilities = {c: n / total for c, n in counts.items()}
        else:
            probabilities = {c: 0.0 for c in counts}
        return ConceptDistribution(probabilities, CELL_LEVEL)

    # -- per-column candidates -------------------------------------------------

    def _column_entities(self, column: Column, column_index: int) -> list[str]:
        seen = set()
        entities = []
        for value in column.values:
            key = normalize_entity(value)
            if key and key not in seen:
                seen.add(key)
                entities.append(key)
        if len(entities) > self.config.entity_sample_size:
            rng = self._rng("entities", column_index)
            entities = rng.sample(entities, self.config.entity_sample_size)
        return entities

    def categorical_column_candidates(
        self, column: Column, column_index: int = 0
    ) -> ColumnCandidates:
        """Ensemble log likelihood over sampled distinct entities and sources.

        score(c) = sum over sources d of weight_d * sum over entities of
        ln Pr_d(entity = c), with Pr from cell_distribution over the
        union of concepts fetched for any entity from any source.
        """
        entities = self._column_entities(column, column_index)
        if not entities:
            raise NoEvidence("column has no non-empty entities")
        sources = self.entity_index.sources()
        universe: set[str] = set()
        for source in sources:
            for entity in entities:
                for concept, _ in self.entity_index.lookup(entity, source):
                    universe.add(concept)
        if not universe:
            raise NoEvidence("no entity of the column was found in any source")
        scores = {concept: 0.0 for concept in universe}
        for source in sources:
            weight = self.config.source_weights.get(source, 1.0)
            for entity in entities:
                dist = self.cell_distribution(entity, source, universe)
                for concept in universe:
                    p = dist.get(concept)
                    term = math.log(p) if p > 0 else float("-inf")
                    scores[concept] += weight * term
        ranked = _ranked_sort(
            (c, s) for c, s in scores.items() if math.isfinite(s)
        )[: self.config.topk_internal]
        return ColumnCandidates(column_index, ColumnKind.CATEGORICAL, ranked)

    def numeric_column_candidates(
        self,
        column: Column,
        column_index: int = 0,
        scope: Optional[Iterable[str]] = None,
    ) -> ColumnCandidates:
        """Interval-index scores over [min, max] of the parsed cells."""
        numbers = [
            parse_number(v) for v in column.values if v.strip()
        ]
        numbers = [x for x in numbers if x is not None]
        if not numbers:
            raise NoParseableValues("no cell parses as a number")
        dist = self.numeric_index.score_concepts(
            min(numbers), max(numbers), candidates=scope
        )
        ranked = _ranked_sort(
            (c, math.log(s)) for c, s in dist.entries.items() if s > 0
        )[: self.config.topk_internal]
        reason = None if ranked else "NoEvidence"
        return ColumnCandidates(column_index, ColumnKind.NUMERIC, ranked, reason)

    def mixed_column_candidates(
        self,
        column: Column,
        column_index: int = 0,
        scope: Optional[Iterable[str]] = None,
    ) -> ColumnCandidates:
        """Pattern-tree scores over a sample of the column's values."""
        dist = self.pattern_tree.score_concepts(
            column.values,
            candidates=scope,
            sample_size=self.config.pattern_sample_size,
            rng=self._rng("pattern", column_index),
        )
        ranked = _ranked_sort(
            (c, math.log(s)) for c, s in dist.entries.items() if s > 0
        )[: self.config.topk_internal]
        reason = None if ranked else "NoRoutedLeaves"
        return ColumnCandidates(column_index, ColumnKind.MIXED, ranked, reason)

    # -- cross-column stages ---------------------------------------------------

    def _scope_from_categorical(
        self, candidates: Sequence[ColumnCandidates]
    ) -> Optional[set[str]]:
        """Top co-occurring concepts given the categorical candidates.

        Per-column log scores become weights via a shifted softmax, so
        each categorical column contributes a distribution over its own
        candidates. Returns None (no restriction) when there is no
        categorical signal or no co-occurrence data for it.
        """
        given: dict[str, float] = defaultdict(float)
        for candidate in candidates:
            if candidate.kind is not ColumnKind.CATEGORICAL or not candidate.ranked:
                continue
            top = max(score for _, score in candidate.ranked)
            weights = [(c, math.exp(s - top)) for c, s in candidate.ranked]
            total = sum(w for _, w in weights)
            for concept, weight in weights:
                given[concept] += weight / total
        if not given:
            return None
        top = self.cooccur_index.top_cooccurring(
            ConceptDistribution(dict(given), COLUMN_LEVEL),
            k=self.config.numeric_scope_k,
        )
        return set(top) if top else None

    def tuple_validate(
        self, candidates: list[ColumnCandidates], table: Table
    ) -> list[ColumnCandidates]:
        """Boost candidates whose concept pairs match sampled row tuples.

        For each column pair with a categorical side and each candidate
        pair within the beam, the match count over the sampled rows
        multiplies both candidates' linear-space likelihoods; zero-match
        candidates are left unchanged.
        """
        if table.n_cols < 2:
            return candidates
        row_ids = list(range(table.n_rows))
        if len(row_ids) > self.config.tuple_sample_rows:
            rng = self._rng("rows")
            row_ids = sorted(rng.sample(row_ids, self.config.tuple_sample_rows))
        beam = self.config.beam_width
        boosts: dict[tuple[int, str], float] = defaultdict(float)
        for i in range(len(candidates)):
            for j in range(i + 1, len(candidates)):
                left, right = candidates[i], candidates[j]
                if not left.ranked or not right.ranked:
                    continue
                if ColumnKind.CATEGORICAL not in (left.kind, right.kind):
                    continue
                rows = []
                for r in row_ids:
                    va = normalize_entity(table.columns[i].values[r])
                    vb = normalize_entity(table.columns[j].values[r])
                    if not va or not vb:
                        continue
                    if parse_number(va) is not None and parse_number(vb) is not None:
                        continue  # matching requires a categorical side
                    rows.append((va, vb))
                if not rows:
                    continue
                for concept_a, _ in left.ranked[:beam]:
                    for concept_b, _ in right.ranked[:beam]:
                        count = sum(
                            1
                            for va, vb in rows
                            if self.cooccur_index.tuple_matches(
                                concept_a, concept_b, va, vb, self.config.epsilon
                            )
                        )
                        if count >= 1:
                            boosts[(i, concept_a)] += math.log(count)
                            boosts[(j, concept_b)] += math.log(count)
        if not boosts:
            return candidates
        adjusted = []
        for candidate in candidates:
            if not candidate.ranked:
                adjusted.append(candidate)
                continue
            ranked = _ranked_sort(
                (c, s + boosts.get((candidate.column_index, c), 0.0))
                for c, s in candidate.ranked
            )
            adjusted.append(replace(candidate, ranked=ranked))
        return adjusted

    def joint_rerank(
        self, candidates: Sequence[ColumnCandidates]
    ) -> dict[int, str]:
        """Best combination of per-column candidates with pairwise lift.

        Combination score is the sum of per-column log scores plus, for
        every column pair (i < j), ln(1 + Pr(concept_j | concept_i))
        from the co-occurrence statistics. Searched best-first over the
        per-column beams with an optimistic bound, capped at
        max_joint_evaluations expansions; ties prefer the
        lexicographically smaller concept assignment.
        """
        active = [c for c in candidates if c.ranked]
        if not active:
            return {}
        beams = [c.ranked[: self.config.beam_width] for c in active]
        k = len(beams)

        def bonus(given: str, target: str) -> float:
            return math.log1p(self.cooccur_index.pair_conditional(target, given))

        best_single = [max(s for _, s in beam) for beam in beams]
        max_pair: dict[tuple[int, int], float] = {}
        for x in range(k):
            for y in range(x + 1, k):
                max_pair[(x, y)] = max(
                    bonus(a, b) for a, _ in beams[x] for b, _ in beams[y]
                )
        optimistic = [0.0] * (k + 1)
        for t in range(k - 1, -1, -1):
            optimistic[t] = (
                optimistic[t + 1]
                + best_single[t]
                + sum(max_pair[(x, t)] for x in range(t))
            )

        heap = [(-optimistic[0], (), 0.0)]
        best_assignment: Optional[tuple[str, ...]] = None
        best_score = -math.inf
        expansions = 0
        while heap:
            neg_f, assignment, g = heapq.heappop(heap)
            depth = len(assignment)
            if depth == k:
                best_assignment, best_score = assignment, g
                break  # admissible bound: first complete pop is optimal
            expansions += 1
            if expansions > self.config.max_joint_evaluations:
                break
            for concept, score in beams[depth]:
                g2 = g + score + sum(
                    bonus(assignment[u], concept) for u in range(depth)
                )
                extended = assignment + (concept,)
                if len(extended) == k and (
                    g2 > best_score
                    or (g2 == best_score and best_assignment is not None
                        and extended < best_assignment)
                ):
                    best_assignment, best_score = extended, g2
                heapq.heappush(heap, (-(g2 + optimistic[depth + 1]), extended, g2))
        if best_assignment is None:
            best_assignment = tuple(beam[0][0] for beam in beams)
        return {
            candidate.column_index: concept
            for candidate, concept in zip(active, best_assignment)
        }

    # -- the full pipeline -----------------------------------------------------

    def annotate(self, table: Table) -> AnnotationResult:
        """Classify, rank, scope, validate, and jointly re-rank a table.

        Per-column failures (all-empty columns, unknown entities,
        unparseable numbers, unrouted patterns) mark that column
        unannotated and never fail the rest of the table.
        """
        if table.n_cols == 0 or table.n_rows == 0:
            raise EmptyTable("nothing to annotate")
        candidates: list[Optional[ColumnCandidates]] = [None] * table.n_cols
        kinds: list[Optional[ColumnKind]] = []
        for index, column in enumerate(table.columns):
            try:
                kinds.append(classify_column(column.values))
            except AllEmpty:
                kinds.append(None)
                candidates[index] = ColumnCandidates(index, None, [], "AllEmpty")

        # categorical columns first: their candidates anchor the scope
        for index, column in enumerate(table.columns):
            if kinds[index] is ColumnKind.CATEGORICAL:
                try:
                    candidates[index] = self.categorical_column_candidates(column, index)
                except NoEvidence:
                    candidates[index] = ColumnCandidates(
                        index, ColumnKind.CATEGORICAL, [], "NoEvidence"
                    )
        scope = self._scope_from_categorical(
            [c for c in candidates if c is not None]
        )
        for index, column in enumerate(table.columns):
            if kinds[index] is ColumnKind.NUMERIC:
                try:
                    candidates[index] = self.numeric_column_candidates(
                        column, index, scope
                    )
                except NoParseableValues:
                    candidates[index] = ColumnCandidates(
                        index, ColumnKind.NUMERIC, [], "NoParseableValues"
                    )
            elif kinds[index] is ColumnKind.MIXED:
                candidates[index] = self.mixed_column_candidates(column, index, scope)

        resolved = [c for c in candidates if c is not None]
        if self.config.use_tuple_validation:
            resolved = self.tuple_validate(resolved, table)
        assignment = self.joint_rerank(resolved)

        by_index = {c.column_index: c for c in resolved}
        annotations = []
        for index, column in enumerate(table.columns):
            candidate = by_index[index]
            annotations.append(
                ColumnAnnotation(
                    column_index=index,
                    header=column.header,
                    kind=candidate.kind,
                    candidates=list(candidate.ranked),
                    joint_choice=assignment.get(index),
                    unannotated_reason=candidate.unannotated_reason,
                )
            )
        return AnnotationResult(annotations)


def annotate(table: Table, bundle, config: Optional[EstimatorConfig] = None) -> AnnotationResult:
    """Convenience wrapper: annotate a table against a loaded index bundle."""
    return Annotator.from_bundle(bundle, config).annotate(table)
