"""Concept-pair frequencies and the entity pairs seen under each pair.

pair_frequency counts distinct corpus column pairs for a concept pair
(either argument order); concept_frequency counts the column pairs a
concept participates in. The tuple store keeps row-level value pairs
and answers existence queries with exact matching on categorical sides
and multiplicative tolerance on numeric sides.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union

from ._files import atomic_write_text, canonical_json, concept_hash
from .errors import BothNumeric, CorruptIndex, InvalidEpsilon
from .ingest import TupleMention
from .model import ConceptDistribution, normalize_entity, parse_number

DEFAULT_EPSILON = 0.1
DEFAULT_TOP_K = 25


def _canonical(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


class CooccurrenceIndex:
    def __init__(
        self,
        pair_freq: dict[tuple[str, str], int],
        tuples: dict[tuple[str, str], Counter],
    ):
        self._pair_freq = pair_freq
        self._tuples = tuples
        self._concept_freq: Counter[str] = Counter()
        self._partners: dict[str, set[str]] = defaultdict(set)
        for (a, b), count in pair_freq.items():
            self._concept_freq[a] += count
            if b != a:
                self._concept_freq[b] += count
            self._partners[a].add(b)
            self._partners[b].add(a)

    @classmethod
    def build(cls, records: Iterable[TupleMention]) -> "CooccurrenceIndex":
        pair_freq: Counter[tuple[str, str]] = Counter()
        seen_pairs: set[tuple[tuple[str, str], str]] = set()
        tuples: dict[tuple[str, str], Counter] = defaultdict(Counter)
        for record in records:
            pair = _canonical(record.concept_a, record.concept_b)
            values = (record.value_a, record.value_b)
            if pair != (record.concept_a, record.concept_b):
                values = (record.value_b, record.value_a)
            key = (pair, record.pair_id)
            if key not in seen_pairs:
                seen_pairs.add(key)
                pair_freq[pair] += 1
            tuples[pair][values] += 1
        return cls(dict(pair_freq), dict(tuples))

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self._pair_freq)

    def pair_frequency(self, a: str, b: str) -> int:
        return self._pair_freq.get(_canonical(a, b), 0)

    def concept_frequency(self, concept: str) -> int:
        return self._concept_freq.get(concept, 0)

    def tuple_count(self, a: str, b: str, value_a: str, value_b: str) -> int:
        pair = _canonical(a, b)
        values = (value_a, value_b) if pair == (a, b) else (value_b, value_a)
        return self._tuples.get(pair, Counter()).get(values, 0)

    def pair_conditional(self, target: str, given: str) -> float:
        """Pr(target co-occurs | given), from column-pair frequencies."""
        given_freq = self._concept_freq.get(given, 0)
        if given_freq == 0:
            return 0.0
        return self.pair_frequency(given, target) / given_freq

    def top_cooccurring(
        self,
        given: Union[Mapping[str, float], ConceptDistribution],
        k: int = DEFAULT_TOP_K,
    ) -> list[str]:
        """Top-k targets by expected conditional over the given weights.

        Each target scores sum(weight * Pr(target | given concept));
        zero scorers are excluded and ties break lexicographically.
        """
        weights = given.entries if isinstance(given, ConceptDistribution) else given
        scores: dict[str, float] = defaultdict(float)
        for concept, weight in weights.items():
            for partner in self._partners.get(concept, ()):
                scores[partner] += weight * self.pair_conditional(partner, concept)
        ranked = sorted(
            (c for c, s in scores.items() if s > 0),
            key=lambda c: (-scores[c], c),
        )
        return ranked[:k]

    def tuple_matches(
        self,
        concept_a: str,
        concept_b: str,
        value_a: str,
        value_b: str,
        epsilon: float = DEFAULT_EPSILON,
    ) -> bool:
        """True when a stored entry under the pair matches the value pair.

        Categorical sides must match exactly after normalization; a
        numeric side v matches a stored s when |v - s| <= epsilon * |s|
        (s = 0 requires v = 0). At least one side must be categorical.
        """
        if not 0 <= epsilon < 1:
            raise InvalidEpsilon(f"epsilon must be in [0, 1), got {epsilon}")
        va = normalize_entity(str(value_a))
        vb = normalize_entity(str(value_b))
        na, nb = parse_number(va), parse_number(vb)
        if na is not None and nb is not None:
            raise BothNumeric("tuple matching needs at least one categorical value")
        pair = _canonical(concept_a, concept_b)
        if pair != (concept_a, concept_b):
            va, vb = vb, va
            na, nb = nb, na
        entries = self._tuples.get(pair)
        if not entries:
            return False
        if na is None and nb is None:
            return (va, vb) in entries
        for stored_a, stored_b in entries:
            if _side_matches(va, na, stored_a, epsilon) and _side_matches(
                vb, nb, stored_b, epsilon
            ):
                return True
        return False

    # -- persistence: pairs.tsv plus one tuple file per pair

    def persist(self, directory: Path | str) -> None:
        directory = Path(directory)
        tuples_dir = directory / "tuples"
        tuples_dir.mkdir(parents=True, exist_ok=True)
        pair_lines = []
        file_map = {}
        for a, b in self.pairs():
            pair_lines.append(f"{a}\t{b}\t{self._pair_freq[(a, b)]}")
            entries = self._tuples.get((a, b), Counter())
            lines = [
                f"{va}\t{vb}\t{count}"
                for (va, vb), count in sorted(entries.items())
            ]
            file_name = f"{concept_hash(a + chr(9) + b)}.tsv"
            file_map[f"{a}\t{b}"] = file_name
            atomic_write_text(
                tuples_dir / file_name, "\n".join(lines) + ("\n" if lines else "")
            )
        atomic_write_text(
            directory / "pairs.tsv", "\n".join(pair_lines) + ("\n" if pair_lines else "")
        )
        atomic_write_text(directory / "tuple_files.json", canonical_json(file_map))

    @classmethod
    def load(cls, directory: Path | str) -> "CooccurrenceIndex":
        directory = Path(directory)
        pairs_path = directory / "pairs.tsv"
        if not pairs_path.exists():
            raise CorruptIndex(f"missing {pairs_path}")
        pair_freq: dict[tuple[str, str], int] = {}
        for line in pairs_path.read_text("utf-8").splitlines():
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorruptIndex(f"bad line in {pairs_path}: {line!r}")
            try:
                pair_freq[(parts[0], parts[1])] = int(parts[2])
            except ValueError as exc:
                raise CorruptIndex(f"bad count in {pairs_path}: {line!r}") from exc
        tuples: dict[tuple[str, str], Counter] = {}
        for a, b in pair_freq:
            file_path = directory / "tuples" / f"{concept_hash(a + chr(9) + b)}.tsv"
            if not file_path.exists():
                raise CorruptIndex(f"missing {file_path}")
            entries: Counter = Counter()
            for line in file_path.read_text("utf-8").splitlines():
                parts = line.split("\t")
                if len(parts) != 3:
                    raise CorruptIndex(f"bad line in {file_path}: {line!r}")
                try:
                    entries[(parts[0], parts[1])] += int(parts[2])
                except ValueError as exc:
                    raise CorruptIndex(f"bad count in {file_path}: {line!r}") from exc
            tuples[(a, b)] = entries
        return cls(pair_freq, tuples)


def _side_matches(query: str, query_num: Optional[float], stored: str, epsilon: float) -> bool:
    if query_num is None:
        return query == stored
    stored_num = parse_number(stored)
    if stored_num is None:
        return False
    if stored_num == 0:
        return query_num == 0
    return abs(query_num - stored_num) <= epsilon * abs(stored_num)
