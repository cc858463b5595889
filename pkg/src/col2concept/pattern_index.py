"""Pattern tree for mixed alphanumeric-symbolic columns.

A value is summarized by its symbol signature, the codepoint-sorted set
of distinct non-alphanumeric, non-space characters it contains. Corpus
columns of one concept are clustered by majority signature; clusters
covering at least 10% of the concept's columns become leaves, each
holding up to 100 regex patterns generalized from member columns. A
query value routes to every leaf whose signature is a subset of the
value's own signature, so "@dan.singer" can reach both an email leaf
and a handle leaf. Scoring mirrors the numeric index: the match
fraction of sampled column values times the concept's share of all
mixed columns seen.

Patterns use run-length character classes: each value is a sequence of
(class, length) runs over letters, digits, and literal symbols; runs
merge across a sample into bounded repetitions such as ``\\d{2,4}``.
Samples that mix different run structures generalize to an anchored
alternation. Stored patterns match the normalized (casefolded,
whitespace-collapsed) form of the values they came from; externally
supplied pattern files must target the same form.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ._files import atomic_write_text, canonical_json, concept_hash
from .errors import CorruptIndex, EmptySample
from .ingest import PatternColumn
from .model import UNNORMALIZED_SCORES, ConceptDistribution, normalize_entity

SIGNATURE_CLUSTER_FRACTION = 0.10
MAX_LEAF_PATTERNS = 100
SCORE_SAMPLE_SIZE = 100


def symbol_signature(value: str) -> str:
    """Codepoint-sorted distinct symbols (non-alphanumeric, non-space)."""
    return "".join(sorted({ch for ch in value if not ch.isalnum() and not ch.isspace()}))


# -- regex generalization ----------------------------------------------------

_ALPHA = "alpha"
_DIGIT = "digit"


@dataclass
class _Run:
    kind: str  # _ALPHA, _DIGIT, or a literal character
    min_len: int
    max_len: int
    lower: bool = False
    upper: bool = False


def _value_runs(value: str) -> list[_Run]:
    runs: list[_Run] = []
    for ch in value:
        if ch.isdigit():
            kind = _DIGIT
        elif ch.isalpha():
            kind = _ALPHA
        else:
            kind = ch
        if runs and runs[-1].kind == kind:
            runs[-1].min_len += 1
            runs[-1].max_len += 1
        else:
            runs.append(_Run(kind, 1, 1))
        if kind == _ALPHA:
            runs[-1].lower |= ch.islower()
            runs[-1].upper |= ch.isupper()
    return runs


def _merge_into(merged: list[_Run], runs: list[_Run]) -> None:
    for target, run in zip(merged, runs):
        target.min_len = min(target.min_len, run.min_len)
        target.max_len = max(target.max_len, run.max_len)
        target.lower |= run.lower
        target.upper |= run.upper


def _quantifier(lo: int, hi: int) -> str:
    return "{%d}" % lo if lo == hi else "{%d,%d}" % (lo, hi)


def _render(runs: Sequence[_Run]) -> str:
    parts = []
    for run in runs:
        if run.kind == _DIGIT:
            parts.append(r"\d" + _quantifier(run.min_len, run.max_len))
        elif run.kind == _ALPHA:
            if run.lower and run.upper:
                cls = "[A-Za-z]"
            elif run.upper:
                cls = "[A-Z]"
            else:
                cls = "[a-z]"
            parts.append(cls + _quantifier(run.min_len, run.max_len))
        else:
            literal = re.escape(run.kind)
            if run.min_len == run.max_len == 1:
                parts.append(literal)
            else:
                parts.append(literal + _quantifier(run.min_len, run.max_len))
    return "".join(parts)


def _structure_bodies(values: Iterable[str]) -> list[str]:
    """One rendered body per distinct run structure in the sample."""
    groups: dict[tuple[str, ...], list[_Run]] = {}
    for value in values:
        runs = _value_runs(value)
        key = tuple(run.kind for run in runs)
        if key in groups:
            _merge_into(groups[key], runs)
        else:
            groups[key] = runs
    return sorted(_render(runs) for runs in groups.values())


def generalize_pattern(values: Iterable[str]) -> str:
    """Anchored regex matching every non-empty input value.

    Values sharing one run structure merge into a single body with
    length ranges; a structurally mixed sample becomes an alternation.
    """
    kept = [v for v in values if v]
    if not kept:
        raise EmptySample("no non-empty values to generalize")
    bodies = _structure_bodies(kept)
    if len(bodies) == 1:
        return "^" + bodies[0] + "$"
    return "^(?:" + "|".join(bodies) + ")$"


def _column_patterns(values: Iterable[str]) -> list[str]:
    """One anchored pattern per run structure found in a corpus column."""
    kept = [v for v in values if v]
    if not kept:
        return []
    return ["^" + body + "$" for body in _structure_bodies(kept)]


# -- the tree ----------------------------------------------------------------


@dataclass
class PatternLeaf:
    concept: str
    signature: str
    patterns: tuple[str, ...]
    columns: int  # corpus columns in this cluster
    _compiled: list[re.Pattern] = field(default_factory=list, repr=False)

    def __post_init__(self):
        self._compiled = [re.compile(p) for p in self.patterns]

    def matches(self, value: str) -> bool:
        return any(rx.fullmatch(value) for rx in self._compiled)


class PatternTree:
    """Signature-routed regex clusters with per-concept column priors."""

    def __init__(
        self,
        leaves: Sequence[PatternLeaf],
        concept_columns: dict[str, int],
        total_columns: int,
    ):
        self._leaves = sorted(leaves, key=lambda l: (l.concept, l.signature))
        self._concept_columns = concept_columns
        self._total_columns = total_columns

    @classmethod
    def build(cls, records: Iterable[PatternColumn], seed: int = 0) -> "PatternTree":
        columns = [r for r in records if any(v for v in r.values)]
        concept_columns = Counter(r.concept for r in columns)
        clusters: dict[tuple[str, str], list[PatternColumn]] = defaultdict(list)
        for record in columns:
            sig_counts = Counter(symbol_signature(v) for v in record.values if v)
            majority = min(sig_counts.items(), key=lambda sc: (-sc[1], sc[0]))[0]
            clusters[(record.concept, majority)].append(record)
        leaves = []
        for concept, signature in sorted(clusters):
            members = clusters[(concept, signature)]
            if len(members) * 10 < concept_columns[concept]:
                continue
            candidates = set()
            for member in members:
                candidates.update(_column_patterns(member.values))
            patterns = sorted(candidates)
            if len(patterns) > MAX_LEAF_PATTERNS:
                rng = random.Random(f"{seed}:{concept}:{signature}")
                patterns = sorted(rng.sample(patterns, MAX_LEAF_PATTERNS))
            leaves.append(PatternLeaf(concept, signature, tuple(patterns), len(members)))
        return cls(leaves, dict(concept_columns), sum(concept_columns.values()))

    @property
    def leaves(self) -> list[PatternLeaf]:
        return list(self._leaves)

    def concept_column_count(self, concept: str) -> int:
        return self._concept_columns.get(concept, 0)

    def total_columns(self) -> int:
        return self._total_columns

    def route(self, value: str) -> list[PatternLeaf]:
        """All leaves whose signature is a subset of the value's signature."""
        available = set(symbol_signature(value))
        return [leaf for leaf in self._leaves if set(leaf.signature) <= available]

    def score_concepts(
        self,
        values: Iterable[str],
        candidates: Optional[Iterable[str]] = None,
        sample_size: int = SCORE_SAMPLE_SIZE,
        rng: Optional[random.Random] = None,
    ) -> ConceptDistribution:
        """Match-fraction times mixed-column prior for each routed concept.

        Up to sample_size normalized values are evaluated; a value
        counts for a concept when any regex in any of the concept's
        routed leaves matches it. Concepts without matches are omitted.
        """
        pool = [normalize_entity(v) for v in values]
        pool = [p for p in pool if p]
        if not pool or self._total_columns == 0:
            return ConceptDistribution({}, UNNORMALIZED_SCORES)
        if len(pool) > sample_size:
            pool = (rng or random.Random(0)).sample(pool, sample_size)
        wanted = set(candidates) if candidates is not None else None
        leaves = [
            leaf
            for leaf in self._leaves
            if wanted is None or leaf.concept in wanted
        ]
        matched: Counter[str] = Counter()
        for value in pool:
            available = set(symbol_signature(value))
            hit: set[str] = set()
            for leaf in leaves:
                if leaf.concept in hit or not set(leaf.signature) <= available:
                    continue
                if leaf.matches(value):
                    hit.add(leaf.concept)
            matched.update(hit)
        scores = {
            concept: (count / len(pool))
            * (self._concept_columns.get(concept, 0) / self._total_columns)
            for concept, count in matched.items()
        }
        scores = {c: s for c, s in scores.items() if s > 0}
        return ConceptDistribution(scores, UNNORMALIZED_SCORES)

    # -- persistence: tree.json plus one pattern file per concept

    def persist(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        per_concept_lines: dict[str, list[str]] = defaultdict(list)
        leaf_entries = []
        for leaf in self._leaves:
            file_name = f"{concept_hash(leaf.concept)}.txt"
            start = len(per_concept_lines[leaf.concept])
            per_concept_lines[leaf.concept].extend(leaf.patterns)
            leaf_entries.append(
                {
                    "concept": leaf.concept,
                    "signature": leaf.signature,
                    "columns": leaf.columns,
                    "file": file_name,
                    "start": start,
                    "count": len(leaf.patterns),
                }
            )
        for concept, lines in sorted(per_concept_lines.items()):
            content = "\n".join(lines) + ("\n" if lines else "")
            atomic_write_text(directory / f"{concept_hash(concept)}.txt", content)
        meta = {
            "leaves": leaf_entries,
            "concept_columns": self._concept_columns,
            "total_columns": self._total_columns,
        }
        atomic_write_text(directory / "tree.json", canonical_json(meta))

    @classmethod
    def load(cls, directory: Path | str) -> "PatternTree":
        directory = Path(directory)
        meta_path = directory / "tree.json"
        if not meta_path.exists():
            raise CorruptIndex(f"missing {meta_path}")
        try:
            meta = json.loads(meta_path.read_text("utf-8"))
            leaf_entries = meta["leaves"]
            concept_columns = {str(k): int(v) for k, v in meta["concept_columns"].items()}
            total_columns = int(meta["total_columns"])
        except (ValueError, KeyError) as exc:
            raise CorruptIndex(f"bad tree file {meta_path}: {exc}") from exc
        lines_cache: dict[str, list[str]] = {}
        leaves = []
        for entry in leaf_entries:
            file_name = entry["file"]
            if file_name not in lines_cache:
                file_path = directory / file_name
                if not file_path.exists():
                    raise CorruptIndex(f"missing {file_path}")
                lines_cache[file_name] = file_path.read_text("utf-8").splitlines()
            lines = lines_cache[file_name]
            start, count = int(entry["start"]), int(entry["count"])
            if start + count > len(lines):
                raise CorruptIndex(f"pattern slice out of range in {file_name}")
            try:
                leaf = PatternLeaf(
                    entry["concept"],
                    entry["signature"],
                    tuple(lines[start : start + count]),
                    int(entry["columns"]),
                )
            except re.error as exc:
                raise CorruptIndex(f"bad pattern in {file_name}: {exc}") from exc
            leaves.append(leaf)
        return cls(leaves, concept_columns, total_columns)
