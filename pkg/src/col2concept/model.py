"""Shared vocabulary: tables, columns, column kinds, concepts, distributions.

Every column is assigned exactly one kind before estimation. Numeric
columns carry a usable [min, max] range, mixed columns hold
symbol-bearing values such as emails or dates, and everything else is
treated as categorical entity data. All types here are immutable values
after construction and safe to share between workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional

from .errors import AllEmpty, DataError, EmptyTable

_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
# one leading currency or sign symbol is tolerated in front of a number
_LEADING_SYMBOLS = "$€£¥₹+-"

# context tags for ConceptDistribution
CELL_LEVEL = "cell-level"
COLUMN_LEVEL = "column-level"
POST_BELIEF_SHARING = "post-belief-sharing"
UNNORMALIZED_SCORES = "unnormalized-scores"


def normalize_entity(raw: str) -> str:
    """Casefold, trim, and collapse internal whitespace runs. Idempotent."""
    return " ".join(raw.casefold().split())


# concept labels use the same normalization as entity keys
normalize_concept = normalize_entity


def parse_number(text: str) -> Optional[float]:
    """Parse a cell as a number, or return None.

    Accepts integers, decimals, and scientific notation; strips ","
    thousands separators and at most one leading currency/sign symbol.
    """
    cleaned = text.strip().replace(",", "")
    if not cleaned:
        return None
    if _NUMBER_RE.fullmatch(cleaned):
        return float(cleaned)
    if cleaned[0] in _LEADING_SYMBOLS and _NUMBER_RE.fullmatch(cleaned[1:]):
        return float(cleaned[1:])
    return None


class ColumnKind(Enum):
    CATEGORICAL = "categorical"
    NUMERIC = "numeric"
    MIXED = "mixed"


def classify_column(values: Iterable[str]) -> ColumnKind:
    """Assign a kind from the multiset of cell values.

    Numeric if at least 80% of non-empty cells parse as numbers, else
    mixed if at least 50% of non-empty cells contain both a symbol
    (non-alphanumeric, non-space) and an alphanumeric character, else
    categorical. Empty cells are excluded from the denominators.
    """
    non_empty = [v for v in values if v and v.strip()]
    if not non_empty:
        raise AllEmpty("column has no non-empty cells")
    numeric = sum(1 for v in non_empty if parse_number(v) is not None)
    if numeric * 5 >= len(non_empty) * 4:
        return ColumnKind.NUMERIC
    mixed = 0
    for v in non_empty:
        has_symbol = any(not ch.isalnum() and not ch.isspace() for ch in v)
        has_alnum = any(ch.isalnum() for ch in v)
        if has_symbol and has_alnum:
            mixed += 1
    if mixed * 2 >= len(non_empty):
        return ColumnKind.MIXED
    return ColumnKind.CATEGORICAL


@dataclass(frozen=True)
class SourceId:
    """A reference data source: short id plus its ensemble weight."""

    id: str
    weight: float = 1.0

    def __post_init__(self):
        if not self.id:
            raise DataError("source id must be non-empty")
        if not self.weight > 0:
            raise DataError(f"source weight must be positive, got {self.weight}")


@dataclass(frozen=True)
class Column:
    header: Optional[str] = None
    values: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        if self.header is not None:
            stripped = self.header.strip()
            object.__setattr__(self, "header", stripped or None)


@dataclass(frozen=True)
class Table:
    """Ordered list of equal-length columns; order is preserved end-to-end."""

    columns: tuple[Column, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        if not self.columns:
            raise EmptyTable("table has no columns")
        lengths = {len(c.values) for c in self.columns}
        if len(lengths) != 1:
            raise DataError(f"columns have unequal lengths: {sorted(lengths)}")
        if lengths == {0}:
            raise EmptyTable("table has no rows")

    @property
    def n_cols(self) -> int:
        return len(self.columns)

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values)


@dataclass(frozen=True)
class ConceptDistribution:
    """Concept to score map for one cell, column, or candidate set.

    Cell-level distributions are normalized to sum to 1; belief-shared
    counts and index scores are not.
    """

    entries: Mapping[str, float] = field(default_factory=dict)
    tag: str = CELL_LEVEL

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))

    def get(self, concept: str, default: float = 0.0) -> float:
        return self.entries.get(concept, default)

    def __getitem__(self, concept: str) -> float:
        return self.entries[concept]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, concept: str) -> bool:
        return concept in self.entries

    def total(self) -> float:
        return sum(self.entries.values())

    def items_sorted(self) -> list[tuple[str, float]]:
        """Entries sorted by descending score, ties broken by label."""
        return sorted(self.entries.items(), key=lambda cp: (-cp[1], cp[0]))

    def top(self, k: int) -> list[tuple[str, float]]:
        return self.items_sorted()[:k]
