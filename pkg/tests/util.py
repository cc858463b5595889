"""Shared builders for constructed corpora and micro-indexes."""

from __future__ import annotations

import csv
import math
from pathlib import Path

from col2concept import (
    Annotator,
    Column,
    CooccurrenceIndex,
    EntityConceptIndex,
    EntityMention,
    EstimatorConfig,
    IntervalCountStructure,
    NumericColumnRange,
    PatternColumn,
    PatternTree,
    Table,
    TupleMention,
)


def entity_records(spec: dict) -> list[EntityMention]:
    """spec[source][entity][concept] = count -> flat mention records."""
    records = []
    for source, entities in spec.items():
        for entity, concepts in entities.items():
            for concept, count in concepts.items():
                records.extend([EntityMention(source, entity, concept)] * count)
    return records


def entity_index(spec: dict) -> EntityConceptIndex:
    return EntityConceptIndex.build(entity_records(spec))


def tuple_records(
    source: str,
    concept_a: str,
    concept_b: str,
    rows: list[tuple[str, str]],
    pair_id: str,
) -> list[TupleMention]:
    return [
        TupleMention(source, concept_a, concept_b, a, b, pair_id) for a, b in rows
    ]


def write_csv(path: Path, header: list[str], rows: list[list[str]], delimiter: str = ",") -> Path:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter=delimiter)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_lines(path: Path, lines: list[str]) -> Path:
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def column(values: list[str], header: str | None = None) -> Column:
    return Column(header, tuple(values))


def single_column_table(values: list[str], header: str = "col0") -> Table:
    return Table((Column(header, tuple(values)),))


def godfather_setup(seed: int = 0):
    """Corpus where movie evidence is 3x book evidence for two titles, but
    only (book, year published) holds their row tuples.

    Returns (annotator, table); the table's title column top-1 is movie
    before tuple validation and book after it.
    """
    titles = ["the godfather", "the leopard"]
    years = {"the godfather": "1969", "the leopard": "1958"}

    mentions = []
    for title in titles:
        mentions += [EntityMention("s1", title, "movie")] * 3
        mentions += [EntityMention("s1", title, "book")] * 1

    tuples = tuple_records(
        "s1",
        "book",
        "year published",
        [(t, years[t]) for t in titles],
        "s1:books.csv:0:1",
    )
    # column-pair statistics for (movie, year released) come from other titles
    other = [("heat", "1995"), ("alien", "1979"), ("casablanca", "1942")]
    for k, row in enumerate(other):
        tuples += tuple_records(
            "s1", "movie", "year released", [row], f"s1:movies{k}.csv:0:1"
        )

    # three release-year columns and one publication-year column
    numeric = IntervalCountStructure.build(
        [NumericColumnRange("s1", "year released", 1900.0, 2010.0)] * 3
        + [NumericColumnRange("s1", "year published", 1900.0, 2010.0)]
    )
    annotator = Annotator(
        entity_index=EntityConceptIndex.build(mentions),
        numeric_index=numeric,
        cooccur_index=CooccurrenceIndex.build(tuples),
        config=EstimatorConfig(seed=seed),
    )
    title_cells = [titles[0]] * 5 + [titles[1]] * 5
    year_cells = [years[titles[0]]] * 5 + [years[titles[1]]] * 5
    table = Table(
        (
            Column("title", tuple(title_cells)),
            Column("year", tuple(year_cells)),
        )
    )
    return annotator, table


def assert_ranking_matches_oracle(ranked, oracle_products, tolerance=1e-9):
    """Compare a ranked (concept, log score) list against exact products.

    The argmax must hit the exact-arithmetic argmax set, every log score
    must agree within tolerance, and the ranking must follow the exact
    products; concepts with exactly tied products may appear in either
    order (float rounding legitimately decides between them).
    """
    products = dict(oracle_products)
    names = [c for c, _ in ranked]
    assert sorted(names) == sorted(products)
    assert products[names[0]] == max(products.values())
    for concept, score in ranked:
        assert abs(score - math.log(products[concept])) < tolerance
    for earlier, later in zip(names, names[1:]):
        assert products[earlier] >= products[later]


def email_pattern_tree() -> PatternTree:
    """Tree with an email leaf and an instagram-handle leaf."""
    records = []
    for i in range(10):
        records.append(
            PatternColumn("s1", "email", (f"user{i}@mail.com", f"other{i}@site.org"))
        )
    for i in range(10):
        records.append(PatternColumn("s1", "instagram handle", (f"@handle{i}",)))
    return PatternTree.build(records, seed=7)
