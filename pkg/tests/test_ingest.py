import json

import pytest

from col2concept import (
    CorpusManifest,
    DataError,
    EmptyUniverse,
    EntityMention,
    MalformedFile,
    ManifestSource,
    NumericColumnRange,
    PatternColumn,
    TupleMention,
    build_concept_universe,
    ingest_kg_file,
    ingest_manifest,
    ingest_table_file,
    read_table,
)
from col2concept.ingest import detect_delimiter

from util import write_csv, write_lines


def manifest_for(tmp_path, sources, min_freq=1, seed=0, **extra):
    entries = []
    for sid, kind, path in sources:
        entries.append({"id": sid, "kind": kind, "path": str(path)})
    body = {"sources": entries, "minConceptFrequency": min_freq, "seed": seed}
    body.update(extra)
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(body), encoding="utf-8")
    return CorpusManifest.load(path)


class TestReadTable:
    def test_delimiter_detection(self):
        assert detect_delimiter("a,b,c") == ","
        assert detect_delimiter("a\tb\tc") == "\t"
        assert detect_delimiter("a;b;c") == ";"
        assert detect_delimiter("abc") == ","  # tie falls back to comma

    def test_reads_semicolon_table(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("city;population\nOslo;700000\n", encoding="utf-8")
        table = read_table(path)
        assert [c.header for c in table.columns] == ["city", "population"]
        assert table.columns[0].values == ("Oslo",)

    def test_short_rows_padded(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n1\n2,3,4\n", encoding="utf-8")
        table = read_table(path)
        assert table.columns[1].values == ("", "3")

    def test_empty_file_malformed(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(MalformedFile):
            read_table(path)

    def test_header_only_malformed(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("a,b\n", encoding="utf-8")
        with pytest.raises(MalformedFile):
            read_table(path)

    def test_binary_garbage_malformed(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_bytes(b"\xff\xfe\x00garbage\x9c")
        with pytest.raises(MalformedFile):
            read_table(path)


class TestIngestTableFile:
    def test_categorical_column_one_mention_per_cell(self, tmp_path):
        path = write_csv(
            tmp_path / "city.csv", ["city"], [["Chattanooga"]] * 9 + [["Memphis"]]
        )
        records = ingest_table_file(path, "s1")
        mentions = [r for r in records if isinstance(r, EntityMention)]
        assert len(mentions) == 10
        assert sum(1 for m in mentions if m.entity == "chattanooga") == 9
        assert sum(1 for m in mentions if m.entity == "memphis") == 1
        assert all(m.concept == "city" for m in mentions)

    def test_numeric_column_min_max(self, tmp_path):
        path = write_csv(
            tmp_path / "h.csv", ["height"], [["8848"], ["8611"], ["8586"]]
        )
        records = ingest_table_file(path, "s1")
        ranges = [r for r in records if isinstance(r, NumericColumnRange)]
        assert ranges == [NumericColumnRange("s1", "height", 8586.0, 8848.0)]

    def test_tuple_mentions_for_categorical_pair(self, tmp_path):
        path = write_csv(
            tmp_path / "m.csv",
            ["mountain", "height"],
            [["Mount Everest", "8884"], ["K2", "8611"]],
        )
        records = ingest_table_file(path, "s1")
        tuples = [r for r in records if isinstance(r, TupleMention)]
        assert (
            TupleMention("s1", "mountain", "height", "mount everest", "8884", "s1:m.csv:0:1")
            in tuples
        )
        # same file and column pair share one pair id
        assert {t.pair_id for t in tuples} == {"s1:m.csv:0:1"}

    def test_mixed_column_pattern_sample(self, tmp_path):
        path = write_csv(
            tmp_path / "e.csv", ["email"], [["a@b.com"], ["c@d.org"], [""]]
        )
        records = ingest_table_file(path, "s1")
        patterns = [r for r in records if isinstance(r, PatternColumn)]
        assert len(patterns) == 1
        assert patterns[0].values == ("a@b.com", "c@d.org")

    def test_empty_header_column_skipped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("city,\nOslo,junk\n", encoding="utf-8")
        records = ingest_table_file(path, "s1")
        assert all(r.concept == "city" for r in records if isinstance(r, EntityMention))
        assert not any(isinstance(r, TupleMention) for r in records)

    def test_no_tuples_without_categorical_side(self, tmp_path):
        path = write_csv(
            tmp_path / "n.csv",
            ["height", "weight"],
            [["180", "80"], ["170", "70"], ["160", "60"], ["150", "50"], ["190", "90"]],
        )
        records = ingest_table_file(path, "s1")
        assert not any(isinstance(r, TupleMention) for r in records)

    def test_deterministic_given_bytes_and_seed(self, tmp_path):
        rows = [[f"v{i}@x.com"] for i in range(2000)]
        path = write_csv(tmp_path / "big.csv", ["email"], rows)
        first = ingest_table_file(path, "s1", seed=5)
        second = ingest_table_file(path, "s1", seed=5)
        assert first == second
        third = ingest_table_file(path, "s1", seed=6)
        assert first != third  # sampled 1000 of 2000 values differs by seed


class TestIngestKgFile:
    def test_typeof_maps_subject_to_class(self, tmp_path):
        path = write_lines(
            tmp_path / "kg.tsv", ["Mount Everest\ttypeOf\tMountain"]
        )
        records, malformed = ingest_kg_file(path, "kg1")
        assert malformed == 0
        assert records == [EntityMention("kg1", "mount everest", "mountain")]

    def test_property_maps_object_to_predicate(self, tmp_path):
        path = write_lines(tmp_path / "kg.tsv", ["usa\tcapital\twashington"])
        records, _ = ingest_kg_file(path, "kg1")
        assert EntityMention("kg1", "washington", "capital") in records

    def test_empty_file_empty_stream(self, tmp_path):
        path = tmp_path / "kg.tsv"
        path.write_text("", encoding="utf-8")
        records, malformed = ingest_kg_file(path, "kg1")
        assert records == [] and malformed == 0

    def test_malformed_lines_counted_and_skipped(self, tmp_path):
        path = write_lines(
            tmp_path / "kg.tsv",
            ["a\tb\tc", "too\tfew", "x\ty\tz\textra", "ok\ttypeOf\tthing"],
        )
        records, malformed = ingest_kg_file(path, "kg1")
        assert malformed == 2
        assert len(records) == 2

    def test_numeric_objects_batch_into_ranges(self, tmp_path):
        lines = [f"e{i}\tpopulation\t{1000 + i}" for i in range(250)]
        path = write_lines(tmp_path / "kg.tsv", lines)
        records, _ = ingest_kg_file(path, "kg1")
        ranges = [r for r in records if isinstance(r, NumericColumnRange)]
        assert len(ranges) == 3  # 100 + 100 + trailing 50
        assert ranges[0] == NumericColumnRange("kg1", "population", 1000.0, 1099.0)
        assert ranges[2].low == 1200.0 and ranges[2].high == 1249.0
        # the mentions are still emitted alongside the ranges
        mentions = [r for r in records if isinstance(r, EntityMention)]
        assert len(mentions) == 250


class TestUniverse:
    def test_kg_concepts_exempt_from_threshold(self, tmp_path):
        kg = write_lines(tmp_path / "kg.tsv", ["e\ttypeOf\tmountain"])
        man = manifest_for(tmp_path, [("kg1", "kg", kg)], min_freq=100)
        records, _ = ingest_kg_file(kg, "kg1")
        assert build_concept_universe(records, man) == {"mountain"}

    def test_table_threshold(self, tmp_path):
        table = write_csv(
            tmp_path / "t.csv",
            ["city", "my_col_7"],
            [["Oslo", "x"], ["Bergen", "y"], ["Paris", "z"]],
        )
        man = manifest_for(tmp_path, [("s1", "tables", table)], min_freq=3)
        records = ingest_table_file(table, "s1")
        universe = build_concept_universe(records, man)
        assert "city" in universe
        assert "my_col_7" in universe  # 3 mentions meet threshold 3
        man_high = manifest_for(tmp_path, [("s1", "tables", table)], min_freq=4)
        with pytest.raises(EmptyUniverse):
            build_concept_universe(records, man_high)

    def test_empty_universe_raises(self, tmp_path):
        table = write_csv(tmp_path / "t.csv", ["city"], [["Oslo"]])
        man = manifest_for(tmp_path, [("s1", "tables", table)], min_freq=100)
        records = ingest_table_file(table, "s1")
        with pytest.raises(EmptyUniverse):
            build_concept_universe(records, man)


class TestManifest:
    def test_load_resolves_relative_paths(self, tmp_path):
        write_csv(tmp_path / "t.csv", ["c"], [["x"]])
        path = tmp_path / "manifest.json"
        path.write_text(
            json.dumps(
                {
                    "sources": [
                        {"id": "s1", "kind": "tables", "path": "t.csv", "weight": 2.0}
                    ],
                    "minConceptFrequency": 5,
                    "seed": 42,
                }
            ),
            encoding="utf-8",
        )
        man = CorpusManifest.load(path)
        assert man.seed == 42 and man.min_concept_frequency == 5
        assert man.sources[0].weight == 2.0
        assert man.sources[0].path.exists()

    def test_bad_manifest_rejected(self, tmp_path):
        for body in [
            {"sources": []},
            {"sources": [{"id": "s/1", "kind": "tables", "path": "x"}]},
            {"sources": [{"id": "s1", "kind": "nope", "path": "x"}]},
        ]:
            path = tmp_path / "m.json"
            path.write_text(json.dumps(body), encoding="utf-8")
            with pytest.raises(DataError):
                CorpusManifest.load(path)

    def test_missing_path_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(
            json.dumps({"sources": [{"id": "s1", "kind": "tables", "path": "gone.csv"}]}),
            encoding="utf-8",
        )
        with pytest.raises(DataError):
            CorpusManifest.load(path)

    def test_ingest_manifest_skips_malformed_files(self, tmp_path):
        corpus = tmp_path / "corpus"
        corpus.mkdir()
        write_csv(corpus / "good.csv", ["city"], [["Oslo"]])
        (corpus / "bad.csv").write_bytes(b"\xff\xfe\x00")
        man = manifest_for(tmp_path, [("s1", "tables", corpus)])
        result = ingest_manifest(man)
        assert result.files_read == 1
        assert len(result.skipped_files) == 1
        assert "bad.csv" in result.skipped_files[0][0]
