import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from col2concept import (
    ConceptRelations,
    CyclicHierarchy,
    DataError,
    load_embeddings,
    load_hierarchy_edges,
    load_synonym_sets,
    share,
)


def embedded(tokens_vectors):
    return {t: np.array(v, dtype=np.float64) for t, v in tokens_vectors.items()}


class TestSimilarity:
    def relations(self):
        return ConceptRelations(
            embeddings=embedded(
                {
                    "city": [1.0, 0.0],
                    "town": [0.9, 0.1],
                    "banana": [0.0, 1.0],
                }
            )
        )

    def test_self_similarity_is_one(self):
        assert self.relations().similarity("city", "city") == 1.0

    def test_out_of_vocabulary_zero(self):
        rel = self.relations()
        assert rel.similarity("city", "qwerty") == 0.0
        assert rel.similarity("qwerty", "asdf") == 0.0
        assert rel.similarity("qwerty", "qwerty") == 0.0

    def test_symmetric(self):
        rel = self.relations()
        assert rel.similarity("city", "town") == rel.similarity("town", "city")

    def test_multi_word_mean_of_in_vocab_tokens(self):
        rel = self.relations()
        # "city banana" averages the two vectors; unknown tokens are dropped
        assert rel.similarity("city banana", "city banana qwerty") == pytest.approx(1.0)

    def test_cached_value_matches_fresh(self):
        rel = self.relations()
        first = rel.similarity("city", "town")
        assert rel.similarity("city", "town") == first
        fresh = ConceptRelations(
            embeddings=embedded({"city": [1.0, 0.0], "town": [0.9, 0.1]})
        )
        assert fresh.similarity("city", "town") == first


class TestShare:
    def test_synonym_merge_replaces_with_group_sum(self):
        rel = ConceptRelations(synonym_sets=[{"human", "person"}])
        result = share({"human": 30, "person": 30, "object": 40}, rel)
        assert result.entries == {"human": 60.0, "person": 60.0, "object": 40.0}
        probs = result.as_probabilities(100)
        assert probs == {"human": 0.6, "person": 0.6, "object": 0.4}

    def test_hierarchy_transfers(self):
        rel = ConceptRelations(
            hierarchy_edges=[("person", "scientist"), ("person", "athlete")]
        )
        result = share({"person": 10, "scientist": 4, "athlete": 6}, rel)
        assert result.entries == {
            "scientist": 8.0,
            "athlete": 12.0,
            "person": 15.0,
        }

    def test_similarity_transfers(self):
        rel = ConceptRelations(
            embeddings=embedded({"a": [1.0, 0.0], "b": [0.5, 0.8660254037844386]})
        )
        assert rel.similarity("a", "b") == pytest.approx(0.5)
        result = share({"a": 10, "b": 20}, rel)
        assert result.entries["a"] == pytest.approx(10 + 0.5 * 20)
        assert result.entries["b"] == pytest.approx(20 + 0.5 * 10)

    def test_below_threshold_no_transfer(self):
        rel = ConceptRelations(
            embeddings=embedded({"a": [1.0, 0.0], "b": [0.3, 0.9539392014169457]})
        )
        result = share({"a": 10, "b": 20}, rel, threshold=0.4)
        assert result.entries == {"a": 10.0, "b": 20.0}

    def test_synonym_pair_excluded_from_other_tiers(self):
        rel = ConceptRelations(
            synonym_sets=[{"a", "b"}],
            hierarchy_edges=[("a", "b")],
            embeddings=embedded({"a": [1.0, 0.0], "b": [1.0, 0.0]}),
        )
        result = share({"a": 10, "b": 20}, rel)
        assert result.entries == {"a": 30.0, "b": 30.0}

    def test_hierarchy_pair_excluded_from_similarity(self):
        rel = ConceptRelations(
            hierarchy_edges=[("parent", "child")],
            embeddings=embedded({"parent": [1.0, 0.0], "child": [1.0, 0.0]}),
        )
        result = share({"parent": 10, "child": 20}, rel)
        # only the hierarchy rule applies, never the similarity rule on top
        assert result.entries == {"parent": 20.0, "child": 30.0}

    def test_empty_relations_identity(self):
        result = share({"a": 3, "b": 4}, ConceptRelations())
        assert result.entries == {"a": 3.0, "b": 4.0}
        assert share({"a": 3}, None).entries == {"a": 3.0}

    def test_child_with_two_parents_pays_each(self):
        rel = ConceptRelations(hierarchy_edges=[("p1", "kid"), ("p2", "kid")])
        result = share({"p1": 4, "p2": 8, "kid": 6}, rel)
        assert result.entries["p1"] == pytest.approx(4 + 3)
        assert result.entries["p2"] == pytest.approx(8 + 3)
        assert result.entries["kid"] == pytest.approx(6 + 4 + 8)

    def test_absent_children_receive_nothing(self):
        rel = ConceptRelations(
            hierarchy_edges=[("person", "scientist"), ("person", "ghost")]
        )
        result = share({"person": 10, "scientist": 4}, rel)
        assert "ghost" not in result.entries
        assert result.entries["scientist"] == pytest.approx(4 + 10)

    @given(
        st.dictionaries(
            st.sampled_from(["human", "person", "object", "scientist"]),
            st.integers(min_value=1, max_value=50),
            min_size=1,
        )
    )
    def test_no_count_ever_decreases(self, beliefs):
        rel = ConceptRelations(
            synonym_sets=[{"human", "person"}],
            hierarchy_edges=[("person", "scientist")],
        )
        result = share(beliefs, rel)
        for concept, count in beliefs.items():
            assert result.entries[concept] >= count

    def test_overlapping_synonym_lines_merge(self):
        rel = ConceptRelations(synonym_sets=[{"a", "b"}, {"b", "c"}])
        assert rel.synonym_set("a") == frozenset({"a", "b", "c"})

    def test_cyclic_hierarchy_rejected(self):
        with pytest.raises(CyclicHierarchy):
            ConceptRelations(hierarchy_edges=[("a", "b"), ("b", "c"), ("c", "a")])


class TestLoaders:
    def test_synonyms_file(self, tmp_path):
        path = tmp_path / "syn.tsv"
        path.write_text("Human\tPerson\nFilm\tMovie\tMotion Picture\n", encoding="utf-8")
        sets = load_synonym_sets(path)
        assert {"human", "person"} in sets
        assert {"film", "movie", "motion picture"} in sets

    def test_hierarchy_file(self, tmp_path):
        path = tmp_path / "h.tsv"
        path.write_text("person\tscientist\nperson\tathlete\n", encoding="utf-8")
        assert ("person", "scientist") in load_hierarchy_edges(path)
        bad = tmp_path / "bad.tsv"
        bad.write_text("person scientist\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_hierarchy_edges(bad)

    def test_embeddings_file(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("2 3\ncity 1.0 0.0 0.5\ntown 0.9 0.1 0.4\n", encoding="utf-8")
        vectors = load_embeddings(path)
        assert set(vectors) == {"city", "town"}
        assert vectors["city"].shape == (3,)

    def test_embedding_dimension_mismatch(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("city 1.0 0.0\ntown 0.9\n", encoding="utf-8")
        with pytest.raises(DataError):
            load_embeddings(path)

    def test_relations_load_from_files(self, tmp_path):
        syn = tmp_path / "syn.tsv"
        syn.write_text("human\tperson\n", encoding="utf-8")
        hier = tmp_path / "hier.tsv"
        hier.write_text("person\tscientist\n", encoding="utf-8")
        rel = ConceptRelations.load(syn, hier, None)
        assert rel.synonym_set("human") == frozenset({"human", "person"})
        assert rel.children("person") == frozenset({"scientist"})
        assert not rel.is_empty
        assert ConceptRelations.load(None, None, None).is_empty
