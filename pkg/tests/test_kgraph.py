import numpy as np
import pytest

from hiersbm.kgraph import (
    KnowledgeGraph,
    TripleParseError,
    degree_table,
    filter_triples,
    load_triples,
    save_triples,
)

# Small directed graph used throughout: three predicates, one mutual edge,
# one self-free diagonal.
TOY_LINES = [
    "e7\tr0\te6",
    "e6\tr0\te7",
    "e5\tr0\te6",
    "e7\tr1\te0",
    "e6\tr1\te1",
    "e5\tr1\te2",
    "e5\tr1\te4",
    "e0\tr2\te4",
    "e2\tr2\te3",
    "e3\tr2\te4",
]


@pytest.fixture
def toy_kg(tmp_path):
    path = tmp_path / "toy.tsv"
    path.write_text("\n".join(TOY_LINES) + "\n", encoding="utf-8")
    return load_triples(path)


class TestLoadTriples:
    def test_basic_parse(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tp\tb\nb\tp\ta\n", encoding="utf-8")
        kg = load_triples(path)
        assert kg.num_entities == 2
        assert kg.num_predicates == 1
        assert len(kg.triples) == 2

    def test_duplicates_collapse(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tp\tb\na\tp\tb\n", encoding="utf-8")
        kg = load_triples(path)
        assert len(kg.triples) == 1

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("a\tp\tb\na\tp\n", encoding="utf-8")
        with pytest.raises(TripleParseError) as exc:
            load_triples(path)
        assert exc.value.line_no == 2

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("# header\n\na\tp\tb\n   \n", encoding="utf-8")
        kg = load_triples(path)
        assert len(kg.triples) == 1

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(OSError):
            load_triples(tmp_path / "missing.tsv")

    def test_first_appearance_ids(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("x\tp\ty\ny\tq\tz\n", encoding="utf-8")
        kg = load_triples(path)
        assert kg.entities == {"x": 0, "y": 1, "z": 2}
        assert kg.predicates == {"p": 0, "q": 1}


class TestAdjacency:
    def test_present_edge(self, toy_kg):
        e = toy_kg.entities
        r = toy_kg.predicates
        assert toy_kg.adjacency_value(e["e5"], e["e6"], r["r0"]) == 1

    def test_absent_diagonal(self, toy_kg):
        e = toy_kg.entities
        r = toy_kg.predicates
        assert toy_kg.adjacency_value(e["e0"], e["e0"], r["r0"]) == 0

    def test_empty_graph(self):
        kg = KnowledgeGraph({"a": 0}, {"p": 0}, set())
        assert kg.adjacency_value(0, 0, 0) == 0

    def test_out_of_bounds(self, toy_kg):
        with pytest.raises(ValueError):
            toy_kg.adjacency_value(0, 99, 0)
        with pytest.raises(ValueError):
            toy_kg.adjacency_value(0, 0, 99)

    def test_ones_count_matches_triples(self, toy_kg):
        n, r = toy_kg.num_entities, toy_kg.num_predicates
        ones = sum(
            toy_kg.adjacency_value(i, j, k)
            for i in range(n)
            for j in range(n)
            for k in range(r)
        )
        assert ones == len(toy_kg.triples)


class TestDegreeTable:
    def _kg_with_degrees(self, degrees):
        # chain self-loops on distinct predicates to hit exact degree targets
        entities = {f"e{i}": i for i in range(len(degrees))}
        predicates = {}
        triples = set()
        for i, d in enumerate(degrees):
            assert d % 2 == 0, "self-loops give even degrees"
            for k in range(d // 2):
                predicates.setdefault(f"p{i}_{k}", len(predicates))
                triples.add((i, i, predicates[f"p{i}_{k}"]))
        return KnowledgeGraph(entities, predicates, triples)

    def test_rank_formula(self):
        kg = self._kg_with_degrees([2, 4, 4, 10])
        table = degree_table(kg)
        assert table.degree.tolist() == [2, 4, 4, 10]
        assert table.sampling_prob.tolist() == [1 / 4, 2 / 4, 2 / 4, 4 / 4]

    def test_all_equal_degrees(self):
        kg = self._kg_with_degrees([2, 2, 2])
        table = degree_table(kg)
        assert np.allclose(table.sampling_prob, 1 / 3)

    def test_zero_degree_entity(self):
        kg = KnowledgeGraph({"a": 0, "b": 1}, {"p": 0}, {(1, 1, 0)})
        table = degree_table(kg)
        assert table.degree.tolist() == [0, 2]
        assert table.sampling_prob.tolist() == [1 / 2, 1.0]

    def test_empty_graph_rejected(self):
        kg = KnowledgeGraph({}, {}, set())
        with pytest.raises(ValueError):
            degree_table(kg)

    def test_monotone_in_degree(self, toy_kg):
        table = degree_table(toy_kg)
        order = np.argsort(table.degree)
        probs = table.sampling_prob[order]
        assert np.all(np.diff(probs) >= 0)
        assert np.all(table.sampling_prob > 0)
        assert np.all(table.sampling_prob <= 1)
        # equal degree implies equal probability
        by_degree = {}
        for d, s in zip(table.degree, table.sampling_prob):
            by_degree.setdefault(int(d), set()).add(float(s))
        assert all(len(v) == 1 for v in by_degree.values())

    def test_degree_sum_identity(self, toy_kg):
        table = degree_table(toy_kg)
        assert table.degree.sum() == 2 * len(toy_kg.triples)


class TestFilterTriples:
    def test_identity_filter(self, toy_kg):
        out = filter_triples(toy_kg)
        assert len(out.triples) == len(toy_kg.triples)
        assert set(out.entities) == set(toy_kg.entities)
        assert set(out.predicates) == set(toy_kg.predicates)

    def test_empty_predicate_set(self, toy_kg):
        out = filter_triples(toy_kg, keep_predicates=set())
        assert out.num_entities == 0
        assert len(out.triples) == 0

    def test_predicate_selection(self, toy_kg):
        out = filter_triples(toy_kg, keep_predicates={"r0"})
        assert len(out.triples) == 3
        assert set(out.predicates) == {"r0"}
        assert set(out.entities) == {"e5", "e6", "e7"}

    def test_subject_selection(self, toy_kg):
        out = filter_triples(toy_kg, keep_subjects={"e5"})
        assert len(out.triples) == 3
        assert all(lbl in out.entities for lbl in ("e5", "e6", "e2", "e4"))

    def test_ids_redensified(self, toy_kg):
        out = filter_triples(toy_kg, keep_predicates={"r2"})
        assert sorted(out.entities.values()) == list(range(out.num_entities))


def test_save_load_round_trip(toy_kg, tmp_path):
    path = tmp_path / "round.tsv"
    save_triples(toy_kg, path)
    again = load_triples(path)
    lab = lambda kg: {
        (kg.entity_labels[i], kg.predicate_labels[r], kg.entity_labels[j])
        for i, j, r in kg.triples
    }
    assert lab(again) == lab(toy_kg)
    assert set(again.entities) == set(toy_kg.entities)
    assert set(again.predicates) == set(toy_kg.predicates)
