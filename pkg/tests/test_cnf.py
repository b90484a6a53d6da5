import numpy as np
import pytest

from spinsat import cnf
from spinsat.errors import DimacsError

from conftest import all_assignments, boolean_count


class TestParseDimacs:
    def test_appendix_instance(self, appendix_instance):
        inst = appendix_instance
        assert inst.num_vars == 3
        assert len(inst.clauses) == 2
        assert inst.k == 3
        assert inst.tautologies == 0
        first = [(lit.var, lit.negated) for lit in inst.clauses[0]]
        second = [(lit.var, lit.negated) for lit in inst.clauses[1]]
        assert first == [(1, False), (2, False), (3, False)]
        assert second == [(1, True), (2, True), (3, False)]

    def test_minimal_unit_clause(self):
        inst = cnf.parse_dimacs("p cnf 1 1\n1 0\n")
        assert inst.num_vars == 1
        assert inst.k == 1
        assert len(inst.clauses) == 1

    def test_tautology_recorded_as_constant(self):
        inst = cnf.parse_dimacs("p cnf 2 1\n1 -1 0\n")
        assert inst.tautologies == 1
        assert inst.clauses == []
        # always counts as satisfied
        y = cnf.Assignment(np.array([1, -1, 1], dtype=np.int8))
        assert cnf.count_satisfied(inst, y) == 1

    def test_duplicate_literal_deduplicated(self):
        inst = cnf.parse_dimacs("p cnf 2 1\n1 1 2 0\n")
        assert len(inst.clauses[0]) == 2

    def test_comments_and_multiline_clauses(self):
        text = "c a comment\np cnf 3 1\nc another\n1 2\n3 0\n"
        inst = cnf.parse_dimacs(text)
        assert len(inst.clauses) == 1
        assert len(inst.clauses[0]) == 3

    @pytest.mark.parametrize(
        "text",
        [
            "1 2 0\n",  # clause before header
            "p cnf 3\n1 0\n",  # malformed header
            "p dnf 3 1\n1 0\n",
            "p cnf 2 1\n1 3 0\n",  # literal exceeds declared count
            "p cnf 3 1\n1 2 3\n",  # unterminated clause
            "p cnf 3 2\n1 0\n0\n",  # empty clause
            "p cnf 3 1\n1 two 0\n",  # non-integer token
        ],
    )
    def test_parse_errors(self, text):
        with pytest.raises(DimacsError):
            cnf.parse_dimacs(text)

    def test_roundtrip_identity(self, appendix_instance):
        text = cnf.to_dimacs(appendix_instance)
        again = cnf.parse_dimacs(text)
        assert again == appendix_instance
        assert cnf.to_dimacs(again) == text

    def test_roundtrip_with_tautology(self):
        inst = cnf.parse_dimacs("p cnf 3 2\n2 -2 3 0\n1 2 0\n")
        again = cnf.parse_dimacs(cnf.to_dimacs(inst))
        assert again == inst


class TestGenerateRandom:
    def test_benchmark_sizes(self):
        inst = cnf.generate_random(20, 80, 3, seed=1)
        assert inst.num_vars == 20
        assert len(inst.clauses) == 80
        assert inst.k == 3
        for clause in inst.clauses:
            assert len({lit.var for lit in clause}) == 3

    def test_forced_variable_set(self):
        inst = cnf.generate_random(3, 1, 3, seed=0)
        assert sorted(lit.var for lit in inst.clauses[0]) == [1, 2, 3]

    def test_determinism(self):
        a = cnf.generate_random(12, 30, 3, seed=42)
        b = cnf.generate_random(12, 30, 3, seed=42)
        assert a == b
        c = cnf.generate_random(12, 30, 3, seed=43)
        assert a != c

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            cnf.generate_random(2, 5, 3, seed=0)
        with pytest.raises(ValueError):
            cnf.generate_random(5, 5, 0, seed=0)


class TestCountSatisfied:
    def test_appendix_x3_true_satisfies_both(self, appendix_instance):
        # brute enumeration confirms the maximum is 2, attained whenever x3 holds
        best = max(
            boolean_count(appendix_instance, a) for a in all_assignments(4)
        )
        assert best == 2
        for y1 in (1, -1):
            for y2 in (1, -1):
                y = cnf.Assignment(np.array([1, y1, y2, 1], dtype=np.int8))
                assert cnf.count_satisfied(appendix_instance, y) == 2

    def test_matches_boolean_oracle(self):
        rng = np.random.default_rng(5)
        inst = cnf.generate_random(10, 40, 3, seed=9)
        for _ in range(25):
            y = cnf.Assignment(rng.choice([-1, 1], size=11).astype(np.int8))
            assert cnf.count_satisfied(inst, y) == boolean_count(inst, y)

    def test_all_false_single_clause(self):
        inst = cnf.parse_dimacs("p cnf 3 1\n1 2 3 0\n")
        y = cnf.Assignment(np.array([1, -1, -1, -1], dtype=np.int8))
        assert cnf.count_satisfied(inst, y) == 0

    def test_length_mismatch(self, appendix_instance):
        with pytest.raises(ValueError):
            cnf.count_satisfied(
                appendix_instance, cnf.Assignment(np.array([1, 1], dtype=np.int8))
            )

    def test_global_flip_symmetry(self):
        inst = cnf.generate_random(8, 25, 3, seed=3)
        rng = np.random.default_rng(0)
        for _ in range(20):
            y = cnf.Assignment(rng.choice([-1, 1], size=9).astype(np.int8))
            assert cnf.count_satisfied(inst, y) == cnf.count_satisfied(inst, y.flipped())

    def test_vectorized_matches_scalar(self):
        inst = cnf.generate_random(7, 22, 3, seed=8)
        rng = np.random.default_rng(1)
        Y = rng.choice([-1, 1], size=(30, 8)).astype(np.int8)
        counts = cnf.count_satisfied_many(inst, Y)
        for row, expected in zip(Y, counts):
            assert cnf.count_satisfied(inst, cnf.Assignment(row)) == expected


class TestAssignment:
    def test_truth_definition(self):
        y = cnf.Assignment(np.array([-1, -1, 1], dtype=np.int8))
        assert y.truth().tolist() == [True, False]

    def test_rejects_non_spin_entries(self):
        with pytest.raises(ValueError):
            cnf.Assignment(np.array([1, 0, -1]))

    def test_from_bools(self):
        y = cnf.Assignment.from_bools([True, False])
        assert y.y.tolist() == [1, 1, -1]
