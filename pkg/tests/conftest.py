import itertools

import numpy as np
import pytest

from spinsat import cnf, poly

APPENDIX_TEXT = "p cnf 3 2\n1 2 3 0\n-1 -2 3 0\n"


@pytest.fixture
def appendix_instance():
    """Two-clause Max-3SAT: (x1 | x2 | x3) and (!x1 | !x2 | x3)."""
    return cnf.parse_dimacs(APPENDIX_TEXT)


@pytest.fixture
def appendix_objective(appendix_instance):
    return poly.build_objective(appendix_instance)


def boolean_count(instance, assignment):
    """Independent satisfied-clause oracle via direct boolean evaluation."""
    truth = {i + 1: t for i, t in enumerate(assignment.truth())}
    count = instance.tautologies
    for clause in instance.clauses:
        if any(truth[lit.var] != lit.negated for lit in clause):
            count += 1
    return count


def all_assignments(num_y):
    """Every +-1 vector of the given length."""
    for bits in itertools.product([1, -1], repeat=num_y):
        yield cnf.Assignment(np.array(bits, dtype=np.int8))
