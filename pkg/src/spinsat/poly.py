"""Even-degree polynomial encoding of Max-kSAT and its sparse weight matrices.

A clause over literals l_1..l_k with signs s_j (+1 plain, -1 negated) has
truth value

    v(C) = 1 - prod_j (1 - s_j y_0 y_{v_j}) / 2.

Expanding the product, every nonempty subset S of the clause contributes a
term (1 +- m_S) / 2^k, where m_S is the product of the subset's spins times
y_0 when |S| is odd (so every monomial has even length).  Summing clauses
gives

    value(y) = sum_m [a_m (1 - m(y)) + b_m (1 + m(y))] + constant,

with nonnegative dyadic coefficients a_m, b_m.  Degree-2d monomials are laid
out as entries of sparse symmetric matrices W^{+,(d)} (weights a+b) and
W^{-,(d)} (weights a-b) acting on the d-fold tensor power of an n-qubit
state, n = ceil(log2(num_vars + 1)).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp

from .cnf import Assignment, CnfInstance
from .errors import SizeLimitError

Monomial = Tuple[int, ...]


class SparseSymmetric:
    """Sparse real symmetric matrix on a 2^{n d} dimensional register space.

    Entries are stored as a map (row, col) -> weight with both orientations
    present.  Indices whose base-2^n digits are all below the variable count
    are the only ones carrying weight; the rest of the padded space is zero.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.entries: Dict[Tuple[int, int], float] = {}
        self._coo = None
        self._csr = None
        self._digits = {}

    def add(self, row: int, col: int, weight: float) -> None:
        if not (0 <= row < self.dim and 0 <= col < self.dim):
            raise ValueError("entry outside matrix dimension")
        key = (row, col)
        self.entries[key] = self.entries.get(key, 0.0) + weight
        self._coo = self._csr = None
        self._digits = {}

    def add_symmetric(self, row: int, col: int, weight: float) -> None:
        """Deposit ``weight`` split equally between (row, col) and (col, row)."""
        self.add(row, col, 0.5 * weight)
        self.add(col, row, 0.5 * weight)

    def entry(self, row: int, col: int) -> float:
        return self.entries.get((row, col), 0.0)

    def scale(self, factor: float) -> None:
        for key in self.entries:
            self.entries[key] *= factor
        self._coo = self._csr = None
        self._digits = {}

    def __len__(self) -> int:
        return len(self.entries)

    def coo(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self._coo is None:
            if self.entries:
                items = sorted(self.entries.items())
                rows = np.array([k[0] for k, _ in items], dtype=np.int64)
                cols = np.array([k[1] for k, _ in items], dtype=np.int64)
                vals = np.array([v for _, v in items], dtype=np.float64)
            else:
                rows = np.empty(0, dtype=np.int64)
                cols = np.empty(0, dtype=np.int64)
                vals = np.empty(0, dtype=np.float64)
            self._coo = (rows, cols, vals)
        return self._coo

    def csr(self) -> sp.csr_matrix:
        if self._csr is None:
            rows, cols, vals = self.coo()
            self._csr = sp.csr_matrix((vals, (rows, cols)), shape=(self.dim, self.dim))
        return self._csr

    def register_digits(self, n: int, d: int):
        """Base-2^n digit decomposition of row/col indices, cached per (n, d)."""
        key = (n, d)
        if key not in self._digits:
            if self.dim != (1 << n) ** d:
                raise ValueError(f"matrix dim {self.dim} is not (2^{n})^{d}")
            rows, cols, _ = self.coo()
            mask = (1 << n) - 1
            rdig = [((rows >> (n * (d - 1 - t))) & mask) for t in range(d)]
            cdig = [((cols >> (n * (d - 1 - t))) & mask) for t in range(d)]
            self._digits[key] = (rdig, cdig)
        return self._digits[key]

    def sum_entries(self) -> float:
        _, _, vals = self.coo()
        return float(vals.sum())

    def row_abs_sums(self) -> np.ndarray:
        rows, _, vals = self.coo()
        out = np.zeros(self.dim)
        np.add.at(out, rows, np.abs(vals))
        return out

    def row_sums(self) -> np.ndarray:
        rows, _, vals = self.coo()
        out = np.zeros(self.dim)
        np.add.at(out, rows, vals)
        return out

    def one_norm(self) -> float:
        """Max absolute row sum; equals the induced infinity norm (symmetric)."""
        sums = self.row_abs_sums()
        return float(sums.max()) if sums.size else 0.0

    def is_symmetric(self, tol: float = 0.0) -> bool:
        return all(
            abs(w - self.entries.get((c, r), 0.0)) <= tol
            for (r, c), w in self.entries.items()
        )

    def dense(self) -> np.ndarray:
        if self.dim > 1 << 14:
            raise SizeLimitError("refusing to densify a matrix this large")
        out = np.zeros((self.dim, self.dim))
        rows, cols, vals = self.coo()
        out[rows, cols] = vals
        return out


@dataclass
class PolynomialObjective:
    """Satisfied-clause count of an instance as an even-degree spin polynomial.

    ``terms`` maps each even-length sorted monomial (index 0 is y_0) to its
    exact dyadic coefficient pair (a, b); ``constant`` collects tautological
    clauses.  ``degree`` is D = max over clauses of ceil(k/2).
    """

    num_y: int
    degree: int
    terms: Dict[Monomial, Tuple[Fraction, Fraction]]
    constant: Fraction = Fraction(0)
    source_k: int = 0
    qubits: int = field(init=False)

    def __post_init__(self):
        self.qubits = max(1, math.ceil(math.log2(self.num_y)))
        for mono, (a, b) in self.terms.items():
            if len(mono) % 2 != 0 or len(mono) == 0:
                raise ValueError(f"monomial {mono} does not have even positive length")
            if list(mono) != sorted(set(mono)):
                raise ValueError(f"monomial {mono} is not sorted and distinct")
            if mono[-1] >= self.num_y or mono[0] < 0:
                raise ValueError(f"monomial {mono} outside variable range")
            if a < 0 or b < 0:
                raise ValueError("coefficients must be nonnegative")

    def monomials_of_degree(self, d: int) -> List[Monomial]:
        return [m for m in self.terms if len(m) == 2 * d]

    def to_json(self) -> str:
        payload = {
            "num_y": self.num_y,
            "degree": self.degree,
            "source_k": self.source_k,
            "constant": str(self.constant),
            "terms": [
                {"indices": list(m), "a": str(a), "b": str(b)}
                for m, (a, b) in sorted(self.terms.items())
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "PolynomialObjective":
        payload = json.loads(text)
        terms = {
            tuple(t["indices"]): (Fraction(t["a"]), Fraction(t["b"]))
            for t in payload["terms"]
        }
        return cls(
            num_y=payload["num_y"],
            degree=payload["degree"],
            terms=terms,
            constant=Fraction(payload["constant"]),
            source_k=payload.get("source_k", 0),
        )


def build_objective(instance: CnfInstance, max_degree: int = 3) -> PolynomialObjective:
    """Expand every clause into its subset terms and accumulate coefficients.

    For each nonempty subset S of a k-clause the sign of m_S is
    (-1)^{|S|+1} * prod of literal signs in S; positive signs accumulate into
    b, negative into a, each with dyadic weight 1/2^k.
    """
    terms: Dict[Monomial, List[Fraction]] = {}
    degree = 1
    for cl in instance.clauses:
        k = len(cl)
        d_cap = (k + 1) // 2
        if d_cap > max_degree:
            raise SizeLimitError(
                f"clause of length {k} needs degree {d_cap}, above the cap {max_degree}"
            )
        degree = max(degree, d_cap)
        weight = Fraction(1, 2**k)
        vars_ = [lit.var for lit in cl]
        signs = [lit.sign for lit in cl]
        for size in range(1, k + 1):
            for subset in itertools.combinations(range(k), size):
                sign_prod = 1
                for j in subset:
                    sign_prod *= signs[j]
                c = sign_prod if size % 2 == 1 else -sign_prod
                idx = [vars_[j] for j in subset]
                if size % 2 == 1:
                    idx.append(0)
                mono = tuple(sorted(idx))
                ab = terms.setdefault(mono, [Fraction(0), Fraction(0)])
                if c > 0:
                    ab[1] += weight
                else:
                    ab[0] += weight
    return PolynomialObjective(
        num_y=instance.num_y,
        degree=degree,
        terms={m: (a, b) for m, (a, b) in terms.items()},
        constant=Fraction(instance.tautologies),
        source_k=instance.k,
    )


def evaluate(obj: PolynomialObjective, assignment: Assignment) -> float:
    """Exact polynomial value at a spin assignment (dyadic arithmetic)."""
    y = assignment.y
    if y.size != obj.num_y:
        raise ValueError(f"assignment length {y.size} != num_y {obj.num_y}")
    total = obj.constant
    for mono, (a, b) in obj.terms.items():
        m = 1
        for i in mono:
            m *= int(y[i])
        total += a * (1 - m) + b * (1 + m)
    return float(total)


def evaluate_many(obj: PolynomialObjective, Y: np.ndarray) -> np.ndarray:
    """Vectorized ``evaluate`` over rows of Y.

    All coefficients are dyadic with small denominators, so float64
    accumulation stays exact.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim != 2 or Y.shape[1] != obj.num_y:
        raise ValueError("Y must have shape (m, num_y)")
    out = np.full(Y.shape[0], float(obj.constant))
    for mono, (a, b) in obj.terms.items():
        m = Y[:, mono[0]].copy()
        for i in mono[1:]:
            m *= Y[:, i]
        out += float(a + b) + float(b - a) * m
    return out


def w_matrices(obj: PolynomialObjective, d: int) -> Tuple[SparseSymmetric, SparseSymmetric]:
    """Sparse W^{+,(d)} and W^{-,(d)} for the degree-2d monomials.

    Sorted monomial indices v_1 < .. < v_{2d} are paired consecutively; the
    row multi-index takes the first element of each pair and the column the
    second, flattened base 2^n with register 0 most significant.  Each
    monomial deposits a+b into W^+ and a-b into W^-, split equally across the
    two orientations, which keeps the matrices symmetric and makes

        <psi^(x)d| W |psi^(x)d> = sum_m w_m prod_t psi_{v_t}.
    """
    if not (1 <= d <= obj.degree):
        raise ValueError(f"level d={d} outside 1..{obj.degree}")
    n = obj.qubits
    dim = (1 << n) ** d
    w_plus = SparseSymmetric(dim)
    w_minus = SparseSymmetric(dim)
    for mono, (a, b) in obj.terms.items():
        if len(mono) != 2 * d:
            continue
        row = 0
        col = 0
        for t in range(d):
            row = (row << n) | mono[2 * t]
            col = (col << n) | mono[2 * t + 1]
        w_plus.add_symmetric(row, col, float(a + b))
        w_minus.add_symmetric(row, col, float(a - b))
    return w_plus, w_minus
